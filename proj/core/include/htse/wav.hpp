// core/include/htse/wav.hpp

// Copyright 2026  The htse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "htse/signal.hpp"

namespace htse {

/// Reads a 16-bit PCM mono RIFF/WAVE file. Samples are scaled by 1/32768.
/// If expected_rate > 0 a mismatching file is rejected (no resampling).
AudioSignal read_wav(const std::filesystem::path& path, int expected_rate = 0);

/// Writes 16-bit PCM mono. Samples are rounded to the nearest step of
/// 1/32768 and clipped to the int16 range.
void write_wav(const std::filesystem::path& path, const AudioSignal& signal);

/// Encodes to an in-memory WAV byte string (same layout as write_wav).
std::string encode_wav(const AudioSignal& signal);
AudioSignal decode_wav(const std::string& bytes, int expected_rate = 0);

/// Rounds every sample to the 16-bit grid, i.e. what write_wav + read_wav
/// would return.
AudioSignal quantize_pcm16(const AudioSignal& signal);

}  // namespace htse
