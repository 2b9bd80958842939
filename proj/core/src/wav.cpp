// core/src/wav.cpp

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

#include "htse/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "htse/error.hpp"

namespace htse {
namespace {

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}
std::uint32_t get_u32(const std::string& s, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[at + i]);
  return v;
}
std::uint16_t get_u16(const std::string& s, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(s[at]) |
                                    (static_cast<unsigned char>(s[at + 1]) << 8));
}

std::int16_t to_pcm16(double v) {
  const double scaled = std::round(v * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

}  // namespace

AudioSignal quantize_pcm16(const AudioSignal& signal) {
  AudioSignal out = signal;
  for (double& v : out.samples) v = to_pcm16(v) / 32768.0;
  return out;
}

std::string encode_wav(const AudioSignal& signal) {
  const auto data_bytes = static_cast<std::uint32_t>(signal.size() * 2);
  std::string s;
  s.reserve(44 + data_bytes);
  s += "RIFF";
  put_u32(s, 36 + data_bytes);
  s += "WAVEfmt ";
  put_u32(s, 16);
  put_u16(s, 1);  // PCM
  put_u16(s, 1);  // mono
  put_u32(s, static_cast<std::uint32_t>(signal.sample_rate));
  put_u32(s, static_cast<std::uint32_t>(signal.sample_rate) * 2);
  put_u16(s, 2);
  put_u16(s, 16);
  s += "data";
  put_u32(s, data_bytes);
  for (double v : signal.samples) {
    put_u16(s, static_cast<std::uint16_t>(to_pcm16(v)));
  }
  return s;
}

AudioSignal decode_wav(const std::string& bytes, int expected_rate) {
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 ||
      bytes.compare(8, 4, "WAVE") != 0) {
    throw IoError("not a RIFF/WAVE stream");
  }
  std::size_t pos = 12;
  int rate = 0;
  bool have_fmt = false;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const std::uint32_t len = get_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size() && id != "data") {
      throw IoError("truncated WAV chunk '" + id + "'");
    }
    if (id == "fmt ") {
      if (len < 16) throw IoError("short fmt chunk");
      const auto format = get_u16(bytes, body);
      const auto channels = get_u16(bytes, body + 2);
      rate = static_cast<int>(get_u32(bytes, body + 4));
      const auto bits = get_u16(bytes, body + 14);
      if (format != 1 || bits != 16) throw IoError("only 16-bit PCM WAV is supported");
      if (channels != 1) throw IoError("only mono WAV is supported");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw IoError("data chunk before fmt chunk");
      if (expected_rate > 0 && rate != expected_rate) {
        throw IoError("sample rate " + std::to_string(rate) + " != expected " +
                      std::to_string(expected_rate) + " (resampling unsupported)");
      }
      const std::size_t avail = std::min<std::size_t>(len, bytes.size() - body);
      const std::size_t n = avail / 2;
      AudioSignal out = AudioSignal::zeros(n, rate);
      for (std::size_t i = 0; i < n; ++i) {
        out.samples[i] = static_cast<std::int16_t>(get_u16(bytes, body + 2 * i)) / 32768.0;
      }
      return out;
    }
    pos = body + len + (len & 1u);
  }
  throw IoError("WAV stream has no data chunk");
}

AudioSignal read_wav(const std::filesystem::path& path, int expected_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes, expected_rate);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_wav(const std::filesystem::path& path, const AudioSignal& signal) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const std::string bytes = encode_wav(signal);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace htse
