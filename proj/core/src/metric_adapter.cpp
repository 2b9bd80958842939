// core/src/metric_adapter.cpp

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

#include "htse/metric_adapter.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

#include "htse/wav.hpp"

namespace fs = std::filesystem;

namespace htse {

namespace {

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

struct CommandOutput {
  int status = -1;
  std::string out;
};

CommandOutput run_command(const std::string& cmd) {
  CommandOutput r;
  FILE* pipe = ::popen((cmd + " 2>/dev/null").c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int st = ::pclose(pipe);
  r.status = (st != -1 && WIFEXITED(st)) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string first_line(const std::string& s) {
  const auto end = s.find('\n');
  return s.substr(0, end);
}

std::string last_line(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
  const auto pos = s.rfind('\n');
  return pos == std::string::npos ? s : s.substr(pos + 1);
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned long> counter{0};
    path_ = fs::temp_directory_path() /
            ("htse-metric-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

std::string_view to_string(MetricName m) { return m == MetricName::kPesq ? "pesq" : "dnsmos"; }

std::string_view metric_env_var(MetricName m) {
  return m == MetricName::kPesq ? "HTSE_PESQ_BIN" : "HTSE_DNSMOS_BIN";
}

ExternalMetric::ExternalMetric(MetricName name, fs::path executable)
    : name_(name), executable_(std::move(executable)) {
  provenance_.tool = executable_.filename().string();
  const auto v = run_command(quote(executable_.string()) + " --version");
  provenance_.version = v.status == 0 ? first_line(v.out) : "unknown";
}

std::optional<ExternalMetric> ExternalMetric::from_env(MetricName name) {
  const char* bin = std::getenv(std::string(metric_env_var(name)).c_str());
  if (bin == nullptr || *bin == '\0') return std::nullopt;
  return ExternalMetric(name, bin);
}

std::optional<double> ExternalMetric::score(const AudioSignal& estimate,
                                            const AudioSignal* reference) const {
  try {
    TempDir tmp;
    const fs::path est = tmp.path() / "estimate.wav";
    write_wav(est, estimate);
    std::string cmd = quote(executable_.string()) + " " + quote(est.string());
    if (reference != nullptr) {
      const fs::path ref = tmp.path() / "reference.wav";
      write_wav(ref, *reference);
      cmd += " " + quote(ref.string());
    }
    const auto r = run_command(cmd);
    if (r.status != 0) {
      spdlog::warn("{} tool exited with status {}", to_string(name_), r.status);
      return std::nullopt;
    }
    const std::string line = last_line(r.out);
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str() || !std::isfinite(v)) {
      spdlog::warn("{} tool printed no score ('{}')", to_string(name_), line);
      return std::nullopt;
    }
    return v;
  } catch (const std::exception& e) {
    spdlog::warn("{} adapter failed: {}", to_string(name_), e.what());
    return std::nullopt;
  }
}

}  // namespace htse
