// core/src/checkpoint.cpp

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

#include "htse/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "htse/error.hpp"

namespace htse {

namespace {

constexpr char kMagic[8] = {'H', 'T', 'S', 'E', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::filesystem::path& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw IoError("truncated checkpoint: " + path.string());
  }
  return v;
}

std::string get_string(std::istream& is, std::size_t n, const std::filesystem::path& path) {
  if (n > (std::size_t{1} << 30)) throw IoError("corrupt checkpoint: " + path.string());
  std::string s(n, '\0');
  if (!is.read(s.data(), static_cast<std::streamsize>(n))) {
    throw IoError("truncated checkpoint: " + path.string());
  }
  return s;
}

std::ifstream open_checked(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw IoError("not an htse checkpoint: " + path.string());
  }
  const auto version = get<std::uint32_t>(is, path);
  if (version != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  return is;
}

CheckpointHeader read_header(std::istream& is, const std::filesystem::path& path) {
  const auto len = get<std::uint64_t>(is, path);
  const auto text = get_string(is, len, path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad checkpoint header in " + path.string() + ": " + e.what());
  }
  CheckpointHeader h;
  h.kind = j.at("kind").get<std::string>();
  h.config = j.at("config");
  h.meta = j.value("meta", nlohmann::json::object());
  return h;
}

void fnv(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

void save_parameters(const std::filesystem::path& path, const CheckpointHeader& header,
                     const nn::ParameterStore& params) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write checkpoint: " + path.string());
    os.write(kMagic, 8);
    put<std::uint32_t>(os, kCheckpointVersion);
    const std::string text =
        nlohmann::json{{"kind", header.kind}, {"config", header.config}, {"meta", header.meta}}
            .dump();
    put<std::uint64_t>(os, text.size());
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    const auto all = params.all();
    put<std::uint32_t>(os, static_cast<std::uint32_t>(all.size()));
    for (const nn::Parameter* p : all) {
      put<std::uint32_t>(os, static_cast<std::uint32_t>(p->name.size()));
      os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
      put<std::uint64_t>(os, static_cast<std::uint64_t>(p->value.rows()));
      put<std::uint64_t>(os, static_cast<std::uint64_t>(p->value.cols()));
      os.write(reinterpret_cast<const char*>(p->value.data()),
               static_cast<std::streamsize>(p->value.size() * sizeof(double)));
    }
    if (!os.flush()) throw IoError("write failed: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  auto is = open_checked(path);
  return read_header(is, path);
}

CheckpointHeader load_parameters(const std::filesystem::path& path, nn::ParameterStore& params) {
  auto is = open_checked(path);
  CheckpointHeader h = read_header(is, path);
  const auto count = get<std::uint32_t>(is, path);
  const auto all = params.all();
  if (count != all.size()) {
    throw IoError("checkpoint has " + std::to_string(count) + " arrays, model expects " +
                  std::to_string(all.size()));
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name = get_string(is, get<std::uint32_t>(is, path), path);
    const auto rows = get<std::uint64_t>(is, path);
    const auto cols = get<std::uint64_t>(is, path);
    nn::Parameter* p = params.find(name);
    if (p == nullptr) throw IoError("checkpoint array '" + name + "' not in model");
    if (static_cast<std::uint64_t>(p->value.rows()) != rows ||
        static_cast<std::uint64_t>(p->value.cols()) != cols) {
      throw IoError("shape mismatch for '" + name + "'");
    }
    if (!is.read(reinterpret_cast<char*>(p->value.data()),
                 static_cast<std::streamsize>(rows * cols * sizeof(double)))) {
      throw IoError("truncated checkpoint: " + path.string());
    }
  }
  return h;
}

std::uint64_t params_checksum(const nn::ParameterStore& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const nn::Parameter* p : params.all()) {
    fnv(h, p->name.data(), p->name.size());
    const std::uint64_t shape[2] = {static_cast<std::uint64_t>(p->value.rows()),
                                    static_cast<std::uint64_t>(p->value.cols())};
    fnv(h, shape, sizeof(shape));
    fnv(h, p->value.data(), static_cast<std::size_t>(p->value.size()) * sizeof(double));
  }
  return h;
}

std::string checksum_hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

void save_tse(const std::filesystem::path& path, const TseNetwork& net, nlohmann::json meta) {
  save_parameters(path, {"tse", to_json(net.config()), std::move(meta)}, net.params());
}

std::unique_ptr<TseNetwork> load_tse(const std::filesystem::path& path) {
  const auto h = read_checkpoint_header(path);
  if (h.kind != "tse") throw IoError(path.string() + " is a '" + h.kind + "' checkpoint");
  auto net = std::make_unique<TseNetwork>(tse_config_from_json(h.config));
  load_parameters(path, net->params());
  return net;
}

void save_refine(const std::filesystem::path& path, const RefineNetwork& net,
                 nlohmann::json meta) {
  const nlohmann::json cfg{{"refine", to_json(net.config())},
                           {"tse", to_json(net.tse_config())}};
  save_parameters(path, {"refine", cfg, std::move(meta)}, net.params());
}

std::unique_ptr<RefineNetwork> load_refine(const std::filesystem::path& path) {
  const auto h = read_checkpoint_header(path);
  if (h.kind != "refine") throw IoError(path.string() + " is a '" + h.kind + "' checkpoint");
  auto net = std::make_unique<RefineNetwork>(refine_config_from_json(h.config.at("refine")),
                                             tse_config_from_json(h.config.at("tse")));
  load_parameters(path, net->params());
  return net;
}

}  // namespace htse
