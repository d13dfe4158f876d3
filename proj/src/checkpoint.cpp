// Copyright 2026 The salient-reid Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sreid/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "sreid/errors.hpp"

namespace sreid {
namespace {

constexpr char kMagic[8] = {'S', 'R', 'E', 'I', 'D', 'C', 'K', 'P'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::string& buf, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  buf.append(bytes, sizeof(T));
}

template <typename T>
T take(const std::string& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw DataError("checkpoint truncated");
  T value;
  std::memcpy(&value, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

std::uint32_t crc_of(const char* data, std::size_t n) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const nlohmann::json& meta) {
  nlohmann::json table = nlohmann::json::array();
  std::string payload;
  for (const auto& [name, t] : model.state()) {
    table.push_back({{"name", name}, {"shape", t->shape()}});
    payload.append(reinterpret_cast<const char*>(t->data()), t->size() * sizeof(double));
  }
  const std::string header = nlohmann::json{{"meta", meta}, {"tensors", table}}.dump();

  std::string buf(kMagic, sizeof kMagic);
  put<std::uint32_t>(buf, kCheckpointVersion);
  put<std::uint64_t>(buf, header.size());
  buf += header;
  buf += payload;
  put<std::uint32_t>(buf, crc_of(buf.data(), buf.size()));

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  // Write-then-rename so an interrupted save never leaves a torn file.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw DataError("cannot write checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  const std::string buf{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (buf.size() < sizeof kMagic + 16 || std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0) {
    throw DataError(path.string() + " is not a checkpoint");
  }
  std::size_t crc_pos = buf.size() - sizeof(std::uint32_t);
  if (take<std::uint32_t>(buf, crc_pos) != crc_of(buf.data(), buf.size() - 4)) {
    throw DataError("checkpoint " + path.string() + " failed its CRC check");
  }
  std::size_t pos = sizeof kMagic;
  const auto version = take<std::uint32_t>(buf, pos);
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint version " + std::to_string(version) + " is not supported");
  }
  const auto header_len = take<std::uint64_t>(buf, pos);
  if (pos + header_len > buf.size() - 4) throw DataError("checkpoint truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(buf.substr(pos, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint header: ") + e.what());
  }
  pos += header_len;

  Checkpoint ckpt;
  ckpt.meta = header.at("meta");
  for (const auto& entry : header.at("tensors")) {
    Tensor t(entry.at("shape").get<std::vector<std::size_t>>());
    const std::size_t bytes = t.size() * sizeof(double);
    if (pos + bytes > buf.size() - 4) throw DataError("checkpoint truncated");
    std::memcpy(t.data(), buf.data() + pos, bytes);
    pos += bytes;
    ckpt.tensors.emplace_back(entry.at("name").get<std::string>(), std::move(t));
  }
  if (pos != buf.size() - 4) throw DataError("checkpoint has trailing bytes");
  return ckpt;
}

void restore(Model& model, const Checkpoint& ckpt) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& [name, t] : ckpt.tensors) by_name.emplace(name, &t);
  auto state = model.state();
  if (state.size() != by_name.size()) {
    throw DataError("checkpoint holds " + std::to_string(by_name.size()) +
                    " tensors, model expects " + std::to_string(state.size()));
  }
  for (auto& [name, t] : state) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError("checkpoint lacks tensor " + name);
    if (!it->second->same_shape(*t)) {
      throw DataError("checkpoint tensor " + name + " has shape " +
                      shape_string(it->second->shape()) + ", model expects " +
                      shape_string(t->shape()));
    }
    *t = *it->second;
  }
}

}  // namespace sreid
