// ----------------------------------------------------------------------------
// Copyright 2026 The emolab Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ----------------------------------------------------------------------------

#include "autodiff/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <map>

#include <nlohmann/json.hpp>

#include "common.hpp"

namespace emolab::ad {

namespace {

constexpr const char* kFormat = "emolab-tensors";

void put_u64(std::string& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t at) {
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return x;
}

}  // namespace

std::string serialize_tensors(const NamedTensors& tensors) {
  nlohmann::json header;
  header["format"] = kFormat;
  header["version"] = 1;
  header["tensors"] = nlohmann::json::array();
  for (const auto& [name, t] : tensors) header["tensors"].push_back({{"name", name}, {"shape", t.shape()}});
  const std::string text = header.dump();
  std::string out;
  put_u64(out, text.size());
  out += text;
  for (const auto& [name, t] : tensors) {
    for (double v : t.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

NamedTensors deserialize_tensors(const std::string& bytes) {
  if (bytes.size() < 8) fail(ErrorCode::Parse, "tensor file too short");
  const std::uint64_t header_len = get_u64(bytes, 0);
  if (header_len > bytes.size() - 8) fail(ErrorCode::Parse, "tensor header length exceeds file size");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(8, header_len));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("tensor header: ") + e.what());
  }
  if (header.value("format", "") != kFormat) fail(ErrorCode::Parse, "not an emolab tensor file");
  NamedTensors out;
  std::size_t at = 8 + header_len;
  for (const auto& entry : header.at("tensors")) {
    Shape shape = entry.at("shape").get<Shape>();
    const std::size_t n = numel(shape);
    if ((bytes.size() - at) / 8 < n) fail(ErrorCode::Parse, "tensor data truncated");
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i, at += 8) values[i] = std::bit_cast<double>(get_u64(bytes, at));
    out.emplace_back(entry.at("name").get<std::string>(), Tensor(std::move(shape), std::move(values)));
  }
  if (at != bytes.size()) fail(ErrorCode::Parse, "trailing bytes after tensor data");
  return out;
}

void save_tensors(const std::string& path, const NamedTensors& tensors) { write_file(path, serialize_tensors(tensors)); }

NamedTensors load_tensors(const std::string& path) { return deserialize_tensors(read_file(path)); }

void assign_by_name(const NamedTensors& target, const NamedTensors& source) {
  std::map<std::string, const Tensor*> lookup;
  for (const auto& [name, t] : source) lookup[name] = &t;
  for (const auto& [name, t] : target) {
    auto it = lookup.find(name);
    if (it == lookup.end()) fail(ErrorCode::ShapeMismatch, "checkpoint is missing tensor '" + name + "'");
    if (it->second->shape() != t.shape()) {
      fail(ErrorCode::ShapeMismatch, "tensor '" + name + "' has shape " + shape_string(it->second->shape()) +
                                         ", expected " + shape_string(t.shape()));
    }
    Tensor dst = t;
    auto src = it->second->data();
    std::copy(src.begin(), src.end(), dst.data().begin());
  }
}

}  // namespace emolab::ad
