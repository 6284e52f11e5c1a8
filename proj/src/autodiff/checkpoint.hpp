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

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "autodiff/tensor.hpp"

namespace emolab::ad {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// Layout: 8-byte little-endian header length, the JSON header
// {"format":"emolab-tensors","version":1,"tensors":[{"name":..,"shape":[..]},..]},
// then every tensor's values as little-endian IEEE-754 doubles in header order.
std::string serialize_tensors(const NamedTensors& tensors);
NamedTensors deserialize_tensors(const std::string& bytes);

void save_tensors(const std::string& path, const NamedTensors& tensors);
NamedTensors load_tensors(const std::string& path);

/// Copies values from `source` into `target` by name; every target tensor must
/// be present with an identical shape.
void assign_by_name(const NamedTensors& target, const NamedTensors& source);

}  // namespace emolab::ad
