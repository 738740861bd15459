// Copyright 2026 The ADML-KWS Authors.
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

#ifndef ADML_CORE_RNG_HPP_
#define ADML_CORE_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace adml {

using Rng = std::mt19937_64;

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

// Derives an independent generator for a named purpose ("data", "init", "batching", ...)
// from a root seed, so that consumers of one stream never perturb another.
Rng substream(std::uint64_t root_seed, std::string_view name);

}  // namespace adml

#endif  // ADML_CORE_RNG_HPP_
