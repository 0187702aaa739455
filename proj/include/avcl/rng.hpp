// Copyright 2026 The avcl Authors.
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

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

namespace avcl {

using Rng = std::mt19937_64;

/// Counter-based seed derivation: the same key tuple always yields the same
/// substream, independent of how many other substreams were drawn before.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> key);

inline Rng substream(std::initializer_list<std::uint64_t> key) { return Rng(derive_seed(key)); }

double uniform(Rng& rng, double lo, double hi);
double standard_normal(Rng& rng);
/// Uniform integer in the closed range [lo, hi].
std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi);

std::string serialize_rng(const Rng& rng);
Rng deserialize_rng(const std::string& state);

/// FNV-1a, used for config hashes and parameter fingerprints.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ull);
std::string hex64(std::uint64_t v);

}  // namespace avcl
