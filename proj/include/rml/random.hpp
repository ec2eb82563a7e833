/*
 *     Copyright 2026 The rml authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */

#pragma once

#include <cstdint>
#include <random>

// Seed derivation. Every random quantity in a run comes from an engine seeded
// by derive_seed(base, stream, index), so the k-th proposal always sees the
// same numbers no matter which thread computes it.

namespace rml {

enum class Stream : std::uint64_t {
  Init = 1,      // index = initialization attempt
  Proposal = 2,  // index = step
  Accept = 3,    // index = 0; one uniform per step
  Chain = 4,     // index = chain number, for multi-chain seeds
  Test = 5,      // free for tests and oracles
};

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, Stream stream,
                                    std::uint64_t index) noexcept {
  return mix64(mix64(mix64(base) ^ static_cast<std::uint64_t>(stream)) ^ index);
}

inline std::mt19937_64 make_engine(std::uint64_t base, Stream stream,
                                   std::uint64_t index) {
  return std::mt19937_64(derive_seed(base, stream, index));
}

// Seed of chain `chain` (0-based) in a multi-chain run; chain 0 keeps `base`.
constexpr std::uint64_t chain_seed(std::uint64_t base, std::uint64_t chain) noexcept {
  return chain == 0 ? base : derive_seed(base, Stream::Chain, chain);
}

}  // namespace rml
