// SPDX-License-Identifier: Apache-2.0
//
// mmslam - mmWave channel estimation, positioning and mapping from diffuse multipath
// Copyright (C) 2026 The mmslam authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MMSLAM_RANDOM_HPP
#define MMSLAM_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mmslam
{
    using Rng = std::mt19937_64;

    inline std::uint64_t splitmix64(std::uint64_t x) noexcept
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Order-sensitive combination of seed components into one stream seed.
    inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) noexcept
    {
        std::uint64_t h = 0x6a09e667f3bcc909ULL;
        for (auto p : parts)
            h = splitmix64(h ^ splitmix64(p));
        return h;
    }

} // namespace mmslam

#endif
