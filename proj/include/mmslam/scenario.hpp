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

#ifndef MMSLAM_SCENARIO_HPP
#define MMSLAM_SCENARIO_HPP

#include "mmslam/geometry.hpp"
#include "mmslam/tensor.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace mmslam
{
    enum class ScatterSampler
    {
        Rejection,
        Uniform,
    };

    // Propagation scene plus the MIMO-OFDM measurement layout.
    //
    // Both arrays are URAs in the y-z plane, so azimuths are only observable up to a front/back
    // mirror across that plane. The boresight vectors select the half-space the array faces:
    // the transmitter looks along tx_boresight, the receiver along rx_boresight.
    struct Scenario
    {
        Vec3 tx{20.0, 0.0, 8.0};
        Vec3 rx{0.0, 0.0, 2.0};
        Vec3 tx_boresight{-1.0, 0.0, 0.0};
        Vec3 rx_boresight{1.0, 0.0, 0.0};
        std::vector<Surface> surfaces;
        bool include_los = true;
        double carrier_hz = 28e9;
        double pilot_spacing_hz = 2e6;
        std::array<std::size_t, 4> array{8, 8, 8, 8}; // M_1 x M_2 at tx, M_3 x M_4 at rx
        std::size_t num_pilots = 10;                  // M_5
        std::size_t num_snapshots = 16;               // M_6
        ScatterSampler sampler = ScatterSampler::Rejection;

        Shape channel_shape() const;     // M_1..M_5
        Shape observation_shape() const; // M_1..M_6
        std::size_t num_clusters() const noexcept { return surfaces.size(); }
        void validate() const;
    };

    // All paths of one channel realisation: the direct path first (when enabled), then the
    // scatter paths of every surface with cluster_id = surface index.
    std::vector<PathParams> build_truth(const Scenario &scenario, std::uint64_t seed);

    // Transmitter, receiver, building facade and ground patch of the reference layout.
    Scenario reference_scenario(bool include_los, double scattering_S, double roughness_alpha,
                                std::size_t points_per_surface = 100);

    // YAML scenario description; see configs/ for the schema.
    Scenario parse_scenario(const std::string &yaml_text);
    Scenario load_scenario(const std::string &path);

} // namespace mmslam

#endif
