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

#ifndef MMSLAM_CHANNEL_HPP
#define MMSLAM_CHANNEL_HPP

#include "mmslam/cp_als.hpp"
#include "mmslam/geometry.hpp"
#include "mmslam/scenario.hpp"
#include "mmslam/tensor.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <span>

namespace mmslam
{
    // Per-path spatial frequencies: departure (0, 1), arrival (2, 3) and delay (4).
    struct SpatialFreqs
    {
        std::array<double, 5> omega{};
        double operator[](std::size_t i) const { return omega.at(i); }
    };

    struct NoiseSpec
    {
        static constexpr double kNoiseless = std::numeric_limits<double>::infinity();
        double snr_db = kNoiseless;
        std::uint64_t seed = 0;
    };

    // ULA response with the first element as phase reference: a_m = exp(j (m - 1) omega).
    Eigen::VectorXcd steering_vector(double omega, std::size_t length);

    //   w1 = pi sin(aod_az) sin(aod_el),  w2 = pi cos(aod_el)
    //   w3 = pi sin(aoa_az) sin(aoa_el),  w4 = pi cos(aoa_el)
    //   w5 = 2 pi df tau
    // Throws when w5 leaves (0, pi), i.e. the delay is ambiguous on the pilot grid.
    SpatialFreqs freqs_from_path(const PathParams &path, double pilot_spacing_hz);

    // CP form of the 5-D channel: one rank-one term per path with unit-norm steering columns.
    CpFactors channel_cp_model(std::span<const PathParams> paths, const Scenario &scenario);

    // H (M_1 x ... x M_5) = sum_p gain_p a(w_p1) o a(w_p2) o a(w_p3) o a(w_p4) o a(w_p5).
    ComplexTensor synth_channel(std::span<const PathParams> paths, const Scenario &scenario);

    // M_6 identical copies of H along a trailing snapshot mode.
    ComplexTensor augment_snapshots(const ComplexTensor &h, std::size_t snapshots);

    struct NoisyObservation
    {
        ComplexTensor y;
        ComplexTensor noise;
        double realized_snr_db = NoiseSpec::kNoiseless; // ||Y - N||^2 / ||N||^2 in dB
    };

    // Adds i.i.d. circular complex Gaussian noise with E||N||^2 = ||Y0||^2 / SNR.
    NoisyObservation add_noise(const ComplexTensor &y0, const NoiseSpec &spec);

    // Per-subcarrier despreading Y_i S_i^H / c for pilots with S_i S_i^H = c I.
    Eigen::MatrixXcd apply_pilots(const Eigen::MatrixXcd &y, const Eigen::MatrixXcd &pilots);

    double snr_db_of(const ComplexTensor &y, const ComplexTensor &noise);

} // namespace mmslam

#endif
