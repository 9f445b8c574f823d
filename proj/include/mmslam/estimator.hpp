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

#ifndef MMSLAM_ESTIMATOR_HPP
#define MMSLAM_ESTIMATOR_HPP

#include "mmslam/cp_als.hpp"
#include "mmslam/geometry.hpp"
#include "mmslam/scenario.hpp"
#include "mmslam/tensor.hpp"

#include <array>
#include <span>
#include <vector>

namespace mmslam
{
    struct RankEstimate
    {
        std::vector<std::size_t> modes;    // modes examined
        std::vector<std::size_t> per_mode; // MDL order of each examined mode (0 when the spectrum is flat)
        std::vector<bool> degenerate;      // true where MDL found no dominant component
        std::size_t overall = 1;           // max over modes, clamped to [1, cap]
    };

    // Wax-Kailath MDL on a descending eigenvalue spectrum with `snapshots` observations.
    // Returns the order k in [0, M-1] minimising the description length.
    std::size_t mdl_order(std::span<const double> eigenvalues, double snapshots);

    // Rank estimate from the singular values of each unfolding. `modes` empty means all modes;
    // `cap` 0 means no cap beyond M_r - 1.
    RankEstimate mdl_rank(const ComplexTensor &y, std::span<const std::size_t> modes = {}, std::size_t cap = 0);

    // Shift-invariance (ESPRIT) frequencies of an M x P basis with n = 1 subarrays:
    // Psi = (J2 U)^+ (J1 U), omega_p = -arg(lambda_p(Psi)). Order follows the eigen solver.
    std::vector<double> shift_invariance_freqs(const Eigen::MatrixXcd &u);

    // Same relation solved column by column, preserving the column pairing of a CP factor.
    std::vector<double> shift_invariance_freqs_per_column(const Eigen::MatrixXcd &u);

    struct FreqEstimate
    {
        std::array<double, 5> omega{};
        double gain = 0.0;        // |gamma| estimate
        bool significant = true;  // weight above the noise floor (see EstimatorOptions::noise_floor_factor)
    };

    // Physical parameters recovered from one FreqEstimate. Azimuths follow the PathParams conventions.
    struct PathEstimate
    {
        double delay_m = 0.0;
        double aod_az = 0.0;
        double aod_el = 0.0;
        double aoa_az = 0.0;
        double aoa_el = 0.0;
        bool aod_az_indeterminate = false;
        bool aoa_az_indeterminate = false;
        bool valid_delay = true; // false when the delay frequency is not in (0, pi)
        bool consistent = true;  // false when |w1| or |w3| exceeds pi sin(el) by more than kMaxSineExcess
        bool significant = true; // copied from FreqEstimate

        bool usable() const noexcept { return valid_delay && consistent && significant; }
    };

    // Slack on |sin az| <= 1 before an estimate is declared physically inconsistent.
    inline constexpr double kMaxSineExcess = 0.1;

    // Half-spaces that the two arrays face; only the x components matter for y-z plane arrays.
    struct ArrayFrames
    {
        Vec3 tx_boresight{1.0, 0.0, 0.0};
        Vec3 rx_boresight{1.0, 0.0, 0.0};

        static ArrayFrames from(const Scenario &s) { return {s.tx_boresight, s.rx_boresight}; }
    };

    // Inverse of freqs_from_path. The azimuth candidates asin(.) and pi - asin(.) produce identical
    // array responses; the one facing the array boresight is returned.
    PathEstimate freqs_to_params(const FreqEstimate &f, double pilot_spacing_hz, const ArrayFrames &frames = {});

    // Spatial frequencies for a PathParams, without the aliasing check (used for truth statistics).
    FreqEstimate freq_vector(const PathParams &path, double pilot_spacing_hz);

    struct EstimatorOptions
    {
        CpOptions cp{};
        std::size_t rank_cap = 0; // 0: min over array modes of M_r - 1
        std::size_t fixed_rank = 0; // non-zero skips MDL
        // Components with |weight| < factor * sigma * sum_r sqrt(M_r) are marked insignificant, where
        // sigma is the per-entry noise level implied by the CP residual. 0 disables the test.
        double noise_floor_factor = 0.0;
        // When two components have congruence above this value (product over modes 1-5 of
        // |u_p^H u_q|), the fit is treated as degenerate and repeated with one component fewer.
        // 1 or more disables the check.
        double max_congruence = 1.0;
    };

    struct EstimationResult
    {
        RankEstimate rank;
        std::size_t rank_used = 0; // rank of the returned fit (below rank.overall after degeneracy refits)
        CpResult cp;
        std::vector<FreqEstimate> paths; // one per CP component, modes 1..5
        double noise_sigma = 0.0;        // RMS residual per entry
        double noise_floor = 0.0;        // weight threshold applied (0 when disabled)
    };

    // Largest congruence between two components over the first `modes` modes.
    double max_component_congruence(const CpFactors &f, std::size_t modes);

    // CP decomposition of the observation at rank P, returned as per-mode bases U_r.
    CpResult subspace_from_cp(const ComplexTensor &y, std::size_t rank, const CpOptions &opts = {});

    // Rank selection, CP decomposition and per-component shift invariance on an
    // M_1 x ... x M_5 (x M_6) observation. Trailing modes beyond the fifth are discarded.
    EstimationResult estimate_paths(const ComplexTensor &y, const EstimatorOptions &opts = {});

} // namespace mmslam

#endif
