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

#ifndef MMSLAM_CLUSTER_HPP
#define MMSLAM_CLUSTER_HPP

#include "mmslam/estimator.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace mmslam
{
    using FreqVec = Eigen::Matrix<double, 5, 1>;

    FreqVec to_freq_vec(const FreqEstimate &f);

    // Population standard deviation of converted parameters. Angles are measured as wrapped
    // deviations from their circular mean.
    struct ParamSpread
    {
        double delay_m = 0.0;
        double aod_az = 0.0;
        double aod_el = 0.0;
        double aoa_az = 0.0;
        double aoa_el = 0.0;
    };

    ParamSpread param_spread(std::span<const PathEstimate> members);

    struct ClusterStats
    {
        std::size_t id = 0;
        FreqVec mean = FreqVec::Zero();   // arithmetic mean of the member vectors
        FreqVec spread = FreqVec::Zero(); // per-dimension population std
        std::vector<std::size_t> members; // indices into the clustered point set
        PathEstimate mean_params{};
        ParamSpread spread_params{};
    };

    struct KMeansOptions
    {
        int max_iters = 100;
        int restarts = 8;
        std::uint64_t seed = 0;
    };

    struct KMeansResult
    {
        std::vector<std::size_t> assignments; // cluster id per point
        std::vector<ClusterStats> clusters;   // ordered by increasing mean delay frequency
        double distortion = 0.0;              // sum of squared distances to the assigned means
        int iterations = 0;                   // Lloyd iterations of the selected restart
        std::vector<double> distortion_history;
    };

    // Lloyd's algorithm with distance-weighted seeding. Points are sorted before seeding so the
    // result does not depend on input order. A cluster that empties is re-seeded with the point
    // farthest from its current mean.
    KMeansResult kmeans(std::span<const FreqVec> points, std::size_t k, const KMeansOptions &opts = {});

    double kmeans_distortion(std::span<const FreqVec> points, std::span<const std::size_t> assignments,
                             std::span<const ClusterStats> clusters);

    // Fills mean_params (conversion of the mean vector) and spread_params (std of the converted members).
    void cluster_to_params(ClusterStats &stats, std::span<const FreqVec> points, double pilot_spacing_hz,
                           const ArrayFrames &frames = {});

} // namespace mmslam

#endif
