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

#ifndef MMSLAM_SLAM_HPP
#define MMSLAM_SLAM_HPP

#include "mmslam/cluster.hpp"
#include "mmslam/estimator.hpp"
#include "mmslam/geometry.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmslam
{
    // Raised when the lines or directions do not determine a point.
    class GeometryError : public std::runtime_error
    {
      public:
        using std::runtime_error::runtime_error;
    };

    // [cos az sin el, sin az sin el, cos el]
    Vec3 direction_vector(double az, double el);

    // Unit vector from the transmitter towards the first interaction point.
    Vec3 departure_direction(const PathEstimate &p);

    // Unit vector from the receiver back towards the last interaction point (arrival azimuth minus pi).
    Vec3 arrival_direction(const PathEstimate &p);

    // Receiver hypothesis  p_R = delta + xi u,  delta = p_T - c tau f_R,  u = c tau (f_T + f_R).
    struct PathLine
    {
        Vec3 delta = Vec3::Zero();
        Vec3 u = Vec3::Zero();
        Vec3 u_unit = Vec3::Zero();
        double weight = 1.0;
        bool degenerate = false; // |u| below 1e-6 c tau: direct path, delta is the position itself
        std::size_t source = 0;  // index of the PathEstimate that produced the line
    };

    // `weights` empty means unit weights. Paths flagged in `direct` are treated as degenerate lines
    // regardless of |u|, since a noisy direct path leaves u small but not zero.
    std::vector<PathLine> build_lines(std::span<const PathEstimate> paths, const Vec3 &tx,
                                      std::span<const double> weights = {}, std::span<const bool> direct = {});

    // Weighted sum of squared point-to-line distances (identity metric for degenerate lines).
    double line_cost(std::span<const PathLine> lines, const Vec3 &p);

    // Closed-form minimiser of line_cost:
    //   (sum w (I - u u^T))^{-1} sum w (I - u u^T) delta
    Vec3 solve_position(std::span<const PathLine> lines);

    // Least-squares intersection of p_T + s f_T and p_R + t f_R:
    //   (H_T + H_R)^{-1} (H_T p_T + H_R p_R),  H = I - f f^T
    Vec3 recover_scatter_point(const Vec3 &rx_estimate, const PathEstimate &path, const Vec3 &tx);

    enum class StrategyKind
    {
        Mean,         // one path per cluster built from the cluster mean
        ShortestPath, // the member with the smallest delay frequency
        AllPaths,     // every resolved path, including a direct path when present
        FirstN,       // the n members with the smallest delays
        LosOnly,      // only the detected direct path
        LosPlus,      // detected direct path plus `base` over the clusters
    };

    struct PathStrategy
    {
        StrategyKind kind = StrategyKind::AllPaths;
        std::size_t n = 2;                        // FirstN
        StrategyKind base = StrategyKind::AllPaths; // LosPlus

        // mean, shortest, all-paths, first-<n>, los-only, los+<base>
        static PathStrategy parse(const std::string &name);
        std::string name() const;
    };

    struct LosDetector
    {
        double max_angle_rad = 5.0 * kPi / 180.0; // tolerance on f_T = -f_R
    };

    // Index of the detected direct path: among the estimates whose departure and arrival directions
    // are opposite within the tolerance, the one with the smallest delay.
    std::optional<std::size_t> detect_los(std::span<const PathEstimate> paths, const LosDetector &det = {});

    struct SelectedPath
    {
        PathEstimate params;
        int cluster = kLosCluster;  // cluster id, or kLosCluster for the direct path
        std::size_t source = 0;     // index into the resolved paths (Mean: first member)
    };

    // `resolved` holds every converted estimate, `clustered` maps cluster member indices back into
    // `resolved`, and `los` is the detector output.
    std::vector<SelectedPath> select_paths(std::span<const ClusterStats> clusters, std::span<const PathEstimate> resolved,
                                           std::span<const std::size_t> clustered, std::optional<std::size_t> los,
                                           const PathStrategy &strategy);

    struct ClusterMap
    {
        std::vector<Vec3> points;
        Vec3 center = Vec3::Zero();
        Vec3 spread = Vec3::Zero(); // per-axis population std
    };

    struct MapEstimate
    {
        std::vector<ClusterMap> clusters;
    };

    ClusterMap point_statistics(std::span<const Vec3> points);
    MapEstimate map_statistics(const std::vector<std::vector<Vec3>> &per_cluster);

} // namespace mmslam

#endif
