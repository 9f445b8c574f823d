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

#include "mmslam/slam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmslam
{
    Vec3 direction_vector(double az, double el)
    {
        return {std::cos(az) * std::sin(el), std::sin(az) * std::sin(el), std::cos(el)};
    }

    Vec3 departure_direction(const PathEstimate &p) { return direction_vector(p.aod_az, p.aod_el); }

    Vec3 arrival_direction(const PathEstimate &p) { return direction_vector(p.aoa_az - kPi, p.aoa_el); }

    std::vector<PathLine> build_lines(std::span<const PathEstimate> paths, const Vec3 &tx, std::span<const double> weights,
                                      std::span<const bool> direct)
    {
        if (!weights.empty() && weights.size() != paths.size())
            throw std::invalid_argument("build_lines: one weight per path is required.");
        if (!direct.empty() && direct.size() != paths.size())
            throw std::invalid_argument("build_lines: one direct-path flag per path is required.");
        std::vector<PathLine> lines;
        lines.reserve(paths.size());
        for (std::size_t k = 0; k < paths.size(); ++k)
        {
            const auto &p = paths[k];
            if (!(p.delay_m > 0.0))
                throw std::invalid_argument("build_lines: path " + std::to_string(k) + " has a non-positive delay.");
            PathLine l;
            l.source = k;
            l.weight = weights.empty() ? 1.0 : weights[k];
            if (!(l.weight >= 0.0))
                throw std::invalid_argument("build_lines: weights must be non-negative.");
            const Vec3 ft = departure_direction(p);
            const Vec3 fr = arrival_direction(p);
            l.delta = tx - p.delay_m * fr;
            l.u = p.delay_m * (ft + fr);
            const double un = l.u.norm();
            l.degenerate = un < 1e-6 * p.delay_m || (!direct.empty() && direct[k]);
            if (!l.degenerate)
                l.u_unit = l.u / un;
            lines.push_back(l);
        }
        return lines;
    }

    namespace
    {
        Eigen::Matrix3d projector(const PathLine &l)
        {
            if (l.degenerate)
                return Eigen::Matrix3d::Identity();
            return Eigen::Matrix3d::Identity() - l.u_unit * l.u_unit.transpose();
        }
    } // namespace

    double line_cost(std::span<const PathLine> lines, const Vec3 &p)
    {
        double c = 0.0;
        for (const auto &l : lines)
            c += l.weight * (projector(l) * (p - l.delta)).squaredNorm();
        return c;
    }

    Vec3 solve_position(std::span<const PathLine> lines)
    {
        if (lines.empty())
            throw GeometryError("solve_position: no lines.");
        Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
        Vec3 b = Vec3::Zero();
        for (const auto &l : lines)
        {
            const Eigen::Matrix3d pr = l.weight * projector(l);
            a += pr;
            b += pr * l.delta;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(a);
        const double top = es.eigenvalues().maxCoeff();
        if (!(top > 0.0) || es.eigenvalues().minCoeff() <= 1e-10 * top)
            throw GeometryError("solve_position: normal matrix is singular; the lines are all parallel (or have zero weight).");
        return a.ldlt().solve(b);
    }

    Vec3 recover_scatter_point(const Vec3 &rx_estimate, const PathEstimate &path, const Vec3 &tx)
    {
        const Vec3 ft = departure_direction(path);
        const Vec3 fr = arrival_direction(path);
        if (ft.cross(fr).norm() < 1e-9)
            throw GeometryError("recover_scatter_point: departure and arrival directions are parallel (direct path has no scatter point).");
        const Eigen::Matrix3d ht = Eigen::Matrix3d::Identity() - ft * ft.transpose();
        const Eigen::Matrix3d hr = Eigen::Matrix3d::Identity() - fr * fr.transpose();
        return (ht + hr).ldlt().solve(ht * tx + hr * rx_estimate);
    }

    namespace
    {
        const char *kind_name(StrategyKind k)
        {
            switch (k)
            {
            case StrategyKind::Mean:
                return "mean";
            case StrategyKind::ShortestPath:
                return "shortest";
            case StrategyKind::AllPaths:
                return "all-paths";
            case StrategyKind::FirstN:
                return "first-";
            case StrategyKind::LosOnly:
                return "los-only";
            case StrategyKind::LosPlus:
                return "los+";
            }
            return "?";
        }

        PathStrategy parse_base(const std::string &s)
        {
            PathStrategy st;
            if (s == "mean")
                st.kind = StrategyKind::Mean;
            else if (s == "shortest")
                st.kind = StrategyKind::ShortestPath;
            else if (s == "all-paths")
                st.kind = StrategyKind::AllPaths;
            else if (s == "los-only")
                st.kind = StrategyKind::LosOnly;
            else if (s.rfind("first-", 0) == 0)
            {
                st.kind = StrategyKind::FirstN;
                const std::string num = s.substr(6);
                if (num.empty() || !std::all_of(num.begin(), num.end(), ::isdigit) || std::stoul(num) == 0)
                    throw std::invalid_argument("Strategy '" + s + "': first-<n> needs a positive integer n.");
                st.n = std::stoul(num);
            }
            else
                throw std::invalid_argument("Unknown strategy '" + s +
                                            "' (expected mean, shortest, all-paths, first-<n>, los-only or los+<strategy>).");
            return st;
        }
    } // namespace

    PathStrategy PathStrategy::parse(const std::string &name)
    {
        if (name.rfind("los+", 0) == 0)
        {
            PathStrategy inner = parse_base(name.substr(4));
            if (inner.kind == StrategyKind::LosOnly)
                throw std::invalid_argument("Strategy '" + name + "': los+ needs a per-cluster strategy.");
            PathStrategy st;
            st.kind = StrategyKind::LosPlus;
            st.base = inner.kind;
            st.n = inner.n;
            return st;
        }
        return parse_base(name);
    }

    std::string PathStrategy::name() const
    {
        auto base_name = [&](StrategyKind k)
        { return k == StrategyKind::FirstN ? "first-" + std::to_string(n) : std::string(kind_name(k)); };
        if (kind == StrategyKind::LosPlus)
            return "los+" + base_name(base);
        return base_name(kind);
    }

    std::optional<std::size_t> detect_los(std::span<const PathEstimate> paths, const LosDetector &det)
    {
        std::optional<std::size_t> found;
        for (std::size_t i = 0; i < paths.size(); ++i)
        {
            const auto &p = paths[i];
            if (!p.usable() || (found && p.delay_m >= paths[*found].delay_m))
                continue;
            const double c = std::clamp(-departure_direction(p).dot(arrival_direction(p)), -1.0, 1.0);
            if (std::acos(c) <= det.max_angle_rad)
                found = i;
        }
        return found;
    }

    namespace
    {
        void append_cluster(std::vector<SelectedPath> &out, const ClusterStats &c, std::span<const PathEstimate> resolved,
                            std::span<const std::size_t> clustered, StrategyKind kind, std::size_t n)
        {
            std::vector<std::size_t> idx;
            for (auto m : c.members)
                idx.push_back(clustered[m]);
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b)
                             { return resolved[a].delay_m < resolved[b].delay_m; });
            const int id = static_cast<int>(c.id);
            switch (kind)
            {
            case StrategyKind::Mean:
                out.push_back({c.mean_params, id, idx.front()});
                break;
            case StrategyKind::ShortestPath:
                out.push_back({resolved[idx.front()], id, idx.front()});
                break;
            case StrategyKind::FirstN:
                for (std::size_t i = 0; i < std::min(n, idx.size()); ++i)
                    out.push_back({resolved[idx[i]], id, idx[i]});
                break;
            default:
                for (auto i : idx)
                    out.push_back({resolved[i], id, i});
                break;
            }
        }
    } // namespace

    std::vector<SelectedPath> select_paths(std::span<const ClusterStats> clusters, std::span<const PathEstimate> resolved,
                                           std::span<const std::size_t> clustered, std::optional<std::size_t> los,
                                           const PathStrategy &strategy)
    {
        for (auto i : clustered)
            if (i >= resolved.size())
                throw std::out_of_range("select_paths: clustered index out of range.");
        if (los && *los >= resolved.size())
            throw std::out_of_range("select_paths: direct-path index out of range.");

        std::vector<SelectedPath> out;
        const bool need_los = strategy.kind == StrategyKind::LosOnly || strategy.kind == StrategyKind::LosPlus;
        if (need_los && !los)
            throw GeometryError("select_paths: strategy '" + strategy.name() + "' needs a direct path but none was detected.");

        if (strategy.kind == StrategyKind::AllPaths)
        {
            // every usable resolved path; the direct path keeps its own label
            for (std::size_t i = 0; i < resolved.size(); ++i)
            {
                if (!resolved[i].usable())
                    continue;
                int id = kLosCluster;
                for (const auto &c : clusters)
                    for (auto m : c.members)
                        if (clustered[m] == i)
                            id = static_cast<int>(c.id);
                out.push_back({resolved[i], id, i});
            }
            return out;
        }
        if (need_los)
            out.push_back({resolved[*los], kLosCluster, *los});
        if (strategy.kind == StrategyKind::LosOnly)
            return out;

        const StrategyKind kind = strategy.kind == StrategyKind::LosPlus ? strategy.base : strategy.kind;
        for (const auto &c : clusters)
            if (!c.members.empty())
                append_cluster(out, c, resolved, clustered, kind, strategy.n);
        return out;
    }

    ClusterMap point_statistics(std::span<const Vec3> points)
    {
        if (points.empty())
            throw std::invalid_argument("point_statistics: no points.");
        ClusterMap m;
        m.points.assign(points.begin(), points.end());
        for (const auto &p : points)
            m.center += p;
        m.center /= double(points.size());
        Vec3 var = Vec3::Zero();
        for (const auto &p : points)
            var += (p - m.center).cwiseAbs2();
        m.spread = (var / double(points.size())).cwiseSqrt();
        return m;
    }

    MapEstimate map_statistics(const std::vector<std::vector<Vec3>> &per_cluster)
    {
        MapEstimate out;
        for (const auto &pts : per_cluster)
            out.clusters.push_back(point_statistics(pts));
        return out;
    }

} // namespace mmslam
