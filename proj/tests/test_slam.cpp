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

#include "mmslam/random.hpp"
#include "mmslam/scenario.hpp"
#include "mmslam/slam.hpp"
#include "nelder_mead.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace mmslam;

namespace
{
    constexpr double kDeg = kPi / 180.0;
    const Vec3 kTx{20.0, 0.0, 8.0};
    const Vec3 kRx{0.0, 0.0, 2.0};

    PathEstimate exact(const PathParams &p)
    {
        PathEstimate e;
        e.delay_m = p.delay_m();
        e.aod_az = p.aod_az;
        e.aod_el = p.aod_el;
        e.aoa_az = p.aoa_az;
        e.aoa_el = p.aoa_el;
        return e;
    }

    double point_line_distance(const PathLine &l, const Vec3 &p)
    {
        const Vec3 d = p - l.delta;
        return (d - d.dot(l.u_unit) * l.u_unit).norm();
    }

    std::vector<PathLine> random_lines(Rng &rng, std::size_t n, bool weighted)
    {
        std::normal_distribution<double> g;
        std::uniform_real_distribution<double> w(0.1, 3.0);
        std::vector<PathLine> lines(n);
        for (auto &l : lines)
        {
            l.delta = Vec3(g(rng), g(rng), g(rng)) * 10.0;
            l.u = Vec3(g(rng), g(rng), g(rng));
            l.u_unit = l.u.normalized();
            l.weight = weighted ? w(rng) : 1.0;
        }
        return lines;
    }
} // namespace

TEST(Slam, DirectionVectors)
{
    EXPECT_LE((direction_vector(0.0, kPi / 2) - Vec3(1, 0, 0)).norm(), 1e-15);
    EXPECT_LE((direction_vector(0.7, 0.0) - Vec3(0, 0, 1)).norm(), 1e-15);
    const Vec3 expected = (Vec3(10, 10, 5) - kTx) / std::sqrt(209.0);
    const Vec3 d = direction_vector(135.0 * kDeg, 101.98 * kDeg);
    EXPECT_LE((d - expected).cwiseAbs().maxCoeff(), 1e-3);
    EXPECT_NEAR(direction_vector(1.0, 2.0).norm(), 1.0, 1e-15);
}

TEST(Slam, ExactLosLineIsDegenerate)
{
    const std::vector<PathEstimate> los{exact(los_path(kTx, kRx))};
    const auto lines = build_lines(los, kTx);
    ASSERT_EQ(lines.size(), 1u);
    EXPECT_TRUE(lines[0].degenerate);
    EXPECT_LE((lines[0].delta - kRx).norm(), 1e-12);
    EXPECT_LE((solve_position(lines) - kRx).norm(), 1e-12);
}

TEST(Slam, ExactNlosLinePassesThroughReceiver)
{
    const auto p = path_from_point(kTx, kRx, {10.0, 10.0, 5.0});
    const std::vector<PathEstimate> one{exact(p)};
    const auto lines = build_lines(one, kTx);
    EXPECT_FALSE(lines[0].degenerate);
    EXPECT_LE(point_line_distance(lines[0], kRx), 1e-9);
    const double dt = (Vec3(10, 10, 5) - kTx).norm(), dr = (Vec3(10, 10, 5) - kRx).norm();
    EXPECT_LE((lines[0].delta + dt / (dt + dr) * lines[0].u - kRx).norm(), 1e-9);
}

TEST(Slam, BuildLinesPreconditions)
{
    PathEstimate bad = exact(path_from_point(kTx, kRx, {4, 0, 0}));
    bad.delay_m = 0.0;
    const std::vector<PathEstimate> one{bad};
    EXPECT_THROW(build_lines(one, kTx), std::invalid_argument);
    const std::vector<PathEstimate> good{exact(path_from_point(kTx, kRx, {4, 0, 0}))};
    const std::vector<double> negative{-1.0};
    EXPECT_THROW(build_lines(good, kTx, negative), std::invalid_argument);
    const std::vector<double> two{1.0, 1.0};
    EXPECT_THROW(build_lines(good, kTx, two), std::invalid_argument);
}

TEST(Slam, TwoExactPathsGiveReceiver)
{
    const std::vector<PathEstimate> paths{exact(path_from_point(kTx, kRx, {10, 10, 5})),
                                          exact(path_from_point(kTx, kRx, {4, 0, 0}))};
    EXPECT_LE((solve_position(build_lines(paths, kTx)) - kRx).norm(), 1e-8);
}

TEST(Slam, SymmetricPerturbationIsUnbiasedToFirstOrder)
{
    const std::vector<Vec3> pts{{10, 10, 5}, {4, 0, 0}, {15, 10, 2}, {12, 3, 0}};
    const double eps = 1e-4;
    std::vector<PathEstimate> plus, minus;
    for (const auto &p : pts)
    {
        auto e = exact(path_from_point(kTx, kRx, p));
        auto a = e, b = e;
        a.aoa_az += eps;
        b.aoa_az -= eps;
        plus.push_back(a);
        minus.push_back(b);
    }
    const Vec3 pp = solve_position(build_lines(plus, kTx));
    const Vec3 pm = solve_position(build_lines(minus, kTx));
    const double one_sided = (pp - kRx).norm();
    const double averaged = (0.5 * (pp + pm) - kRx).norm();
    EXPECT_GT(one_sided, 10.0 * averaged);
    EXPECT_LE(averaged, 100.0 * eps * eps);
}

TEST(Slam, SingularGeometryReported)
{
    const std::vector<PathEstimate> one{exact(path_from_point(kTx, kRx, {4, 0, 0}))};
    EXPECT_THROW(solve_position(build_lines(one, kTx)), GeometryError);
    EXPECT_THROW(solve_position({}), GeometryError);
}

TEST(Slam, ClosedFormMatchesNumericalMinimiser)
{
    Rng rng(31);
    for (int set = 0; set < 100; ++set)
    {
        auto lines = random_lines(rng, 2 + std::size_t(set % 6), set % 2 == 1);
        if (set % 10 == 0)
        {
            lines[0].degenerate = true;
            lines[0].u_unit.setZero();
        }
        const Vec3 closed = solve_position(lines);
        const auto cost = [&](const Eigen::Vector3d &p) { return line_cost(lines, p); };
        const Vec3 numeric = test::nelder_mead(cost, Vec3::Zero(), 5.0);
        EXPECT_LE((closed - numeric).norm(), 1e-6) << "set " << set;
        EXPECT_LE(line_cost(lines, closed), line_cost(lines, numeric) + 1e-12);
    }
}

TEST(Slam, WeightScalingInvariance)
{
    Rng rng(5);
    auto lines = random_lines(rng, 5, true);
    const Vec3 a = solve_position(lines);
    for (auto &l : lines)
        l.weight *= 37.5;
    EXPECT_LE((solve_position(lines) - a).norm(), 1e-10);
}

TEST(Slam, AddingExactLosDoesNotMoveSolution)
{
    const std::vector<PathEstimate> nlos{exact(path_from_point(kTx, kRx, {10, 10, 5})),
                                         exact(path_from_point(kTx, kRx, {4, 0, 0})),
                                         exact(path_from_point(kTx, kRx, {7, 10, 8}))};
    auto with_los = nlos;
    with_los.push_back(exact(los_path(kTx, kRx)));
    const Vec3 a = solve_position(build_lines(nlos, kTx));
    const Vec3 b = solve_position(build_lines(with_los, kTx));
    EXPECT_LE((a - b).norm(), 1e-9);
}

TEST(Slam, NoisyDirectPathFlaggedDegenerate)
{
    auto los = exact(los_path(kTx, kRx));
    los.aoa_az += 0.01;
    const std::vector<PathEstimate> one{los};
    EXPECT_FALSE(build_lines(one, kTx)[0].degenerate);
    const bool direct[1] = {true};
    const auto lines = build_lines(one, kTx, {}, direct);
    EXPECT_TRUE(lines[0].degenerate);
    EXPECT_LE((solve_position(lines) - lines[0].delta).norm(), 1e-12);
}

TEST(Slam, ScatterPointRecovery)
{
    for (const Vec3 &p : {Vec3(10, 10, 5), Vec3(4, 0, 0), Vec3(16, -3, 0)})
        EXPECT_LE((recover_scatter_point(kRx, exact(path_from_point(kTx, kRx, p)), kTx) - p).norm(), 1e-8);
    EXPECT_THROW(recover_scatter_point(kRx, exact(los_path(kTx, kRx)), kTx), GeometryError);
}

TEST(Slam, MapStatistics)
{
    const std::vector<Vec3> single{{1, 2, 3}};
    const auto m = point_statistics(single);
    EXPECT_EQ(m.center, Vec3(1, 2, 3));
    EXPECT_EQ(m.spread, Vec3::Zero());

    const std::vector<Vec3> pair{{1, 2, 3}, {3, 0, 3}};
    const auto q = point_statistics(pair);
    EXPECT_LE((q.center - Vec3(2, 1, 3)).norm(), 1e-15);
    EXPECT_LE((q.spread - Vec3(1, 1, 0)).norm(), 1e-15);

    const auto truth = build_truth(reference_scenario(false, 0.6, 10.0), 4);
    std::vector<std::vector<Vec3>> per(2);
    for (const auto &p : truth)
        per[std::size_t(p.cluster_id)].push_back(recover_scatter_point(kRx, exact(p), kTx));
    const auto map = map_statistics(per);
    ASSERT_EQ(map.clusters.size(), 2u);
    EXPECT_EQ(map.clusters[1].points.size(), 100u);
    EXPECT_NEAR(map.clusters[1].center.z(), 0.0, 1e-9);
    EXPECT_NEAR(map.clusters[0].center.y(), 10.0, 1e-9);
    EXPECT_THROW(point_statistics({}), std::invalid_argument);
}

TEST(Slam, StrategyNames)
{
    for (const char *name : {"mean", "shortest", "all-paths", "first-2", "first-5", "los-only", "los+mean", "los+first-3",
                             "los+all-paths"})
        EXPECT_EQ(PathStrategy::parse(name).name(), name);
    EXPECT_EQ(PathStrategy::parse("first-3").n, 3u);
    for (const char *bad : {"", "fastest", "first-", "first-0", "first-x", "los+", "los+los-only", "los+sideways"})
        EXPECT_THROW(PathStrategy::parse(bad), std::invalid_argument) << bad;
}

namespace
{
    struct SelectionFixture
    {
        std::vector<PathEstimate> resolved;
        std::vector<std::size_t> clustered{1, 2, 3, 4};
        std::vector<ClusterStats> clusters;

        SelectionFixture()
        {
            resolved.push_back(exact(los_path(kTx, kRx)));
            for (const Vec3 &p : {Vec3(10, 10, 5), Vec3(8, 10, 4), Vec3(4, 0, 0), Vec3(12, 2, 0)})
                resolved.push_back(exact(path_from_point(kTx, kRx, p)));
            ClusterStats a, b;
            a.id = 0;
            a.members = {0, 1}; // facade: resolved 1, 2
            a.mean_params = resolved[2];
            b.id = 1;
            b.members = {3, 2}; // ground: resolved 4, 3
            b.mean_params = resolved[3];
            clusters = {a, b};
        }
    };
} // namespace

TEST(Slam, DetectLos)
{
    SelectionFixture f;
    const auto los = detect_los(f.resolved);
    ASSERT_TRUE(los);
    EXPECT_EQ(*los, 0u);
    const std::vector<PathEstimate> nlos(f.resolved.begin() + 1, f.resolved.end());
    EXPECT_FALSE(detect_los(nlos));
    auto off = f.resolved[0];
    off.aoa_az += 10.0 * kDeg;
    const std::vector<PathEstimate> skewed{off};
    EXPECT_FALSE(detect_los(skewed));
    LosDetector wide;
    wide.max_angle_rad = 15.0 * kDeg;
    EXPECT_TRUE(detect_los(skewed, wide));
}

TEST(Slam, SelectPathsStrategies)
{
    SelectionFixture f;
    const auto los = detect_los(f.resolved);
    auto count = [&](const char *s) { return select_paths(f.clusters, f.resolved, f.clustered, los, PathStrategy::parse(s)).size(); };
    EXPECT_EQ(count("mean"), 2u);
    EXPECT_EQ(count("shortest"), 2u);
    EXPECT_EQ(count("first-1"), 2u);
    EXPECT_EQ(count("first-2"), 4u);
    EXPECT_EQ(count("first-9"), 4u);
    EXPECT_EQ(count("all-paths"), 5u);
    EXPECT_EQ(count("los-only"), 1u);
    EXPECT_EQ(count("los+mean"), 3u);

    const auto shortest = select_paths(f.clusters, f.resolved, f.clustered, los, PathStrategy::parse("shortest"));
    for (const auto &s : shortest)
    {
        const auto &c = f.clusters[std::size_t(s.cluster)];
        for (auto m : c.members)
            EXPECT_LE(s.params.delay_m, f.resolved[f.clustered[m]].delay_m);
    }
    const auto all = select_paths(f.clusters, f.resolved, f.clustered, los, PathStrategy::parse("all-paths"));
    EXPECT_EQ(all[0].cluster, kLosCluster);
    EXPECT_EQ(all[3].cluster, 1);

    EXPECT_THROW(select_paths(f.clusters, f.resolved, f.clustered, std::nullopt, PathStrategy::parse("los-only")),
                 GeometryError);
    // every strategy recovers the exact receiver from exact inputs
    for (const char *s : {"mean", "shortest", "first-2", "all-paths", "los-only", "los+shortest"})
    {
        const auto sel = select_paths(f.clusters, f.resolved, f.clustered, los, PathStrategy::parse(s));
        std::vector<PathEstimate> params;
        for (const auto &p : sel)
            params.push_back(p.params);
        EXPECT_LE((solve_position(build_lines(params, kTx)) - kRx).norm(), 1e-8) << s;
    }
}

TEST(Slam, SelectPathsSkipsUnusable)
{
    SelectionFixture f;
    f.resolved[2].significant = false;
    const auto all = select_paths(f.clusters, f.resolved, f.clustered, std::size_t{0}, PathStrategy::parse("all-paths"));
    EXPECT_EQ(all.size(), 4u);
    const std::vector<std::size_t> wrong{1, 2, 3, 99};
    EXPECT_THROW(select_paths(f.clusters, f.resolved, wrong, std::nullopt, PathStrategy::parse("mean")), std::out_of_range);
}
