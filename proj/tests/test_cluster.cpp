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

#include "mmslam/cluster.hpp"
#include "mmslam/random.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace mmslam;

namespace
{
    constexpr double kDeg = kPi / 180.0;

    FreqVec on_delay_axis(double w5)
    {
        FreqVec v = FreqVec::Zero();
        v(4) = w5;
        return v;
    }

    std::vector<FreqVec> blobs(std::size_t per_blob, std::uint64_t seed)
    {
        Rng rng(seed);
        std::normal_distribution<double> n(0.0, 0.05);
        const std::vector<FreqVec> centers{(FreqVec() << 0.5, -1.0, 0.3, 0.2, 0.9).finished(),
                                           (FreqVec() << -0.8, 0.4, -0.6, 0.9, 1.3).finished(),
                                           (FreqVec() << 1.5, 1.0, 1.1, -0.7, 1.7).finished()};
        std::vector<FreqVec> pts;
        for (const auto &c : centers)
            for (std::size_t i = 0; i < per_blob; ++i)
            {
                FreqVec p = c;
                for (int d = 0; d < 5; ++d)
                    p(d) += n(rng);
                pts.push_back(p);
            }
        return pts;
    }

    std::set<std::vector<double>> member_sets(const KMeansResult &r, std::span<const FreqVec> pts)
    {
        std::set<std::vector<double>> out;
        for (const auto &c : r.clusters)
        {
            std::vector<double> key;
            for (auto m : c.members)
                key.push_back(pts[m](0) + 10.0 * pts[m](4));
            std::sort(key.begin(), key.end());
            out.insert(key);
        }
        return out;
    }

    FreqEstimate to_estimate(const FreqVec &v)
    {
        FreqEstimate f;
        for (int d = 0; d < 5; ++d)
            f.omega[std::size_t(d)] = v(d);
        return f;
    }
} // namespace

TEST(Cluster, TwoSeparatedPairs)
{
    const std::vector<FreqVec> pts{on_delay_axis(0.10), on_delay_axis(0.11), on_delay_axis(2.00), on_delay_axis(2.05)};
    const auto r = kmeans(pts, 2);
    ASSERT_EQ(r.clusters.size(), 2u);
    EXPECT_NEAR(r.clusters[0].mean(4), 0.105, 1e-15);
    EXPECT_NEAR(r.clusters[1].mean(4), 2.025, 1e-15);
    EXPECT_NEAR(r.distortion, 1.3e-3, 1e-15);
    EXPECT_EQ(r.assignments, (std::vector<std::size_t>{0, 0, 1, 1}));
}

TEST(Cluster, SingleClusterIsGlobalCentroid)
{
    const auto pts = blobs(10, 3);
    const auto r = kmeans(pts, 1);
    FreqVec mean = FreqVec::Zero();
    for (const auto &p : pts)
        mean += p;
    mean /= double(pts.size());
    FreqVec var = FreqVec::Zero();
    for (const auto &p : pts)
        var += (p - mean).cwiseAbs2();
    const FreqVec sd = (var / double(pts.size())).cwiseSqrt();
    EXPECT_LE((r.clusters[0].mean - mean).norm(), 1e-14);
    EXPECT_LE((r.clusters[0].spread - sd).norm(), 1e-14);
    EXPECT_EQ(r.clusters[0].members.size(), pts.size());
}

TEST(Cluster, OneClusterPerPoint)
{
    const auto pts = blobs(3, 4);
    const auto r = kmeans(pts, pts.size());
    EXPECT_EQ(r.distortion, 0.0);
    for (const auto &c : r.clusters)
        EXPECT_EQ(c.members.size(), 1u);
}

TEST(Cluster, DistortionAndFixedPoint)
{
    const auto pts = blobs(40, 5);
    const auto r = kmeans(pts, 3);
    EXPECT_NEAR(kmeans_distortion(pts, r.assignments, r.clusters), r.distortion, 1e-12);
    for (std::size_t i = 0; i < pts.size(); ++i)
    {
        const double own = (pts[i] - r.clusters[r.assignments[i]].mean).squaredNorm();
        for (const auto &c : r.clusters)
            EXPECT_LE(own, (pts[i] - c.mean).squaredNorm() + 1e-15);
    }
    for (const auto &c : r.clusters)
    {
        FreqVec mean = FreqVec::Zero();
        for (auto m : c.members)
            mean += pts[m];
        mean /= double(c.members.size());
        EXPECT_EQ(c.mean, mean);
        EXPECT_TRUE((c.spread.array() >= 0.0).all());
    }
    for (std::size_t i = 1; i < r.distortion_history.size(); ++i)
        EXPECT_LE(r.distortion_history[i], r.distortion_history[i - 1] + 1e-15);
    for (std::size_t k = 1; k < r.clusters.size(); ++k)
        EXPECT_LE(r.clusters[k - 1].mean(4), r.clusters[k].mean(4));
}

TEST(Cluster, InputOrderDoesNotMatter)
{
    auto pts = blobs(25, 6);
    // overlapping blobs make the answer depend on seeding, which is what this checks
    for (std::size_t i = 0; i < pts.size(); i += 3)
        pts[i] *= 0.7;
    KMeansOptions o;
    o.seed = 11;
    const auto a = kmeans(pts, 3, o);
    auto shuffled = pts;
    Rng rng(2);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto b = kmeans(shuffled, 3, o);
    EXPECT_DOUBLE_EQ(a.distortion, b.distortion);
    EXPECT_EQ(member_sets(a, pts), member_sets(b, shuffled));
}

TEST(Cluster, DeterministicForSeed)
{
    const auto pts = blobs(20, 7);
    KMeansOptions o;
    o.seed = 5;
    const auto a = kmeans(pts, 4, o), b = kmeans(pts, 4, o);
    EXPECT_EQ(a.assignments, b.assignments);
    EXPECT_EQ(a.distortion, b.distortion);
}

TEST(Cluster, HandlesDuplicatePoints)
{
    const std::vector<FreqVec> pts(6, on_delay_axis(0.4));
    const auto r = kmeans(pts, 3);
    EXPECT_EQ(r.distortion, 0.0);
    for (const auto &c : r.clusters)
        EXPECT_FALSE(c.members.empty());
}

TEST(Cluster, RejectsBadInput)
{
    const auto pts = blobs(2, 1);
    EXPECT_THROW(kmeans(pts, 0), std::invalid_argument);
    EXPECT_THROW(kmeans(pts, pts.size() + 1), std::invalid_argument);
    auto bad = pts;
    bad[1](2) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(kmeans(bad, 2), std::invalid_argument);
}

TEST(Cluster, ParamsOfDegenerateClusters)
{
    const FreqVec v = (FreqVec() << 0.4, -0.3, 0.2, 0.5, 1.1).finished();
    const std::vector<FreqVec> pts{v, v, v};
    auto r = kmeans(pts, 1);
    cluster_to_params(r.clusters[0], pts, 2e6);
    const auto &s = r.clusters[0].spread_params;
    EXPECT_NEAR(s.delay_m, 0.0, 1e-12);
    EXPECT_NEAR(s.aod_az, 0.0, 1e-12);
    EXPECT_NEAR(s.aoa_el, 0.0, 1e-12);

    const std::vector<FreqVec> single{v};
    auto q = kmeans(single, 1);
    cluster_to_params(q.clusters[0], single, 2e6);
    const auto direct = freqs_to_params(to_estimate(v), 2e6);
    EXPECT_EQ(q.clusters[0].mean_params.aod_az, direct.aod_az);
    EXPECT_EQ(q.clusters[0].mean_params.delay_m, direct.delay_m);
}

TEST(Cluster, RecoversAngularSpread)
{
    Rng rng(21);
    std::normal_distribution<double> az(0.35, 2.0 * kDeg);
    std::vector<FreqVec> pts;
    for (int i = 0; i < 200; ++i)
    {
        PathParams p;
        p.aod_az = az(rng);
        p.aod_el = 1.4;
        p.aoa_az = 2.8;
        p.aoa_el = 1.7;
        p.delay_s = 25.0 / kSpeedOfLight;
        pts.push_back(to_freq_vec(freq_vector(p, 2e6)));
    }
    auto r = kmeans(pts, 1);
    cluster_to_params(r.clusters[0], pts, 2e6);
    EXPECT_NEAR(r.clusters[0].spread_params.aod_az / kDeg, 2.0, 0.4);
    EXPECT_NEAR(r.clusters[0].spread_params.aod_el, 0.0, 1e-12);
}

TEST(Cluster, SpreadWrapsAzimuth)
{
    PathEstimate a, b;
    a.aoa_az = kPi - 0.01;
    b.aoa_az = -kPi + 0.01;
    const std::vector<PathEstimate> m{a, b};
    EXPECT_NEAR(param_spread(m).aoa_az, 0.01, 1e-12);
}
