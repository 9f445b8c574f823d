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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mmslam
{
    FreqVec to_freq_vec(const FreqEstimate &f)
    {
        FreqVec v;
        for (int i = 0; i < 5; ++i)
            v[i] = f.omega[static_cast<std::size_t>(i)];
        return v;
    }

    namespace
    {
        double linear_std(std::span<const double> x)
        {
            const double n = double(x.size());
            const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
            double s = 0.0;
            for (double v : x)
                s += (v - mean) * (v - mean);
            return std::sqrt(s / n);
        }

        double circular_std(std::span<const double> x)
        {
            double sx = 0.0, cx = 0.0;
            for (double v : x)
            {
                sx += std::sin(v);
                cx += std::cos(v);
            }
            const double centre = std::atan2(sx, cx);
            std::vector<double> dev;
            dev.reserve(x.size());
            for (double v : x)
                dev.push_back(wrap_angle(v - centre));
            return linear_std(dev);
        }

        FreqEstimate fv_to_freq(const FreqVec &v)
        {
            FreqEstimate f;
            for (int i = 0; i < 5; ++i)
                f.omega[static_cast<std::size_t>(i)] = v[i];
            return f;
        }

        struct Restart
        {
            std::vector<std::size_t> assign;
            std::vector<FreqVec> means;
            double distortion = 0.0;
            int iterations = 0;
            std::vector<double> history;
        };

        Restart lloyd(std::span<const FreqVec> pts, std::size_t k, int max_iters, Rng &rng)
        {
            const std::size_t n = pts.size();
            Restart r;

            // distance-weighted seeding
            std::vector<double> d2(n, std::numeric_limits<double>::infinity());
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            r.means.push_back(pts[pick(rng)]);
            while (r.means.size() < k)
            {
                double total = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                {
                    d2[i] = std::min(d2[i], (pts[i] - r.means.back()).squaredNorm());
                    total += d2[i];
                }
                std::size_t chosen = 0;
                if (total > 0.0)
                {
                    const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
                    double acc = 0.0;
                    chosen = n - 1;
                    for (std::size_t i = 0; i < n; ++i)
                    {
                        acc += d2[i];
                        if (acc > target && d2[i] > 0.0)
                        {
                            chosen = i;
                            break;
                        }
                    }
                }
                else
                    chosen = pick(rng);
                r.means.push_back(pts[chosen]);
            }

            r.assign.assign(n, k);
            for (int it = 1; it <= max_iters; ++it)
            {
                bool changed = false;
                for (std::size_t i = 0; i < n; ++i)
                {
                    std::size_t best = 0;
                    double best_d = (pts[i] - r.means[0]).squaredNorm();
                    for (std::size_t c = 1; c < k; ++c)
                    {
                        const double d = (pts[i] - r.means[c]).squaredNorm();
                        if (d < best_d)
                        {
                            best_d = d;
                            best = c;
                        }
                    }
                    if (r.assign[i] != best)
                    {
                        r.assign[i] = best;
                        changed = true;
                    }
                }

                // empty clusters take the point farthest from its own mean
                std::vector<std::size_t> count(k, 0);
                for (auto a : r.assign)
                    ++count[a];
                for (std::size_t c = 0; c < k; ++c)
                {
                    if (count[c] > 0)
                        continue;
                    std::size_t far = 0;
                    double far_d = -1.0;
                    for (std::size_t i = 0; i < n; ++i)
                    {
                        if (count[r.assign[i]] < 2)
                            continue;
                        const double d = (pts[i] - r.means[r.assign[i]]).squaredNorm();
                        if (d > far_d)
                        {
                            far_d = d;
                            far = i;
                        }
                    }
                    --count[r.assign[far]];
                    r.assign[far] = c;
                    ++count[c];
                    changed = true;
                }

                for (auto &m : r.means)
                    m.setZero();
                for (std::size_t i = 0; i < n; ++i)
                    r.means[r.assign[i]] += pts[i];
                for (std::size_t c = 0; c < k; ++c)
                    r.means[c] /= double(count[c]);

                double j = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    j += (pts[i] - r.means[r.assign[i]]).squaredNorm();
                r.distortion = j;
                r.history.push_back(j);
                r.iterations = it;
                if (!changed)
                    break;
            }
            return r;
        }
    } // namespace

    ParamSpread param_spread(std::span<const PathEstimate> members)
    {
        if (members.empty())
            throw std::invalid_argument("param_spread: no members.");
        std::vector<double> d, tz, te, rz, re;
        for (const auto &m : members)
        {
            d.push_back(m.delay_m);
            tz.push_back(m.aod_az);
            te.push_back(m.aod_el);
            rz.push_back(m.aoa_az);
            re.push_back(m.aoa_el);
        }
        return {linear_std(d), circular_std(tz), linear_std(te), circular_std(rz), linear_std(re)};
    }

    KMeansResult kmeans(std::span<const FreqVec> points, std::size_t k, const KMeansOptions &opts)
    {
        const std::size_t n = points.size();
        if (k == 0)
            throw std::invalid_argument("kmeans: K must be at least 1.");
        if (k > n)
            throw std::invalid_argument("kmeans: K (" + std::to_string(k) + ") exceeds the number of points (" +
                                        std::to_string(n) + ").");
        if (opts.max_iters < 1 || opts.restarts < 1)
            throw std::invalid_argument("kmeans: max_iters and restarts must be positive.");
        for (const auto &p : points)
            if (!p.allFinite())
                throw std::invalid_argument("kmeans: non-finite point.");

        // canonical order, so the seeding does not depend on how the points were listed
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b)
                         { return std::lexicographical_compare(points[a].data(), points[a].data() + 5, points[b].data(),
                                                               points[b].data() + 5); });
        std::vector<FreqVec> sorted(n);
        for (std::size_t i = 0; i < n; ++i)
            sorted[i] = points[order[i]];

        Restart best;
        bool have = false;
        for (int rs = 0; rs < opts.restarts; ++rs)
        {
            Rng rng(mix_seed({opts.seed, 0x6b6dULL, static_cast<std::uint64_t>(rs)}));
            Restart r = lloyd(sorted, k, opts.max_iters, rng);
            if (!have || r.distortion < best.distortion)
            {
                best = std::move(r);
                have = true;
            }
        }

        // relabel by increasing delay frequency, then map back to input order
        std::vector<std::size_t> label(k);
        std::iota(label.begin(), label.end(), std::size_t{0});
        std::stable_sort(label.begin(), label.end(), [&](std::size_t a, std::size_t b)
                         {
                             const auto &ma = best.means[a], &mb = best.means[b];
                             if (ma[4] != mb[4])
                                 return ma[4] < mb[4];
                             return std::lexicographical_compare(ma.data(), ma.data() + 5, mb.data(), mb.data() + 5); });
        std::vector<std::size_t> rank_of(k);
        for (std::size_t i = 0; i < k; ++i)
            rank_of[label[i]] = i;

        KMeansResult out;
        out.assignments.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            out.assignments[order[i]] = rank_of[best.assign[i]];
        out.clusters.resize(k);
        for (std::size_t c = 0; c < k; ++c)
            out.clusters[c].id = c;
        for (std::size_t i = 0; i < n; ++i)
            out.clusters[out.assignments[i]].members.push_back(i);
        for (auto &c : out.clusters)
        {
            c.mean.setZero();
            for (auto i : c.members)
                c.mean += points[i];
            c.mean /= double(c.members.size());
            FreqVec var = FreqVec::Zero();
            for (auto i : c.members)
                var += (points[i] - c.mean).cwiseAbs2();
            c.spread = (var / double(c.members.size())).cwiseSqrt();
        }
        out.distortion = kmeans_distortion(points, out.assignments, out.clusters);
        out.iterations = best.iterations;
        out.distortion_history = std::move(best.history);
        return out;
    }

    double kmeans_distortion(std::span<const FreqVec> points, std::span<const std::size_t> assignments,
                             std::span<const ClusterStats> clusters)
    {
        if (points.size() != assignments.size())
            throw std::invalid_argument("kmeans_distortion: one assignment per point is required.");
        double j = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i)
            j += (points[i] - clusters[assignments[i]].mean).squaredNorm();
        return j;
    }

    void cluster_to_params(ClusterStats &stats, std::span<const FreqVec> points, double pilot_spacing_hz,
                           const ArrayFrames &frames)
    {
        if (stats.members.empty())
            throw std::invalid_argument("cluster_to_params: cluster has no members.");
        stats.mean_params = freqs_to_params(fv_to_freq(stats.mean), pilot_spacing_hz, frames);
        std::vector<PathEstimate> conv;
        for (auto i : stats.members)
        {
            if (i >= points.size())
                throw std::out_of_range("cluster_to_params: member index out of range.");
            conv.push_back(freqs_to_params(fv_to_freq(points[i]), pilot_spacing_hz, frames));
        }
        stats.spread_params = param_spread(conv);
    }

} // namespace mmslam
