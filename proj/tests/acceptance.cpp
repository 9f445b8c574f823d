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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only when all pass.

#include "mmslam/harness.hpp"
#include "mmslam/random.hpp"
#include "nelder_mead.hpp"
#include "test_util.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace mmslam;

namespace
{
    using Clock = std::chrono::steady_clock;

    struct Outcome
    {
        bool pass = false;
        std::string detail;
    };

    std::string fmt(double v, int prec = 4)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        return buf;
    }

    std::string list(const std::vector<double> &v)
    {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? ", " : "") + fmt(v[i]);
        return s + "]";
    }

    std::vector<double> column(const std::vector<MetricRow> &rows, const std::function<double(const MetricRow &)> &f)
    {
        std::vector<double> out;
        for (const auto &r : rows)
            out.push_back(f(r));
        return out;
    }

    bool strictly_decreasing(const std::vector<double> &v)
    {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i] < v[i - 1]))
                return false;
        return true;
    }

    bool non_increasing(const std::vector<double> &v)
    {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i] <= v[i - 1]))
                return false;
        return true;
    }

    std::size_t failed_runs(const std::vector<MetricRow> &rows)
    {
        std::size_t n = 0;
        for (const auto &r : rows)
            n += r.failed;
        return n;
    }

    ExperimentSpec sweep(bool los, double s, double alpha, SweepAxis axis, std::vector<double> values, std::size_t runs,
                         std::uint64_t seed, const char *strategy = "all-paths")
    {
        ExperimentSpec spec;
        spec.scenario = reference_scenario(los, s, alpha);
        spec.axis = axis;
        spec.values = std::move(values);
        spec.runs = runs;
        spec.seed = seed;
        spec.pipeline.strategy = PathStrategy::parse(strategy);
        return spec;
    }

    // 1: noiseless pipeline on one scatter point per surface
    Outcome noiseless_exactness()
    {
        auto opts = default_pipeline_options();
        opts.estimator.cp.tol = 1e-13;
        opts.estimator.cp.max_iters = 3000;
        opts.estimator.cp.init = CpInit::Gevd; // noiseless: the algebraic start is exact
        double worst_pos = 0.0, worst_map = 0.0;
        for (bool los : {false, true})
            for (std::uint64_t seed : {1u, 2u, 3u})
            {
                const auto sc = reference_scenario(los, 0.6, 10.0, 1);
                const auto truth = build_truth(sc, mix_seed({seed, 1}));
                const auto y = augment_snapshots(synth_channel(truth, sc), sc.num_snapshots);
                const auto r = run_pipeline(y, sc, opts, seed);
                if (!r.position)
                    return {false, "no position: " + r.position_error};
                worst_pos = std::max(worst_pos, (*r.position - sc.rx).norm());
                for (std::size_t m = 0; m < r.map.clusters.size(); ++m)
                {
                    double best = std::numeric_limits<double>::infinity();
                    for (const auto &p : truth)
                        if (!p.is_los())
                            best = std::min(best, (r.map.clusters[m].center - p.scatter_point).norm());
                    worst_map = std::max(worst_map, best);
                }
                if (r.map.clusters.size() != sc.surfaces.size())
                    return {false, "expected one map cluster per surface"};
            }
        return {worst_pos <= 1e-6 && worst_map <= 1e-6,
                "max position error " + fmt(worst_pos) + " m, max scatter error " + fmt(worst_map) + " m"};
    }

    // 2: tensor identities
    Outcome tensor_identities()
    {
        bool exact = true;
        double worst_mp = 0.0;
        Rng rng(5);
        std::uniform_int_distribution<std::size_t> dim(1, 5);
        for (std::size_t trial = 0; trial < 60; ++trial)
        {
            const std::size_t order = 1 + trial % 6;
            Shape shape(order);
            for (auto &m : shape)
                m = dim(rng);
            const auto t = test::random_tensor(shape, trial);
            for (std::size_t r = 0; r < order; ++r)
            {
                exact = exact && fold(unfold(t, r), r, shape) == t;
                const auto u = test::random_matrix(3, Eigen::Index(shape[r]), trial * 10 + r);
                const Eigen::MatrixXcd lhs = unfold(mode_product(t, u, r), r), rhs = u * unfold(t, r);
                worst_mp = std::max(worst_mp, (lhs - rhs).norm() / rhs.norm());
            }
        }
        const auto t3 = reconstruct(test::random_cp({8, 8, 8}, 3, 17));
        const double cp_err = cp_als(t3, 3).relative_error;
        return {exact && worst_mp <= 1e-12 && cp_err <= 1e-8,
                std::string("round trip ") + (exact ? "bit-exact" : "NOT exact") + ", mode product rel. error " +
                    fmt(worst_mp) + ", rank-3 CP rel. error " + fmt(cp_err)};
    }

    // 3: shift invariance on steering matrices
    Outcome shift_invariance()
    {
        Rng rng(8);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        std::normal_distribution<double> n;
        double worst = 0.0, se = 0.0;
        std::size_t count = 0;
        for (std::size_t p = 1; p <= 3; ++p)
            for (int trial = 0; trial < 100; ++trial)
            {
                std::vector<double> w(p);
                for (auto &x : w)
                    x = u(rng);
                std::sort(w.begin(), w.end());
                bool separated = true;
                for (std::size_t i = 1; i < p; ++i)
                    separated = separated && w[i] - w[i - 1] > 0.2;
                if (!separated)
                {
                    --trial;
                    continue;
                }
                Eigen::MatrixXcd a(8, Eigen::Index(p));
                for (std::size_t i = 0; i < p; ++i)
                    a.col(Eigen::Index(i)) = steering_vector(w[i], 8);
                // noiseless: both the subspace route (on a mixed basis) and the column route
                const Eigen::MatrixXcd mix = test::random_matrix(Eigen::Index(p), Eigen::Index(p), std::uint64_t(trial));
                auto sub = shift_invariance_freqs(a * mix);
                std::sort(sub.begin(), sub.end());
                const auto col = shift_invariance_freqs_per_column(a);
                for (std::size_t i = 0; i < p; ++i)
                    worst = std::max({worst, std::abs(sub[i] - w[i]), std::abs(col[i] - w[i])});
                // 20 dB per entry
                const double sigma = std::sqrt(0.01 / 2.0);
                for (Eigen::Index i = 0; i < a.size(); ++i)
                    a.data()[i] += cdouble(sigma * n(rng), sigma * n(rng));
                const auto noisy = shift_invariance_freqs_per_column(a);
                for (std::size_t i = 0; i < p; ++i)
                {
                    se += std::pow(wrap_angle(noisy[i] - w[i]), 2);
                    ++count;
                }
            }
        const double r = std::sqrt(se / double(count));
        return {worst <= 1e-8 && r <= 0.02, "noiseless max error " + fmt(worst) + " rad, 20 dB RMSE " + fmt(r) + " rad"};
    }

    // 4: closed-form position against a derivative-free minimiser
    Outcome closed_form_vs_numeric()
    {
        Rng rng(44);
        std::normal_distribution<double> g;
        std::uniform_real_distribution<double> wd(0.2, 4.0);
        double worst = 0.0;
        for (int set = 0; set < 100; ++set)
        {
            std::vector<PathLine> lines(2 + std::size_t(set % 7));
            for (auto &l : lines)
            {
                l.delta = 15.0 * Vec3(g(rng), g(rng), g(rng));
                l.u = 30.0 * Vec3(g(rng), g(rng), g(rng));
                l.u_unit = l.u.normalized();
                l.weight = set % 2 ? wd(rng) : 1.0;
            }
            const Vec3 closed = solve_position(lines);
            const Vec3 numeric =
                test::nelder_mead([&](const Eigen::Vector3d &p) { return line_cost(lines, p); }, Vec3::Zero(), 10.0);
            worst = std::max(worst, (closed - numeric).norm());
        }
        return {worst <= 1e-6, "max |closed form - numerical| " + fmt(worst) + " m over 100 line sets"};
    }

    // 5: delay-mean RMSE over SNR, reference scene without the direct path
    Outcome snr_trend()
    {
        const auto rows = run_experiment(sweep(false, 0.8, 10.0, SweepAxis::Snr, {-10.0, 0.0, 10.0}, 50, 501));
        const auto d = column(rows, [](const MetricRow &r) { return r.mean_rmse[0]; });
        const bool pass = strictly_decreasing(d) && d.back() >= 0.05 && d.back() <= 1.0;
        return {pass, "delay-mean RMSE at -10/0/10 dB " + list(d) + " m (failed runs " + std::to_string(failed_runs(rows)) +
                          ")"};
    }

    // 6: delay-mean RMSE over roughness at 10 dB
    Outcome roughness_trend()
    {
        auto spec = sweep(false, 0.8, 10.0, SweepAxis::Alpha, {0.0, 10.0, 20.0}, 50, 601);
        spec.snr_db = 10.0;
        const auto rows = run_experiment(spec);
        const auto d = column(rows, [](const MetricRow &r) { return r.mean_rmse[0]; });
        const bool pass = strictly_decreasing(d) && d[1] >= 0.05 && d[1] <= 1.0;
        return {pass, "delay-mean RMSE at alpha 0/10/20 " + list(d) + " m (failed runs " +
                          std::to_string(failed_runs(rows)) + ")"};
    }

    // 7: positioning with the direct path, all paths, unit weights
    Outcome los_positioning()
    {
        const std::vector<double> snrs{-10.0, -5.0, 0.0, 5.0, 10.0};
        const std::vector<double> alphas{0.0, 10.0, 20.0};
        std::vector<std::vector<double>> pos;
        std::size_t failed = 0;
        for (std::size_t a = 0; a < alphas.size(); ++a)
        {
            const auto rows = run_experiment(sweep(true, 0.6, alphas[a], SweepAxis::Snr, snrs, 30, 700 + a));
            pos.push_back(column(rows, [](const MetricRow &r) { return r.position_rmse; }));
            failed += failed_runs(rows);
        }
        bool bounded = failed == 0;
        for (const auto &row : pos)
            for (double v : row)
                bounded = bounded && v <= 0.5;
        int violations = 0;
        for (std::size_t i = 0; i < snrs.size(); ++i)
            violations += pos[2][i] > pos[0][i];
        std::string detail;
        for (std::size_t a = 0; a < alphas.size(); ++a)
            detail += "alpha " + fmt(alphas[a]) + ": " + list(pos[a]) + " m; ";
        detail += "alpha 20 > alpha 0 at " + std::to_string(violations) + " SNRs; failed runs " + std::to_string(failed);
        return {bounded && violations <= 1, detail};
    }

    // 8: positioning without the direct path versus the direct path alone
    Outcome nlos_positioning()
    {
        auto nlos = sweep(false, 0.6, 20.0, SweepAxis::Snr, {10.0}, 50, 801);
        auto los_only = sweep(true, 0.6, 20.0, SweepAxis::Snr, {10.0}, 50, 802, "los-only");
        const auto a = run_experiment(nlos), b = run_experiment(los_only);
        const double n = a[0].position_rmse, l = b[0].position_rmse;
        const bool pass = a[0].failed == 0 && b[0].failed == 0 && n >= 0.02 && n <= 0.4 && n >= l;
        return {pass, "no direct path " + fmt(n) + " m, direct path only " + fmt(l) + " m (failed runs " +
                          std::to_string(a[0].failed + b[0].failed) + ")"};
    }

    // 9: scatter-cluster mapping
    Outcome mapping()
    {
        const auto rows = run_experiment(sweep(true, 0.6, 10.0, SweepAxis::Snr, {-10.0, 0.0, 10.0}, 30, 901));
        bool pass = failed_runs(rows) == 0;
        std::string detail;
        const auto names = std::vector<std::string>{"facade", "ground"};
        for (std::size_t k = 0; k < names.size(); ++k)
        {
            const auto c = column(rows, [k](const MetricRow &r) { return r.center_rmse[k]; });
            const auto s = column(rows, [k](const MetricRow &r) { return r.map_spread_rmse[k]; });
            pass = pass && c.back() <= 1.0 && s.back() <= 1.5 && non_increasing(c) && non_increasing(s);
            detail += names[k] + " center " + list(c) + " m, spread " + list(s) + " m; ";
        }
        return {pass, detail + "SNR -10/0/10 dB"};
    }

    // 10: identical CSV bytes for identical input
    Outcome determinism()
    {
        auto spec = sweep(true, 0.6, 10.0, SweepAxis::Snr, {-5.0, 5.0}, 4, 1001);
        const auto dir = std::filesystem::temp_directory_path();
        const auto pa = (dir / "mmslam_acceptance_a.csv").string(), pb = (dir / "mmslam_acceptance_b.csv").string();
        const std::vector<std::string> names{"facade", "ground"};
        emit_csv(run_experiment(spec), pa, names, spec.axis);
        spec.threads = 1;
        emit_csv(run_experiment(spec), pb, names, spec.axis);
        auto slurp = [](const std::string &p)
        {
            std::ifstream in(p, std::ios::binary);
            std::stringstream s;
            s << in.rdbuf();
            return s.str();
        };
        const std::string a = slurp(pa), b = slurp(pb);
        std::filesystem::remove(pa);
        std::filesystem::remove(pb);
        return {!a.empty() && a == b, std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "DIFFERENT")};
    }

    struct Criterion
    {
        int id;
        const char *name;
        double budget_s;
        std::function<Outcome()> run;
    };
} // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "noiseless end-to-end exactness", 5.0, noiseless_exactness},
        {2, "tensor identities", 10.0, tensor_identities},
        {3, "shift-invariance oracle", 30.0, shift_invariance},
        {4, "closed-form position vs numerical minimiser", 10.0, closed_form_vs_numeric},
        {5, "delay-mean RMSE decreases with SNR", 600.0, snr_trend},
        {6, "delay-mean RMSE decreases with roughness", 600.0, roughness_trend},
        {7, "positioning with direct path", 900.0, los_positioning},
        {8, "positioning without direct path", 900.0, nlos_positioning},
        {9, "scatter-cluster mapping", 900.0, mapping},
        {10, "determinism", 600.0, determinism},
    };
    int failures = 0;
    for (const auto &c : criteria)
    {
        const auto t0 = Clock::now();
        Outcome o;
        try
        {
            o = c.run();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::cout << (pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << o.detail << " [" << fmt(secs, 3)
                  << " s of " << fmt(c.budget_s, 4) << " s" << (in_time ? "" : ", over budget") << "]" << std::endl;
    }
    std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed")) << std::endl;
    return failures ? 1 : 0;
}
