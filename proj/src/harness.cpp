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

#include "mmslam/harness.hpp"
#include "mmslam/random.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <thread>

namespace mmslam
{
    namespace
    {
        constexpr double kRadToDeg = 180.0 / kPi;
        constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

        double rmse_or_nan(const std::vector<double> &v) { return v.empty() ? kNaN : rmse(v); }
        double median_or_nan(const std::vector<double> &v) { return v.empty() ? kNaN : median(v); }
    } // namespace

    PipelineOptions default_pipeline_options()
    {
        PipelineOptions o;
        o.estimator.cp.max_iters = 200;
        o.estimator.cp.tol = 1e-6;
        o.estimator.noise_floor_factor = 1.0;
        o.estimator.max_congruence = 0.5;
        return o;
    }

    PipelineResult run_pipeline(const ComplexTensor &y, const Scenario &scenario, const PipelineOptions &opts,
                                std::uint64_t seed)
    {
        PipelineResult r;
        EstimatorOptions eo = opts.estimator;
        eo.cp.seed = mix_seed({seed, 0xa15ULL});
        r.estimation = estimate_paths(y, eo);

        const ArrayFrames frames = ArrayFrames::from(scenario);
        for (const auto &f : r.estimation.paths)
            r.resolved.push_back(freqs_to_params(f, scenario.pilot_spacing_hz, frames));
        r.los = detect_los(r.resolved, opts.los);

        for (std::size_t i = 0; i < r.resolved.size(); ++i)
        {
            if (!r.resolved[i].usable() || (r.los && *r.los == i))
                continue;
            r.clustered.push_back(i);
            r.cluster_points.push_back(to_freq_vec(r.estimation.paths[i]));
        }
        const std::size_t k = std::min(scenario.num_clusters(), r.cluster_points.size());
        if (k > 0)
        {
            KMeansOptions ko = opts.kmeans;
            ko.seed = mix_seed({seed, 0x6b6dULL, opts.kmeans.seed});
            auto km = kmeans(r.cluster_points, k, ko);
            r.clusters = std::move(km.clusters);
            for (auto &c : r.clusters)
                cluster_to_params(c, r.cluster_points, scenario.pilot_spacing_hz, frames);
        }

        try
        {
            r.selected = select_paths(r.clusters, r.resolved, r.clustered, r.los, opts.strategy);
            std::vector<PathEstimate> params;
            std::unique_ptr<bool[]> direct(new bool[r.selected.size()]);
            for (std::size_t i = 0; i < r.selected.size(); ++i)
            {
                params.push_back(r.selected[i].params);
                direct[i] = r.selected[i].cluster == kLosCluster;
            }
            const auto lines = build_lines(params, scenario.tx, {}, {direct.get(), r.selected.size()});
            r.position = solve_position(lines);
        }
        catch (const GeometryError &e)
        {
            r.position_error = e.what();
        }

        if (r.position)
        {
            for (const auto &c : r.clusters)
            {
                std::vector<Vec3> pts;
                for (auto m : c.members)
                {
                    try
                    {
                        pts.push_back(recover_scatter_point(*r.position, r.resolved[r.clustered[m]], scenario.tx));
                    }
                    catch (const GeometryError &)
                    {
                    }
                }
                if (pts.empty())
                    continue;
                r.map.clusters.push_back(point_statistics(pts));
                r.map_cluster.push_back(static_cast<int>(c.id));
            }
        }
        return r;
    }

    std::vector<TruthCluster> truth_clusters(std::span<const PathParams> truth, const Scenario &scenario)
    {
        const ArrayFrames frames = ArrayFrames::from(scenario);
        std::vector<TruthCluster> out;
        for (std::size_t k = 0; k < scenario.num_clusters(); ++k)
        {
            TruthCluster t;
            t.id = static_cast<int>(k);
            FreqVec mean = FreqVec::Zero();
            std::vector<PathEstimate> conv;
            std::vector<Vec3> pts;
            for (const auto &p : truth)
            {
                if (p.cluster_id != t.id)
                    continue;
                mean += to_freq_vec(freq_vector(p, scenario.pilot_spacing_hz));
                conv.push_back({p.delay_m(), p.aod_az, p.aod_el, p.aoa_az, p.aoa_el});
                pts.push_back(p.scatter_point);
            }
            if (conv.empty())
                throw std::invalid_argument("truth_clusters: surface " + std::to_string(k) + " has no scatter paths.");
            t.size = conv.size();
            mean /= double(conv.size());
            FreqEstimate f;
            for (int i = 0; i < 5; ++i)
                f.omega[static_cast<std::size_t>(i)] = mean[i];
            t.mean_params = freqs_to_params(f, scenario.pilot_spacing_hz, frames);
            t.spread_params = param_spread(conv);
            const auto stats = point_statistics(pts);
            t.center = stats.center;
            t.spread = stats.spread;
            out.push_back(t);
        }
        return out;
    }

    std::vector<int> match_clusters(std::span<const double> estimated_delays, std::span<const double> truth_delays)
    {
        const std::size_t ne = estimated_delays.size(), nt = truth_delays.size();
        std::vector<int> best(ne, -1);
        if (ne == 0 || nt == 0)
            return best;
        // enumerate injective maps from the smaller side into the larger one
        const bool est_small = ne <= nt;
        const std::size_t small = est_small ? ne : nt, large = est_small ? nt : ne;
        std::vector<std::size_t> perm(large);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        double best_cost = std::numeric_limits<double>::infinity();
        do
        {
            double cost = 0.0;
            for (std::size_t i = 0; i < small; ++i)
            {
                const std::size_t e = est_small ? i : perm[i];
                const std::size_t t = est_small ? perm[i] : i;
                cost += std::abs(estimated_delays[e] - truth_delays[t]);
            }
            if (cost < best_cost)
            {
                best_cost = cost;
                std::fill(best.begin(), best.end(), -1);
                for (std::size_t i = 0; i < small; ++i)
                {
                    const std::size_t e = est_small ? i : perm[i];
                    const std::size_t t = est_small ? perm[i] : i;
                    best[e] = static_cast<int>(t);
                }
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    }

    std::string axis_name(SweepAxis a)
    {
        switch (a)
        {
        case SweepAxis::Snr:
            return "snr_db";
        case SweepAxis::Alpha:
            return "alpha_R";
        case SweepAxis::S:
            return "S";
        }
        return "?";
    }

    SweepAxis parse_axis(const std::string &name)
    {
        if (name == "snr" || name == "snr_db")
            return SweepAxis::Snr;
        if (name == "alpha" || name == "alpha_R")
            return SweepAxis::Alpha;
        if (name == "S" || name == "s")
            return SweepAxis::S;
        throw std::invalid_argument("Unknown sweep axis '" + name + "' (expected snr, alpha or S).");
    }

    void ExperimentSpec::validate() const
    {
        scenario.validate();
        if (runs < 1)
            throw std::invalid_argument("ExperimentSpec: runs must be at least 1.");
        if (values.empty())
            throw std::invalid_argument("ExperimentSpec: the sweep needs at least one value.");
        for (double v : values)
        {
            if (std::isnan(v) || (axis != SweepAxis::Snr && !std::isfinite(v)))
                throw std::invalid_argument("ExperimentSpec: sweep values must be finite.");
            if (axis == SweepAxis::Snr && v == -std::numeric_limits<double>::infinity())
                throw std::invalid_argument("ExperimentSpec: SNR of -inf dB.");
            if (axis == SweepAxis::Alpha && v < 0.0)
                throw std::invalid_argument("ExperimentSpec: roughness must be non-negative.");
            if (axis == SweepAxis::S && !(v > 0.0 && v <= 1.0))
                throw std::invalid_argument("ExperimentSpec: scattering coefficient must lie in (0, 1].");
        }
        if (axis != SweepAxis::Snr && std::isnan(snr_db))
            throw std::invalid_argument("ExperimentSpec: SNR is NaN.");
    }

    Scenario scenario_at(const ExperimentSpec &spec, double value)
    {
        Scenario s = spec.scenario;
        for (auto &surface : s.surfaces)
        {
            if (spec.axis == SweepAxis::Alpha)
                surface.roughness_alpha = value;
            else if (spec.axis == SweepAxis::S)
                surface.scattering_S = value;
        }
        return s;
    }

    double snr_at(const ExperimentSpec &spec, double value) { return spec.axis == SweepAxis::Snr ? value : spec.snr_db; }

    std::uint64_t run_seed(std::uint64_t master, std::size_t point, std::size_t run)
    {
        return mix_seed({master, static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(run)});
    }

    RunRecord evaluate_run(const Scenario &scenario, double snr_db, const PipelineOptions &opts, std::uint64_t seed)
    {
        RunRecord rec;
        try
        {
            const auto truth = build_truth(scenario, mix_seed({seed, 1}));
            const auto y0 = augment_snapshots(synth_channel(truth, scenario), scenario.num_snapshots);
            const auto obs = add_noise(y0, {snr_db, mix_seed({seed, 2})});
            const auto res = run_pipeline(obs.y, scenario, opts, seed);
            rec.paths = res.resolved.size();

            const auto tc = truth_clusters(truth, scenario);
            std::vector<double> est_d, tru_d;
            for (const auto &c : res.clusters)
                est_d.push_back(c.mean_params.delay_m);
            for (const auto &t : tc)
                tru_d.push_back(t.mean_params.delay_m);
            const auto match = match_clusters(est_d, tru_d);

            std::size_t matched = 0;
            for (std::size_t i = 0; i < res.clusters.size(); ++i)
            {
                if (match[i] < 0)
                    continue;
                ++matched;
                const auto &c = res.clusters[i];
                const auto &t = tc[static_cast<std::size_t>(match[i])];
                ClusterErrors e;
                e.truth_id = t.id;
                e.mean = {c.mean_params.delay_m - t.mean_params.delay_m,
                          angle_diff(c.mean_params.aod_az, t.mean_params.aod_az) * kRadToDeg,
                          (c.mean_params.aod_el - t.mean_params.aod_el) * kRadToDeg,
                          angle_diff(c.mean_params.aoa_az, t.mean_params.aoa_az) * kRadToDeg,
                          (c.mean_params.aoa_el - t.mean_params.aoa_el) * kRadToDeg};
                e.spread = {c.spread_params.delay_m - t.spread_params.delay_m,
                            (c.spread_params.aod_az - t.spread_params.aod_az) * kRadToDeg,
                            (c.spread_params.aod_el - t.spread_params.aod_el) * kRadToDeg,
                            (c.spread_params.aoa_az - t.spread_params.aoa_az) * kRadToDeg,
                            (c.spread_params.aoa_el - t.spread_params.aoa_el) * kRadToDeg};
                for (std::size_t m = 0; m < res.map_cluster.size(); ++m)
                {
                    if (res.map_cluster[m] != static_cast<int>(c.id))
                        continue;
                    e.center = (res.map.clusters[m].center - t.center).norm();
                    e.map_spread = (res.map.clusters[m].spread - t.spread).norm();
                }
                rec.clusters.push_back(e);
            }
            rec.missed = tc.size() - matched;
            if (res.position)
            {
                rec.position = (*res.position - scenario.rx).norm();
                rec.ok = true;
            }
            else
                rec.error = res.position_error;
        }
        catch (const std::exception &e)
        {
            rec.ok = false;
            rec.error = e.what();
        }
        return rec;
    }

    std::vector<MetricRow> run_experiment(const ExperimentSpec &spec)
    {
        spec.validate();
        const std::size_t nsurf = spec.scenario.num_clusters();
        unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
        threads = static_cast<unsigned>(std::min<std::size_t>(threads, spec.runs));

        std::vector<MetricRow> rows;
        for (std::size_t p = 0; p < spec.values.size(); ++p)
        {
            const double value = spec.values[p];
            const Scenario scenario = scenario_at(spec, value);
            const double snr = snr_at(spec, value);

            std::vector<RunRecord> records(spec.runs);
            std::atomic<std::size_t> next{0};
            auto worker = [&]
            {
                for (std::size_t r = next++; r < spec.runs; r = next++)
                    records[r] = evaluate_run(scenario, snr, spec.pipeline, run_seed(spec.seed, p, r));
            };
            if (threads <= 1)
                worker();
            else
            {
                std::vector<std::thread> pool;
                for (unsigned t = 0; t < threads; ++t)
                    pool.emplace_back(worker);
                for (auto &t : pool)
                    t.join();
            }

            // reduction in run order keeps the sums bit-reproducible
            MetricRow row;
            row.value = value;
            row.runs = spec.runs;
            std::array<std::vector<double>, 5> mean_err, spread_err;
            std::vector<double> pos, delay_abs, paths;
            std::vector<std::vector<double>> centre(nsurf), mspread(nsurf);
            for (const auto &rec : records)
            {
                if (!rec.ok)
                    ++row.failed;
                row.missed_clusters += rec.missed;
                paths.push_back(double(rec.paths));
                if (rec.position)
                    pos.push_back(*rec.position);
                for (const auto &c : rec.clusters)
                {
                    for (std::size_t i = 0; i < 5; ++i)
                    {
                        mean_err[i].push_back(c.mean[i]);
                        spread_err[i].push_back(c.spread[i]);
                    }
                    delay_abs.push_back(std::abs(c.mean[0]));
                    const auto t = static_cast<std::size_t>(c.truth_id);
                    if (c.center)
                        centre[t].push_back(*c.center);
                    if (c.map_spread)
                        mspread[t].push_back(*c.map_spread);
                }
            }
            row.mean_paths = std::accumulate(paths.begin(), paths.end(), 0.0) / double(paths.size());
            for (std::size_t i = 0; i < 5; ++i)
            {
                row.mean_rmse[i] = rmse_or_nan(mean_err[i]);
                row.spread_rmse[i] = rmse_or_nan(spread_err[i]);
            }
            row.delay_median = median_or_nan(delay_abs);
            row.position_rmse = rmse_or_nan(pos);
            row.position_median = median_or_nan(pos);
            for (std::size_t t = 0; t < nsurf; ++t)
            {
                row.center_rmse.push_back(rmse_or_nan(centre[t]));
                row.map_spread_rmse.push_back(rmse_or_nan(mspread[t]));
            }
            rows.push_back(std::move(row));
        }
        return rows;
    }

    double rmse(std::span<const double> errors)
    {
        if (errors.empty())
            throw std::invalid_argument("rmse: no samples.");
        double s = 0.0;
        for (double e : errors)
            s += e * e;
        return std::sqrt(s / double(errors.size()));
    }

    double median(std::vector<double> values)
    {
        if (values.empty())
            throw std::invalid_argument("median: no samples.");
        std::sort(values.begin(), values.end());
        const std::size_t n = values.size();
        return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    }

    double angle_diff(double a, double b) { return wrap_angle(a - b); }

    std::string format_number(double v)
    {
        if (std::isnan(v))
            return "nan";
        if (std::isinf(v))
            return v > 0 ? "inf" : "-inf";
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    }

    std::vector<std::string> csv_header(std::span<const std::string> surface_names, SweepAxis axis)
    {
        std::vector<std::string> h{axis_name(axis), "runs", "failed_runs", "missed_clusters", "mean_paths"};
        const char *params[5] = {"delay_m", "aod_az_deg", "aod_el_deg", "aoa_az_deg", "aoa_el_deg"};
        for (const char *p : params)
            h.push_back(std::string("mean_rmse_") + p);
        for (const char *p : params)
            h.push_back(std::string("spread_rmse_") + p);
        h.push_back("delay_mean_median_m");
        h.push_back("position_rmse_m");
        h.push_back("position_median_m");
        for (const auto &s : surface_names)
            h.push_back("center_rmse_m_" + s);
        for (const auto &s : surface_names)
            h.push_back("map_spread_rmse_m_" + s);
        return h;
    }

    void write_csv(std::ostream &out, std::span<const MetricRow> rows, std::span<const std::string> surface_names,
                   SweepAxis axis)
    {
        const auto header = csv_header(surface_names, axis);
        for (std::size_t i = 0; i < header.size(); ++i)
            out << (i ? "," : "") << header[i];
        out << '\n';
        for (const auto &r : rows)
        {
            if (r.center_rmse.size() != surface_names.size() || r.map_spread_rmse.size() != surface_names.size())
                throw std::invalid_argument("write_csv: row does not match the surface list.");
            std::vector<double> v{r.value, double(r.runs), double(r.failed), double(r.missed_clusters), r.mean_paths};
            v.insert(v.end(), r.mean_rmse.begin(), r.mean_rmse.end());
            v.insert(v.end(), r.spread_rmse.begin(), r.spread_rmse.end());
            v.push_back(r.delay_median);
            v.push_back(r.position_rmse);
            v.push_back(r.position_median);
            v.insert(v.end(), r.center_rmse.begin(), r.center_rmse.end());
            v.insert(v.end(), r.map_spread_rmse.begin(), r.map_spread_rmse.end());
            for (std::size_t i = 0; i < v.size(); ++i)
                out << (i ? "," : "") << format_number(v[i]);
            out << '\n';
        }
    }

    void emit_csv(std::span<const MetricRow> rows, const std::string &path, std::span<const std::string> surface_names,
                  SweepAxis axis)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("Cannot open '" + path + "' for writing.");
        write_csv(out, rows, surface_names, axis);
        out.flush();
        if (!out)
            throw std::runtime_error("Failed while writing '" + path + "'.");
    }

    CsvTable parse_csv(const std::string &text)
    {
        CsvTable t;
        std::istringstream in(text);
        std::string line;
        auto split = [](const std::string &l)
        {
            std::vector<std::string> cells;
            std::string cell;
            std::istringstream ls(l);
            while (std::getline(ls, cell, ','))
                cells.push_back(cell);
            if (!l.empty() && l.back() == ',')
                cells.emplace_back();
            return cells;
        };
        if (!std::getline(in, line))
            throw std::invalid_argument("parse_csv: empty input.");
        t.header = split(line);
        while (std::getline(in, line))
        {
            if (line.empty())
                continue;
            const auto cells = split(line);
            if (cells.size() != t.header.size())
                throw std::invalid_argument("parse_csv: row has " + std::to_string(cells.size()) + " cells, header has " +
                                            std::to_string(t.header.size()) + ".");
            std::vector<double> row;
            for (const auto &c : cells)
            {
                double v = 0.0;
                const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
                if (res.ec != std::errc() || res.ptr != c.data() + c.size())
                    throw std::invalid_argument("parse_csv: '" + c + "' is not a number.");
                row.push_back(v);
            }
            t.rows.push_back(std::move(row));
        }
        return t;
    }

} // namespace mmslam
