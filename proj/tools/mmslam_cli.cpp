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

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

using namespace mmslam;

namespace
{
    double parse_value(const std::string &text)
    {
        if (text == "inf" || text == "+inf")
            return std::numeric_limits<double>::infinity();
        double v = 0.0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size())
            throw std::invalid_argument("'" + text + "' is not a number.");
        return v;
    }

    // axis=v1,v2,...
    void parse_sweep(const std::string &text, ExperimentSpec &spec)
    {
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--sweep expects <axis>=<v1>,<v2>,... (for example snr=-10,0,10).");
        spec.axis = parse_axis(text.substr(0, eq));
        std::stringstream ss(text.substr(eq + 1));
        std::string item;
        spec.values.clear();
        while (std::getline(ss, item, ','))
            spec.values.push_back(parse_value(item));
        if (spec.values.empty())
            throw std::invalid_argument("--sweep lists no values.");
    }

    constexpr double kDeg = 180.0 / kPi;

    void dump_paths(const PipelineResult &r, const std::string &path)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("Cannot open '" + path + "' for writing.");
        out << "index,omega1,omega2,omega3,omega4,omega5,gain,delay_m,aod_az_deg,aod_el_deg,aoa_az_deg,aoa_el_deg,"
               "usable,los,cluster\n";
        std::vector<int> cluster(r.resolved.size(), -1);
        for (const auto &c : r.clusters)
            for (auto m : c.members)
                cluster[r.clustered[m]] = static_cast<int>(c.id);
        for (std::size_t i = 0; i < r.resolved.size(); ++i)
        {
            const auto &f = r.estimation.paths[i];
            const auto &p = r.resolved[i];
            out << i;
            for (double w : f.omega)
                out << ',' << format_number(w);
            out << ',' << format_number(f.gain) << ',' << format_number(p.delay_m) << ',' << format_number(p.aod_az * kDeg)
                << ',' << format_number(p.aod_el * kDeg) << ',' << format_number(p.aoa_az * kDeg) << ','
                << format_number(p.aoa_el * kDeg) << ',' << int(p.usable()) << ',' << int(r.los && *r.los == i) << ','
                << cluster[i] << '\n';
        }
        if (!out)
            throw std::runtime_error("Failed while writing '" + path + "'.");
    }

    std::string vec_str(const Vec3 &v)
    {
        return "[" + format_number(v.x()) + ", " + format_number(v.y()) + ", " + format_number(v.z()) + "]";
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"mmslam: tensor-based channel estimation, positioning and mapping from diffuse multipath"};
    app.require_subcommand(1);

    std::string config, sweep = "snr=-10,0,10", strategy = "all-paths", out = "results.csv", dump;
    std::size_t runs = 50;
    std::uint64_t seed = 1;
    double snr = 10.0;
    unsigned threads = 0;

    auto *sim = app.add_subcommand("simulate", "Monte-Carlo sweep; writes one CSV row per sweep point");
    sim->add_option("--config", config, "Scenario YAML file")->required()->check(CLI::ExistingFile);
    sim->add_option("--sweep", sweep, "Sweep axis and values, e.g. snr=-10,0,10, alpha=0,10,20 or S=0.4,0.6")
        ->capture_default_str();
    sim->add_option("--runs", runs, "Independent runs per sweep point")->capture_default_str()->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed, "Master seed")->capture_default_str();
    sim->add_option("--strategy", strategy, "mean, shortest, all-paths, first-<n>, los-only or los+<strategy>")
        ->capture_default_str();
    sim->add_option("--snr", snr, "SNR in dB when the sweep is over alpha or S")->capture_default_str();
    sim->add_option("--threads", threads, "Worker threads (0: all cores)")->capture_default_str();
    sim->add_option("--out", out, "Output CSV path")->capture_default_str();

    std::string snr_text = "10";
    auto *once = app.add_subcommand("estimate-once", "Single realisation; prints the position and cluster summary");
    once->add_option("--config", config, "Scenario YAML file")->required()->check(CLI::ExistingFile);
    once->add_option("--snr", snr_text, "SNR in dB (inf for noiseless)")->capture_default_str();
    once->add_option("--seed", seed, "Seed")->capture_default_str();
    once->add_option("--strategy", strategy, "Path selection strategy")->capture_default_str();
    once->add_option("--dump-paths", dump, "Write per-path frequencies and parameters to this CSV");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        return app.exit(e);
    }

    try
    {
        const Scenario scenario = load_scenario(config);
        std::vector<std::string> names;
        for (const auto &s : scenario.surfaces)
            names.push_back(s.name);

        if (*sim)
        {
            ExperimentSpec spec;
            spec.scenario = scenario;
            parse_sweep(sweep, spec);
            spec.runs = runs;
            spec.seed = seed;
            spec.snr_db = snr;
            spec.threads = threads;
            spec.pipeline.strategy = PathStrategy::parse(strategy);
            const auto rows = run_experiment(spec);
            emit_csv(rows, out, names, spec.axis);
            std::size_t failed = 0;
            for (const auto &r : rows)
                failed += r.failed;
            std::cout << "wrote " << rows.size() << " rows to " << out << " (" << failed << " failed runs)\n";
            return 0;
        }

        PipelineOptions opts = default_pipeline_options();
        opts.strategy = PathStrategy::parse(strategy);
        const double snr_db = parse_value(snr_text);
        const auto truth = build_truth(scenario, mix_seed({seed, 1}));
        const auto y0 = augment_snapshots(synth_channel(truth, scenario), scenario.num_snapshots);
        const auto obs = add_noise(y0, {snr_db, mix_seed({seed, 2})});
        const auto r = run_pipeline(obs.y, scenario, opts, seed);

        std::cout << "paths resolved: " << r.resolved.size() << " (CP relative error "
                  << format_number(r.estimation.cp.relative_error) << ")\n";
        std::cout << "direct path: " << (r.los ? "index " + std::to_string(*r.los) : std::string("not detected")) << "\n";
        for (const auto &c : r.clusters)
            std::cout << "cluster " << c.id << ": " << c.members.size() << " paths, mean delay "
                      << format_number(c.mean_params.delay_m) << " m\n";
        if (r.position)
            std::cout << "position: " << vec_str(*r.position) << " (error " << format_number((*r.position - scenario.rx).norm())
                      << " m)\n";
        else
            std::cout << "position: unavailable (" << r.position_error << ")\n";
        for (std::size_t i = 0; i < r.map.clusters.size(); ++i)
            std::cout << "map cluster " << r.map_cluster[i] << ": center " << vec_str(r.map.clusters[i].center)
                      << ", spread " << vec_str(r.map.clusters[i].spread) << "\n";
        if (!dump.empty())
            dump_paths(r, dump);
        return 0;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
