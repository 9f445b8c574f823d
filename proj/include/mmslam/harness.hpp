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

#ifndef MMSLAM_HARNESS_HPP
#define MMSLAM_HARNESS_HPP

#include "mmslam/channel.hpp"
#include "mmslam/cluster.hpp"
#include "mmslam/estimator.hpp"
#include "mmslam/scenario.hpp"
#include "mmslam/slam.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace mmslam
{
    struct PipelineOptions
    {
        EstimatorOptions estimator{};
        KMeansOptions kmeans{};
        LosDetector los{};
        PathStrategy strategy{};
    };

    // Harness defaults: fewer ALS sweeps than the library default, noise-floor test and degeneracy refit enabled.
    PipelineOptions default_pipeline_options();

    // Everything produced by one pass of the estimation chain on one observation.
    struct PipelineResult
    {
        EstimationResult estimation;
        std::vector<PathEstimate> resolved;      // one per CP component
        std::optional<std::size_t> los;          // detected direct path (index into resolved)
        std::vector<std::size_t> clustered;      // indices into resolved that went into k-means
        std::vector<FreqVec> cluster_points;     // their frequency vectors
        std::vector<ClusterStats> clusters;      // member indices refer to cluster_points
        std::vector<SelectedPath> selected;
        std::optional<Vec3> position;
        std::string position_error;              // why position is empty
        MapEstimate map;                         // one entry per cluster (empty when positioning failed)
        std::vector<int> map_cluster;            // cluster id of each map entry
    };

    PipelineResult run_pipeline(const ComplexTensor &y, const Scenario &scenario, const PipelineOptions &opts,
                                std::uint64_t seed);

    // Reference statistics of one surface computed from its generated scatter paths.
    struct TruthCluster
    {
        int id = 0;
        PathEstimate mean_params{}; // conversion of the mean frequency vector
        ParamSpread spread_params{};
        Vec3 center = Vec3::Zero();
        Vec3 spread = Vec3::Zero();
        std::size_t size = 0;
    };

    std::vector<TruthCluster> truth_clusters(std::span<const PathParams> truth, const Scenario &scenario);

    // Minimum total |delay difference| assignment; result[i] is the truth index for estimate i,
    // or -1 when there are more estimates than truth clusters.
    std::vector<int> match_clusters(std::span<const double> estimated_delays, std::span<const double> truth_delays);

    enum class SweepAxis
    {
        Snr,   // dB
        Alpha, // roughness of every surface
        S,     // scattering coefficient of every surface
    };

    std::string axis_name(SweepAxis a);
    SweepAxis parse_axis(const std::string &name);

    struct ExperimentSpec
    {
        Scenario scenario;
        SweepAxis axis = SweepAxis::Snr;
        std::vector<double> values;
        std::size_t runs = 50;
        std::uint64_t seed = 1;
        double snr_db = 10.0;    // used when the sweep is not over SNR
        unsigned threads = 0;    // 0: hardware concurrency
        PipelineOptions pipeline = default_pipeline_options();

        void validate() const;
    };

    // Scenario and SNR of one sweep point.
    Scenario scenario_at(const ExperimentSpec &spec, double value);
    double snr_at(const ExperimentSpec &spec, double value);
    std::uint64_t run_seed(std::uint64_t master, std::size_t point, std::size_t run);

    // Errors of one estimated cluster against its matched truth cluster.
    struct ClusterErrors
    {
        int truth_id = 0;
        std::array<double, 5> mean{};   // delay m, then four angles in degrees
        std::array<double, 5> spread{}; // same units
        std::optional<double> center;   // m
        std::optional<double> map_spread; // m
    };

    struct RunRecord
    {
        bool ok = false;
        std::string error;
        std::optional<double> position;        // m
        std::vector<ClusterErrors> clusters;   // matched clusters only
        std::size_t missed = 0;                // truth clusters without an estimate
        std::size_t paths = 0;                 // resolved paths
    };

    RunRecord evaluate_run(const Scenario &scenario, double snr_db, const PipelineOptions &opts, std::uint64_t seed);

    struct MetricRow
    {
        double value = 0.0;
        std::size_t runs = 0;
        std::size_t failed = 0;        // runs that raised an error or gave no position
        std::size_t missed_clusters = 0;
        double mean_paths = 0.0;
        std::array<double, 5> mean_rmse{};
        std::array<double, 5> spread_rmse{};
        double delay_median = 0.0;     // median |delay-mean error|
        double position_rmse = 0.0;
        double position_median = 0.0;
        std::vector<double> center_rmse; // per surface
        std::vector<double> map_spread_rmse;
    };

    std::vector<MetricRow> run_experiment(const ExperimentSpec &spec);

    // sqrt(mean(x^2)); throws on empty input.
    double rmse(std::span<const double> errors);
    double median(std::vector<double> values);

    // Wrapped difference a - b in (-pi, pi].
    double angle_diff(double a, double b);

    std::vector<std::string> csv_header(std::span<const std::string> surface_names, SweepAxis axis);
    void write_csv(std::ostream &out, std::span<const MetricRow> rows, std::span<const std::string> surface_names,
                   SweepAxis axis);
    void emit_csv(std::span<const MetricRow> rows, const std::string &path, std::span<const std::string> surface_names,
                  SweepAxis axis);

    // Shortest round-trip decimal form, independent of the C locale; "nan" and "inf" for non-finite values.
    std::string format_number(double v);

    struct CsvTable
    {
        std::vector<std::string> header;
        std::vector<std::vector<double>> rows;
    };

    CsvTable parse_csv(const std::string &text);

} // namespace mmslam

#endif
