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

#include "mmslam/scenario.hpp"
#include "mmslam/random.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mmslam
{
    Shape Scenario::channel_shape() const
    {
        return {array[0], array[1], array[2], array[3], num_pilots};
    }

    Shape Scenario::observation_shape() const
    {
        Shape s = channel_shape();
        s.push_back(num_snapshots);
        return s;
    }

    void Scenario::validate() const
    {
        if (!tx.allFinite() || !rx.allFinite())
            throw std::invalid_argument("Scenario: terminal positions must be finite.");
        if ((tx - rx).norm() == 0.0)
            throw std::invalid_argument("Scenario: transmitter and receiver coincide.");
        if (tx_boresight.x() == 0.0 || rx_boresight.x() == 0.0)
            throw std::invalid_argument("Scenario: boresights must have a non-zero x component (arrays lie in the y-z plane).");
        for (auto m : array)
            if (m < 2)
                throw std::invalid_argument("Scenario: every array dimension needs at least two elements.");
        if (num_pilots < 2)
            throw std::invalid_argument("Scenario: at least two pilot subcarriers are required.");
        if (num_snapshots < 1)
            throw std::invalid_argument("Scenario: at least one snapshot is required.");
        if (!(carrier_hz > 0.0) || !(pilot_spacing_hz > 0.0))
            throw std::invalid_argument("Scenario: carrier and pilot spacing must be positive.");
        if (surfaces.empty() && !include_los)
            throw std::invalid_argument("Scenario: no surfaces and no direct path.");
        for (const auto &s : surfaces)
            s.validate();
    }

    std::vector<PathParams> build_truth(const Scenario &scenario, std::uint64_t seed)
    {
        scenario.validate();
        std::vector<PathParams> paths;
        if (scenario.include_los)
            paths.push_back(los_path(scenario.tx, scenario.rx, scenario.carrier_hz));
        for (std::size_t k = 0; k < scenario.surfaces.size(); ++k)
        {
            const Surface &surface = scenario.surfaces[k];
            const std::uint64_t s = mix_seed({seed, 0x5ca7ULL, k});
            const auto points = scenario.sampler == ScatterSampler::Rejection
                                    ? sample_scatter_points_rejection(surface, scenario.tx, scenario.rx,
                                                                      surface.num_scatter_points, s, scenario.carrier_hz)
                                    : sample_scatter_points_uniform(surface, scenario.tx, scenario.rx,
                                                                    surface.num_scatter_points, s, scenario.carrier_hz);
            for (const auto &sp : points)
            {
                PathParams p = path_from_point(scenario.tx, scenario.rx, sp.point);
                p.cluster_id = static_cast<int>(k);
                p.gain = sp.gain;
                paths.push_back(p);
            }
        }
        return paths;
    }

    Scenario reference_scenario(bool include_los, double scattering_S, double roughness_alpha, std::size_t points_per_surface)
    {
        Scenario s;
        s.include_los = include_los;

        Surface facade;
        facade.name = "facade";
        facade.center = {10.0, 10.0, 5.0};
        facade.normal = {0.0, 1.0, 0.0};
        facade.axis_u = {1.0, 0.0, 0.0};
        facade.axis_v = {0.0, 0.0, 1.0};
        facade.extent_u = 10.0;
        facade.extent_v = 5.0;
        facade.scattering_S = scattering_S;
        facade.roughness_alpha = roughness_alpha;
        facade.num_scatter_points = points_per_surface;

        Surface ground;
        ground.name = "ground";
        ground.center = {10.0, 0.0, 0.0};
        ground.normal = {0.0, 0.0, 1.0};
        ground.axis_u = {1.0, 0.0, 0.0};
        ground.axis_v = {0.0, 1.0, 0.0};
        ground.extent_u = 10.0;
        ground.extent_v = 10.0;
        ground.scattering_S = scattering_S;
        ground.roughness_alpha = roughness_alpha;
        ground.num_scatter_points = points_per_surface;

        s.surfaces = {facade, ground};
        return s;
    }

    namespace
    {
        void reject_unknown_keys(const YAML::Node &node, const std::set<std::string> &allowed, const std::string &where)
        {
            for (const auto &kv : node)
            {
                const auto key = kv.first.as<std::string>();
                if (!allowed.contains(key))
                    throw std::invalid_argument("Unknown key '" + key + "' in " + where + ".");
            }
        }

        Vec3 read_vec3(const YAML::Node &node, const std::string &what)
        {
            if (!node.IsSequence() || node.size() != 3)
                throw std::invalid_argument("'" + what + "' must be a list of three numbers.");
            return {node[0].as<double>(), node[1].as<double>(), node[2].as<double>()};
        }

        template <typename T>
        void read_opt(const YAML::Node &node, const char *key, T &dst)
        {
            if (node[key])
                dst = node[key].as<T>();
        }

        Surface read_surface(const YAML::Node &node, std::size_t index)
        {
            const std::string where = "surface #" + std::to_string(index);
            reject_unknown_keys(node,
                                {"name", "center", "normal", "axis_u", "axis_v", "extent_u", "extent_v", "scattering_S",
                                 "roughness_alpha", "num_scatter_points"},
                                where);
            Surface s;
            s.name = "surface" + std::to_string(index);
            read_opt(node, "name", s.name);
            for (const char *key : {"center", "normal", "axis_u", "axis_v"})
                if (!node[key])
                    throw std::invalid_argument(where + " is missing '" + key + "'.");
            s.center = read_vec3(node["center"], "center");
            s.normal = read_vec3(node["normal"], "normal").normalized();
            s.axis_u = read_vec3(node["axis_u"], "axis_u").normalized();
            s.axis_v = read_vec3(node["axis_v"], "axis_v").normalized();
            read_opt(node, "extent_u", s.extent_u);
            read_opt(node, "extent_v", s.extent_v);
            read_opt(node, "scattering_S", s.scattering_S);
            read_opt(node, "roughness_alpha", s.roughness_alpha);
            read_opt(node, "num_scatter_points", s.num_scatter_points);
            s.validate();
            return s;
        }
    } // namespace

    Scenario parse_scenario(const std::string &yaml_text)
    {
        YAML::Node root;
        try
        {
            root = YAML::Load(yaml_text);
        }
        catch (const YAML::Exception &e)
        {
            throw std::invalid_argument(std::string("Malformed scenario file: ") + e.what());
        }
        const YAML::Node node = root["scenario"];
        if (!node || !node.IsMap())
            throw std::invalid_argument("Scenario file needs a top-level 'scenario' section.");
        reject_unknown_keys(node,
                            {"tx", "rx", "tx_boresight", "rx_boresight", "include_los", "carrier_hz", "pilot_spacing_hz",
                             "array", "num_pilots", "num_snapshots", "sampler", "surfaces"},
                            "scenario section");
        try
        {
            Scenario s;
            s.surfaces.clear();
            if (node["tx"])
                s.tx = read_vec3(node["tx"], "tx");
            if (node["rx"])
                s.rx = read_vec3(node["rx"], "rx");
            if (node["tx_boresight"])
                s.tx_boresight = read_vec3(node["tx_boresight"], "tx_boresight").normalized();
            if (node["rx_boresight"])
                s.rx_boresight = read_vec3(node["rx_boresight"], "rx_boresight").normalized();
            read_opt(node, "include_los", s.include_los);
            read_opt(node, "carrier_hz", s.carrier_hz);
            read_opt(node, "pilot_spacing_hz", s.pilot_spacing_hz);
            read_opt(node, "num_pilots", s.num_pilots);
            read_opt(node, "num_snapshots", s.num_snapshots);
            if (const auto a = node["array"])
            {
                if (!a.IsSequence() || a.size() != 4)
                    throw std::invalid_argument("'array' must list four sizes [M1, M2, M3, M4].");
                for (std::size_t i = 0; i < 4; ++i)
                    s.array[i] = a[i].as<std::size_t>();
            }
            if (const auto smp = node["sampler"])
            {
                const auto name = smp.as<std::string>();
                if (name == "rejection")
                    s.sampler = ScatterSampler::Rejection;
                else if (name == "uniform")
                    s.sampler = ScatterSampler::Uniform;
                else
                    throw std::invalid_argument("Unknown sampler '" + name + "' (expected rejection or uniform).");
            }
            if (const auto surfaces = node["surfaces"])
            {
                if (!surfaces.IsSequence())
                    throw std::invalid_argument("'surfaces' must be a list.");
                for (std::size_t i = 0; i < surfaces.size(); ++i)
                    s.surfaces.push_back(read_surface(surfaces[i], i));
            }
            s.validate();
            return s;
        }
        catch (const YAML::Exception &e)
        {
            throw std::invalid_argument(std::string("Invalid scenario value: ") + e.what());
        }
    }

    Scenario load_scenario(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("Cannot open scenario file '" + path + "'.");
        std::stringstream buf;
        buf << in.rdbuf();
        return parse_scenario(buf.str());
    }

} // namespace mmslam
