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

#include "mmslam/channel.hpp"
#include "mmslam/random.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mmslam
{
    Eigen::VectorXcd steering_vector(double omega, std::size_t length)
    {
        if (length == 0)
            throw std::invalid_argument("steering_vector: length must be positive.");
        Eigen::VectorXcd a(static_cast<Eigen::Index>(length));
        for (Eigen::Index m = 0; m < a.size(); ++m)
            a[m] = std::polar(1.0, double(m) * omega);
        return a;
    }

    SpatialFreqs freqs_from_path(const PathParams &path, double pilot_spacing_hz)
    {
        SpatialFreqs f;
        f.omega[0] = wrap_angle(kPi * std::sin(path.aod_az) * std::sin(path.aod_el));
        f.omega[1] = wrap_angle(kPi * std::cos(path.aod_el));
        f.omega[2] = wrap_angle(kPi * std::sin(path.aoa_az) * std::sin(path.aoa_el));
        f.omega[3] = wrap_angle(kPi * std::cos(path.aoa_el));
        f.omega[4] = 2.0 * kPi * pilot_spacing_hz * path.delay_s;
        if (!(f.omega[4] > 0.0 && f.omega[4] < kPi))
        {
            std::ostringstream msg;
            msg << "Path delay " << path.delay_m() << " m aliases on the pilot grid (delay frequency " << f.omega[4]
                << " rad, pilot spacing " << pilot_spacing_hz << " Hz).";
            throw std::invalid_argument(msg.str());
        }
        return f;
    }

    CpFactors channel_cp_model(std::span<const PathParams> paths, const Scenario &scenario)
    {
        if (paths.empty())
            throw std::invalid_argument("synth_channel: no paths.");
        const Shape shape = scenario.channel_shape();
        const auto rank = static_cast<Eigen::Index>(paths.size());
        CpFactors f;
        for (auto m : shape)
            f.factors.emplace_back(static_cast<Eigen::Index>(m), rank);
        f.weights.resize(rank);
        for (Eigen::Index p = 0; p < rank; ++p)
        {
            const auto w = freqs_from_path(paths[static_cast<std::size_t>(p)], scenario.pilot_spacing_hz);
            double scale = 1.0;
            for (std::size_t r = 0; r < 5; ++r)
            {
                f.factors[r].col(p) = steering_vector(w[r], shape[r]) / std::sqrt(double(shape[r]));
                scale *= std::sqrt(double(shape[r]));
            }
            f.weights[p] = paths[static_cast<std::size_t>(p)].gain * scale;
        }
        return f;
    }

    ComplexTensor synth_channel(std::span<const PathParams> paths, const Scenario &scenario)
    {
        return reconstruct(channel_cp_model(paths, scenario));
    }

    ComplexTensor augment_snapshots(const ComplexTensor &h, std::size_t snapshots)
    {
        if (snapshots == 0)
            throw std::invalid_argument("augment_snapshots: need at least one snapshot.");
        std::vector<ComplexTensor> copies(snapshots, h);
        return concat_last(copies);
    }

    double snr_db_of(const ComplexTensor &y, const ComplexTensor &noise)
    {
        const double n2 = frob_norm_squared(noise);
        if (n2 == 0.0)
            return NoiseSpec::kNoiseless;
        return 10.0 * std::log10(frob_norm_squared(y - noise) / n2);
    }

    NoisyObservation add_noise(const ComplexTensor &y0, const NoiseSpec &spec)
    {
        const double s2 = frob_norm_squared(y0);
        if (!(s2 > 0.0))
            throw std::invalid_argument("add_noise: signal tensor is identically zero.");
        if (std::isnan(spec.snr_db))
            throw std::invalid_argument("add_noise: SNR is NaN.");

        NoisyObservation out{y0, ComplexTensor(y0.shape()), NoiseSpec::kNoiseless};
        if (std::isinf(spec.snr_db) && spec.snr_db > 0.0)
            return out;

        const double snr_lin = std::pow(10.0, spec.snr_db / 10.0);
        const double sigma = std::sqrt(s2 / (snr_lin * double(y0.size())) / 2.0); // per real component
        Rng rng(spec.seed);
        std::normal_distribution<double> n01;
        auto n = out.noise.data();
        for (auto &v : n)
        {
            const double re = n01(rng);
            const double im = n01(rng);
            v = {sigma * re, sigma * im};
        }
        out.y += out.noise;
        out.realized_snr_db = snr_db_of(out.y, out.noise);
        return out;
    }

    Eigen::MatrixXcd apply_pilots(const Eigen::MatrixXcd &y, const Eigen::MatrixXcd &pilots)
    {
        if (y.cols() != pilots.cols())
            throw std::invalid_argument("apply_pilots: observation and pilot block lengths differ.");
        const Eigen::MatrixXcd g = pilots * pilots.adjoint();
        const double c = g.diagonal().real().mean();
        if (!(c > 0.0))
            throw std::invalid_argument("apply_pilots: pilot matrix is zero.");
        const Eigen::MatrixXcd dev = g - c * Eigen::MatrixXcd::Identity(g.rows(), g.cols());
        if (dev.norm() > 1e-9 * c * std::sqrt(double(g.rows())))
            throw std::invalid_argument("apply_pilots: pilots are not orthogonal (S S^H is not a scaled identity).");
        return y * pilots.adjoint() / c;
    }

} // namespace mmslam
