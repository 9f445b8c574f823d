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

#include "mmslam/estimator.hpp"
#include "mmslam/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mmslam
{
    std::size_t mdl_order(std::span<const double> eigenvalues, double snapshots)
    {
        const std::size_t m = eigenvalues.size();
        if (m < 2)
            throw std::invalid_argument("mdl_order: need at least two eigenvalues.");
        if (!(snapshots > 0.0))
            throw std::invalid_argument("mdl_order: snapshot count must be positive.");
        const double top = std::max(eigenvalues[0], 0.0);
        if (!(top > 0.0))
            return 0;
        // Gram eigenvalues carry round-off of roughly eps * top * dimension; anything below this floor is
        // flattened so that exact low-rank data stays well-posed.
        const double floor = top * 1e-10;
        std::vector<double> l(m);
        for (std::size_t i = 0; i < m; ++i)
            l[i] = std::max(eigenvalues[i], floor);

        std::size_t best = 0;
        double best_cost = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < m; ++k)
        {
            const double n_tail = double(m - k);
            double log_sum = 0.0, sum = 0.0;
            for (std::size_t i = k; i < m; ++i)
            {
                log_sum += std::log(l[i]);
                sum += l[i];
            }
            const double log_ratio = log_sum / n_tail - std::log(sum / n_tail); // log(geo / arith) <= 0
            const double cost = -snapshots * n_tail * log_ratio + 0.5 * double(k) * (2.0 * double(m) - double(k)) * std::log(snapshots);
            if (cost < best_cost)
            {
                best_cost = cost;
                best = k;
            }
        }
        return best;
    }

    RankEstimate mdl_rank(const ComplexTensor &y, std::span<const std::size_t> modes, std::size_t cap)
    {
        RankEstimate out;
        if (modes.empty())
        {
            out.modes.resize(y.order());
            std::iota(out.modes.begin(), out.modes.end(), std::size_t{0});
        }
        else
            out.modes.assign(modes.begin(), modes.end());

        std::size_t overall = 0;
        for (auto r : out.modes)
        {
            if (r >= y.order())
                throw std::out_of_range("mdl_rank: mode index out of range.");
            const std::size_t m = y.dim(r);
            if (m < 2)
                throw std::invalid_argument("mdl_rank: mode " + std::to_string(r) + " has fewer than two entries.");
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mode_gram(y, r), Eigen::EigenvaluesOnly);
            const double snapshots = double(y.size() / m);
            std::vector<double> ev(m);
            for (std::size_t i = 0; i < m; ++i)
                ev[i] = es.eigenvalues()[static_cast<Eigen::Index>(m - 1 - i)] / snapshots;
            const std::size_t k = std::min(mdl_order(ev, snapshots), m - 1);
            out.per_mode.push_back(k);
            out.degenerate.push_back(k == 0);
            overall = std::max(overall, k);
        }
        if (cap > 0)
            overall = std::min(overall, cap);
        out.overall = std::max<std::size_t>(overall, 1);
        return out;
    }

    std::vector<double> shift_invariance_freqs(const Eigen::MatrixXcd &u)
    {
        const Eigen::Index m = u.rows(), p = u.cols();
        if (m < 2 || p < 1)
            throw std::invalid_argument("shift_invariance_freqs: need at least two rows and one column.");
        if (p > m - 1)
            throw std::invalid_argument("shift_invariance_freqs: more columns than the subarray length allows.");
        const Eigen::MatrixXcd u1 = u.topRows(m - 1);
        const Eigen::MatrixXcd u2 = u.bottomRows(m - 1);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(u2);
        cod.setThreshold(1e-10);
        if (cod.rank() < p)
            throw std::runtime_error("shift_invariance_freqs: shifted subarray matrix is rank deficient.");
        const Eigen::MatrixXcd psi = cod.solve(u1);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(psi, false);
        std::vector<double> w;
        for (Eigen::Index i = 0; i < p; ++i)
            w.push_back(wrap_angle(-std::arg(es.eigenvalues()[i])));
        return w;
    }

    std::vector<double> shift_invariance_freqs_per_column(const Eigen::MatrixXcd &u)
    {
        const Eigen::Index m = u.rows();
        if (m < 2)
            throw std::invalid_argument("shift_invariance_freqs_per_column: need at least two rows.");
        std::vector<double> w;
        for (Eigen::Index p = 0; p < u.cols(); ++p)
        {
            const auto c1 = u.col(p).head(m - 1);
            const auto c2 = u.col(p).tail(m - 1);
            const double n2 = c2.squaredNorm();
            if (!(n2 > 0.0))
                throw std::runtime_error("shift_invariance_freqs_per_column: zero column.");
            // psi = (J2 u)^+ (J1 u) = (J2 u)^H (J1 u) / |J2 u|^2
            w.push_back(wrap_angle(-std::arg(c2.dot(c1))));
        }
        return w;
    }

    namespace
    {
        // asin(s) or pi - asin(s), whichever points into the half-space of `boresight`.
        // `offset` rotates the azimuth before building the pointing direction.
        double resolve_azimuth(double s, double elevation, const Vec3 &boresight, double offset)
        {
            const double a0 = std::asin(std::clamp(s, -1.0, 1.0));
            const double a1 = wrap_angle(kPi - a0);
            auto facing = [&](double az)
            {
                const double phys = az + offset;
                return std::cos(phys) * std::sin(elevation) * boresight.x() + std::sin(phys) * std::sin(elevation) * boresight.y() +
                       std::cos(elevation) * boresight.z();
            };
            return facing(a1) > facing(a0) + 1e-15 ? a1 : a0;
        }
    } // namespace

    PathEstimate freqs_to_params(const FreqEstimate &f, double pilot_spacing_hz, const ArrayFrames &frames)
    {
        if (!(pilot_spacing_hz > 0.0))
            throw std::invalid_argument("freqs_to_params: pilot spacing must be positive.");
        constexpr double kMinSin = 1e-6;
        PathEstimate out;

        out.aod_el = std::acos(std::clamp(f.omega[1] / kPi, -1.0, 1.0));
        const double st = std::sin(out.aod_el);
        out.aod_az_indeterminate = st < kMinSin;
        const double s_t = out.aod_az_indeterminate ? 0.0 : f.omega[0] / (kPi * st);
        out.aod_az = resolve_azimuth(s_t, out.aod_el, frames.tx_boresight, 0.0);

        out.aoa_el = std::acos(std::clamp(f.omega[3] / kPi, -1.0, 1.0));
        const double sr = std::sin(out.aoa_el);
        out.aoa_az_indeterminate = sr < kMinSin;
        // The arrival azimuth is measured towards the receiver; the source direction is aoa_az - pi.
        const double s_r = out.aoa_az_indeterminate ? 0.0 : f.omega[2] / (kPi * sr);
        out.aoa_az = resolve_azimuth(s_r, out.aoa_el, frames.rx_boresight, -kPi);
        out.consistent = std::abs(s_t) <= 1.0 + kMaxSineExcess && std::abs(s_r) <= 1.0 + kMaxSineExcess;

        out.delay_m = f.omega[4] / (2.0 * kPi * pilot_spacing_hz) * kSpeedOfLight;
        out.valid_delay = f.omega[4] > 0.0 && f.omega[4] < kPi;
        out.significant = f.significant;
        return out;
    }

    FreqEstimate freq_vector(const PathParams &path, double pilot_spacing_hz)
    {
        FreqEstimate f;
        f.omega[0] = wrap_angle(kPi * std::sin(path.aod_az) * std::sin(path.aod_el));
        f.omega[1] = wrap_angle(kPi * std::cos(path.aod_el));
        f.omega[2] = wrap_angle(kPi * std::sin(path.aoa_az) * std::sin(path.aoa_el));
        f.omega[3] = wrap_angle(kPi * std::cos(path.aoa_el));
        f.omega[4] = 2.0 * kPi * pilot_spacing_hz * path.delay_s;
        f.gain = std::abs(path.gain);
        return f;
    }

    double max_component_congruence(const CpFactors &f, std::size_t modes)
    {
        if (modes > f.factors.size())
            throw std::invalid_argument("max_component_congruence: more modes requested than the model has.");
        double worst = 0.0;
        const auto p = static_cast<Eigen::Index>(f.rank());
        for (Eigen::Index a = 0; a < p; ++a)
            for (Eigen::Index b = a + 1; b < p; ++b)
            {
                double c = 1.0;
                for (std::size_t r = 0; r < modes; ++r)
                {
                    const auto &u = f.factors[r];
                    c *= std::abs(u.col(a).dot(u.col(b))) / (u.col(a).norm() * u.col(b).norm());
                }
                worst = std::max(worst, c);
            }
        return worst;
    }

    CpResult subspace_from_cp(const ComplexTensor &y, std::size_t rank, const CpOptions &opts)
    {
        if (rank == 0)
            throw std::invalid_argument("subspace_from_cp: rank must be at least 1.");
        return cp_als(y, rank, opts);
    }

    EstimationResult estimate_paths(const ComplexTensor &y, const EstimatorOptions &opts)
    {
        if (y.order() < 5)
            throw std::invalid_argument("estimate_paths: observation needs at least five modes.");
        for (std::size_t r = 0; r < 5; ++r)
            if (y.dim(r) < 2)
                throw std::invalid_argument("estimate_paths: modes 1-5 need at least two entries each.");

        EstimationResult out;
        std::size_t cap = opts.rank_cap;
        if (cap == 0)
        {
            cap = y.dim(0);
            for (std::size_t r = 1; r < 4; ++r)
                cap = std::min(cap, y.dim(r));
            cap -= 1;
        }
        if (opts.fixed_rank > 0)
        {
            out.rank.overall = opts.fixed_rank;
        }
        else
            out.rank = mdl_rank(y, {}, cap);

        out.rank_used = out.rank.overall;
        out.cp = subspace_from_cp(y, out.rank_used, opts.cp);
        while (opts.max_congruence < 1.0 && out.rank_used > 1 &&
               max_component_congruence(out.cp.model, 5) > opts.max_congruence)
            out.cp = subspace_from_cp(y, --out.rank_used, opts.cp);
        const auto &model = out.cp.model;
        const double scale = std::sqrt(double(y.size()));
        out.noise_sigma = out.cp.relative_error * frob_norm(y) / scale;
        if (opts.noise_floor_factor > 0.0)
        {
            double dims = 0.0;
            for (auto m : y.shape())
                dims += std::sqrt(double(m));
            out.noise_floor = opts.noise_floor_factor * out.noise_sigma * dims;
        }

        std::array<std::vector<double>, 5> per_mode;
        for (std::size_t r = 0; r < 5; ++r)
            per_mode[r] = shift_invariance_freqs_per_column(model.factors[r]);
        for (std::size_t p = 0; p < model.rank(); ++p)
        {
            FreqEstimate f;
            for (std::size_t r = 0; r < 5; ++r)
                f.omega[r] = per_mode[r][p];
            const double w = std::abs(model.weights[static_cast<Eigen::Index>(p)]);
            f.gain = w / scale;
            f.significant = w >= out.noise_floor;
            out.paths.push_back(f);
        }
        return out;
    }

} // namespace mmslam
