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

#include "mmslam/geometry.hpp"
#include "mmslam/random.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mmslam
{
    namespace
    {
        double wavelength(double carrier_hz)
        {
            if (!(carrier_hz > 0.0))
                throw std::invalid_argument("Carrier frequency must be positive.");
            return kSpeedOfLight / carrier_hz;
        }

        double polar_angle(const Vec3 &d) { return std::acos(std::clamp(d.z() / d.norm(), -1.0, 1.0)); }
    } // namespace

    double wrap_angle(double a) noexcept
    {
        a = std::remainder(a, 2.0 * kPi); // [-pi, pi]
        if (a <= -kPi)
            a += 2.0 * kPi;
        return a;
    }

    void Surface::validate() const
    {
        auto unit = [](const Vec3 &v)
        { return std::abs(v.norm() - 1.0) < 1e-9; };
        if (!center.allFinite() || !normal.allFinite() || !axis_u.allFinite() || !axis_v.allFinite())
            throw std::invalid_argument("Surface '" + name + "': non-finite geometry.");
        if (!unit(normal) || !unit(axis_u) || !unit(axis_v))
            throw std::invalid_argument("Surface '" + name + "': normal and axes must be unit vectors.");
        if (std::abs(normal.dot(axis_u)) > 1e-9 || std::abs(normal.dot(axis_v)) > 1e-9 || std::abs(axis_u.dot(axis_v)) > 1e-9)
            throw std::invalid_argument("Surface '" + name + "': normal and axes must be mutually orthogonal.");
        if (!(extent_u > 0.0) || !(extent_v > 0.0))
            throw std::invalid_argument("Surface '" + name + "': extents must be positive.");
        if (!(scattering_S >= 0.0 && scattering_S <= 1.0))
            throw std::invalid_argument("Surface '" + name + "': scattering coefficient must lie in [0, 1].");
        if (!(roughness_alpha >= 0.0))
            throw std::invalid_argument("Surface '" + name + "': roughness exponent must be non-negative.");
        if (num_scatter_points == 0)
            throw std::invalid_argument("Surface '" + name + "': needs at least one scatter point.");
    }

    bool Surface::contains(const Vec3 &p, double tol) const
    {
        const Vec3 d = p - center;
        return std::abs(d.dot(normal)) <= tol * (1.0 + extent_u + extent_v) &&
               std::abs(d.dot(axis_u)) <= extent_u * (1.0 + 1e-12) + tol &&
               std::abs(d.dot(axis_v)) <= extent_v * (1.0 + 1e-12) + tol;
    }

    PathParams path_from_point(const Vec3 &tx, const Vec3 &rx, const Vec3 &p)
    {
        const Vec3 dt = p - tx;
        const Vec3 dr = p - rx;
        const double nt = dt.norm(), nr = dr.norm();
        if (nt == 0.0 || nr == 0.0)
            throw std::invalid_argument("path_from_point: scatter point coincides with a terminal.");
        PathParams out;
        out.delay_s = (nt + nr) / kSpeedOfLight;
        out.aod_az = std::atan2(dt.y(), dt.x());
        out.aod_el = polar_angle(dt);
        out.aoa_az = wrap_angle(std::atan2(dr.y(), dr.x()) + kPi);
        out.aoa_el = polar_angle(dr);
        out.scatter_point = p;
        return out;
    }

    PathParams los_path(const Vec3 &tx, const Vec3 &rx, double carrier_hz)
    {
        const Vec3 d = rx - tx;
        const double dist = d.norm();
        if (dist == 0.0)
            throw std::invalid_argument("los_path: transmitter and receiver coincide.");
        PathParams out;
        out.cluster_id = kLosCluster;
        out.delay_s = dist / kSpeedOfLight;
        out.aod_az = std::atan2(d.y(), d.x());
        out.aod_el = polar_angle(d);
        out.aoa_az = wrap_angle(std::atan2(-d.y(), -d.x()) + kPi);
        out.aoa_el = polar_angle(-d);
        const double lambda = wavelength(carrier_hz);
        out.gain = std::polar(lambda / (4.0 * kPi * dist), -2.0 * kPi * dist / lambda);
        out.scatter_point = rx;
        return out;
    }

    double scattering_lobe(const Surface &surface, const Vec3 &tx, const Vec3 &rx, const Vec3 &p)
    {
        const Vec3 in = (p - tx).normalized();
        const Vec3 reflected = in - 2.0 * in.dot(surface.normal) * surface.normal;
        const Vec3 out = (rx - p).normalized();
        const double cos_psi = std::clamp(reflected.dot(out), -1.0, 1.0);
        if (surface.roughness_alpha == 0.0)
            return 1.0;
        return std::pow(0.5 * (1.0 + cos_psi), surface.roughness_alpha);
    }

    double jadps(const Surface &surface, const Vec3 &tx, const Vec3 &rx, const Vec3 &p, double carrier_hz)
    {
        if (!surface.contains(p))
            throw std::invalid_argument("jadps: point does not lie on surface '" + surface.name + "'.");
        const double side_t = (tx - surface.center).dot(surface.normal);
        const double side_r = (rx - surface.center).dot(surface.normal);
        if (side_t * side_r <= 0.0)
            return 0.0;
        const double lambda = wavelength(carrier_hz);
        const double dt2 = (p - tx).squaredNorm();
        const double dr2 = (p - rx).squaredNorm();
        const double s2 = surface.scattering_S * surface.scattering_S;
        const double k = lambda * lambda / std::pow(4.0 * kPi, 3);
        return k * s2 * scattering_lobe(surface, tx, rx, p) / (dt2 * dr2);
    }

    Vec3 specular_point(const Surface &surface, const Vec3 &tx, const Vec3 &rx)
    {
        const Vec3 &n = surface.normal;
        const Vec3 image = rx - 2.0 * (rx - surface.center).dot(n) * n;
        const Vec3 d = image - tx;
        const double denom = d.dot(n);
        if (std::abs(denom) < 1e-12)
            throw std::invalid_argument("specular_point: no reflection geometry for surface '" + surface.name + "'.");
        const double t = (surface.center - tx).dot(n) / denom;
        return tx + t * d;
    }

    double total_scattered_power(const Surface &surface, const Vec3 &tx, const Vec3 &rx, double carrier_hz)
    {
        const double cell = surface.area() / double(kQuadratureGrid * kQuadratureGrid);
        double sum = 0.0;
        for (std::size_t i = 0; i < kQuadratureGrid; ++i)
            for (std::size_t j = 0; j < kQuadratureGrid; ++j)
            {
                const double s = -1.0 + (2.0 * double(i) + 1.0) / double(kQuadratureGrid);
                const double t = -1.0 + (2.0 * double(j) + 1.0) / double(kQuadratureGrid);
                sum += jadps(surface, tx, rx, surface.point_at(s, t), carrier_hz);
            }
        return sum * cell;
    }

    std::vector<ScatterPoint> sample_scatter_points_rejection(const Surface &surface, const Vec3 &tx, const Vec3 &rx,
                                                              std::size_t count, std::uint64_t seed, double carrier_hz)
    {
        surface.validate();
        if (count == 0)
            throw std::invalid_argument("Rejection sampling needs at least one point.");

        double peak = 0.0;
        for (std::size_t i = 0; i < kQuadratureGrid; ++i)
            for (std::size_t j = 0; j < kQuadratureGrid; ++j)
            {
                const double s = -1.0 + (2.0 * double(i) + 1.0) / double(kQuadratureGrid);
                const double t = -1.0 + (2.0 * double(j) + 1.0) / double(kQuadratureGrid);
                peak = std::max(peak, jadps(surface, tx, rx, surface.point_at(s, t), carrier_hz));
            }
        if (!(peak > 0.0))
            throw std::runtime_error("Surface '" + surface.name + "' scatters no power towards the receiver.");
        const double envelope = 1.05 * peak;
        const double p_total = total_scattered_power(surface, tx, rx, carrier_hz);
        const double magnitude = std::sqrt(p_total / double(count));

        Rng rng(seed);
        std::uniform_real_distribution<double> sym(-1.0, 1.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);

        constexpr double kMinAcceptance = 1e-4;
        constexpr std::size_t kCheckAfter = 20000;
        std::vector<ScatterPoint> out;
        out.reserve(count);
        std::size_t proposals = 0;
        while (out.size() < count)
        {
            ++proposals;
            const Vec3 p = surface.point_at(sym(rng), sym(rng));
            if (unit(rng) * envelope <= jadps(surface, tx, rx, p, carrier_hz))
                out.push_back({p, std::polar(magnitude, phase(rng))});
            if (proposals >= kCheckAfter && double(out.size()) < kMinAcceptance * double(proposals))
            {
                std::ostringstream msg;
                msg << "Rejection sampling on surface '" << surface.name << "' accepted " << out.size() << " of "
                    << proposals << " proposals; the scattering lobe is too narrow for the quadrature grid.";
                throw std::runtime_error(msg.str());
            }
        }
        return out;
    }

    std::vector<ScatterPoint> sample_scatter_points_uniform(const Surface &surface, const Vec3 &tx, const Vec3 &rx,
                                                            std::size_t count, std::uint64_t seed, double carrier_hz)
    {
        surface.validate();
        Rng rng(seed);
        std::uniform_real_distribution<double> sym(-1.0, 1.0);
        std::normal_distribution<double> n01;
        std::vector<ScatterPoint> out;
        out.reserve(count);
        for (std::size_t l = 0; l < count; ++l)
        {
            const Vec3 p = surface.point_at(sym(rng), sym(rng));
            const double sigma = std::sqrt(0.5 * jadps(surface, tx, rx, p, carrier_hz));
            const double re = n01(rng);
            const double im = n01(rng);
            out.push_back({p, cdouble(sigma * re, sigma * im)});
        }
        return out;
    }

} // namespace mmslam
