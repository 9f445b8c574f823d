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

#ifndef MMSLAM_GEOMETRY_HPP
#define MMSLAM_GEOMETRY_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace mmslam
{
    using Vec3 = Eigen::Vector3d;
    using cdouble = std::complex<double>;

    inline constexpr double kSpeedOfLight = 299792458.0; // m/s
    inline constexpr double kPi = 3.14159265358979323846;

    // Wraps to (-pi, pi].
    double wrap_angle(double a) noexcept;

    // Rectangular planar patch: center + s * extent_u * axis_u + t * extent_v * axis_v, s,t in [-1, 1].
    struct Surface
    {
        std::string name;
        Vec3 center = Vec3::Zero();
        Vec3 normal = Vec3::UnitZ();
        Vec3 axis_u = Vec3::UnitX();
        Vec3 axis_v = Vec3::UnitY();
        double extent_u = 1.0; // half-length along axis_u, m
        double extent_v = 1.0; // half-length along axis_v, m
        double scattering_S = 0.6;
        double roughness_alpha = 10.0;
        std::size_t num_scatter_points = 100;

        void validate() const;
        Vec3 point_at(double s, double t) const { return center + s * extent_u * axis_u + t * extent_v * axis_v; }
        double area() const noexcept { return 4.0 * extent_u * extent_v; }
        bool contains(const Vec3 &p, double tol = 1e-6) const;
    };

    inline constexpr int kLosCluster = -1;

    // Geometric truth of one propagation path. Angles follow the transmitter/receiver conventions:
    //   aod_az = atan2(y_p - y_T, x_p - x_T),        aod_el = acos((z_p - z_T) / |p - T|)
    //   aoa_az = atan2(y_p - y_R, x_p - x_R) + pi,   aoa_el = acos((z_p - z_R) / |p - R|)
    // with azimuths wrapped to (-pi, pi]. For the direct path p is the opposite terminal.
    struct PathParams
    {
        int cluster_id = kLosCluster;
        double delay_s = 0.0;
        double aod_az = 0.0;
        double aod_el = 0.0;
        double aoa_az = 0.0;
        double aoa_el = 0.0;
        cdouble gain{};
        Vec3 scatter_point = Vec3::Zero();

        bool is_los() const noexcept { return cluster_id == kLosCluster; }
        double delay_m() const noexcept { return delay_s * kSpeedOfLight; }
    };

    PathParams path_from_point(const Vec3 &tx, const Vec3 &rx, const Vec3 &p);

    // Direct path. Gain follows free-space amplitude lambda / (4 pi d) with the carrier phase.
    PathParams los_path(const Vec3 &tx, const Vec3 &rx, double carrier_hz = 28e9);

    // Diffuse scattered power density (W per m^2 of surface, relative to unit transmit power) at
    // surface point p:
    //   lambda^2 / (4 pi)^3 * S^2 * ((1 + cos psi) / 2)^alpha / (d_T^2 d_R^2)
    // where psi is the angle between the specular reflection of the incident ray at p and the
    // direction p -> rx. Zero when tx and rx lie on opposite sides of the surface.
    double jadps(const Surface &surface, const Vec3 &tx, const Vec3 &rx, const Vec3 &p, double carrier_hz = 28e9);

    // The directivity factor ((1 + cos psi) / 2)^alpha alone.
    double scattering_lobe(const Surface &surface, const Vec3 &tx, const Vec3 &rx, const Vec3 &p);

    // Point on the surface plane where the mirror path tx -> p -> rx reflects (image method).
    Vec3 specular_point(const Surface &surface, const Vec3 &tx, const Vec3 &rx);

    inline constexpr std::size_t kQuadratureGrid = 64;

    // Midpoint-rule integral of jadps over the surface (64 x 64 cells).
    double total_scattered_power(const Surface &surface, const Vec3 &tx, const Vec3 &rx, double carrier_hz = 28e9);

    struct ScatterPoint
    {
        Vec3 point;
        cdouble gain;
    };

    // Points i.i.d. with density proportional to jadps; equal gain magnitudes sqrt(P_total / L)
    // with uniform phases.
    std::vector<ScatterPoint> sample_scatter_points_rejection(const Surface &surface, const Vec3 &tx, const Vec3 &rx,
                                                              std::size_t count, std::uint64_t seed,
                                                              double carrier_hz = 28e9);

    // Points uniform on the surface; circular Gaussian gains with E|g|^2 = jadps(point).
    std::vector<ScatterPoint> sample_scatter_points_uniform(const Surface &surface, const Vec3 &tx, const Vec3 &rx,
                                                            std::size_t count, std::uint64_t seed,
                                                            double carrier_hz = 28e9);

} // namespace mmslam

#endif
