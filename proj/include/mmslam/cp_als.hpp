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

#ifndef MMSLAM_CP_ALS_HPP
#define MMSLAM_CP_ALS_HPP

#include "mmslam/tensor.hpp"

#include <cstdint>
#include <vector>

namespace mmslam
{
    // Rank-P CP model  X = sum_p w_p a_p^(0) o a_p^(1) o ... o a_p^(R-1).
    // Columns of every factor are kept at unit 2-norm by cp_als; the scale lives in `weights`.
    struct CpFactors
    {
        std::vector<Eigen::MatrixXcd> factors; // factors[r] is M_r x P
        Eigen::VectorXcd weights;              // length P

        std::size_t rank() const noexcept { return static_cast<std::size_t>(weights.size()); }
        Shape shape() const;
        void validate() const;
    };

    ComplexTensor reconstruct(const CpFactors &f);

    enum class CpInit
    {
        Gevd,   // algebraic start from two full-rank modes, exact on noiseless data; falls back to Svd
        Svd,    // leading left singular vectors of each unfolding
        Random, // complex Gaussian columns
    };

    struct CpOptions
    {
        int max_iters = 500;
        double tol = 1e-8;      // stop when the relative change of the reconstruction error drops below tol
        int restarts = 1;       // restart 0 uses `init`, later restarts use random starts
        std::uint64_t seed = 0; // drives the random starts
        CpInit init = CpInit::Svd;
        bool record_history = false;
        bool line_search = false; // extrapolate along each sweep's update, kept only when the error drops
    };

    struct CpResult
    {
        CpFactors model;
        double relative_error = 0.0; // ||X - reconstruct(model)||_F / ||X||_F
        int iterations = 0;          // sweeps used by the selected restart
        bool converged = false;
        std::size_t best_restart = 0;
        double condition = 1.0;            // largest condition number of the normal equations in the final sweep
        std::vector<double> error_history; // relative error after each sweep (selected restart), if requested
    };

    // Alternating least squares. Deterministic for a given seed; the restart with the lowest
    // error is returned (ties go to the lower restart index).
    CpResult cp_als(const ComplexTensor &t, std::size_t rank, const CpOptions &opts = {});

    // Gram matrix X_(r) X_(r)^H of the r-mode unfolding, computed without materialising it.
    Eigen::MatrixXcd mode_gram(const ComplexTensor &t, std::size_t mode);

} // namespace mmslam

#endif
