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

#ifndef MMSLAM_TEST_UTIL_HPP
#define MMSLAM_TEST_UTIL_HPP

#include "mmslam/cp_als.hpp"
#include "mmslam/random.hpp"
#include "mmslam/tensor.hpp"

#include <Eigen/Dense>

namespace mmslam::test
{
    inline ComplexTensor random_tensor(const Shape &shape, std::uint64_t seed)
    {
        Rng rng(seed);
        std::normal_distribution<double> n;
        ComplexTensor t(shape);
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = {n(rng), n(rng)};
        return t;
    }

    inline Eigen::MatrixXcd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
    {
        Rng rng(seed);
        std::normal_distribution<double> n;
        Eigen::MatrixXcd m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i)
                m(i, j) = {n(rng), n(rng)};
        return m;
    }

    // Random rank-P model with unit-norm columns and weights of modulus in [1, 2].
    inline CpFactors random_cp(const Shape &shape, std::size_t rank, std::uint64_t seed)
    {
        CpFactors f;
        for (std::size_t r = 0; r < shape.size(); ++r)
        {
            Eigen::MatrixXcd a = random_matrix(Eigen::Index(shape[r]), Eigen::Index(rank), mix_seed({seed, r}));
            a.colwise().normalize();
            f.factors.push_back(a);
        }
        Rng rng(mix_seed({seed, 99}));
        std::uniform_real_distribution<double> mag(1.0, 2.0), ph(-3.0, 3.0);
        f.weights.resize(Eigen::Index(rank));
        for (Eigen::Index p = 0; p < f.weights.size(); ++p)
            f.weights(p) = std::polar(mag(rng), ph(rng));
        return f;
    }

    inline double rel_diff(const ComplexTensor &a, const ComplexTensor &b) { return frob_norm(a - b) / frob_norm(b); }
} // namespace mmslam::test

#endif
