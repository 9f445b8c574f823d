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

#ifndef MMSLAM_TENSOR_HPP
#define MMSLAM_TENSOR_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mmslam
{
    using cdouble = std::complex<double>;
    using Shape = std::vector<std::size_t>;

    // Dense complex N-mode array.
    //
    // Storage is column-major over the modes in ascending order: the linear index of
    // entry (i_0, ..., i_{R-1}) is i_0 + M_0 * (i_1 + M_1 * (i_2 + ...)). Mode indices are
    // zero-based throughout the library.
    class ComplexTensor
    {
    public:
        ComplexTensor() = default;
        explicit ComplexTensor(Shape shape);
        ComplexTensor(Shape shape, std::vector<cdouble> data);

        const Shape &shape() const noexcept { return shape_; }
        std::size_t order() const noexcept { return shape_.size(); }
        std::size_t dim(std::size_t mode) const { return shape_.at(mode); }
        std::size_t size() const noexcept { return data_.size(); }

        std::span<const cdouble> data() const noexcept { return data_; }
        std::span<cdouble> data() noexcept { return data_; }

        cdouble &operator[](std::size_t linear) noexcept { return data_[linear]; }
        const cdouble &operator[](std::size_t linear) const noexcept { return data_[linear]; }

        cdouble &at(std::span<const std::size_t> index);
        const cdouble &at(std::span<const std::size_t> index) const;
        std::size_t linear_index(std::span<const std::size_t> index) const;

        ComplexTensor &operator+=(const ComplexTensor &other);
        ComplexTensor &operator-=(const ComplexTensor &other);
        ComplexTensor &operator*=(cdouble scale) noexcept;

        friend bool operator==(const ComplexTensor &, const ComplexTensor &) = default;

    private:
        Shape shape_;
        std::vector<cdouble> data_;
    };

    ComplexTensor operator+(ComplexTensor lhs, const ComplexTensor &rhs);
    ComplexTensor operator-(ComplexTensor lhs, const ComplexTensor &rhs);

    std::size_t shape_product(std::span<const std::size_t> shape) noexcept;

    // r-mode unfolding, M_r x prod_{q != r} M_q.
    // Column ordering: the remaining modes cycle as r+1, r+2, ..., R-1, 0, ..., r-1 with
    // mode r+1 varying fastest. For r = 0 this is a plain reshape of the storage.
    Eigen::MatrixXcd unfold(const ComplexTensor &t, std::size_t mode);

    // Inverse of unfold for the given target shape.
    ComplexTensor fold(const Eigen::MatrixXcd &m, std::size_t mode, const Shape &shape);

    // t x_r U with U of size N_r x M_r.
    ComplexTensor mode_product(const ComplexTensor &t, const Eigen::MatrixXcd &u, std::size_t mode);

    // Stacks equally shaped tensors along a new trailing mode.
    ComplexTensor concat_last(std::span<const ComplexTensor> parts);

    // Slice `index` of the trailing mode (drops that mode unless the tensor is 1-D).
    ComplexTensor slice_last(const ComplexTensor &t, std::size_t index);

    double frob_norm(const ComplexTensor &t) noexcept;
    double frob_norm_squared(const ComplexTensor &t) noexcept;

    // <a, b> = sum conj(a) * b
    cdouble inner_product(const ComplexTensor &a, const ComplexTensor &b);

    // Outer product a_0 o a_1 o ... o a_{R-1}, scaled.
    ComplexTensor outer_product(std::span<const Eigen::VectorXcd> vectors, cdouble scale = 1.0);

} // namespace mmslam

#endif
