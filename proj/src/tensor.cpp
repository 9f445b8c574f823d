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

#include "mmslam/tensor.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace mmslam
{
    namespace
    {
        void check_shape(const Shape &shape)
        {
            if (shape.empty())
                throw std::invalid_argument("Tensor must have at least one mode.");
            for (auto m : shape)
                if (m == 0)
                    throw std::invalid_argument("Tensor mode sizes must be positive.");
        }

        void check_mode(const ComplexTensor &t, std::size_t mode)
        {
            if (mode >= t.order())
                throw std::out_of_range("Mode index " + std::to_string(mode) + " out of range for tensor of order " +
                                        std::to_string(t.order()) + ".");
        }

        // Column strides of the r-mode unfolding, indexed by mode (the entry for `mode` is unused).
        std::vector<std::size_t> unfolding_strides(const Shape &shape, std::size_t mode)
        {
            const std::size_t order = shape.size();
            std::vector<std::size_t> stride(order, 0);
            std::size_t s = 1;
            for (std::size_t k = 1; k < order; ++k)
            {
                const std::size_t q = (mode + k) % order;
                stride[q] = s;
                s *= shape[q];
            }
            return stride;
        }

        // Calls f(linear, row, col) for every entry, in storage order.
        template <typename F>
        void for_each_unfolded(const Shape &shape, std::size_t mode, F &&f)
        {
            const auto stride = unfolding_strides(shape, mode);
            const std::size_t order = shape.size();
            const std::size_t total = shape_product(shape);
            std::vector<std::size_t> idx(order, 0);
            std::size_t col = 0;
            for (std::size_t linear = 0; linear < total; ++linear)
            {
                f(linear, idx[mode], col);
                for (std::size_t q = 0; q < order; ++q)
                {
                    if (++idx[q] < shape[q])
                    {
                        col += stride[q];
                        break;
                    }
                    col -= stride[q] * (shape[q] - 1);
                    idx[q] = 0;
                }
            }
        }
    } // namespace

    std::size_t shape_product(std::span<const std::size_t> shape) noexcept
    {
        return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
    }

    ComplexTensor::ComplexTensor(Shape shape) : shape_(std::move(shape))
    {
        check_shape(shape_);
        data_.assign(shape_product(shape_), cdouble{});
    }

    ComplexTensor::ComplexTensor(Shape shape, std::vector<cdouble> data) : shape_(std::move(shape)), data_(std::move(data))
    {
        check_shape(shape_);
        if (data_.size() != shape_product(shape_))
            throw std::invalid_argument("Tensor data length does not match the product of its mode sizes.");
    }

    std::size_t ComplexTensor::linear_index(std::span<const std::size_t> index) const
    {
        if (index.size() != shape_.size())
            throw std::invalid_argument("Index rank does not match tensor order.");
        std::size_t linear = 0;
        for (std::size_t q = shape_.size(); q-- > 0;)
        {
            if (index[q] >= shape_[q])
                throw std::out_of_range("Tensor index out of range.");
            linear = linear * shape_[q] + index[q];
        }
        return linear;
    }

    cdouble &ComplexTensor::at(std::span<const std::size_t> index) { return data_[linear_index(index)]; }
    const cdouble &ComplexTensor::at(std::span<const std::size_t> index) const { return data_[linear_index(index)]; }

    ComplexTensor &ComplexTensor::operator+=(const ComplexTensor &other)
    {
        if (other.shape_ != shape_)
            throw std::invalid_argument("Tensor shape mismatch in addition.");
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] += other.data_[i];
        return *this;
    }

    ComplexTensor &ComplexTensor::operator-=(const ComplexTensor &other)
    {
        if (other.shape_ != shape_)
            throw std::invalid_argument("Tensor shape mismatch in subtraction.");
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] -= other.data_[i];
        return *this;
    }

    ComplexTensor &ComplexTensor::operator*=(cdouble scale) noexcept
    {
        for (auto &v : data_)
            v *= scale;
        return *this;
    }

    ComplexTensor operator+(ComplexTensor lhs, const ComplexTensor &rhs) { return lhs += rhs; }
    ComplexTensor operator-(ComplexTensor lhs, const ComplexTensor &rhs) { return lhs -= rhs; }

    Eigen::MatrixXcd unfold(const ComplexTensor &t, std::size_t mode)
    {
        check_mode(t, mode);
        const std::size_t rows = t.dim(mode);
        Eigen::MatrixXcd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(t.size() / rows));
        const auto data = t.data();
        for_each_unfolded(t.shape(), mode, [&](std::size_t linear, std::size_t row, std::size_t col)
                          { m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = data[linear]; });
        return m;
    }

    ComplexTensor fold(const Eigen::MatrixXcd &m, std::size_t mode, const Shape &shape)
    {
        ComplexTensor t(shape);
        check_mode(t, mode);
        if (static_cast<std::size_t>(m.rows()) != shape[mode] ||
            static_cast<std::size_t>(m.rows() * m.cols()) != t.size())
            throw std::invalid_argument("Matrix size does not match the target tensor shape.");
        auto data = t.data();
        for_each_unfolded(shape, mode, [&](std::size_t linear, std::size_t row, std::size_t col)
                          { data[linear] = m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)); });
        return t;
    }

    ComplexTensor mode_product(const ComplexTensor &t, const Eigen::MatrixXcd &u, std::size_t mode)
    {
        check_mode(t, mode);
        const std::size_t m_in = t.dim(mode);
        if (static_cast<std::size_t>(u.cols()) != m_in)
            throw std::invalid_argument("Mode product: matrix has " + std::to_string(u.cols()) +
                                        " columns but mode size is " + std::to_string(m_in) + ".");
        const std::size_t m_out = static_cast<std::size_t>(u.rows());
        const auto &shape = t.shape();
        const std::size_t left = shape_product(std::span(shape).first(mode));
        const std::size_t right = t.size() / (left * m_in);

        Shape out_shape = shape;
        out_shape[mode] = m_out;
        ComplexTensor out(out_shape);
        const auto src = t.data();
        auto dst = out.data();
        for (std::size_t r = 0; r < right; ++r)
            for (std::size_t n = 0; n < m_out; ++n)
            {
                cdouble *o = dst.data() + left * (n + m_out * r);
                for (std::size_t m = 0; m < m_in; ++m)
                {
                    const cdouble w = u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
                    const cdouble *s = src.data() + left * (m + m_in * r);
                    for (std::size_t l = 0; l < left; ++l)
                        o[l] += w * s[l];
                }
            }
        return out;
    }

    ComplexTensor concat_last(std::span<const ComplexTensor> parts)
    {
        if (parts.empty())
            throw std::invalid_argument("concat_last requires at least one tensor.");
        const Shape &base = parts.front().shape();
        for (const auto &p : parts)
            if (p.shape() != base)
                throw std::invalid_argument("concat_last: all parts must share the same shape.");
        Shape shape = base;
        shape.push_back(parts.size());
        std::vector<cdouble> data;
        data.reserve(shape_product(shape));
        for (const auto &p : parts)
            data.insert(data.end(), p.data().begin(), p.data().end());
        return ComplexTensor(std::move(shape), std::move(data));
    }

    ComplexTensor slice_last(const ComplexTensor &t, std::size_t index)
    {
        const std::size_t last = t.shape().back();
        if (index >= last)
            throw std::out_of_range("slice_last: index out of range.");
        Shape shape = t.shape();
        if (shape.size() > 1)
            shape.pop_back();
        else
            shape.back() = 1;
        const std::size_t n = t.size() / last;
        std::vector<cdouble> data(t.data().begin() + static_cast<std::ptrdiff_t>(n * index),
                                  t.data().begin() + static_cast<std::ptrdiff_t>(n * (index + 1)));
        return ComplexTensor(std::move(shape), std::move(data));
    }

    double frob_norm_squared(const ComplexTensor &t) noexcept
    {
        double s = 0.0;
        for (const auto &v : t.data())
            s += std::norm(v);
        return s;
    }

    double frob_norm(const ComplexTensor &t) noexcept { return std::sqrt(frob_norm_squared(t)); }

    cdouble inner_product(const ComplexTensor &a, const ComplexTensor &b)
    {
        if (a.shape() != b.shape())
            throw std::invalid_argument("inner_product: shape mismatch.");
        cdouble s{};
        for (std::size_t i = 0; i < a.size(); ++i)
            s += std::conj(a[i]) * b[i];
        return s;
    }

    ComplexTensor outer_product(std::span<const Eigen::VectorXcd> vectors, cdouble scale)
    {
        if (vectors.empty())
            throw std::invalid_argument("outer_product requires at least one vector.");
        Shape shape;
        for (const auto &v : vectors)
            shape.push_back(static_cast<std::size_t>(v.size()));
        std::vector<cdouble> data(shape_product(shape));
        std::size_t len = shape[0];
        for (std::size_t i = 0; i < len; ++i)
            data[i] = scale * vectors[0][static_cast<Eigen::Index>(i)];
        for (std::size_t q = 1; q < vectors.size(); ++q)
        {
            const auto &v = vectors[q];
            // Expand in place from the back so the source block is read before being overwritten.
            for (std::size_t k = shape[q]; k-- > 0;)
            {
                const cdouble w = v[static_cast<Eigen::Index>(k)];
                for (std::size_t i = 0; i < len; ++i)
                    data[k * len + i] = data[i] * w;
            }
            len *= shape[q];
        }
        return ComplexTensor(std::move(shape), std::move(data));
    }

} // namespace mmslam
