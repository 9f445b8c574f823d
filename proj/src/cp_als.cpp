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

#include "mmslam/cp_als.hpp"
#include "mmslam/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mmslam
{
    namespace
    {
        using Index = Eigen::Index;

        // Plain complex product; std::complex operator* carries NaN/Inf recovery that blocks vectorisation.
        inline cdouble cmul(cdouble a, cdouble b) noexcept
        {
            return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
        }

        // out[j] = sum_k in[j + n_front * k] * w[k]
        void contract_last(const cdouble *in, std::size_t n_front, std::size_t m_last, const cdouble *w, cdouble *out)
        {
            std::fill(out, out + n_front, cdouble{});
            double *o = reinterpret_cast<double *>(out);
            for (std::size_t k = 0; k < m_last; ++k)
            {
                const double wr = w[k].real(), wi = w[k].imag();
                const double *s = reinterpret_cast<const double *>(in + n_front * k);
                for (std::size_t j = 0; j < n_front; ++j)
                {
                    const double sr = s[2 * j], si = s[2 * j + 1];
                    o[2 * j] += sr * wr - si * wi;
                    o[2 * j + 1] += sr * wi + si * wr;
                }
            }
        }

        // out[j] = sum_i in[i + m_first * j] * w[i]
        void contract_first(const cdouble *in, std::size_t m_first, std::size_t n_back, const cdouble *w, cdouble *out)
        {
            for (std::size_t j = 0; j < n_back; ++j)
            {
                const cdouble *s = in + m_first * j;
                double re = 0.0, im = 0.0;
                for (std::size_t i = 0; i < m_first; ++i)
                {
                    re += s[i].real() * w[i].real() - s[i].imag() * w[i].imag();
                    im += s[i].real() * w[i].imag() + s[i].imag() * w[i].real();
                }
                out[j] = {re, im};
            }
        }

        Eigen::MatrixXcd random_factor(std::size_t rows, std::size_t cols, Rng &rng)
        {
            std::normal_distribution<double> n01;
            Eigen::MatrixXcd a(static_cast<Index>(rows), static_cast<Index>(cols));
            for (Index c = 0; c < a.cols(); ++c)
            {
                for (Index r = 0; r < a.rows(); ++r)
                {
                    const double re = n01(rng);
                    const double im = n01(rng);
                    a(r, c) = {re, im};
                }
                a.col(c).normalize();
            }
            return a;
        }

        // ALS state for one restart.
        class AlsSolver
        {
        public:
            AlsSolver(const ComplexTensor &t, std::size_t rank) : x_(t), rank_(rank), order_(t.order())
            {
                const auto &shape = t.shape();
                prefix_.assign(order_ + 1, 1);
                for (std::size_t q = 0; q < order_; ++q)
                    prefix_[q + 1] = prefix_[q] * shape[q];
                back_.resize(rank_);
                for (auto &b : back_)
                {
                    b.resize(order_);
                    for (std::size_t r = 0; r + 1 < order_; ++r)
                        b[r].resize(prefix_[r + 1]);
                }
                norm_x2_ = frob_norm_squared(t);
            }

            void initialise(std::vector<Eigen::MatrixXcd> factors)
            {
                a_ = std::move(factors);
                gram_.resize(order_);
                for (std::size_t q = 0; q < order_; ++q)
                    gram_[q] = a_[q].adjoint() * a_[q];
                weights_ = Eigen::VectorXcd::Ones(static_cast<Index>(rank_));
            }

            // One sweep over all modes. Returns the relative reconstruction error afterwards.
            double sweep()
            {
                compute_back_partials();
                Eigen::MatrixXcd mk;
                condition_ = 1.0;
                for (std::size_t r = 0; r < order_; ++r)
                {
                    mttkrp(r, mk);
                    Eigen::MatrixXcd v = Eigen::MatrixXcd::Ones(static_cast<Index>(rank_), static_cast<Index>(rank_));
                    for (std::size_t q = 0; q < order_; ++q)
                        if (q != r)
                            v = v.cwiseProduct(gram_[q].conjugate());

                    // A_r V = MTTKRP, V Hermitian PSD.
                    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(v);
                    const auto &ev = es.eigenvalues();
                    const double ev_max = std::max(ev.maxCoeff(), 0.0);
                    const double ev_min = std::max(ev.minCoeff(), 0.0);
                    condition_ = std::max(condition_, ev_min > 0.0 ? ev_max / ev_min : std::numeric_limits<double>::infinity());
                    Eigen::MatrixXcd ar = v.completeOrthogonalDecomposition().solve(mk.adjoint()).adjoint();

                    for (Index p = 0; p < ar.cols(); ++p)
                    {
                        const double nrm = ar.col(p).norm();
                        if (nrm > 0.0)
                        {
                            ar.col(p) /= nrm;
                            weights_[p] = nrm;
                        }
                        else
                        {
                            ar.col(p) = a_[r].col(p);
                            weights_[p] = 0.0;
                        }
                    }
                    a_[r] = std::move(ar);
                    gram_[r] = a_[r].adjoint() * a_[r];
                }

                // <Xhat, X> from the final MTTKRP, ||Xhat||^2 from the Gram matrices.
                const Eigen::MatrixXcd &al = a_[order_ - 1];
                cdouble cross{};
                for (Index p = 0; p < static_cast<Index>(rank_); ++p)
                    cross += std::conj(weights_[p]) * al.col(p).dot(mk.col(p));
                Eigen::MatrixXcd h = Eigen::MatrixXcd::Ones(static_cast<Index>(rank_), static_cast<Index>(rank_));
                for (const auto &g : gram_)
                    h = h.cwiseProduct(g);
                const double model2 = std::real(weights_.dot(h * weights_));
                const double err2 = std::max(norm_x2_ - 2.0 * cross.real() + model2, 0.0);
                double rel = norm_x2_ > 0.0 ? std::sqrt(err2 / norm_x2_) : std::sqrt(err2);

                // The expansion above loses everything below ~sqrt(eps); measure directly near exact fits.
                if (rel < 1e-6)
                    rel = explicit_error();
                return rel;
            }

            // Relative error of the current model, from one MTTKRP rather than a full reconstruction.
            double model_error()
            {
                compute_back_partials();
                Eigen::MatrixXcd mk;
                mttkrp(0, mk);
                cdouble cross{};
                for (Index p = 0; p < static_cast<Index>(rank_); ++p)
                    cross += std::conj(weights_[p]) * a_[0].col(p).dot(mk.col(p));
                Eigen::MatrixXcd h = Eigen::MatrixXcd::Ones(static_cast<Index>(rank_), static_cast<Index>(rank_));
                for (const auto &g : gram_)
                    h = h.cwiseProduct(g);
                const double model2 = std::real(weights_.dot(h * weights_));
                const double err2 = std::max(norm_x2_ - 2.0 * cross.real() + model2, 0.0);
                const double rel = norm_x2_ > 0.0 ? std::sqrt(err2 / norm_x2_) : std::sqrt(err2);
                return rel < 1e-6 ? explicit_error() : rel;
            }

            // Factors with the weights folded into the last mode.
            std::vector<Eigen::MatrixXcd> scaled_factors() const
            {
                auto f = a_;
                f.back() = f.back() * weights_.asDiagonal();
                return f;
            }

            void set_scaled_factors(std::vector<Eigen::MatrixXcd> f)
            {
                weights_ = Eigen::VectorXcd::Ones(static_cast<Index>(rank_));
                for (std::size_t q = 0; q < order_; ++q)
                    for (Index p = 0; p < f[q].cols(); ++p)
                    {
                        const double nrm = f[q].col(p).norm();
                        if (nrm > 0.0)
                        {
                            f[q].col(p) /= nrm;
                            weights_[p] *= nrm;
                        }
                        else
                            weights_[p] = 0.0;
                    }
                a_ = std::move(f);
                for (std::size_t q = 0; q < order_; ++q)
                    gram_[q] = a_[q].adjoint() * a_[q];
            }

            double explicit_error() const
            {
                ComplexTensor res = reconstruct(model());
                res -= x_;
                const double e = frob_norm(res);
                return norm_x2_ > 0.0 ? e / std::sqrt(norm_x2_) : e;
            }

            CpFactors model() const { return CpFactors{a_, weights_}; }
            double condition() const noexcept { return condition_; }

        private:
            void compute_back_partials()
            {
                const auto &shape = x_.shape();
                std::vector<cdouble> w;
                for (std::size_t p = 0; p < rank_; ++p)
                {
                    auto &b = back_[p];
                    const cdouble *src = x_.data().data();
                    for (std::size_t r = order_ - 1; r >= 1; --r)
                    {
                        w.resize(shape[r]);
                        for (std::size_t i = 0; i < shape[r]; ++i)
                            w[i] = std::conj(a_[r](static_cast<Index>(i), static_cast<Index>(p)));
                        contract_last(src, prefix_[r], shape[r], w.data(), b[r - 1].data());
                        src = b[r - 1].data();
                    }
                }
            }

            // MTTKRP for mode r: out(i, p) = sum over other indices of X * prod conj(a_q(i_q, p)).
            void mttkrp(std::size_t r, Eigen::MatrixXcd &out)
            {
                const auto &shape = x_.shape();
                out.resize(static_cast<Index>(shape[r]), static_cast<Index>(rank_));
                std::vector<cdouble> cur, nxt, w;
                for (std::size_t p = 0; p < rank_; ++p)
                {
                    const cdouble *src = (r + 1 == order_) ? x_.data().data() : back_[p][r].data();
                    std::size_t len = prefix_[r + 1];
                    if (r == 0)
                    {
                        for (std::size_t i = 0; i < shape[0]; ++i)
                            out(static_cast<Index>(i), static_cast<Index>(p)) = src[i];
                        continue;
                    }
                    for (std::size_t q = 0; q < r; ++q)
                    {
                        w.resize(shape[q]);
                        for (std::size_t i = 0; i < shape[q]; ++i)
                            w[i] = std::conj(a_[q](static_cast<Index>(i), static_cast<Index>(p)));
                        const std::size_t n_back = len / shape[q];
                        nxt.resize(n_back);
                        contract_first(src, shape[q], n_back, w.data(), nxt.data());
                        cur.swap(nxt);
                        src = cur.data();
                        len = n_back;
                    }
                    for (std::size_t i = 0; i < shape[r]; ++i)
                        out(static_cast<Index>(i), static_cast<Index>(p)) = src[i];
                }
            }

            const ComplexTensor &x_;
            std::size_t rank_;
            std::size_t order_;
            std::vector<std::size_t> prefix_;
            std::vector<std::vector<std::vector<cdouble>>> back_; // [p][r] : contraction of modes r+1.. of X
            std::vector<Eigen::MatrixXcd> a_;
            std::vector<Eigen::MatrixXcd> gram_;
            Eigen::VectorXcd weights_;
            double norm_x2_ = 0.0;
            double condition_ = 1.0;
        };

        std::vector<Eigen::MatrixXcd> svd_init(const ComplexTensor &t, std::size_t rank, Rng &rng)
        {
            std::vector<Eigen::MatrixXcd> factors;
            for (std::size_t r = 0; r < t.order(); ++r)
            {
                const std::size_t m = t.dim(r);
                Eigen::MatrixXcd a = random_factor(m, rank, rng);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mode_gram(t, r));
                const std::size_t lead = std::min(rank, m);
                for (std::size_t p = 0; p < lead; ++p)
                    a.col(static_cast<Index>(p)) = es.eigenvectors().col(static_cast<Index>(m - 1 - p));
                factors.push_back(std::move(a));
            }
            return factors;
        }

        // Leading eigenvectors of each mode Gram matrix, as many as available; the rest random.
        Eigen::MatrixXcd leading_vectors(const ComplexTensor &t, std::size_t mode, std::size_t count, Rng &rng,
                                         Eigen::VectorXd *eigenvalues = nullptr)
        {
            const std::size_t m = t.dim(mode);
            Eigen::MatrixXcd a = random_factor(m, count, rng);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mode_gram(t, mode));
            for (std::size_t p = 0; p < std::min(count, m); ++p)
                a.col(static_cast<Index>(p)) = es.eigenvectors().col(static_cast<Index>(m - 1 - p));
            if (eigenvalues)
                *eigenvalues = es.eigenvalues().reverse();
            return a;
        }

        // Algebraic start from a generalised eigenvalue problem on two modes with full column rank
        // (exact for noiseless data with distinct generalised eigenvalues). Empty when no pair of
        // modes qualifies or the problem is numerically singular.
        std::vector<Eigen::MatrixXcd> gevd_init(const ComplexTensor &t, std::size_t rank, Rng &rng)
        {
            const std::size_t order = t.order();
            if (order < 3)
                return {};
            // rank evidence per mode: lambda_P / lambda_1 of the mode Gram matrix
            std::vector<std::pair<double, std::size_t>> score;
            std::vector<Eigen::MatrixXcd> basis(order);
            for (std::size_t r = 0; r < order; ++r)
            {
                if (t.dim(r) < rank)
                    continue;
                Eigen::VectorXd ev;
                basis[r] = leading_vectors(t, r, rank, rng, &ev);
                if (ev[0] > 0.0)
                    score.emplace_back(ev[static_cast<Index>(rank - 1)] / ev[0], r);
            }
            if (score.size() < 2)
                return {};
            std::stable_sort(score.begin(), score.end(), [](const auto &x, const auto &y) { return x.first > y.first; });
            if (!(score[1].first > 1e-12))
                return {};
            const std::size_t a = score[0].second, b = score[1].second;

            // Two random combinations of the (a, b) slices.
            const Eigen::MatrixXcd xa = unfold(t, a); // columns: modes a+1, a+2, ... (cyclic), fastest first
            std::vector<std::size_t> others;
            for (std::size_t q = 1; q < order; ++q)
                others.push_back((a + q) % order);
            const std::size_t rest = t.size() / (t.dim(a) * t.dim(b));
            const Eigen::MatrixXcd c = random_factor(rest, 2, rng);
            Eigen::MatrixXcd s1 = Eigen::MatrixXcd::Zero(static_cast<Index>(t.dim(a)), static_cast<Index>(t.dim(b)));
            Eigen::MatrixXcd s2 = s1;
            std::vector<std::size_t> idx(others.size(), 0);
            for (Index col = 0; col < xa.cols(); ++col)
            {
                std::size_t j = 0, k = 0, stride = 1;
                for (std::size_t q = 0; q < others.size(); ++q)
                {
                    if (others[q] == b)
                        j = idx[q];
                    else
                    {
                        k += idx[q] * stride;
                        stride *= t.dim(others[q]);
                    }
                }
                s1.col(static_cast<Index>(j)) += c(static_cast<Index>(k), 0) * xa.col(col);
                s2.col(static_cast<Index>(j)) += c(static_cast<Index>(k), 1) * xa.col(col);
                for (std::size_t q = 0; q < others.size() && ++idx[q] == t.dim(others[q]); ++q)
                    idx[q] = 0;
            }
            // S_i = A D_i B^T; projected onto the leading subspaces both are P x P.
            const Eigen::MatrixXcd p1 = basis[a].adjoint() * s1 * basis[b].conjugate();
            const Eigen::MatrixXcd p2 = basis[a].adjoint() * s2 * basis[b].conjugate();
            Eigen::FullPivLU<Eigen::MatrixXcd> lu(p2);
            lu.setThreshold(1e-10);
            if (!lu.isInvertible())
                return {};
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(p1 * lu.inverse());
            if (es.info() != Eigen::Success)
                return {};
            Eigen::MatrixXcd fa = basis[a] * es.eigenvectors();
            for (Index p = 0; p < fa.cols(); ++p)
                fa.col(p).normalize();
            if (!fa.allFinite())
                return {};

            // Remaining modes from the rank-one structure of each row of A^+ X_(a).
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(fa);
            const Eigen::MatrixXcd w = cod.solve(xa); // P x (product of other dims)
            Shape sub;
            for (auto q : others)
                sub.push_back(t.dim(q));
            std::vector<Eigen::MatrixXcd> factors(order);
            factors[a] = fa;
            for (auto q : others)
                factors[q].resize(static_cast<Index>(t.dim(q)), static_cast<Index>(rank));
            for (std::size_t p = 0; p < rank; ++p)
            {
                const Eigen::VectorXcd row = w.row(static_cast<Index>(p)).transpose();
                const ComplexTensor comp(sub, std::vector<cdouble>(row.data(), row.data() + row.size()));
                for (std::size_t q = 0; q < others.size(); ++q)
                    factors[others[q]].col(static_cast<Index>(p)) = leading_vectors(comp, q, 1, rng).col(0);
            }
            for (const auto &f : factors)
                if (!f.allFinite())
                    return {};
            return factors;
        }
    } // namespace

    Shape CpFactors::shape() const
    {
        Shape s;
        for (const auto &f : factors)
            s.push_back(static_cast<std::size_t>(f.rows()));
        return s;
    }

    void CpFactors::validate() const
    {
        if (factors.empty())
            throw std::invalid_argument("CP model needs at least one factor matrix.");
        if (weights.size() == 0)
            throw std::invalid_argument("CP model rank must be positive.");
        for (const auto &f : factors)
            if (f.cols() != weights.size() || f.rows() == 0)
                throw std::invalid_argument("CP factor column count must equal the model rank.");
    }

    ComplexTensor reconstruct(const CpFactors &f)
    {
        f.validate();
        ComplexTensor out(f.shape());
        std::vector<Eigen::VectorXcd> cols(f.factors.size());
        for (Index p = 0; p < f.weights.size(); ++p)
        {
            for (std::size_t q = 0; q < f.factors.size(); ++q)
                cols[q] = f.factors[q].col(p);
            out += outer_product(cols, f.weights[p]);
        }
        return out;
    }

    Eigen::MatrixXcd mode_gram(const ComplexTensor &t, std::size_t mode)
    {
        if (mode >= t.order())
            throw std::out_of_range("mode_gram: mode index out of range.");
        const std::size_t m = t.dim(mode);
        const std::size_t left = shape_product(std::span(t.shape()).first(mode));
        const std::size_t right = t.size() / (left * m);
        Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(static_cast<Index>(m), static_cast<Index>(m));
        const auto data = t.data();
        for (std::size_t rt = 0; rt < right; ++rt)
        {
            // Block is left x m, column-major.
            Eigen::Map<const Eigen::MatrixXcd> block(data.data() + left * m * rt, static_cast<Index>(left), static_cast<Index>(m));
            g.noalias() += block.transpose() * block.conjugate();
        }
        return g;
    }

    CpResult cp_als(const ComplexTensor &t, std::size_t rank, const CpOptions &opts)
    {
        if (rank == 0)
            throw std::invalid_argument("cp_als: rank must be at least 1.");
        if (t.order() < 2)
            throw std::invalid_argument("cp_als: tensor must have at least two modes.");
        if (opts.max_iters < 1 || opts.restarts < 1)
            throw std::invalid_argument("cp_als: max_iters and restarts must be positive.");

        CpResult best;
        bool have_best = false;
        for (int restart = 0; restart < opts.restarts; ++restart)
        {
            Rng rng(mix_seed({opts.seed, static_cast<std::uint64_t>(restart)}));
            AlsSolver solver(t, rank);
            std::vector<Eigen::MatrixXcd> start;
            if (restart == 0 && opts.init == CpInit::Gevd)
                start = gevd_init(t, rank, rng);
            if (restart == 0 && opts.init != CpInit::Random && start.empty())
                start = svd_init(t, rank, rng);
            if (start.empty())
                for (std::size_t r = 0; r < t.order(); ++r)
                    start.push_back(random_factor(t.dim(r), rank, rng));
            solver.initialise(std::move(start));

            CpResult res;
            double prev = std::numeric_limits<double>::infinity();
            std::vector<Eigen::MatrixXcd> before;
            double boost = 1.0; // grows while extrapolation keeps paying off
            for (int it = 1; it <= opts.max_iters; ++it)
            {
                if (opts.line_search)
                    before = solver.scaled_factors();
                double err = solver.sweep();
                if (opts.line_search && it >= 3)
                {
                    // Extrapolate along the last update; keep the step only if it lowers the error.
                    const auto after = solver.scaled_factors();
                    const double step = std::max(std::cbrt(double(it)), boost);
                    auto trial = after;
                    for (std::size_t q = 0; q < trial.size(); ++q)
                        trial[q] = before[q] + step * (after[q] - before[q]);
                    solver.set_scaled_factors(std::move(trial));
                    const double trial_err = solver.model_error();
                    if (trial_err < err)
                    {
                        err = trial_err;
                        boost = std::min(step * 1.5, 1e3);
                    }
                    else
                    {
                        solver.set_scaled_factors(after);
                        boost = 1.0;
                    }
                }
                res.iterations = it;
                if (opts.record_history)
                    res.error_history.push_back(err);
                if (err <= 1e-14 || (std::isfinite(prev) && std::abs(prev - err) <= opts.tol * prev))
                {
                    res.converged = true;
                    prev = err;
                    break;
                }
                prev = err;
            }
            res.model = solver.model();
            res.relative_error = solver.explicit_error();
            res.condition = solver.condition();
            res.best_restart = static_cast<std::size_t>(restart);
            if (!have_best || res.relative_error < best.relative_error)
            {
                best = std::move(res);
                have_best = true;
            }
        }
        return best;
    }

} // namespace mmslam
