// Copyright 2026 The SAIM Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "saim/matrix.hpp"

namespace saim {

/// One binary decision vector, entries 0 or 1.
using BinaryState = std::vector<std::uint8_t>;

enum class Sense { LessEqual, Equal };

/// Slack bits for one constraint row: `count` consecutive variables starting at
/// `first`, weighted 1, 2, ..., 2^(count-1).
struct SlackBlock {
    std::size_t row = 0;
    std::size_t first = 0;
    std::size_t count = 0;

    friend bool operator==(const SlackBlock&, const SlackBlock&) = default;
};

struct SlackLayout {
    std::size_t item_count = 0;  // variables before the first slack bit
    std::vector<SlackBlock> blocks;
    double divisor = 1.0;  // slack weights are 2^q / divisor once the rows are normalized

    friend bool operator==(const SlackLayout&, const SlackLayout&) = default;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace detail

/// min f(x) = 1/2 x^T W x + h^T x  subject to  A x (<= | =) b,  x binary.
///
/// W is symmetric with zero diagonal. Construction folds any diagonal of the
/// supplied W into h (x_i^2 = x_i), so the stored form is canonical.
class ConstrainedQuadraticProblem {
 public:
    ConstrainedQuadraticProblem() = default;

    ConstrainedQuadraticProblem(DenseMatrix<double> W, std::vector<double> h, DenseMatrix<double> A,
                                std::vector<double> b, std::vector<Sense> sense,
                                std::optional<SlackLayout> slack = std::nullopt)
        : W_(std::move(W)),
          h_(std::move(h)),
          A_(std::move(A)),
          b_(std::move(b)),
          sense_(std::move(sense)),
          slack_(std::move(slack)) {
        const std::size_t n = h_.size();
        detail::require(W_.rows() == n && W_.cols() == n, "W must be n x n with n = len(h)");
        detail::require(A_.rows() == b_.size(), "A must have one row per capacity");
        detail::require(A_.cols() == n || (A_.rows() == 0), "A must have n columns");
        if (A_.rows() == 0) A_ = DenseMatrix<double>(0, n);
        detail::require(sense_.size() == b_.size(), "one constraint sense per row is required");
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                detail::require(W_(i, j) == W_(j, i), "W must be symmetric");
            }
            h_[i] += 0.5 * W_(i, i);
            W_(i, i) = 0.0;
        }
        for (std::size_t m = 0; m < b_.size(); ++m) {
            detail::require(b_[m] > 0.0, "capacity b[" + std::to_string(m) + "] must be positive");
        }
        if (slack_) check_slack_layout();
    }

    std::size_t size() const { return h_.size(); }
    std::size_t num_constraints() const { return b_.size(); }
    /// Number of decision variables that are not slack bits.
    std::size_t item_count() const { return slack_ ? slack_->item_count : size(); }

    const DenseMatrix<double>& W() const { return W_; }
    std::span<const double> h() const { return h_; }
    const DenseMatrix<double>& A() const { return A_; }
    std::span<const double> b() const { return b_; }
    std::span<const Sense> sense() const { return sense_; }
    const std::optional<SlackLayout>& slack_layout() const { return slack_; }

    bool has_quadratic_objective() const {
        for (double w : W_.values())
            if (w != 0.0) return true;
        return false;
    }

 private:
    void check_slack_layout() const {
        std::vector<bool> seen(num_constraints(), false);
        for (const auto& block : slack_->blocks) {
            detail::require(block.row < num_constraints(), "slack block refers to a missing row");
            detail::require(!seen[block.row], "a row may carry only one slack block");
            seen[block.row] = true;
            detail::require(sense_[block.row] == Sense::Equal, "slack rows must be equalities");
            detail::require(block.first >= slack_->item_count && block.first + block.count <= size(),
                            "slack block out of range");
            for (std::size_t q = 0; q < block.count; ++q) {
                const double expected = std::ldexp(1.0, static_cast<int>(q)) / slack_->divisor;
                detail::require(std::abs(A_(block.row, block.first + q) - expected) <= 1e-12 * expected,
                                "slack weights must be 1, 2, ..., 2^(Q-1)");
            }
        }
        for (std::size_t m = 0; m < num_constraints(); ++m) {
            detail::require(seen[m], "every row of a slack-extended problem needs a slack block");
        }
    }

    DenseMatrix<double> W_;
    std::vector<double> h_;
    DenseMatrix<double> A_;
    std::vector<double> b_;
    std::vector<Sense> sense_;
    std::optional<SlackLayout> slack_;
};

/// Binary quadratic energy  sum_{i<j} quad_ij x_i x_j + sum_i lin_i x_i + constant.
/// Only the strict upper triangle of `quad` is read.
class BinaryQuadraticEnergy {
 public:
    BinaryQuadraticEnergy() = default;
    BinaryQuadraticEnergy(DenseMatrix<double> quad, std::vector<double> lin, double constant)
        : quad_(std::move(quad)), lin_(std::move(lin)), constant_(constant) {
        detail::require(quad_.rows() == lin_.size() && quad_.cols() == lin_.size(),
                        "quadratic block must be n x n with n = len(lin)");
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j = 0; j <= i; ++j) quad_(i, j) = 0.0;
    }

    std::size_t size() const { return lin_.size(); }
    const DenseMatrix<double>& quad() const { return quad_; }
    std::span<const double> lin() const { return lin_; }
    double constant() const { return constant_; }

    double energy(std::span<const std::uint8_t> x) const {
        detail::require(x.size() == size(), "state length does not match the energy");
        double e = constant_;
        for (std::size_t i = 0; i < size(); ++i) {
            if (!x[i]) continue;
            e += lin_[i];
            const auto row = quad_.row(i);
            for (std::size_t j = i + 1; j < size(); ++j)
                if (x[j]) e += row[j];
        }
        return e;
    }

 private:
    DenseMatrix<double> quad_;
    std::vector<double> lin_;
    double constant_ = 0.0;
};

/// Ising form  H(m) = -sum_{i<j} J_ij m_i m_j - sum_i h_i m_i + constant  over m in {-1,+1}^N.
struct IsingCoefficients {
    DenseMatrix<double> J;  // symmetric, zero diagonal
    std::vector<double> h_field;
    double constant = 0.0;

    std::size_t size() const { return h_field.size(); }

    double energy(std::span<const std::int8_t> m) const {
        detail::require(m.size() == size(), "spin state length does not match the coefficients");
        double e = constant;
        for (std::size_t i = 0; i < size(); ++i) {
            e -= h_field[i] * m[i];
            const auto row = J.row(i);
            double coupling = 0.0;
            for (std::size_t j = i + 1; j < size(); ++j) coupling += row[j] * m[j];
            e -= coupling * m[i];
        }
        return e;
    }
};

/// Penalty weight P and one multiplier per constraint row.
struct LagrangeState {
    double P = 0.0;
    std::vector<double> lambda;
};

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// f(x) = 1/2 x^T W x + h^T x. Accepts the full vector or just the item bits
/// (slack bits never enter the objective).
inline double evaluate_f(const ConstrainedQuadraticProblem& p, std::span<const std::uint8_t> x) {
    detail::require(x.size() == p.size() || x.size() == p.item_count(),
                    "state length does not match the problem");
    double f = 0.0;
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!x[i]) continue;
        f += p.h()[i];
        const auto row = p.W().row(i);
        for (std::size_t j = i + 1; j < n; ++j)
            if (x[j]) f += row[j];
    }
    return f;
}

/// g(x) = A x - b over the full variable vector.
inline std::vector<double> evaluate_g(const ConstrainedQuadraticProblem& p, std::span<const std::uint8_t> x) {
    detail::require(x.size() == p.size(), "state length does not match the problem");
    std::vector<double> g(p.num_constraints());
    for (std::size_t m = 0; m < g.size(); ++m) {
        const auto row = p.A().row(m);
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i]) s += row[i];
        g[m] = s - p.b()[m];
    }
    return g;
}

/// L(x) = f(x) + P ||g(x)||^2 + lambda^T g(x).
inline double evaluate_L(const ConstrainedQuadraticProblem& p, const LagrangeState& state,
                         std::span<const std::uint8_t> x) {
    detail::require(state.lambda.size() == p.num_constraints(), "one multiplier per constraint row is required");
    const auto g = evaluate_g(p, x);
    double value = evaluate_f(p, x);
    for (std::size_t m = 0; m < g.size(); ++m) value += state.P * g[m] * g[m] + state.lambda[m] * g[m];
    return value;
}

/// Tolerance used when comparing constraint activity against capacities.
inline double feasibility_tolerance(double capacity) { return 1e-9 * std::max(1.0, std::abs(capacity)); }

/// Feasibility of x. For slack-extended problems only the item bits are checked,
/// against the original inequality A_items x_items <= b.
inline bool is_feasible(const ConstrainedQuadraticProblem& p, std::span<const std::uint8_t> x) {
    const std::size_t items = p.item_count();
    const bool items_only = p.slack_layout().has_value();
    detail::require(x.size() == p.size() || (items_only && x.size() == items),
                    "state length does not match the problem");
    const std::size_t n = items_only ? items : p.size();
    for (std::size_t m = 0; m < p.num_constraints(); ++m) {
        const auto row = p.A().row(m);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (x[i]) s += row[i];
        const double cap = p.b()[m];
        const double tol = feasibility_tolerance(cap);
        if (items_only || p.sense()[m] == Sense::LessEqual) {
            if (s > cap + tol) return false;
        } else if (std::abs(s - cap) > tol) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Transformations
// ---------------------------------------------------------------------------

/// Number of binary slack bits needed to cover [0, capacity]: floor(log2(b) + 1).
inline std::size_t slack_bits_for(std::uint64_t capacity) {
    return static_cast<std::size_t>(std::bit_width(capacity));
}

/// Converts every `A_m x <= b_m` row into `A_m x + sum_q 2^q s_q = b_m` with
/// binary slack bits appended after the existing variables.
inline ConstrainedQuadraticProblem add_slack_variables(const ConstrainedQuadraticProblem& p) {
    const std::size_t n = p.size();
    const std::size_t rows = p.num_constraints();
    std::vector<std::size_t> bits(rows);
    std::size_t total = n;
    for (std::size_t m = 0; m < rows; ++m) {
        detail::require(p.sense()[m] == Sense::LessEqual,
                        "row " + std::to_string(m) + " is already an equality");
        const double cap = p.b()[m];
        detail::require(cap >= 1.0 && std::floor(cap) == cap && cap < 9.0e15,
                        "slack decomposition needs a positive integer capacity (row " + std::to_string(m) + ")");
        bits[m] = slack_bits_for(static_cast<std::uint64_t>(cap));
        total += bits[m];
    }

    SlackLayout layout{n, {}};
    DenseMatrix<double> A = p.A().resized(rows, total);
    std::size_t next = n;
    for (std::size_t m = 0; m < rows; ++m) {
        layout.blocks.push_back({m, next, bits[m]});
        for (std::size_t q = 0; q < bits[m]; ++q) A(m, next + q) = std::ldexp(1.0, static_cast<int>(q));
        next += bits[m];
    }
    std::vector<double> h(p.h().begin(), p.h().end());
    h.resize(total, 0.0);
    return ConstrainedQuadraticProblem(p.W().resized(total, total), std::move(h), std::move(A),
                                       std::vector<double>(p.b().begin(), p.b().end()),
                                       std::vector<Sense>(rows, Sense::Equal), std::move(layout));
}

struct NormalizedProblem {
    ConstrainedQuadraticProblem problem;
    double scale_obj = 1.0;
    double scale_con = 1.0;
};

/// Divides (W, h) by max(|W|, |h|) and (A, b) by max(|A|, |b|).
inline NormalizedProblem normalize(const ConstrainedQuadraticProblem& p) {
    const double scale_obj = std::max(detail::max_abs(p.W().values()), detail::max_abs(p.h()));
    const double scale_con = std::max(detail::max_abs(p.A().values()), detail::max_abs(p.b()));
    detail::require(scale_obj > 0.0, "cannot normalize an all-zero objective");
    detail::require(scale_con > 0.0, "cannot normalize all-zero constraints");

    DenseMatrix<double> W = p.W();
    std::vector<double> h(p.h().begin(), p.h().end());
    DenseMatrix<double> A = p.A();
    std::vector<double> b(p.b().begin(), p.b().end());
    for (std::size_t i = 0; i < W.rows(); ++i)
        for (std::size_t j = 0; j < W.cols(); ++j) W(i, j) /= scale_obj;
    for (double& v : h) v /= scale_obj;
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) A(i, j) /= scale_con;
    for (double& v : b) v /= scale_con;

    auto layout = p.slack_layout();
    if (layout) layout->divisor *= scale_con;
    ConstrainedQuadraticProblem out(std::move(W), std::move(h), std::move(A), std::move(b),
                                    std::vector<Sense>(p.sense().begin(), p.sense().end()), std::move(layout));
    return {std::move(out), scale_obj, scale_con};
}


/// Compiles L(x) = f(x) + P ||A x - b||^2 + lambda^T (A x - b) into binary
/// quadratic form. Squared terms A_mi^2 x_i^2 fold into the linear part; the
/// multiplier term only touches the linear part and the constant.
inline BinaryQuadraticEnergy compile_energy(const ConstrainedQuadraticProblem& p, const LagrangeState& state) {
    detail::require(state.lambda.size() == p.num_constraints(),
                    "expected " + std::to_string(p.num_constraints()) + " multipliers, got " +
                        std::to_string(state.lambda.size()));
    const std::size_t n = p.size();
    const double P = state.P;
    DenseMatrix<double> quad(n, n);
    std::vector<double> lin(p.h().begin(), p.h().end());
    double constant = 0.0;

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) quad(i, j) = p.W()(i, j);

    for (std::size_t m = 0; m < p.num_constraints(); ++m) {
        const auto a = p.A().row(m);
        const double cap = p.b()[m];
        const double mult = state.lambda[m];
        if (P != 0.0) {
            for (std::size_t i = 0; i < n; ++i) {
                if (a[i] == 0.0) continue;
                lin[i] += P * (a[i] * a[i] - 2.0 * cap * a[i]);
                for (std::size_t j = i + 1; j < n; ++j) quad(i, j) += 2.0 * P * a[i] * a[j];
            }
            constant += P * cap * cap;
        }
        for (std::size_t i = 0; i < n; ++i) lin[i] += mult * a[i];
        constant -= mult * cap;
    }
    return BinaryQuadraticEnergy(std::move(quad), std::move(lin), constant);
}

/// Change of variables x = (m + 1) / 2. The constant absorbs every offset so
/// the spin energy equals the binary energy state by state.
inline IsingCoefficients to_ising(const BinaryQuadraticEnergy& energy) {
    const std::size_t n = energy.size();
    IsingCoefficients out{DenseMatrix<double>(n, n), std::vector<double>(n, 0.0), energy.constant()};
    for (std::size_t i = 0; i < n; ++i) {
        const double l = energy.lin()[i];
        out.h_field[i] -= 0.5 * l;
        out.constant += 0.5 * l;
        const auto row = energy.quad().row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double q = row[j];
            if (q == 0.0) continue;
            out.J(i, j) = -0.25 * q;
            out.J(j, i) = -0.25 * q;
            out.h_field[i] -= 0.25 * q;
            out.h_field[j] -= 0.25 * q;
            out.constant += 0.25 * q;
        }
    }
    return out;
}

enum class DensityMode {
    Auto,       // Quadratic when the objective has couplings, Linear otherwise
    Quadratic,  // fraction of nonzero objective couplings among item pairs
    Linear,     // 2 / (N + 1): linear fields seen as couplings to one reference spin
};

/// Density d entering the penalty heuristic P = alpha * d * N.
inline double compute_density(const ConstrainedQuadraticProblem& p, DensityMode mode = DensityMode::Auto) {
    if (mode == DensityMode::Auto)
        mode = p.has_quadratic_objective() ? DensityMode::Quadratic : DensityMode::Linear;
    if (mode == DensityMode::Linear) return 2.0 / (static_cast<double>(p.size()) + 1.0);

    const std::size_t n = p.item_count();
    if (n < 2) return 0.0;
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (p.W()(i, j) != 0.0) ++nonzero;
    return static_cast<double>(nonzero) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

/// Fraction of nonzero strictly-upper couplings of J over all spins.
inline double compute_density(const IsingCoefficients& coeffs) {
    const std::size_t n = coeffs.size();
    if (n < 2) return 0.0;
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (coeffs.J(i, j) != 0.0) ++nonzero;
    return static_cast<double>(nonzero) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

/// Ising coefficients of L for a fixed problem and P, re-targeted to new
/// multipliers in O(M N). J is built once and never touched again.
class LagrangianIsing {
 public:
    LagrangianIsing(const ConstrainedQuadraticProblem& problem, double P)
        : problem_(&problem),
          coeffs_(to_ising(compile_energy(problem, {P, std::vector<double>(problem.num_constraints(), 0.0)}))),
          base_h_(coeffs_.h_field),
          base_constant_(coeffs_.constant) {}

    /// Coefficients for multipliers `lambda`; the reference stays valid until the next call.
    const IsingCoefficients& update(std::span<const double> lambda) {
        const auto& p = *problem_;
        detail::require(lambda.size() == p.num_constraints(), "one multiplier per constraint row is required");
        coeffs_.h_field = base_h_;
        coeffs_.constant = base_constant_;
        for (std::size_t m = 0; m < p.num_constraints(); ++m) {
            const double mult = lambda[m];
            if (mult == 0.0) continue;
            const auto a = p.A().row(m);
            for (std::size_t i = 0; i < p.size(); ++i) {
                coeffs_.h_field[i] -= 0.5 * mult * a[i];
                coeffs_.constant += 0.5 * mult * a[i];
            }
            coeffs_.constant -= mult * p.b()[m];
        }
        return coeffs_;
    }

    const IsingCoefficients& current() const { return coeffs_; }

 private:
    const ConstrainedQuadraticProblem* problem_;
    IsingCoefficients coeffs_;
    std::vector<double> base_h_;
    double base_constant_;
};

/// Spin image m = 2x - 1 of a binary state and back.
inline std::vector<std::int8_t> to_spins(std::span<const std::uint8_t> x) {
    std::vector<std::int8_t> m(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) m[i] = x[i] ? 1 : -1;
    return m;
}

inline BinaryState to_binary(std::span<const std::int8_t> m) {
    BinaryState x(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) x[i] = m[i] > 0 ? 1 : 0;
    return x;
}

}  // namespace saim
