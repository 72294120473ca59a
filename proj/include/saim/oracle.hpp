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
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "saim/model.hpp"

namespace saim {

inline constexpr std::size_t kMaxExhaustiveVariables = 25;
inline constexpr std::size_t kMaxBoltzmannSpins = 15;

/// Exact optimum found by enumeration. `count == 0` means nothing was feasible.
struct ExactSolution {
    double value = std::numeric_limits<double>::infinity();
    BinaryState state;
    std::uint64_t count = 0;

    bool feasible() const { return count > 0; }
};

namespace detail {

inline void require_enumerable(std::size_t n, std::size_t limit) {
    if (n > limit) {
        throw std::invalid_argument("exhaustive enumeration is limited to " + std::to_string(limit) +
                                    " variables, got " + std::to_string(n));
    }
}

// True when mask `a` precedes `b` lexicographically in (x_0, x_1, ...).
inline bool lex_less(std::uint64_t a, std::uint64_t b) {
    const std::uint64_t diff = a ^ b;
    if (diff == 0) return false;
    const std::uint64_t lowest = diff & (~diff + 1);
    return (a & lowest) == 0;
}

inline BinaryState unpack(std::uint64_t mask, std::size_t n) {
    BinaryState x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = (mask >> i) & 1u;
    return x;
}

// Gray-code walk over {0,1}^n minimizing a quadratic form given as a symmetric
// coupling matrix and a linear vector. Local fields are patched per flip.
// `accept(mask, activity)` filters states; `activity` tracks A x incrementally.
template <class Accept>
ExactSolution gray_minimize(const DenseMatrix<double>& coupling, std::span<const double> lin,
                            const DenseMatrix<double>& A, Accept accept) {
    const std::size_t n = lin.size();
    const std::size_t rows = A.rows();
    std::vector<double> field(lin.begin(), lin.end());
    std::vector<double> activity(rows, 0.0);
    double value = 0.0;
    std::uint64_t mask = 0;

    double best = std::numeric_limits<double>::infinity();
    std::uint64_t best_mask = 0;
    std::uint64_t count = 0;

    auto consider = [&] {
        if (!accept(mask, activity)) return;
        if (count == 0) {
            best = value;
            best_mask = mask;
            count = 1;
            return;
        }
        const double tol = 1e-9 * std::max(1.0, std::abs(best));
        if (value < best - tol) {
            best = value;
            best_mask = mask;
            count = 1;
        } else if (value <= best + tol) {
            ++count;
            if (lex_less(mask, best_mask)) best_mask = mask;
            best = std::min(best, value);
        }
    };

    consider();
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t step = 1; step < total; ++step) {
        const auto i = static_cast<std::size_t>(std::countr_zero(step));
        const bool on = !((mask >> i) & 1u);
        mask ^= std::uint64_t{1} << i;
        const double sign = on ? 1.0 : -1.0;
        value += sign * field[i];
        const auto row = coupling.row(i);
        for (std::size_t j = 0; j < n; ++j) field[j] += sign * row[j];
        for (std::size_t r = 0; r < rows; ++r) activity[r] += sign * A(r, i);
        consider();
    }

    ExactSolution out;
    out.count = count;
    if (count) out.state = unpack(best_mask, n);
    return out;
}

}  // namespace detail

/// Minimum of f over the feasible set of `problem`, by full enumeration.
/// Ties resolve to the lexicographically smallest state.
inline ExactSolution exhaustive_solve(const ConstrainedQuadraticProblem& problem) {
    const std::size_t n = problem.size();
    detail::require_enumerable(n, kMaxExhaustiveVariables);
    const auto b = problem.b();
    const auto sense = problem.sense();
    auto out = detail::gray_minimize(problem.W(), problem.h(), problem.A(),
                                     [&](std::uint64_t, const std::vector<double>& activity) {
                                         for (std::size_t m = 0; m < activity.size(); ++m) {
                                             const double tol = feasibility_tolerance(b[m]);
                                             if (sense[m] == Sense::LessEqual) {
                                                 if (activity[m] > b[m] + tol) return false;
                                             } else if (std::abs(activity[m] - b[m]) > tol) {
                                                 return false;
                                             }
                                         }
                                         return true;
                                     });
    if (out.feasible()) out.value = evaluate_f(problem, out.state);
    return out;
}

/// Unconstrained minimum of a compiled binary energy.
inline ExactSolution exhaustive_min_energy(const BinaryQuadraticEnergy& energy) {
    const std::size_t n = energy.size();
    detail::require_enumerable(n, kMaxExhaustiveVariables);
    DenseMatrix<double> coupling(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) coupling(i, j) = coupling(j, i) = energy.quad()(i, j);
    auto out = detail::gray_minimize(coupling, energy.lin(), DenseMatrix<double>(0, n),
                                     [](std::uint64_t, const std::vector<double>&) { return true; });
    out.value = energy.energy(out.state);
    return out;
}

/// LB_L(lambda) = min_x L(x); with lambda = 0 this is the penalty bound min_x E.
inline double lagrangian_bound(const ConstrainedQuadraticProblem& problem, const LagrangeState& state) {
    return exhaustive_min_energy(compile_energy(problem, state)).value;
}

/// Exact Boltzmann probabilities exp(-beta H(m)) / Z over all 2^N spin states,
/// indexed like SpinState::index().
inline std::vector<double> boltzmann_distribution(const IsingCoefficients& coeffs, double beta) {
    const std::size_t n = coeffs.size();
    detail::require_enumerable(n, kMaxBoltzmannSpins);
    const std::size_t states = std::size_t{1} << n;
    std::vector<double> energy(states);
    std::vector<std::int8_t> m(n);
    for (std::size_t k = 0; k < states; ++k) {
        for (std::size_t i = 0; i < n; ++i) m[i] = ((k >> i) & 1u) ? 1 : -1;
        energy[k] = coeffs.energy(m);
    }
    const double lowest = *std::min_element(energy.begin(), energy.end());
    double z = 0.0;
    for (double& e : energy) {
        e = std::exp(-beta * (e - lowest));
        z += e;
    }
    for (double& e : energy) e /= z;
    return energy;
}

}  // namespace saim
