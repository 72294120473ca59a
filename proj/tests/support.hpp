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

// Reference computations for the tests. Nothing here calls into the library's
// compilation, enumeration or sampling code.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "saim/matrix.hpp"
#include "saim/model.hpp"

namespace saim::testing {

// f(x) = 1/2 x'Wx + h'x straight from the definition, diagonal included.
inline double direct_f(const DenseMatrix<double>& W, const std::vector<double>& h, const std::vector<std::uint8_t>& x) {
    double quad = 0.0;
    double lin = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lin += h[i] * x[i];
        for (std::size_t j = 0; j < x.size(); ++j) quad += W(i, j) * x[i] * x[j];
    }
    return 0.5 * quad + lin;
}

inline std::vector<double> direct_g(const DenseMatrix<double>& A, const std::vector<double>& b,
                                    const std::vector<std::uint8_t>& x) {
    std::vector<double> g(b.size());
    for (std::size_t m = 0; m < b.size(); ++m) {
        double s = -b[m];
        for (std::size_t i = 0; i < x.size(); ++i) s += A(m, i) * x[i];
        g[m] = s;
    }
    return g;
}

// L = f + P |g|^2 + lambda'g evaluated term by term.
inline double direct_L(const DenseMatrix<double>& W, const std::vector<double>& h, const DenseMatrix<double>& A,
                       const std::vector<double>& b, double P, const std::vector<double>& lambda,
                       const std::vector<std::uint8_t>& x) {
    const auto g = direct_g(A, b, x);
    double e = direct_f(W, h, x);
    for (std::size_t m = 0; m < g.size(); ++m) e += P * g[m] * g[m] + lambda[m] * g[m];
    return e;
}

inline std::vector<std::uint8_t> bits_of(std::uint64_t k, std::size_t n) {
    std::vector<std::uint8_t> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = (k >> i) & 1u;
    return x;
}

struct Best {
    double value = std::numeric_limits<double>::infinity();
    std::vector<std::uint8_t> state;
    bool found = false;
};

// Depth-first include/exclude recursion, item 0 decided first. Visits states
// in a different order from any Gray-code walk.
inline Best recursive_minimum(std::size_t n, const std::function<double(const std::vector<std::uint8_t>&)>& value,
                              const std::function<bool(const std::vector<std::uint8_t>&)>& accept) {
    Best best;
    std::vector<std::uint8_t> x(n, 0);
    std::function<void(std::size_t)> visit = [&](std::size_t depth) {
        if (depth == n) {
            if (!accept(x)) return;
            const double v = value(x);
            if (!best.found || v < best.value) {
                best.value = v;
                best.state = x;
                best.found = true;
            }
            return;
        }
        x[depth] = 1;
        visit(depth + 1);
        x[depth] = 0;
        visit(depth + 1);
    };
    visit(0);
    return best;
}

// Knapsack-style recursion on item bits only: max value subject to A x <= b.
inline Best knapsack_minimum(const ConstrainedQuadraticProblem& p) {
    const std::size_t n = p.size();
    DenseMatrix<double> W = p.W();
    std::vector<double> h(p.h().begin(), p.h().end());
    DenseMatrix<double> A = p.A();
    std::vector<double> b(p.b().begin(), p.b().end());
    return recursive_minimum(
        n, [&](const auto& x) { return direct_f(W, h, x); },
        [&](const auto& x) {
            const auto g = direct_g(A, b, x);
            for (double v : g)
                if (v > 1e-9) return false;
            return true;
        });
}

// Exact Boltzmann weights of H(m) = -sum_{i<j} J m m - sum h m, recomputed here.
inline std::vector<double> boltzmann_reference(const IsingCoefficients& c, double beta) {
    const std::size_t n = c.size();
    std::vector<double> p(std::size_t{1} << n);
    double z = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        double e = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double mi = ((k >> i) & 1u) ? 1.0 : -1.0;
            e -= c.h_field[i] * mi;
            for (std::size_t j = i + 1; j < n; ++j) e -= c.J(i, j) * mi * (((k >> j) & 1u) ? 1.0 : -1.0);
        }
        p[k] = std::exp(-beta * e);
        z += p[k];
    }
    for (double& v : p) v /= z;
    return p;
}

}  // namespace saim::testing
