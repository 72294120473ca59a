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
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "saim/instances.hpp"
#include "saim/model.hpp"
#include "saim/oracle.hpp"
#include "saim/rng.hpp"
#include "saim/sampler.hpp"

namespace saim {

struct CheckResult {
    std::string name;
    std::string statistic_name;
    double statistic = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

/// In-place sweep; the validation suite accepts any kernel so that a
/// deliberately broken update can be shown to fail.
using SweepKernel = std::function<void(SpinState&, const IsingCoefficients&, double, RngStream&)>;

inline void reference_sweep(SpinState& state, const IsingCoefficients& coeffs, double beta, RngStream& rng) {
    state = gibbs_sweep(std::move(state), coeffs, beta, rng);
}

/// Random Ising system with couplings and fields uniform in [-1, 1].
inline IsingCoefficients random_ising(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    IsingCoefficients c{DenseMatrix<double>(n, n), std::vector<double>(n), u(rng)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) c.J(i, j) = c.J(j, i) = u(rng);
    for (auto& v : c.h_field) v = u(rng);
    return c;
}

/// Random equality-constrained problem with real coefficients.
inline ConstrainedQuadraticProblem random_equality_problem(std::size_t n, std::size_t m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> cap(0.1, 2.0);
    std::bernoulli_distribution coupled(0.6);
    DenseMatrix<double> W(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (coupled(rng)) W(i, j) = W(j, i) = u(rng);
    std::vector<double> h(n);
    for (auto& v : h) v = u(rng);
    DenseMatrix<double> A(m, n);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t i = 0; i < n; ++i) A(r, i) = u(rng);
    std::vector<double> b(m);
    for (auto& v : b) v = cap(rng);
    return ConstrainedQuadraticProblem(std::move(W), std::move(h), std::move(A), std::move(b),
                                       std::vector<Sense>(m, Sense::Equal));
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
    double tv = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) tv += std::abs(p[k] - q[k]);
    return 0.5 * tv;
}

struct SamplerCheckOptions {
    std::size_t systems = 5;
    std::size_t spins = 8;
    double beta = 1.0;
    std::size_t samples = 1'000'000;
    std::size_t burn_in = 10'000;
    double threshold = 0.02;
    std::uint64_t seed = 2024;
};

/// Worst total-variation distance between sampled and exact Boltzmann tables.
inline CheckResult check_sampler_tv(const SweepKernel& kernel = reference_sweep, SamplerCheckOptions opt = {}) {
    std::mt19937_64 gen(opt.seed);
    double worst = 0.0;
    for (std::size_t s = 0; s < opt.systems; ++s) {
        const auto coeffs = random_ising(opt.spins, gen);
        RngStream rng(opt.seed, s);
        SpinState state = SpinState::random(opt.spins, rng);
        for (std::size_t t = 0; t < opt.burn_in; ++t) kernel(state, coeffs, opt.beta, rng);
        std::vector<double> hist(std::size_t{1} << opt.spins, 0.0);
        for (std::size_t t = 0; t < opt.samples; ++t) {
            kernel(state, coeffs, opt.beta, rng);
            hist[state.index()] += 1.0;
        }
        for (auto& v : hist) v /= static_cast<double>(opt.samples);
        worst = std::max(worst, total_variation(hist, boltzmann_distribution(coeffs, opt.beta)));
    }
    return {"tv", "max total variation distance", worst, opt.threshold, worst < opt.threshold};
}

/// Largest disagreement between direct L evaluation, the compiled binary
/// energy and the Ising energy, over every state of random problems.
inline CheckResult check_compilation_roundtrip(std::size_t problems = 100, std::size_t max_n = 10,
                                               std::uint64_t seed = 7) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::size_t> size(1, max_n);
    std::uniform_int_distribution<std::size_t> rows(1, 3);
    std::uniform_real_distribution<double> penalty(0.0, 5.0);
    std::uniform_real_distribution<double> mult(-3.0, 3.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < problems; ++k) {
        const std::size_t n = size(gen);
        const std::size_t m = rows(gen);
        const auto problem = random_equality_problem(n, m, gen);
        LagrangeState state{penalty(gen), std::vector<double>(m)};
        for (auto& v : state.lambda) v = mult(gen);
        const auto energy = compile_energy(problem, state);
        const auto ising = to_ising(energy);
        BinaryState x(n);
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
            for (std::size_t i = 0; i < n; ++i) x[i] = (mask >> i) & 1u;
            const double direct = evaluate_L(problem, state, x);
            const double binary = energy.energy(x);
            const double spin = ising.energy(to_spins(x));
            worst = std::max({worst, std::abs(direct - binary), std::abs(direct - spin)});
        }
    }
    return {"roundtrip", "max energy disagreement", worst, 1e-9, worst <= 1e-9};
}

/// Counts item assignments on which "exists slack with A x + s = b" and
/// "A x <= b" disagree, over random integer instances.
inline CheckResult check_slack_encoding(std::size_t instances = 50, std::size_t max_n = 10, std::uint64_t seed = 11) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::size_t> size(1, max_n);
    std::uniform_int_distribution<std::size_t> rows(1, 2);
    std::uniform_int_distribution<int> weight(0, 9);
    std::uniform_int_distribution<int> cap(1, 20);
    std::size_t mismatches = 0;
    for (std::size_t k = 0; k < instances; ++k) {
        const std::size_t n = size(gen);
        const std::size_t m = rows(gen);
        DenseMatrix<double> A(m, n);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t i = 0; i < n; ++i) A(r, i) = weight(gen);
        std::vector<double> b(m);
        for (auto& v : b) v = cap(gen);
        const ConstrainedQuadraticProblem original(DenseMatrix<double>(n, n), std::vector<double>(n, 0.0), A, b,
                                                   std::vector<Sense>(m, Sense::LessEqual));
        const auto extended = add_slack_variables(original);
        const std::size_t slack = extended.size() - n;

        auto activity = [&](std::uint64_t mask, std::size_t first, std::size_t count) {
            std::vector<double> act(m, 0.0);
            for (std::size_t i = 0; i < count; ++i)
                if ((mask >> i) & 1u)
                    for (std::size_t r = 0; r < m; ++r) act[r] += extended.A()(r, first + i);
            return act;
        };
        std::vector<std::vector<double>> slack_act;
        for (std::uint64_t s = 0; s < (std::uint64_t{1} << slack); ++s) slack_act.push_back(activity(s, n, slack));

        for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
            const auto item_act = activity(x, 0, n);
            bool fits = true;
            for (std::size_t r = 0; r < m; ++r) fits = fits && item_act[r] <= b[r];
            bool reachable = false;
            for (const auto& sa : slack_act) {
                bool eq = true;
                for (std::size_t r = 0; r < m && eq; ++r) eq = item_act[r] + sa[r] == b[r];
                if (eq) {
                    reachable = true;
                    break;
                }
            }
            if (fits != reachable) ++mismatches;
        }
    }
    return {"slack", "mismatched item assignments", static_cast<double>(mismatches), 0.0, mismatches == 0};
}

struct BoundCheckOptions {
    std::size_t instances = 20;
    std::size_t lambdas = 100;
    std::size_t pairs = 100;
    std::size_t items = 6;
    double lambda_range = 5.0;
    std::uint64_t seed = 13;
};

/// Counts violations of LB_P <= OPT, LB_L(lambda) <= OPT and the dual
/// subgradient inequality LB(l') <= LB(l) + g(xbar(l))^T (l' - l).
inline CheckResult check_dual_bounds(BoundCheckOptions opt = {}) {
    std::mt19937_64 gen(opt.seed);
    std::uniform_real_distribution<double> mult(-opt.lambda_range, opt.lambda_range);
    std::size_t violations = 0;
    for (std::size_t k = 0; k < opt.instances; ++k) {
        const auto inst = generate_qkp(opt.items, 0.5, opt.seed * 1000 + k, {1, 100}, {1, 20});
        const auto problem = normalize(add_slack_variables(to_problem(inst))).problem;
        const double OPT = exhaustive_solve(problem).value;
        const double P = 2.0 * compute_density(problem) * static_cast<double>(problem.size());
        const std::size_t m = problem.num_constraints();
        const double tol = 1e-9 * std::max(1.0, std::abs(OPT));

        auto random_lambda = [&] {
            std::vector<double> l(m);
            for (auto& v : l) v = mult(gen);
            return l;
        };
        if (lagrangian_bound(problem, {P, std::vector<double>(m, 0.0)}) > OPT + tol) ++violations;
        for (std::size_t t = 0; t < opt.lambdas; ++t)
            if (lagrangian_bound(problem, {P, random_lambda()}) > OPT + tol) ++violations;
        for (std::size_t t = 0; t < opt.pairs; ++t) {
            const auto l1 = random_lambda();
            const auto l2 = random_lambda();
            const auto at1 = exhaustive_min_energy(compile_energy(problem, {P, l1}));
            const auto g = evaluate_g(problem, at1.state);
            double rhs = at1.value;
            for (std::size_t r = 0; r < m; ++r) rhs += g[r] * (l2[r] - l1[r]);
            const double lhs = lagrangian_bound(problem, {P, l2});
            if (lhs > rhs + 1e-9 * std::max(1.0, std::abs(rhs))) ++violations;
        }
    }
    return {"concavity", "bound and subgradient violations", static_cast<double>(violations), 0.0, violations == 0};
}

inline const std::vector<std::string>& validation_suites() {
    static const std::vector<std::string> names{"tv", "roundtrip", "slack", "concavity"};
    return names;
}

inline std::vector<CheckResult> run_validation(std::span<const std::string> suites,
                                               const SweepKernel& kernel = reference_sweep) {
    if (suites.empty()) throw std::invalid_argument("no validation suite selected");
    for (const auto& name : suites) {
        if (std::find(validation_suites().begin(), validation_suites().end(), name) == validation_suites().end())
            throw std::invalid_argument("unknown validation suite '" + name + "'");
    }
    std::vector<CheckResult> out;
    for (const auto& name : suites) {
        if (name == "tv") out.push_back(check_sampler_tv(kernel));
        else if (name == "roundtrip") out.push_back(check_compilation_roundtrip());
        else if (name == "slack") out.push_back(check_slack_encoding());
        else out.push_back(check_dual_bounds());
    }
    return out;
}

}  // namespace saim
