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


#include <cmath>
#include <random>
#include <vector>

#include "catch_amalgamated.hpp"
#include "saim/instances.hpp"
#include "saim/model.hpp"
#include "saim/oracle.hpp"
#include "support.hpp"

using Catch::Approx;

namespace saim {
namespace {

ConstrainedQuadraticProblem knapsack(std::vector<double> h, std::vector<double> a, double b) {
    const std::size_t n = h.size();
    return ConstrainedQuadraticProblem(DenseMatrix<double>(n, n), std::move(h), DenseMatrix<double>::from_rows({a}),
                                       {b}, {Sense::LessEqual});
}

ConstrainedQuadraticProblem random_integer_qkp(std::size_t n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> value(0, 100);
    std::uniform_int_distribution<int> weight(1, 50);
    DenseMatrix<double> W(n, n);
    std::vector<double> h(n);
    DenseMatrix<double> A(1, n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        h[i] = -value(rng);
        A(0, i) = weight(rng);
        total += A(0, i);
        for (std::size_t j = i + 1; j < n; ++j) W(i, j) = W(j, i) = (rng() & 1u) ? -value(rng) : 0.0;
    }
    return ConstrainedQuadraticProblem(std::move(W), std::move(h), std::move(A), {std::floor(total / 2)},
                                       {Sense::LessEqual});
}

}  // namespace

TEST_CASE("Problem construction", "[model]") {
    SECTION("diagonal folds into the linear term") {
        auto W = DenseMatrix<double>::from_rows({{4.0, 1.0}, {1.0, -2.0}});
        ConstrainedQuadraticProblem p(W, {1.0, 1.0}, DenseMatrix<double>(0, 2), {}, {});
        CHECK(p.W()(0, 0) == 0.0);
        CHECK(p.W()(1, 1) == 0.0);
        CHECK(p.h()[0] == 3.0);
        CHECK(p.h()[1] == 0.0);
        for (std::uint64_t k = 0; k < 4; ++k) {
            const auto x = testing::bits_of(k, 2);
            CHECK(evaluate_f(p, x) == Approx(testing::direct_f(W, {1.0, 1.0}, x)));
        }
    }

    SECTION("invalid shapes are rejected") {
        CHECK_THROWS_AS(ConstrainedQuadraticProblem(DenseMatrix<double>(2, 3), {0, 0}, DenseMatrix<double>(0, 2), {}, {}),
                        std::invalid_argument);
        CHECK_THROWS_AS(ConstrainedQuadraticProblem(DenseMatrix<double>::from_rows({{0, 1}, {2, 0}}), {0, 0},
                                                    DenseMatrix<double>(0, 2), {}, {}),
                        std::invalid_argument);
        CHECK_THROWS_AS(knapsack({1, 1}, {1, 1}, 0.0), std::invalid_argument);
    }
}

TEST_CASE("Slack decomposition", "[model][slack]") {
    SECTION("bit counts") {
        CHECK(slack_bits_for(1) == 1);
        CHECK(slack_bits_for(7) == 3);
        CHECK(slack_bits_for(8) == 4);
        CHECK(slack_bits_for(4096) == 13);
        CHECK(slack_bits_for(8191) == 13);
    }

    SECTION("b = 7 appends weights 1, 2, 4") {
        const auto p = add_slack_variables(knapsack({-1, -1}, {3, 5}, 7));
        REQUIRE(p.size() == 5);
        CHECK(p.item_count() == 2);
        CHECK(p.sense()[0] == Sense::Equal);
        CHECK(p.A()(0, 2) == 1.0);
        CHECK(p.A()(0, 3) == 2.0);
        CHECK(p.A()(0, 4) == 4.0);
        REQUIRE(p.slack_layout());
        CHECK(p.slack_layout()->blocks.at(0).first == 2);
        CHECK(p.slack_layout()->blocks.at(0).count == 3);
    }

    SECTION("b = 1 appends one bit") {
        const auto p = add_slack_variables(knapsack({-1}, {1}, 1));
        CHECK(p.size() == 2);
        CHECK(p.A()(0, 1) == 1.0);
    }

    SECTION("300 items with a 13-bit capacity give 313 spins") {
        const auto inst = generate_qkp(300, 0.5, 8);
        auto problem = to_problem(inst);
        std::vector<double> row(problem.A().row(0).begin(), problem.A().row(0).end());
        const auto p = add_slack_variables(
            ConstrainedQuadraticProblem(problem.W(), std::vector<double>(problem.h().begin(), problem.h().end()),
                                        DenseMatrix<double>::from_rows({row}), {5000.0}, {Sense::LessEqual}));
        CHECK(p.size() == 313);
    }

    SECTION("rejections") {
        CHECK_THROWS_AS(add_slack_variables(knapsack({-1}, {1}, 2.5)), std::invalid_argument);
        const auto once = add_slack_variables(knapsack({-1}, {1}, 2));
        CHECK_THROWS_AS(add_slack_variables(once), std::invalid_argument);
    }

    SECTION("item projection of the equality form matches the inequality by enumeration") {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 20; ++trial) {
            std::uniform_int_distribution<int> w(0, 9);
            std::vector<double> a(5);
            for (auto& v : a) v = w(rng);
            const double b = 1 + rng() % 20;
            const auto base = knapsack(std::vector<double>(5, -1.0), a, b);
            const auto ext = add_slack_variables(base);
            const std::size_t n_ext = ext.size();
            std::vector<bool> reachable(32, false);
            for (std::uint64_t k = 0; k < (std::uint64_t{1} << n_ext); ++k) {
                const auto x = testing::bits_of(k, n_ext);
                DenseMatrix<double> A = ext.A();
                const auto g = testing::direct_g(A, {b}, x);
                if (std::abs(g[0]) < 1e-12) reachable[k & 31u] = true;
            }
            for (std::uint64_t k = 0; k < 32; ++k) {
                double load = 0.0;
                for (std::size_t i = 0; i < 5; ++i) load += ((k >> i) & 1u) * a[i];
                CHECK(reachable[k] == (load <= b));
            }
        }
    }
}

TEST_CASE("Normalization", "[model][normalize]") {
    std::mt19937_64 rng(12);
    const auto p = random_integer_qkp(12, rng);
    const auto n1 = normalize(p);

    SECTION("scales and bounds") {
        double obj = 0.0;
        for (double v : n1.problem.W().values()) obj = std::max(obj, std::abs(v));
        for (double v : n1.problem.h()) obj = std::max(obj, std::abs(v));
        CHECK(obj == 1.0);
        CHECK(n1.scale_obj <= 100.0);
        CHECK(n1.scale_con == p.b()[0]);
    }

    SECTION("max entry 50 maps to magnitude one") {
        auto W = DenseMatrix<double>::from_rows({{0, -50}, {-50, 0}});
        const auto n = normalize(ConstrainedQuadraticProblem(W, {-10, -20}, DenseMatrix<double>::from_rows({{1, 1}}),
                                                             {1}, {Sense::LessEqual}));
        CHECK(n.scale_obj == 50.0);
        CHECK(n.problem.W()(0, 1) == -1.0);
        CHECK(n.problem.h()[1] == Approx(-0.4));
    }

    SECTION("idempotent") {
        const auto n2 = normalize(n1.problem);
        CHECK(n2.scale_obj == 1.0);
        CHECK(n2.scale_con == 1.0);
        CHECK(n2.problem.W() == n1.problem.W());
        CHECK(std::equal(n2.problem.h().begin(), n2.problem.h().end(), n1.problem.h().begin()));
        CHECK(n2.problem.A() == n1.problem.A());
    }

    SECTION("argmin and feasible set are preserved") {
        auto value = [](const ConstrainedQuadraticProblem& q) {
            return [&q](const std::vector<std::uint8_t>& x) { return evaluate_f(q, x); };
        };
        auto feasible = [](const ConstrainedQuadraticProblem& q) {
            return [&q](const std::vector<std::uint8_t>& x) { return is_feasible(q, x); };
        };
        const auto before = testing::recursive_minimum(12, value(p), feasible(p));
        const auto after = testing::recursive_minimum(12, value(n1.problem), feasible(n1.problem));
        CHECK(before.state == after.state);
        CHECK(after.value * n1.scale_obj == Approx(before.value));
        for (std::uint64_t k = 0; k < 4096; ++k) {
            const auto x = testing::bits_of(k, 12);
            REQUIRE(is_feasible(p, x) == is_feasible(n1.problem, x));
        }
    }

    SECTION("slack layout survives") {
        const auto ext = normalize(add_slack_variables(p));
        REQUIRE(ext.problem.slack_layout());
        CHECK(ext.problem.item_count() == 12);
        CHECK(ext.problem.slack_layout()->divisor == ext.scale_con);
    }

    SECTION("degenerate inputs are rejected") {
        CHECK_THROWS_AS(normalize(knapsack({0, 0}, {1, 1}, 1)), std::invalid_argument);
    }
}

TEST_CASE("Energy compilation", "[model][compile]") {
    SECTION("hand-evaluated toy") {
        ConstrainedQuadraticProblem p(DenseMatrix<double>(2, 2), {-1.0, 0.0}, DenseMatrix<double>::from_rows({{1, 1}}),
                                      {1.0}, {Sense::Equal});
        const auto e = compile_energy(p, {2.0, {0.5}});
        CHECK(e.energy(std::vector<std::uint8_t>{1, 1}) == Approx(1.5));
        CHECK(evaluate_L(p, {2.0, {0.5}}, std::vector<std::uint8_t>{1, 1}) == Approx(1.5));
    }

    SECTION("P = 0 and lambda = 0 reproduce f") {
        std::mt19937_64 rng(3);
        const auto p = random_integer_qkp(6, rng);
        const auto e = compile_energy(p, {0.0, {0.0}});
        for (std::uint64_t k = 0; k < 64; ++k) {
            const auto x = testing::bits_of(k, 6);
            CHECK(e.energy(x) == Approx(evaluate_f(p, x)));
        }
    }

    SECTION("random problems: binary and spin energies equal the direct formula") {
        std::mt19937_64 rng(21);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int trial = 0; trial < 10; ++trial) {
            const std::size_t n = 6;
            DenseMatrix<double> W(n, n);
            std::vector<double> h(n);
            DenseMatrix<double> A(2, n);
            for (std::size_t i = 0; i < n; ++i) {
                h[i] = u(rng);
                A(0, i) = u(rng);
                A(1, i) = u(rng);
                for (std::size_t j = i + 1; j < n; ++j) W(i, j) = W(j, i) = u(rng);
            }
            const std::vector<double> b{1.5, 0.5};
            const double P = 1.0 + std::abs(u(rng));
            const std::vector<double> lambda{u(rng), u(rng)};
            ConstrainedQuadraticProblem p(W, h, A, b, {Sense::Equal, Sense::Equal});
            const auto e = compile_energy(p, {P, lambda});
            const auto s = to_ising(e);
            for (std::uint64_t k = 0; k < 64; ++k) {
                const auto x = testing::bits_of(k, n);
                const double ref = testing::direct_L(W, h, A, b, P, lambda, x);
                CHECK(e.energy(x) == Approx(ref).margin(1e-9));
                CHECK(s.energy(to_spins(x)) == Approx(ref).margin(1e-9));
            }
        }
    }

    SECTION("multipliers only touch the linear part") {
        std::mt19937_64 rng(4);
        const auto p = add_slack_variables(random_integer_qkp(5, rng));
        const auto e0 = compile_energy(p, {3.0, {0.0}});
        const auto e1 = compile_energy(p, {3.0, {7.25}});
        CHECK(e0.quad() == e1.quad());
        for (std::uint64_t k = 0; k < 32; ++k) {
            BinaryState x = testing::bits_of(k * 977 % (1u << p.size()), p.size());
            const double g = evaluate_g(p, x)[0];
            CHECK(e1.energy(x) - e0.energy(x) == Approx(7.25 * g).margin(1e-9));
        }
    }

    SECTION("lambda length must match") {
        ConstrainedQuadraticProblem p(DenseMatrix<double>(1, 1), {1.0}, DenseMatrix<double>::from_rows({{1}}), {1.0},
                                      {Sense::Equal});
        CHECK_THROWS_AS(compile_energy(p, {1.0, {}}), std::invalid_argument);
    }
}

TEST_CASE("Ising mapping of single terms", "[model][ising]") {
    SECTION("quadratic term") {
        auto quad = DenseMatrix<double>(2, 2);
        quad(0, 1) = 3.0;
        const auto s = to_ising(BinaryQuadraticEnergy(quad, {0.0, 0.0}, 0.0));
        CHECK(s.J(0, 1) == -0.75);
        CHECK(s.J(1, 0) == -0.75);
        CHECK(s.h_field[0] == -0.75);
        CHECK(s.h_field[1] == -0.75);
        CHECK(s.constant == 0.75);
    }

    SECTION("linear term") {
        const auto s = to_ising(BinaryQuadraticEnergy(DenseMatrix<double>(1, 1), {5.0}, 0.0));
        CHECK(s.h_field[0] == -2.5);
        CHECK(s.constant == 2.5);
    }
}

TEST_CASE("Lagrangian Ising updates", "[model][ising]") {
    std::mt19937_64 rng(9);
    const auto p = normalize(add_slack_variables(random_integer_qkp(6, rng))).problem;
    LagrangianIsing lagrangian(p, 2.5);
    const DenseMatrix<double> J0 = lagrangian.current().J;
    for (double mult : {0.0, 1.5, -4.0, 30.0}) {
        const auto& c = lagrangian.update(std::vector<double>{mult});
        const auto direct = to_ising(compile_energy(p, {2.5, {mult}}));
        CHECK(c.J == J0);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(c.h_field[i] == Approx(direct.h_field[i]).margin(1e-12));
        CHECK(c.constant == Approx(direct.constant).margin(1e-9));
    }
}

TEST_CASE("Objective and constraint evaluation", "[model][evaluate]") {
    SECTION("zero vector") {
        const auto p = knapsack({-5, -3}, {4, 2}, 6);
        const BinaryState x{0, 0};
        CHECK(evaluate_f(p, x) == 0.0);
        CHECK(evaluate_g(p, x) == std::vector<double>{-6.0});
        CHECK(is_feasible(p, x));
    }

    SECTION("QKP toy") {
        auto W = DenseMatrix<double>::from_rows({{0, -2}, {-2, 0}});
        ConstrainedQuadraticProblem p(W, {-3, -1}, DenseMatrix<double>::from_rows({{1, 1}}), {2}, {Sense::LessEqual});
        CHECK(evaluate_f(p, BinaryState{1, 1}) == -6.0);
    }

    SECTION("feasibility uses item bits against the original capacity") {
        const auto p = normalize(add_slack_variables(knapsack({-5, -3}, {4, 2}, 6))).problem;
        BinaryState x(p.size(), 0);
        x[0] = x[1] = 1;
        CHECK(is_feasible(p, x));
        x[0] = 0;
        x[2] = 1;
        CHECK(is_feasible(p, x));
        const auto tight = normalize(add_slack_variables(knapsack({-5, -3}, {4, 3}, 6))).problem;
        BinaryState y(tight.size(), 0);
        y[0] = y[1] = 1;
        CHECK_FALSE(is_feasible(tight, y));
    }
}

TEST_CASE("Density", "[model][density]") {
    SECTION("dense couplings") {
        DenseMatrix<double> W(5, 5);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j)
                if (i != j) W(i, j) = -1.0;
        ConstrainedQuadraticProblem p(W, std::vector<double>(5, -1.0), DenseMatrix<double>::from_rows({{1, 1, 1, 1, 1}}),
                                      {3}, {Sense::LessEqual});
        CHECK(compute_density(p) == 1.0);
        CHECK(compute_density(add_slack_variables(p)) == 1.0);
        CHECK(compute_density(to_ising(compile_energy(p, {0.0, {0.0}}))) == 1.0);
    }

    SECTION("linear objective with 99 spins") {
        DenseMatrix<double> A(1, 99);
        for (std::size_t i = 0; i < 99; ++i) A(0, i) = 1.0;
        ConstrainedQuadraticProblem p(DenseMatrix<double>(99, 99), std::vector<double>(99, -1.0), A, {50},
                                      {Sense::Equal});
        CHECK(compute_density(p) == Approx(0.02));
    }

    SECTION("no couplings in quadratic mode") {
        CHECK(compute_density(knapsack({-1, -1, -1}, {1, 1, 1}, 2), DensityMode::Quadratic) == 0.0);
        CHECK(compute_density(IsingCoefficients{DenseMatrix<double>(3, 3), {1, 1, 1}, 0.0}) == 0.0);
    }

    SECTION("generated half-dense QKP") {
        const auto inst = generate_qkp(60, 0.5, 2);
        const auto p = add_slack_variables(to_problem(inst));
        CHECK(compute_density(p) == Approx(detail::measured_density(inst.W)));
        CHECK(std::abs(compute_density(p) - 0.5) < 0.05);
    }
}

TEST_CASE("Spin conversions", "[model]") {
    const BinaryState x{1, 0, 0, 1};
    const auto m = to_spins(x);
    CHECK(m == std::vector<std::int8_t>{1, -1, -1, 1});
    CHECK(to_binary(m) == x);
}

}  // namespace saim
