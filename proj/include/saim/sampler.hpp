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

#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "saim/model.hpp"
#include "saim/rng.hpp"

namespace saim {

/// Spin configuration with every entry exactly -1 or +1.
class SpinState {
 public:
    SpinState() = default;
    explicit SpinState(std::vector<std::int8_t> m) : m_(std::move(m)) {
        for (std::size_t i = 0; i < m_.size(); ++i) {
            if (m_[i] != 1 && m_[i] != -1)
                throw std::invalid_argument("spin " + std::to_string(i) + " is not +-1");
        }
    }

    static SpinState from_binary(std::span<const std::uint8_t> x) { return SpinState(to_spins(x)); }

    template <class Rng>
    static SpinState random(std::size_t n, Rng& rng) {
        std::vector<std::int8_t> m(n);
        for (auto& s : m) s = rng.uniform_pm1() < 0.0 ? -1 : 1;
        return SpinState(std::move(m));
    }

    std::size_t size() const { return m_.size(); }
    std::int8_t operator[](std::size_t i) const { return m_[i]; }
    std::span<const std::int8_t> values() const { return m_; }
    BinaryState to_binary() const { return saim::to_binary(m_); }

    /// Index with bit i set when spin i is +1; used to histogram small systems.
    std::uint64_t index() const {
        std::uint64_t k = 0;
        for (std::size_t i = 0; i < m_.size(); ++i)
            if (m_[i] > 0) k |= std::uint64_t{1} << i;
        return k;
    }

    friend bool operator==(const SpinState&, const SpinState&) = default;

 private:
    friend class PbitMachine;
    std::vector<std::int8_t> m_;
};

/// Linear inverse-temperature ramp from 0 to beta_max over `sweeps` MCS.
struct AnnealSchedule {
    double beta_max = 10.0;
    std::size_t sweeps = 1000;

    double beta_at(std::size_t t) const {
        if (sweeps <= 1) return beta_max;
        return beta_max * static_cast<double>(t) / static_cast<double>(sweeps - 1);
    }
};

/// Anything that yields uniform noise on (-1, 1).
template <class R>
concept UniformSource = requires(R& r) {
    { r.uniform_pm1() } -> std::convertible_to<double>;
};

/// Network of p-bits: m_i = sign[tanh(beta I_i) + rand(-1, 1)] with
/// I_i = sum_j J_ij m_j + h_i. Input currents are cached and patched on every
/// flip, so one sweep costs O(N + flips * N).
class PbitMachine {
 public:
    PbitMachine(const IsingCoefficients& coeffs, SpinState state)
        : coeffs_(&coeffs), state_(std::move(state)), input_(coeffs.size()) {
        if (state_.size() != coeffs.size())
            throw std::invalid_argument("spin state and coefficients differ in size");
        const std::size_t n = coeffs.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = coeffs.J.row(i);
            double acc = coeffs.h_field[i];
            for (std::size_t j = 0; j < n; ++j) acc += row[j] * state_.m_[j];
            input_[i] = acc;
        }
    }

    /// One Monte Carlo sweep: spins updated in ascending index order, each
    /// seeing the spins already updated in this sweep.
    template <UniformSource R>
    void sweep(double beta, R& rng) {
        const std::size_t n = state_.size();
        auto& m = state_.m_;
        for (std::size_t i = 0; i < n; ++i) {
            const double activation = std::tanh(beta * input_[i]) + rng.uniform_pm1();
            const std::int8_t next = activation >= 0.0 ? 1 : -1;
            if (next == m[i]) continue;
            m[i] = next;
            const double delta = 2.0 * next;
            const double* row = coeffs_->J.row(i).data();
            double* in = input_.data();
            for (std::size_t j = 0; j < n; ++j) in[j] += delta * row[j];
        }
    }

    const SpinState& state() const { return state_; }
    std::span<const double> inputs() const { return input_; }

 private:
    const IsingCoefficients* coeffs_;
    SpinState state_;
    std::vector<double> input_;
};

template <UniformSource R>
SpinState gibbs_sweep(SpinState state, const IsingCoefficients& coeffs, double beta, R& rng) {
    if (beta < 0.0) throw std::invalid_argument("beta must be non-negative");
    PbitMachine machine(coeffs, std::move(state));
    machine.sweep(beta, rng);
    return machine.state();
}

/// One simulated-annealing run from a fresh uniform random state; returns the
/// last sample.
template <UniformSource R>
SpinState anneal_run(const IsingCoefficients& coeffs, const AnnealSchedule& schedule, R& rng) {
    if (schedule.sweeps == 0) throw std::invalid_argument("an anneal needs at least one sweep");
    PbitMachine machine(coeffs, SpinState::random(coeffs.size(), rng));
    for (std::size_t t = 0; t < schedule.sweeps; ++t) machine.sweep(schedule.beta_at(t), rng);
    return machine.state();
}

inline constexpr std::size_t kMaxHistogramSpins = 15;

/// Empirical distribution over all 2^N states at fixed beta; entry k is the
/// frequency of the state whose bit i is set iff spin i is +1.
template <UniformSource R>
std::vector<double> sample_equilibrium(const IsingCoefficients& coeffs, double beta, std::size_t n_samples,
                                       std::size_t burn_in, R& rng) {
    const std::size_t n = coeffs.size();
    if (n > kMaxHistogramSpins)
        throw std::invalid_argument("histogram sampling supports at most " + std::to_string(kMaxHistogramSpins) +
                                    " spins, got " + std::to_string(n));
    if (n_samples == 0) throw std::invalid_argument("need at least one sample");
    PbitMachine machine(coeffs, SpinState::random(n, rng));
    for (std::size_t t = 0; t < burn_in; ++t) machine.sweep(beta, rng);
    std::vector<double> hist(std::size_t{1} << n, 0.0);
    for (std::size_t s = 0; s < n_samples; ++s) {
        machine.sweep(beta, rng);
        hist[machine.state().index()] += 1.0;
    }
    for (double& v : hist) v /= static_cast<double>(n_samples);
    return hist;
}

}  // namespace saim
