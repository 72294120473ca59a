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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "saim/model.hpp"
#include "saim/rng.hpp"
#include "saim/sampler.hpp"

namespace saim {

struct SaimConfig {
    double alpha = 2.0;              // P = alpha * d * N unless `penalty` is set
    std::optional<double> penalty;   // explicit P
    double eta = 20.0;               // multiplier step size
    std::size_t runs = 2000;         // outer iterations K
    std::size_t mcs_per_run = 1000;  // sweeps T per annealing run
    double beta_max = 10.0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    bool keep_samples = true;  // store x_k in the trace

    void validate() const {
        if (runs < 1) throw std::invalid_argument("runs must be at least 1");
        if (mcs_per_run < 1) throw std::invalid_argument("mcs_per_run must be at least 1");
        if (!(eta >= 0.0)) throw std::invalid_argument("eta must be non-negative");
        if (!(beta_max >= 0.0)) throw std::invalid_argument("beta_max must be non-negative");
        if (penalty && !(*penalty >= 0.0)) throw std::invalid_argument("penalty must be non-negative");
        if (!penalty && !(alpha >= 0.0)) throw std::invalid_argument("alpha must be non-negative");
    }
};

struct IterationRecord {
    std::size_t index = 0;
    BinaryState sample;          // full x_k including slack bits (empty unless keep_samples)
    std::vector<double> g;       // A x_k - b in equality form
    bool feasible = false;       // item bits satisfy the original inequalities
    std::optional<double> cost;  // f(x_k), present iff feasible
    std::vector<double> lambda;  // multipliers used to produce x_k
};

struct SaimResult {
    std::optional<BinaryState> best_state;  // full vector of the best feasible sample
    std::optional<double> best_cost;
    std::size_t best_iteration = 0;
    std::size_t feasible_count = 0;
    double feasibility_ratio = 0.0;  // percent of the K samples that were feasible
    std::optional<double> mean_feasible_cost;
    std::vector<IterationRecord> trace;
    std::vector<double> final_lambda;
    double penalty = 0.0;
    double density = 0.0;
    std::size_t spins = 0;
    std::uint64_t total_sweeps = 0;
    double wall_seconds = 0.0;

    bool found_feasible() const { return best_cost.has_value(); }
};

/// lambda + eta * g, elementwise. No projection: equality multipliers are sign-free.
inline std::vector<double> update_multipliers(std::span<const double> lambda, std::span<const double> g, double eta) {
    if (lambda.size() != g.size()) throw std::invalid_argument("multiplier and constraint dimensions differ");
    std::vector<double> out(lambda.size());
    for (std::size_t m = 0; m < out.size(); ++m) out[m] = lambda[m] + eta * g[m];
    return out;
}

/// Penalty weight used by a run: the explicit override, else alpha * d * N.
inline double resolve_penalty(const ConstrainedQuadraticProblem& problem, const SaimConfig& config) {
    if (config.penalty) return *config.penalty;
    return config.alpha * compute_density(problem) * static_cast<double>(problem.size());
}

/// Self-adaptive loop: anneal L_k, keep feasible samples, step the
/// multipliers along g(x_k). `problem` should already be slack-extended and
/// normalized.
inline SaimResult run_saim(const ConstrainedQuadraticProblem& problem, const SaimConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();

    SaimResult result;
    result.spins = problem.size();
    result.density = compute_density(problem);
    result.penalty = resolve_penalty(problem, config);
    result.trace.reserve(config.runs);

    LagrangianIsing lagrangian(problem, result.penalty);
    std::vector<double> lambda(problem.num_constraints(), 0.0);
    const AnnealSchedule schedule{config.beta_max, config.mcs_per_run};
    RngStream rng(config.seed, config.stream);
    double feasible_sum = 0.0;

    for (std::size_t k = 0; k < config.runs; ++k) {
        const IsingCoefficients& coeffs = lagrangian.update(lambda);
        const BinaryState x = anneal_run(coeffs, schedule, rng).to_binary();

        IterationRecord record;
        record.index = k;
        record.g = evaluate_g(problem, x);
        record.feasible = is_feasible(problem, x);
        record.lambda = lambda;
        if (record.feasible) {
            const double cost = evaluate_f(problem, x);
            record.cost = cost;
            feasible_sum += cost;
            ++result.feasible_count;
            if (!result.best_cost || cost < *result.best_cost) {
                result.best_cost = cost;
                result.best_state = x;
                result.best_iteration = k;
            }
        }
        lambda = update_multipliers(lambda, record.g, config.eta);
        if (config.keep_samples) record.sample = x;
        result.trace.push_back(std::move(record));
    }

    result.final_lambda = std::move(lambda);
    result.total_sweeps = static_cast<std::uint64_t>(config.runs) * config.mcs_per_run;
    result.feasibility_ratio = 100.0 * static_cast<double>(result.feasible_count) / static_cast<double>(config.runs);
    if (result.feasible_count)
        result.mean_feasible_cost = feasible_sum / static_cast<double>(result.feasible_count);
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

/// Plain penalty method: the same loop with the multipliers frozen at zero.
inline SaimResult run_penalty_baseline(const ConstrainedQuadraticProblem& problem, SaimConfig config) {
    config.eta = 0.0;
    return run_saim(problem, config);
}

/// Accuracy in percent, 100 * cost / opt. Costs are negative in the
/// minimization convention, so 100 means optimal.
inline double compute_accuracy(double cost, double opt) {
    if (!(opt < 0.0)) throw std::invalid_argument("accuracy needs a negative optimum, got " + std::to_string(opt));
    return 100.0 * cost / opt;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct AccuracyRecord {
    std::string instance;
    std::optional<double> best_accuracy;  // null when OPT is unknown or nothing was feasible
    std::optional<double> avg_accuracy;
    double feasibility = 0.0;
};

struct Quartiles {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    std::size_t count = 0;

    double iqr() const { return q3 - q1; }
};

/// Quantiles with linear interpolation between order statistics.
inline Quartiles quartiles(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("quartiles of an empty set");
    std::sort(values.begin(), values.end());
    auto at = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    return {at(0.25), at(0.5), at(0.75), values.size()};
}

struct CampaignStatistics {
    std::vector<AccuracyRecord> per_instance;
    std::optional<Quartiles> best_accuracy;
    std::optional<Quartiles> avg_accuracy;
    Quartiles feasibility;
    std::size_t without_feasible = 0;  // records with no feasible sample
};

inline AccuracyRecord accuracy_record(const std::string& instance, const SaimResult& result,
                                      std::optional<double> opt) {
    AccuracyRecord out{instance, std::nullopt, std::nullopt, result.feasibility_ratio};
    if (opt && *opt < 0.0 && result.found_feasible()) {
        out.best_accuracy = compute_accuracy(*result.best_cost, *opt);
        out.avg_accuracy = compute_accuracy(*result.mean_feasible_cost, *opt);
    }
    return out;
}

inline CampaignStatistics summarize(std::span<const AccuracyRecord> records) {
    if (records.empty()) throw std::invalid_argument("nothing to summarize");
    CampaignStatistics out;
    out.per_instance.assign(records.begin(), records.end());
    std::vector<double> best;
    std::vector<double> avg;
    std::vector<double> feas;
    for (const auto& r : records) {
        if (r.best_accuracy) best.push_back(*r.best_accuracy);
        if (r.avg_accuracy) avg.push_back(*r.avg_accuracy);
        feas.push_back(r.feasibility);
        if (r.feasibility == 0.0) ++out.without_feasible;
    }
    if (!best.empty()) out.best_accuracy = quartiles(best);
    if (!avg.empty()) out.avg_accuracy = quartiles(avg);
    out.feasibility = quartiles(feas);
    return out;
}

}  // namespace saim
