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

#include <glob.h>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "saim/instances.hpp"
#include "saim/model.hpp"
#include "saim/oracle.hpp"
#include "saim/saim.hpp"

namespace saim {

inline constexpr int kResultFormatVersion = 1;

/// Parameter sets for the QKP and MKP benchmark experiments.
inline SaimConfig preset_config(std::string_view name) {
    SaimConfig c;
    if (name == "qkp-paper") {
        c.alpha = 2.0;
        c.mcs_per_run = 1000;
        c.runs = 2000;
        c.beta_max = 10.0;
        c.eta = 20.0;
    } else if (name == "mkp-paper") {
        c.alpha = 5.0;
        c.mcs_per_run = 1000;
        c.runs = 5000;
        c.beta_max = 50.0;
        c.eta = 0.05;
    } else {
        throw std::invalid_argument("unknown preset '" + std::string(name) + "' (expected qkp-paper or mkp-paper)");
    }
    return c;
}

enum class SolveMode { Saim, Penalty };

inline std::string_view to_string(SolveMode mode) { return mode == SolveMode::Saim ? "saim" : "penalty"; }

inline SolveMode parse_mode(std::string_view text) {
    if (text == "saim") return SolveMode::Saim;
    if (text == "penalty") return SolveMode::Penalty;
    throw std::invalid_argument("unknown mode '" + std::string(text) + "' (expected saim or penalty)");
}

/// "qkp:n=12,density=0.5,count=10,seed=7" or "mkp:n=100,m=5,tightness=0.5".
struct GeneratorSpec {
    std::string kind = "qkp";
    std::size_t n = 12;
    double density = 0.5;
    std::size_t m = 5;
    double tightness = 0.5;
    std::size_t count = 1;
    std::uint64_t seed = 1;
};

inline GeneratorSpec parse_generator_spec(std::string_view text) {
    GeneratorSpec spec;
    const auto colon = text.find(':');
    spec.kind = std::string(text.substr(0, colon));
    if (spec.kind != "qkp" && spec.kind != "mkp")
        throw std::invalid_argument("generator kind must be qkp or mkp, got '" + spec.kind + "'");
    if (colon == std::string_view::npos) return spec;
    std::string rest(text.substr(colon + 1));
    std::istringstream fields(rest);
    std::string field;
    while (std::getline(fields, field, ',')) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("generator field '" + field + "' needs key=value");
        const auto key = field.substr(0, eq);
        const auto value = field.substr(eq + 1);
        try {
            if (key == "n") spec.n = std::stoul(value);
            else if (key == "density" || key == "d") spec.density = std::stod(value);
            else if (key == "m") spec.m = std::stoul(value);
            else if (key == "tightness") spec.tightness = std::stod(value);
            else if (key == "count") spec.count = std::stoul(value);
            else if (key == "seed") spec.seed = std::stoull(value);
            else throw std::invalid_argument("unknown generator field '" + key + "'");
        } catch (const std::logic_error& e) {
            if (dynamic_cast<const std::invalid_argument*>(&e) && std::string(e.what()).starts_with("unknown")) throw;
            throw std::invalid_argument("bad value for generator field '" + key + "': " + value);
        }
    }
    return spec;
}

/// Instances `seed`, `seed + 1`, ... of the requested family.
inline std::vector<Instance> generate_instances(const GeneratorSpec& spec) {
    std::vector<Instance> out;
    for (std::size_t k = 0; k < spec.count; ++k) {
        const std::uint64_t seed = spec.seed + k;
        if (spec.kind == "qkp") {
            out.emplace_back(generate_qkp(spec.n, spec.density, seed));
        } else {
            MkpGeneratorOptions options;
            options.tightness = spec.tightness;
            out.emplace_back(generate_mkp(spec.n, spec.m, seed, options));
        }
    }
    return out;
}

struct ExperimentConfig {
    std::string preset = "qkp-paper";
    SolveMode mode = SolveMode::Saim;
    std::vector<std::string> instance_patterns;
    std::optional<GeneratorSpec> generator;
    SaimConfig saim = preset_config("qkp-paper");
    std::size_t replicates = 1;
    std::size_t workers = 1;
    std::filesystem::path out = "results";
    std::size_t oracle_limit = 20;  // solve for OPT by enumeration when unknown and n <= limit
};

struct SourcedInstance {
    std::string source;
    Instance instance;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

/// Sorted paths matching a shell glob; a literal path must exist.
inline std::vector<std::filesystem::path> expand_glob(const std::string& pattern) {
    glob_t matches{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &matches);
    std::vector<std::filesystem::path> out;
    if (rc == 0) {
        for (std::size_t i = 0; i < matches.gl_pathc; ++i) out.emplace_back(matches.gl_pathv[i]);
    }
    globfree(&matches);
    if (out.empty()) throw std::runtime_error("no instance file matches '" + pattern + "'");
    return out;
}

inline std::vector<SourcedInstance> load_instance_file(const std::filesystem::path& path) {
    std::vector<SourcedInstance> out;
    for (auto& inst : load_instances(read_file(path), path.stem().string()))
        out.push_back({path.string(), std::move(inst)});
    return out;
}

inline std::vector<SourcedInstance> resolve_instances(const ExperimentConfig& config) {
    std::vector<SourcedInstance> out;
    for (const auto& pattern : config.instance_patterns)
        for (const auto& path : expand_glob(pattern))
            for (auto& inst : load_instance_file(path)) out.push_back(std::move(inst));
    if (config.generator)
        for (auto& inst : generate_instances(*config.generator)) out.push_back({"generated", std::move(inst)});
    if (out.empty()) throw std::invalid_argument("no instances given (use --instances or --generate)");
    return out;
}

/// Raw inequality problem plus the slack-extended, normalized form SAIM runs on.
struct PreparedInstance {
    std::string name;
    std::string source;
    ConstrainedQuadraticProblem original;
    NormalizedProblem solver;
    std::optional<double> opt;
    std::string opt_source;  // "file", "oracle" or empty
};

inline PreparedInstance prepare_instance(const SourcedInstance& sourced, std::size_t oracle_limit) {
    PreparedInstance out;
    out.name = instance_name(sourced.instance);
    out.source = sourced.source;
    out.original = to_problem(sourced.instance);
    out.solver = normalize(add_slack_variables(out.original));
    out.opt = instance_opt(sourced.instance);
    if (out.opt) {
        out.opt_source = "file";
    } else if (out.original.size() <= std::min(oracle_limit, kMaxExhaustiveVariables)) {
        const auto exact = exhaustive_solve(out.original);
        if (exact.feasible()) {
            out.opt = exact.value;
            out.opt_source = "oracle";
        }
    }
    return out;
}

namespace detail {

inline std::string bits(std::span<const std::uint8_t> x, std::size_t n) {
    std::string s(n, '0');
    for (std::size_t i = 0; i < n; ++i)
        if (x[i]) s[i] = '1';
    return s;
}

inline std::string fnv1a_hex(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << hash;
    return out.str();
}

inline nlohmann::ordered_json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json quartiles_json(const std::optional<Quartiles>& q) {
    if (!q) return nullptr;
    return {{"q1", q->q1}, {"median", q->median}, {"q3", q->q3}, {"iqr", q->iqr()}, {"count", q->count}};
}

}  // namespace detail

/// Everything that determines the result records; output location and
/// worker count are excluded because they do not change the records.
inline nlohmann::ordered_json config_json(const ExperimentConfig& config) {
    nlohmann::ordered_json c;
    c["preset"] = config.preset;
    c["mode"] = to_string(config.mode);
    c["instances"] = config.instance_patterns;
    if (config.generator) {
        const auto& g = *config.generator;
        c["generator"] = {{"kind", g.kind}, {"n", g.n},         {"density", g.density}, {"m", g.m},
                          {"tightness", g.tightness}, {"count", g.count}, {"seed", g.seed}};
    } else {
        c["generator"] = nullptr;
    }
    c["alpha"] = config.saim.alpha;
    c["penalty"] = detail::optional_json(config.saim.penalty);
    c["eta"] = config.mode == SolveMode::Penalty ? 0.0 : config.saim.eta;
    c["runs"] = config.saim.runs;
    c["mcs_per_run"] = config.saim.mcs_per_run;
    c["beta_max"] = config.saim.beta_max;
    c["seed"] = config.saim.seed;
    c["replicates"] = config.replicates;
    c["oracle_limit"] = config.oracle_limit;
    return c;
}

inline std::string config_hash(const ExperimentConfig& config) { return detail::fnv1a_hex(config_json(config).dump()); }

/// Stream id of one (instance, replicate) job.
inline std::uint64_t job_stream(std::size_t instance_index, std::size_t replicate) {
    return (static_cast<std::uint64_t>(instance_index) << 32) | static_cast<std::uint64_t>(replicate);
}

struct JobOutcome {
    nlohmann::ordered_json record;
    AccuracyRecord accuracy;
    double wall_seconds = 0.0;
};

inline JobOutcome run_job(const PreparedInstance& inst, const ExperimentConfig& config, std::size_t instance_index,
                          std::size_t replicate, const std::string& hash) {
    SaimConfig sc = config.saim;
    sc.stream = job_stream(instance_index, replicate);
    sc.keep_samples = true;
    const SaimResult result = config.mode == SolveMode::Penalty ? run_penalty_baseline(inst.solver.problem, sc)
                                                                : run_saim(inst.solver.problem, sc);

    // Costs are reported in the instance's own units, from the item bits.
    const std::size_t items = inst.original.size();
    std::optional<double> best_cost;
    std::string best_solution;
    if (result.best_state) {
        const std::span<const std::uint8_t> x(result.best_state->data(), items);
        best_cost = evaluate_f(inst.original, x);
        best_solution = detail::bits(x, items);
    }
    // Every sample's cost, feasible or not, in raw units (infeasible samples
    // can undercut OPT while the multipliers are still small).
    std::optional<double> mean_cost;
    nlohmann::ordered_json cost_trace = nlohmann::ordered_json::array();
    nlohmann::ordered_json lambda_trace = nlohmann::ordered_json::array();
    std::string feasible_trace;
    feasible_trace.reserve(result.trace.size());
    double feasible_sum = 0.0;
    for (const auto& rec : result.trace) {
        const double cost = evaluate_f(inst.original, std::span<const std::uint8_t>(rec.sample.data(), items));
        cost_trace.push_back(cost);
        lambda_trace.push_back(rec.lambda);
        feasible_trace.push_back(rec.feasible ? '1' : '0');
        if (rec.feasible) feasible_sum += cost;
    }
    if (result.feasible_count) mean_cost = feasible_sum / static_cast<double>(result.feasible_count);

    AccuracyRecord acc{inst.name, std::nullopt, std::nullopt, result.feasibility_ratio};
    if (inst.opt && *inst.opt < 0.0 && best_cost) {
        acc.best_accuracy = compute_accuracy(*best_cost, *inst.opt);
        acc.avg_accuracy = compute_accuracy(*mean_cost, *inst.opt);
    }

    nlohmann::ordered_json r;
    r["format_version"] = kResultFormatVersion;
    r["config_hash"] = hash;
    r["instance"] = inst.name;
    r["source"] = inst.source;
    r["replicate"] = replicate;
    r["seed"] = sc.seed;
    r["stream"] = sc.stream;
    r["mode"] = to_string(config.mode);
    r["items"] = items;
    r["spins"] = result.spins;
    r["constraints"] = inst.original.num_constraints();
    r["density"] = result.density;
    r["penalty"] = result.penalty;
    r["eta"] = config.mode == SolveMode::Penalty ? 0.0 : sc.eta;
    r["scale_obj"] = inst.solver.scale_obj;
    r["scale_con"] = inst.solver.scale_con;
    r["opt"] = detail::optional_json(inst.opt);
    r["opt_source"] = inst.opt_source.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(inst.opt_source);
    r["feasible_found"] = result.found_feasible();
    r["best_cost"] = detail::optional_json(best_cost);
    r["best_accuracy"] = detail::optional_json(acc.best_accuracy);
    r["avg_accuracy"] = detail::optional_json(acc.avg_accuracy);
    r["feasibility"] = result.feasibility_ratio;
    r["best_iteration"] = result.found_feasible() ? nlohmann::ordered_json(result.best_iteration) : nlohmann::ordered_json(nullptr);
    r["best_solution"] = result.found_feasible() ? nlohmann::ordered_json(best_solution) : nlohmann::ordered_json(nullptr);
    r["total_sweeps"] = result.total_sweeps;
    r["final_lambda"] = result.final_lambda;
    r["feasible_trace"] = feasible_trace;
    r["cost_trace"] = std::move(cost_trace);
    r["lambda_trace"] = std::move(lambda_trace);
    return {std::move(r), std::move(acc), result.wall_seconds};
}

struct CampaignOutput {
    std::vector<std::string> records;  // one JSON line per (instance, replicate), job order
    nlohmann::ordered_json summary;
};

/// Runs every (instance, replicate) job on a bounded pool. Records are merged
/// in job order, so the output does not depend on the worker count.
inline CampaignOutput run_campaign(const ExperimentConfig& config) {
    config.saim.validate();
    if (config.replicates < 1) throw std::invalid_argument("replicates must be at least 1");
    const auto start = std::chrono::steady_clock::now();
    const std::string hash = config_hash(config);

    std::vector<PreparedInstance> prepared;
    for (const auto& sourced : resolve_instances(config)) prepared.push_back(prepare_instance(sourced, config.oracle_limit));

    const std::size_t jobs = prepared.size() * config.replicates;
    std::vector<JobOutcome> outcomes(jobs);
    std::vector<std::exception_ptr> errors(jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs; j = next++) {
            try {
                const std::size_t inst = j / config.replicates;
                const std::size_t rep = j % config.replicates;
                outcomes[j] = run_job(prepared[inst], config, inst, rep, hash);
            } catch (...) {
                errors[j] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(config.workers, jobs));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    CampaignOutput out;
    std::vector<AccuracyRecord> accuracies;
    nlohmann::ordered_json per_record = nlohmann::ordered_json::array();
    nlohmann::ordered_json wall = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j < jobs; ++j) {
        const auto& o = outcomes[j];
        out.records.push_back(o.record.dump());
        accuracies.push_back(o.accuracy);
        per_record.push_back({{"instance", o.record["instance"]},
                              {"replicate", o.record["replicate"]},
                              {"best_cost", o.record["best_cost"]},
                              {"best_accuracy", o.record["best_accuracy"]},
                              {"avg_accuracy", o.record["avg_accuracy"]},
                              {"feasibility", o.record["feasibility"]}});
        wall.push_back(o.wall_seconds);
    }
    const auto stats = summarize(accuracies);

    nlohmann::ordered_json instances = nlohmann::ordered_json::array();
    for (const auto& p : prepared) {
        instances.push_back({{"name", p.name},
                             {"source", p.source},
                             {"items", p.original.size()},
                             {"spins", p.solver.problem.size()},
                             {"opt", detail::optional_json(p.opt)},
                             {"opt_source", p.opt_source.empty() ? nlohmann::ordered_json(nullptr)
                                                                 : nlohmann::ordered_json(p.opt_source)},
                             {"scale_obj", p.solver.scale_obj},
                             {"scale_con", p.solver.scale_con}});
    }

    auto& s = out.summary;
    s["format_version"] = kResultFormatVersion;
    s["config_hash"] = hash;
    s["config"] = config_json(config);
    s["instances"] = std::move(instances);
    s["records"] = std::move(per_record);
    s["statistics"] = {{"best_accuracy", detail::quartiles_json(stats.best_accuracy)},
                       {"avg_accuracy", detail::quartiles_json(stats.avg_accuracy)},
                       {"feasibility", detail::quartiles_json(stats.feasibility)},
                       {"records_without_feasible", stats.without_feasible}};
    s["timing"] = {{"workers", threads},
                   {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
                   {"job_wall_seconds", std::move(wall)}};
    return out;
}

/// results.jsonl (records) and summary.json under `dir`.
inline void write_campaign(const CampaignOutput& output, const std::filesystem::path& dir) {
    std::string lines;
    for (const auto& r : output.records) lines += r + "\n";
    write_file(dir / "results.jsonl", lines);
    write_file(dir / "summary.json", output.summary.dump(2) + "\n");
}

/// OPT record for one instance; refuses more than kMaxExhaustiveVariables items.
inline nlohmann::ordered_json oracle_record(const Instance& instance) {
    const auto problem = to_problem(instance);
    if (problem.size() > kMaxExhaustiveVariables) {
        throw std::invalid_argument("oracle refuses " + instance_name(instance) + ": " + std::to_string(problem.size()) +
                                    " items exceed the exhaustive limit of " +
                                    std::to_string(kMaxExhaustiveVariables));
    }
    const auto exact = exhaustive_solve(problem);
    nlohmann::ordered_json r;
    r["format_version"] = kResultFormatVersion;
    r["instance"] = instance_name(instance);
    r["items"] = problem.size();
    r["opt"] = exact.feasible() ? nlohmann::ordered_json(exact.value) : nlohmann::ordered_json(nullptr);
    r["solution"] = exact.feasible() ? nlohmann::ordered_json(detail::bits(exact.state, problem.size())) : nlohmann::ordered_json(nullptr);
    r["optimal_states"] = exact.count;
    return r;
}

}  // namespace saim
