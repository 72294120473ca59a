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


// saim: command-line harness for the self-adaptive Ising machine solver.
//
//   saim solve    --preset qkp-paper --instances 'data/*.json' --out results/
//   saim validate [--suites tv,roundtrip,slack,concavity]
//   saim generate --kind qkp --n 12 --density 0.5 --seed 7 --out instances/
//   saim oracle   data/toy_mkp.txt

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "saim/campaign.hpp"
#include "saim/validate.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

struct SolveFlags {
    std::string preset = "qkp-paper";
    std::string mode = "saim";
    std::vector<std::string> instances;
    std::string generate;
    std::optional<std::size_t> runs;
    std::optional<std::size_t> mcs;
    std::optional<double> beta_max;
    std::optional<double> eta;
    std::optional<double> alpha;
    std::optional<double> penalty;
    std::uint64_t seed = 1;
    std::size_t replicates = 1;
    std::size_t workers = 1;
    std::string out = "results";
    std::size_t oracle_limit = 20;
};

saim::ExperimentConfig to_config(const SolveFlags& f) {
    saim::ExperimentConfig c;
    c.preset = f.preset;
    c.saim = saim::preset_config(f.preset);
    c.mode = saim::parse_mode(f.mode);
    c.instance_patterns = f.instances;
    if (!f.generate.empty()) c.generator = saim::parse_generator_spec(f.generate);
    if (f.runs) c.saim.runs = *f.runs;
    if (f.mcs) c.saim.mcs_per_run = *f.mcs;
    if (f.beta_max) c.saim.beta_max = *f.beta_max;
    if (f.eta) c.saim.eta = *f.eta;
    if (f.alpha) c.saim.alpha = *f.alpha;
    if (f.penalty) c.saim.penalty = *f.penalty;
    if (c.mode == saim::SolveMode::Penalty) c.saim.eta = 0.0;
    c.saim.seed = f.seed;
    c.replicates = f.replicates;
    c.workers = f.workers;
    c.out = f.out;
    c.oracle_limit = f.oracle_limit;
    return c;
}

int cmd_solve(const SolveFlags& flags) {
    const auto config = to_config(flags);
    const auto output = saim::run_campaign(config);
    saim::write_campaign(output, config.out);
    const auto& stats = output.summary["statistics"];
    std::cout << "wrote " << output.records.size() << " records to " << (config.out / "results.jsonl").string() << "\n";
    if (!stats["best_accuracy"].is_null()) {
        std::cout << "best accuracy median " << stats["best_accuracy"]["median"].get<double>() << "%, IQR "
                  << stats["best_accuracy"]["iqr"].get<double>() << "\n";
    }
    std::cout << "feasibility median " << stats["feasibility"]["median"].get<double>() << "%\n";
    return 0;
}

int cmd_validate(const std::optional<std::string>& suites_flag) {
    std::vector<std::string> suites = saim::validation_suites();
    if (suites_flag) suites = split_list(*suites_flag);
    const auto results = saim::run_validation(suites);
    bool all = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.statistic_name << " = " << r.statistic
                  << " (threshold " << r.threshold << ")\n";
        all = all && r.passed;
    }
    return all ? 0 : 3;
}

struct GenerateFlags {
    std::string kind = "qkp";
    std::size_t n = 12;
    double density = 0.5;
    std::size_t m = 5;
    double tightness = 0.5;
    std::size_t count = 1;
    std::uint64_t seed = 1;
    std::string out = "instances";
    std::string format = "canonical";
};

int cmd_generate(const GenerateFlags& f) {
    saim::GeneratorSpec spec{f.kind, f.n, f.density, f.m, f.tightness, f.count, f.seed};
    if (spec.kind != "qkp" && spec.kind != "mkp") throw std::invalid_argument("--kind must be qkp or mkp");
    if (f.format != "canonical" && f.format != "native") throw std::invalid_argument("--format must be canonical or native");
    for (const auto& inst : saim::generate_instances(spec)) {
        const auto& name = saim::instance_name(inst);
        std::filesystem::path path;
        std::string text;
        if (f.format == "canonical") {
            path = std::filesystem::path(f.out) / (name + ".json");
            text = saim::to_canonical(inst);
        } else if (const auto* q = std::get_if<saim::QkpInstance>(&inst)) {
            path = std::filesystem::path(f.out) / (name + ".txt");
            text = saim::serialize_qkp(*q);
        } else {
            path = std::filesystem::path(f.out) / (name + ".txt");
            text = saim::serialize_mkp_orlib({std::get<saim::MkpInstance>(inst)});
        }
        saim::write_file(path, text);
        std::cout << path.string() << "\n";
    }
    return 0;
}

int cmd_oracle(const std::vector<std::string>& paths) {
    for (const auto& path : paths)
        for (const auto& sourced : saim::load_instance_file(path))
            std::cout << saim::oracle_record(sourced.instance).dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-adaptive Ising machine solver and benchmark harness"};
    app.require_subcommand(1);

    SolveFlags solve;
    auto* s = app.add_subcommand("solve", "run SAIM or the penalty baseline over an instance set");
    s->add_option("--preset", solve.preset, "qkp-paper or mkp-paper")->capture_default_str();
    s->add_option("--mode", solve.mode, "saim or penalty")->capture_default_str();
    s->add_option("--instances", solve.instances, "instance file or glob (repeatable)");
    s->add_option("--generate", solve.generate, "generator spec, e.g. qkp:n=12,density=0.5,count=10,seed=7");
    s->add_option("--runs", solve.runs, "outer iterations K");
    s->add_option("--mcs", solve.mcs, "Monte Carlo sweeps per annealing run");
    s->add_option("--beta-max", solve.beta_max, "final inverse temperature");
    s->add_option("--eta", solve.eta, "multiplier step size");
    s->add_option("--alpha", solve.alpha, "penalty prefactor, P = alpha * d * N");
    s->add_option("--penalty", solve.penalty, "explicit penalty P (overrides --alpha)");
    s->add_option("--seed", solve.seed, "RNG seed")->capture_default_str();
    s->add_option("--replicates", solve.replicates, "independent runs per instance")->capture_default_str();
    s->add_option("--workers", solve.workers, "parallel jobs")->capture_default_str();
    s->add_option("--out", solve.out, "output directory")->capture_default_str();
    s->add_option("--oracle-limit", solve.oracle_limit, "enumerate OPT when unknown and items <= limit")
        ->capture_default_str();

    std::optional<std::string> suites;
    auto* v = app.add_subcommand("validate", "run the sampler and compilation validation suites");
    v->add_option("--suites", suites, "comma-separated subset of tv,roundtrip,slack,concavity");

    GenerateFlags gen;
    auto* g = app.add_subcommand("generate", "write random QKP or MKP instances");
    g->add_option("--kind", gen.kind, "qkp or mkp")->capture_default_str();
    g->add_option("--n", gen.n, "items")->capture_default_str();
    g->add_option("--density", gen.density, "QKP pair density")->capture_default_str();
    g->add_option("--m", gen.m, "MKP constraints")->capture_default_str();
    g->add_option("--tightness", gen.tightness, "MKP capacity ratio")->capture_default_str();
    g->add_option("--count", gen.count, "instances (seeds seed, seed+1, ...)")->capture_default_str();
    g->add_option("--seed", gen.seed, "first seed")->capture_default_str();
    g->add_option("--out", gen.out, "output directory")->capture_default_str();
    g->add_option("--format", gen.format, "canonical (JSON) or native (community text layout)")->capture_default_str();

    std::vector<std::string> oracle_paths;
    auto* o = app.add_subcommand("oracle", "exact optimum by enumeration (at most 25 items)");
    o->add_option("instances", oracle_paths, "instance files")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (s->parsed()) return cmd_solve(solve);
        if (v->parsed()) return cmd_validate(suites);
        if (g->parsed()) return cmd_generate(gen);
        if (o->parsed()) return cmd_oracle(oracle_paths);
    } catch (const std::exception& e) {
        std::cerr << "saim: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
