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
#include <cctype>
#include <charconv>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "saim/matrix.hpp"
#include "saim/model.hpp"

namespace saim {

/// Quadratic knapsack: maximize sum_{i<j} W_ij x_i x_j + h^T x  s.t.  A^T x <= b.
/// Values are stored positive; `opt` is in the minimization convention (<= 0).
struct QkpInstance {
    std::string name;
    std::size_t n = 0;
    double density = 0.0;
    DenseMatrix<std::int64_t> W;
    std::vector<std::int64_t> h;
    std::vector<std::int64_t> A;
    std::int64_t b = 0;
    std::optional<double> opt;

    friend bool operator==(const QkpInstance&, const QkpInstance&) = default;
};

/// Multidimensional knapsack: maximize h^T x  s.t.  A x <= B.
struct MkpInstance {
    std::string name;
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<std::int64_t> h;
    DenseMatrix<std::int64_t> A;
    std::vector<std::int64_t> B;
    std::optional<double> opt;

    friend bool operator==(const MkpInstance&, const MkpInstance&) = default;
};

using Instance = std::variant<QkpInstance, MkpInstance>;

/// Malformed instance text; `token` is the 0-based index of the offending token.
class ParseError : public std::runtime_error {
 public:
    ParseError(const std::string& what, std::size_t token)
        : std::runtime_error(what + " (token " + std::to_string(token) + ")"), token_(token) {}
    std::size_t token() const { return token_; }

 private:
    std::size_t token_;
};

namespace detail {

class TokenReader {
 public:
    explicit TokenReader(std::string_view text) {
        std::size_t i = 0;
        while (i < text.size()) {
            while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
            const std::size_t start = i;
            while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
            if (i > start) tokens_.push_back(text.substr(start, i - start));
        }
    }

    bool done() const { return pos_ >= tokens_.size(); }
    std::size_t position() const { return pos_; }

    std::int64_t integer(const char* what) {
        if (done()) throw ParseError(std::string("unexpected end of input while reading ") + what, pos_);
        const auto tok = tokens_[pos_];
        std::int64_t v = 0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || ptr != tok.data() + tok.size())
            throw ParseError(std::string("expected an integer for ") + what + ", got '" + std::string(tok) + "'", pos_);
        ++pos_;
        return v;
    }

    std::int64_t non_negative(const char* what) {
        const std::size_t at = pos_;
        const auto v = integer(what);
        if (v < 0) throw ParseError(std::string("negative ") + what, at);
        return v;
    }

 private:
    std::vector<std::string_view> tokens_;
    std::size_t pos_ = 0;
};

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline double measured_density(const DenseMatrix<std::int64_t>& W) {
    const std::size_t n = W.rows();
    if (n < 2) return 0.0;
    std::size_t nz = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (W(i, j) != 0) ++nz;
    return static_cast<double>(nz) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

inline void join(std::ostringstream& out, const auto& values) {
    bool first = true;
    for (const auto& v : values) {
        if (!first) out << ' ';
        out << v;
        first = false;
    }
    out << '\n';
}

}  // namespace detail

// ---------------------------------------------------------------------------
// OR-Library multidimensional knapsack layout
//   <count>
//   per instance: n m opt / n profits / m rows of n weights / m capacities
// ---------------------------------------------------------------------------

inline std::vector<MkpInstance> load_mkp_orlib(std::string_view text, const std::string& name_prefix = "mkp") {
    detail::TokenReader in(text);
    if (in.done()) throw ParseError("empty MKP file", 0);
    const auto count = in.integer("instance count");
    if (count <= 0) throw ParseError("instance count must be positive", 0);
    std::vector<MkpInstance> out;
    for (std::int64_t k = 0; k < count; ++k) {
        MkpInstance inst;
        inst.name = name_prefix + "_" + std::to_string(k + 1);
        const std::size_t header = in.position();
        const auto n = in.integer("item count");
        const auto m = in.integer("constraint count");
        if (n <= 0 || m <= 0) throw ParseError("item and constraint counts must be positive", header);
        inst.n = static_cast<std::size_t>(n);
        inst.m = static_cast<std::size_t>(m);
        const auto opt = in.integer("optimum");
        if (opt != 0) inst.opt = -static_cast<double>(opt);
        inst.h.resize(inst.n);
        for (auto& v : inst.h) v = in.non_negative("profit");
        inst.A = DenseMatrix<std::int64_t>(inst.m, inst.n);
        for (std::size_t r = 0; r < inst.m; ++r)
            for (std::size_t j = 0; j < inst.n; ++j) inst.A(r, j) = in.non_negative("weight");
        inst.B.resize(inst.m);
        for (auto& v : inst.B) {
            const std::size_t at = in.position();
            v = in.integer("capacity");
            if (v <= 0) throw ParseError("capacity must be positive", at);
        }
        out.push_back(std::move(inst));
    }
    if (!in.done()) throw ParseError("trailing tokens after the declared instance count", in.position());
    return out;
}

inline std::string serialize_mkp_orlib(const std::vector<MkpInstance>& instances) {
    std::ostringstream out;
    out << instances.size() << '\n';
    for (const auto& inst : instances) {
        const auto opt = inst.opt ? static_cast<std::int64_t>(-*inst.opt) : 0;
        out << inst.n << ' ' << inst.m << ' ' << opt << '\n';
        detail::join(out, inst.h);
        for (std::size_t r = 0; r < inst.m; ++r) detail::join(out, inst.A.row(r));
        detail::join(out, inst.B);
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// QKP community layout
//   name / n / n linear values / n-1 upper-triangular rows (row i has n-i-1
//   entries) / constraint type (0 = <=) / capacity / n weights
// ---------------------------------------------------------------------------

inline QkpInstance load_qkp(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t eol = text.find_first_of("\r\n", i);
    const std::string_view name = detail::trim(text.substr(i, eol == std::string_view::npos ? text.npos : eol - i));
    if (name.empty()) throw ParseError("empty QKP file", 0);

    QkpInstance inst;
    inst.name = std::string(name);
    detail::TokenReader in(eol == std::string_view::npos ? std::string_view{} : text.substr(eol));
    const auto n = in.integer("item count");
    if (n < 1) throw ParseError("item count must be positive", 0);
    inst.n = static_cast<std::size_t>(n);
    inst.h.resize(inst.n);
    for (auto& v : inst.h) v = in.non_negative("linear value");
    inst.W = DenseMatrix<std::int64_t>(inst.n, inst.n);
    for (std::size_t r = 0; r + 1 < inst.n; ++r) {
        for (std::size_t c = r + 1; c < inst.n; ++c) {
            const auto v = in.non_negative("pair value");
            inst.W(r, c) = v;
            inst.W(c, r) = v;
        }
    }
    const std::size_t type_at = in.position();
    if (in.integer("constraint type") != 0) throw ParseError("only '<=' constraints (type 0) are supported", type_at);
    const std::size_t cap_at = in.position();
    inst.b = in.integer("capacity");
    if (inst.b <= 0) throw ParseError("capacity must be positive", cap_at);
    inst.A.resize(inst.n);
    for (auto& v : inst.A) v = in.non_negative("weight");
    if (!in.done()) throw ParseError("trailing tokens after the weights", in.position());
    inst.density = detail::measured_density(inst.W);
    return inst;
}

inline std::string serialize_qkp(const QkpInstance& inst) {
    std::ostringstream out;
    out << inst.name << '\n' << inst.n << '\n';
    detail::join(out, inst.h);
    for (std::size_t r = 0; r + 1 < inst.n; ++r) {
        const auto row = inst.W.row(r);
        detail::join(out, std::span<const std::int64_t>(row.data() + r + 1, inst.n - r - 1));
    }
    out << '\n' << 0 << '\n' << inst.b << '\n';
    detail::join(out, inst.A);
    return out.str();
}

// ---------------------------------------------------------------------------
// Canonical JSON format
// ---------------------------------------------------------------------------

inline constexpr int kInstanceFormatVersion = 1;

inline std::string to_canonical(const Instance& instance) {
    using nlohmann::ordered_json;
    ordered_json doc;
    doc["format"] = "saim-instance";
    doc["format_version"] = kInstanceFormatVersion;
    std::visit(
        [&](const auto& inst) {
            using T = std::decay_t<decltype(inst)>;
            if constexpr (std::is_same_v<T, QkpInstance>) {
                doc["kind"] = "qkp";
                doc["name"] = inst.name;
                doc["n"] = inst.n;
                doc["density"] = inst.density;
                doc["linear"] = inst.h;
                auto pairs = ordered_json::array();
                for (std::size_t i = 0; i < inst.n; ++i)
                    for (std::size_t j = i + 1; j < inst.n; ++j)
                        if (inst.W(i, j) != 0) pairs.push_back({i, j, inst.W(i, j)});
                doc["pairs"] = std::move(pairs);
                doc["weights"] = inst.A;
                doc["capacity"] = inst.b;
            } else {
                doc["kind"] = "mkp";
                doc["name"] = inst.name;
                doc["n"] = inst.n;
                doc["m"] = inst.m;
                doc["profits"] = inst.h;
                auto rows = ordered_json::array();
                for (std::size_t r = 0; r < inst.m; ++r)
                    rows.push_back(std::vector<std::int64_t>(inst.A.row(r).begin(), inst.A.row(r).end()));
                doc["weights"] = std::move(rows);
                doc["capacities"] = inst.B;
            }
            doc["opt"] = inst.opt ? ordered_json(*inst.opt) : ordered_json(nullptr);
        },
        instance);
    return doc.dump(1) + "\n";
}

inline Instance load_canonical(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid canonical instance: ") + e.what(), e.byte);
    }
    auto fail = [](const std::string& what) -> ParseError { return ParseError("canonical instance: " + what, 0); };
    try {
        if (doc.value("format", "") != "saim-instance") throw fail("missing format tag 'saim-instance'");
        if (doc.at("format_version").get<int>() != kInstanceFormatVersion)
            throw fail("unsupported format_version " + doc.at("format_version").dump());
        std::optional<double> opt;
        if (doc.contains("opt") && !doc.at("opt").is_null()) opt = doc.at("opt").get<double>();
        const auto kind = doc.at("kind").get<std::string>();
        if (kind == "qkp") {
            QkpInstance inst;
            inst.name = doc.at("name").get<std::string>();
            inst.n = doc.at("n").get<std::size_t>();
            inst.density = doc.value("density", 0.0);
            inst.h = doc.at("linear").get<std::vector<std::int64_t>>();
            inst.A = doc.at("weights").get<std::vector<std::int64_t>>();
            inst.b = doc.at("capacity").get<std::int64_t>();
            if (inst.h.size() != inst.n || inst.A.size() != inst.n) throw fail("vector lengths differ from n");
            if (inst.b <= 0) throw fail("capacity must be positive");
            inst.W = DenseMatrix<std::int64_t>(inst.n, inst.n);
            for (const auto& p : doc.at("pairs")) {
                const auto i = p.at(0).get<std::size_t>();
                const auto j = p.at(1).get<std::size_t>();
                if (i >= inst.n || j >= inst.n || i == j) throw fail("pair index out of range");
                inst.W(i, j) = inst.W(j, i) = p.at(2).get<std::int64_t>();
            }
            inst.opt = opt;
            return inst;
        }
        if (kind == "mkp") {
            MkpInstance inst;
            inst.name = doc.at("name").get<std::string>();
            inst.n = doc.at("n").get<std::size_t>();
            inst.m = doc.at("m").get<std::size_t>();
            inst.h = doc.at("profits").get<std::vector<std::int64_t>>();
            inst.A = DenseMatrix<std::int64_t>::from_rows(doc.at("weights").get<std::vector<std::vector<std::int64_t>>>());
            inst.B = doc.at("capacities").get<std::vector<std::int64_t>>();
            if (inst.h.size() != inst.n || inst.A.rows() != inst.m || inst.A.cols() != inst.n || inst.B.size() != inst.m)
                throw fail("dimensions differ from n and m");
            for (auto v : inst.B)
                if (v <= 0) throw fail("capacities must be positive");
            inst.opt = opt;
            return inst;
        }
        throw fail("unknown kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw fail(e.what());
    }
}

/// Loads any supported layout: canonical JSON, the QKP community layout (first
/// token is a name), or the OR-Library MKP layout (first token is a count).
inline std::vector<Instance> load_instances(std::string_view text, const std::string& name_prefix = "instance") {
    const auto body = detail::trim(text);
    if (body.empty()) throw ParseError("empty instance file", 0);
    if (body.front() == '{') return {load_canonical(body)};
    const auto first = body.substr(0, body.find_first_of(" \t\r\n"));
    const bool numeric = std::all_of(first.begin(), first.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    if (!numeric) return {load_qkp(body)};
    std::vector<Instance> out;
    for (auto& inst : load_mkp_orlib(body, name_prefix)) out.emplace_back(std::move(inst));
    return out;
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

struct IntRange {
    std::int64_t lo = 1;
    std::int64_t hi = 100;
};

/// Random QKP: each pair is valued with probability `density`, values and
/// weights uniform in their ranges, capacity uniform in [max weight, sum weights].
inline QkpInstance generate_qkp(std::size_t n, double density, std::uint64_t seed, IntRange values = {1, 100},
                                IntRange weights = {1, 50}) {
    if (n < 2) throw std::invalid_argument("a QKP instance needs at least 2 items");
    if (!(density > 0.0 && density <= 1.0)) throw std::invalid_argument("density must lie in (0, 1]");
    if (values.lo < 1 || values.hi < values.lo) throw std::invalid_argument("value range must satisfy 1 <= lo <= hi");
    if (weights.lo < 1 || weights.hi < weights.lo) throw std::invalid_argument("weight range must satisfy 1 <= lo <= hi");

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> value(values.lo, values.hi);
    std::uniform_int_distribution<std::int64_t> weight(weights.lo, weights.hi);
    std::bernoulli_distribution present(density);

    QkpInstance inst;
    inst.n = n;
    inst.W = DenseMatrix<std::int64_t>(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (density >= 1.0 || present(rng)) inst.W(i, j) = inst.W(j, i) = value(rng);
        }
    }
    inst.h.resize(n);
    for (auto& v : inst.h) v = value(rng);
    inst.A.resize(n);
    for (auto& v : inst.A) v = weight(rng);
    const auto heaviest = *std::max_element(inst.A.begin(), inst.A.end());
    const auto total = std::accumulate(inst.A.begin(), inst.A.end(), std::int64_t{0});
    inst.b = std::uniform_int_distribution<std::int64_t>(heaviest, total)(rng);
    inst.density = density;
    inst.name = "qkp_" + std::to_string(n) + "_" + std::to_string(static_cast<int>(density * 100 + 0.5)) + "_s" +
                std::to_string(seed);
    return inst;
}

struct MkpGeneratorOptions {
    double tightness = 0.5;
    IntRange weights{0, 1000};
    std::int64_t profit_noise = 500;  // profit = mean column weight + U[0, noise]
};

/// Random MKP with correlated profits; capacities B_m = tightness * sum_j A_mj.
inline MkpInstance generate_mkp(std::size_t n, std::size_t m, std::uint64_t seed, MkpGeneratorOptions options = {}) {
    if (n < 2) throw std::invalid_argument("an MKP instance needs at least 2 items");
    if (m < 1) throw std::invalid_argument("an MKP instance needs at least one constraint");
    if (!(options.tightness > 0.0 && options.tightness <= 1.0)) throw std::invalid_argument("tightness must lie in (0, 1]");
    if (options.weights.lo < 0 || options.weights.hi < options.weights.lo || options.weights.hi == 0)
        throw std::invalid_argument("weight range must satisfy 0 <= lo <= hi, hi > 0");
    if (options.profit_noise < 0) throw std::invalid_argument("profit noise must be non-negative");

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> weight(options.weights.lo, options.weights.hi);
    std::uniform_int_distribution<std::int64_t> noise(0, options.profit_noise);

    MkpInstance inst;
    inst.n = n;
    inst.m = m;
    inst.A = DenseMatrix<std::int64_t>(m, n);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t j = 0; j < n; ++j) inst.A(r, j) = weight(rng);
    inst.h.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::int64_t column = 0;
        for (std::size_t r = 0; r < m; ++r) column += inst.A(r, j);
        inst.h[j] = std::max<std::int64_t>(1, column / static_cast<std::int64_t>(m) + noise(rng));
    }
    inst.B.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
        const auto row = inst.A.row(r);
        const auto total = std::accumulate(row.begin(), row.end(), std::int64_t{0});
        inst.B[r] = std::max<std::int64_t>(1, static_cast<std::int64_t>(options.tightness * static_cast<double>(total)));
    }
    inst.name = "mkp_" + std::to_string(n) + "_" + std::to_string(m) + "_s" + std::to_string(seed);
    return inst;
}

// ---------------------------------------------------------------------------
// Mapping to the solver's minimization form
// ---------------------------------------------------------------------------

/// min -1/2 x^T W x - h^T x  s.t.  A^T x <= b.
inline ConstrainedQuadraticProblem to_problem(const QkpInstance& inst) {
    const std::size_t n = inst.n;
    DenseMatrix<double> W(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) W(i, j) = -static_cast<double>(inst.W(i, j));
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = -static_cast<double>(inst.h[i]);
    DenseMatrix<double> A(1, n);
    for (std::size_t i = 0; i < n; ++i) A(0, i) = static_cast<double>(inst.A[i]);
    return ConstrainedQuadraticProblem(std::move(W), std::move(h), std::move(A), {static_cast<double>(inst.b)},
                                       {Sense::LessEqual});
}

/// min -h^T x  s.t.  A x <= B.
inline ConstrainedQuadraticProblem to_problem(const MkpInstance& inst) {
    std::vector<double> h(inst.n);
    for (std::size_t i = 0; i < inst.n; ++i) h[i] = -static_cast<double>(inst.h[i]);
    std::vector<double> b(inst.B.begin(), inst.B.end());
    return ConstrainedQuadraticProblem(DenseMatrix<double>(inst.n, inst.n), std::move(h), inst.A.cast<double>(),
                                       std::move(b), std::vector<Sense>(inst.m, Sense::LessEqual));
}

inline ConstrainedQuadraticProblem to_problem(const Instance& instance) {
    return std::visit([](const auto& inst) { return to_problem(inst); }, instance);
}

inline const std::string& instance_name(const Instance& instance) {
    return std::visit([](const auto& inst) -> const std::string& { return inst.name; }, instance);
}

inline std::optional<double> instance_opt(const Instance& instance) {
    return std::visit([](const auto& inst) { return inst.opt; }, instance);
}

}  // namespace saim
