#pragma once

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "knapcount/contingency.hpp"
#include "knapcount/intknap.hpp"
#include "knapcount/knap01.hpp"
#include "knapcount/learn.hpp"
#include "knapcount/monotone.hpp"
#include "knapcount/multiknap.hpp"
#include "knapcount/robp.hpp"
#include "knapcount/serialize.hpp"
#include "knapcount/sources.hpp"

namespace knapcount::cli {

// Exit codes: 0 success, 1 oracle/trend violation, 2 input error, 3 capacity
// error, 4 sampling failure, 5 learner FAIL.
enum ExitCode {
    kOk = 0,
    kViolation = 1,
    kInputError = 2,
    kCapacityError = 3,
    kSamplingFailure = 4,
    kLearnFail = 5,
};

struct RunConfig {
    std::string subcommand;
    std::string file;
    std::string delta = "";
    std::string eps = "";
    std::uint64_t seed = 0;
    std::uint64_t samples = 0;
    bool oracle = false;
    std::string source = "uniform";
    std::string format = "json";
};

namespace detail {

using nlohmann::json;

inline Int json_int(const json& v) {
    if (v.is_string()) return parse_int(v.get<std::string>());
    if (v.is_number_integer()) return Int(v.get<long long>());
    if (v.is_number_unsigned()) return Int(v.get<unsigned long long>());
    throw input_error("expected an integer (decimal string preferred)");
}

inline Rational json_rational(const json& v) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long long>());
    throw input_error("expected a rational as a string like \"1/10\" or \"0.1\"");
}

inline std::vector<Int> json_int_vector(const json& v) {
    if (!v.is_array()) throw input_error("expected an array of integers");
    std::vector<Int> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(json_int(e));
    return out;
}

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw input_error("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

inline Knapsack01Instance load_knap01(const json& j) {
    if (!j.contains("a") || !j.contains("b"))
        throw input_error("knapsack instance needs fields a and b");
    Knapsack01Instance inst;
    inst.a = json_int_vector(j.at("a"));
    inst.b = json_int(j.at("b"));
    inst.validate();
    return inst;
}

inline MultiKnapsackInstance load_multi(const json& j) {
    if (!j.contains("rows")) throw input_error("multiknapsack instance needs a rows array");
    MultiKnapsackInstance inst;
    for (const auto& row : j.at("rows")) inst.rows.push_back(load_knap01(row));
    inst.validate();
    return inst;
}

inline IntKnapsackInstance load_intknap(const json& j) {
    if (!j.contains("a") || !j.contains("b") || !j.contains("u"))
        throw input_error("integer knapsack instance needs fields a, b, u");
    IntKnapsackInstance inst;
    inst.a = json_int_vector(j.at("a"));
    inst.u = json_int_vector(j.at("u"));
    inst.b = json_int(j.at("b"));
    inst.validate();
    return inst;
}

inline ContingencyInstance load_ct(const json& j) {
    if (!j.contains("r") || !j.contains("c"))
        throw input_error("contingency instance needs fields r and c");
    ContingencyInstance inst;
    inst.r = json_int_vector(j.at("r"));
    inst.c = json_int_vector(j.at("c"));
    const std::string mode = j.value("mode", std::string("ct"));
    if (mode == "ct")
        inst.mode = ContingencyInstance::Mode::ct;
    else if (mode == "ct_prime")
        inst.mode = ContingencyInstance::Mode::ct_prime;
    else
        throw input_error("contingency mode must be \"ct\" or \"ct_prime\"");
    inst.validate();
    return inst;
}

struct OracleSpec {
    std::vector<Halfspace> halfspaces;
    std::vector<bool> truth_table;
    bool single = false;
};

inline OracleSpec load_oracle_spec(const json& j) {
    if (!j.contains("type") || !j.contains("halfspaces"))
        throw input_error("oracle spec needs fields type and halfspaces");
    OracleSpec spec;
    for (const auto& h : j.at("halfspaces"))
        spec.halfspaces.push_back({json_int_vector(h.at("a")), json_int(h.at("b"))});
    if (spec.halfspaces.empty()) throw input_error("oracle spec needs at least one halfspace");
    const std::string type = j.at("type").get<std::string>();
    if (type == "halfspace") {
        spec.single = true;
        return spec;
    }
    if (type != "function_of_halfspaces")
        throw input_error("oracle type must be \"halfspace\" or \"function_of_halfspaces\"");
    const std::string tt = j.at("truth_table").get<std::string>();
    if (tt.size() != (std::size_t(1) << spec.halfspaces.size()))
        throw input_error("truth_table must have 2^k characters");
    for (char ch : tt) {
        if (ch != '0' && ch != '1') throw input_error("truth_table must be a bit string");
        spec.truth_table.push_back(ch == '1');
    }
    return spec;
}

// --source {uniform|hamming:r|product:file|symmetric:file|robp:file}
inline SmallSpaceSource load_source(const std::string& spec, int n) {
    if (spec == "uniform") return uniform_source(n);
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw input_error("unknown source spec: " + spec);
    const std::string kind = spec.substr(0, colon);
    const std::string arg = spec.substr(colon + 1);
    if (kind == "hamming") {
        const Int r = parse_int(arg);
        if (r > n) throw input_error("hamming weight exceeds the instance length");
        return hamming_slice_source(n, static_cast<int>(r));
    }
    if (kind == "product") {
        const json j = load_json(arg);
        if (!j.contains("p")) throw input_error("product source file needs a p array");
        std::vector<Rational> p;
        for (const auto& v : j.at("p")) p.push_back(json_rational(v));
        if (static_cast<int>(p.size()) != n)
            throw input_error("product source length does not match the instance");
        return product_source(p);
    }
    if (kind == "symmetric") {
        const json j = load_json(arg);
        if (!j.contains("w")) throw input_error("symmetric source file needs a w array");
        std::vector<Rational> w;
        for (const auto& v : j.at("w")) w.push_back(json_rational(v));
        if (static_cast<int>(w.size()) != n + 1)
            throw input_error("symmetric source needs n+1 class weights");
        return symmetric_source(w);
    }
    if (kind == "robp") {
        const Robp m = robp_from_json(load_json(arg));
        if (m.length() != n) throw input_error("robp source length does not match the instance");
        return uniform_accept_source(m);
    }
    throw input_error("unknown source spec: " + spec);
}

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline void emit(const json& j, const RunConfig& cfg, std::ostream& out) {
    if (cfg.format == "tsv") {
        for (const auto& [key, value] : j.items()) {
            out << key << '\t';
            if (value.is_string())
                out << value.get<std::string>();
            else
                out << value.dump();
            out << '\n';
        }
    } else {
        out << j.dump(2) << '\n';
    }
}

inline Rational required_rational(const std::string& text, const char* flag) {
    if (text.empty()) throw input_error(std::string("missing required option ") + flag);
    return parse_rational(text);
}

// exact <= approx <= (1+tol) * exact, exact rational comparison
inline bool sandwich_ok(const Int& exact, const Rational& approx, const Rational& tol) {
    return Rational(exact) <= approx && approx <= (1 + tol) * Rational(exact);
}

inline int run_count01(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const Knapsack01Instance inst = load_knap01(load_json(cfg.file));
    const Rational delta = required_rational(cfg.delta, "--delta");
    if (delta <= 0 || delta > 1) throw input_error("--delta must lie in (0,1]");
    const auto t0 = std::chrono::steady_clock::now();
    const int n = inst.size();
    json j;
    Int count;
    if (n == 0) {
        count = 1;
        j["max_width"] = 1;
    } else {
        const RoundedProgram prog = build_approx(inst, layer_epsilon(delta, n));
        count = prog.root_count();
        j["max_width"] = prog.max_width();
    }
    j["count"] = count.str();
    j["delta"] = to_string(delta);
    j["layers"] = n;
    j["elapsed_ms"] = elapsed_ms(t0);
    if (cfg.oracle) {
        const Int exact = exact_count(inst);
        j["oracle_count"] = exact.str();
        if (!sandwich_ok(exact, Rational(count), delta)) {
            emit(j, cfg, out);
            err << "oracle violation: count outside [exact, (1+delta) exact]\n";
            return kViolation;
        }
    }
    emit(j, cfg, out);
    return kOk;
}

inline int run_sample01(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const Knapsack01Instance inst = load_knap01(load_json(cfg.file));
    const Rational eta = cfg.eps.empty() ? Rational(1, 1000) : parse_rational(cfg.eps);
    const std::size_t m = cfg.samples == 0 ? 10 : static_cast<std::size_t>(cfg.samples);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const SampleStats stats = sample(inst, cfg.seed, m, eta);
        json samples = json::array();
        for (const auto& x : stats.samples) {
            std::string s;
            for (bool b : x) s += b ? '1' : '0';
            samples.push_back(std::move(s));
        }
        json j{{"samples", std::move(samples)},
               {"rejected_walks", stats.rejected_walks},
               {"eta", to_string(eta)},
               {"seed", cfg.seed},
               {"elapsed_ms", elapsed_ms(t0)}};
        emit(j, cfg, out);
        return kOk;
    } catch (const sampling_failure& e) {
        err << e.what() << "\n";
        return kSamplingFailure;
    }
}

inline int run_count_multi(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const MultiKnapsackInstance inst = load_multi(load_json(cfg.file));
    const Rational eps = required_rational(cfg.eps, "--eps");
    const auto t0 = std::chrono::steady_clock::now();
    const MultiCountResult res = count_multi_detailed(inst, eps);
    const DyerRoundedInstance dyer = dyer_round(inst);
    json weights = json::array();
    for (const Int& w : dyer.rounded_row_weights()) weights.push_back(w.str());
    json j{{"count", to_string(res.count)},
           {"eps", to_string(eps)},
           {"k", inst.constraints()},
           {"layers", inst.size()},
           {"max_width", res.max_width},
           {"rounded_set_size", res.rounded_set_size.str()},
           {"rounded_weight_per_row", std::move(weights)},
           {"elapsed_ms", elapsed_ms(t0)}};
    if (cfg.oracle) {
        const Int exact = exact_count_multi(inst);
        j["oracle_count"] = exact.str();
        if (!sandwich_ok(exact, res.count, eps)) {
            emit(j, cfg, out);
            err << "oracle violation: count outside [exact, (1+eps) exact]\n";
            return kViolation;
        }
    }
    emit(j, cfg, out);
    return kOk;
}

inline int run_count_int(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const IntKnapsackInstance inst = load_intknap(load_json(cfg.file));
    const Rational delta = required_rational(cfg.delta, "--delta");
    if (delta <= 0 || delta > 1) throw input_error("--delta must lie in (0,1]");
    const auto t0 = std::chrono::steady_clock::now();
    const int n = inst.size();
    json j;
    Int count;
    if (n == 0) {
        count = 1;
        j["max_width"] = 1;
    } else {
        const IntervalRoundedProgram prog = build_interval_approx(inst, layer_epsilon(delta, n));
        count = prog.root_count();
        j["max_width"] = prog.max_width();
    }
    j["count"] = count.str();
    j["delta"] = to_string(delta);
    j["layers"] = n;
    j["elapsed_ms"] = elapsed_ms(t0);
    if (cfg.oracle) {
        const Int exact = exact_count_int(inst);
        j["oracle_count"] = exact.str();
        if (!sandwich_ok(exact, Rational(count), delta)) {
            emit(j, cfg, out);
            err << "oracle violation: count outside [exact, (1+delta) exact]\n";
            return kViolation;
        }
    }
    emit(j, cfg, out);
    return kOk;
}

inline int run_count_ct(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const ContingencyInstance inst = load_ct(load_json(cfg.file));
    const Rational eps = required_rational(cfg.eps, "--eps");
    const auto t0 = std::chrono::steady_clock::now();
    const CtCountResult res = count_ct_detailed(inst, eps);
    json j{{"count", res.count.str()},
           {"eps", to_string(eps)},
           {"eta", to_string(res.eta)},
           {"layers", res.columns},
           {"max_width", res.max_row_width},
           {"elapsed_ms", elapsed_ms(t0)}};
    if (cfg.oracle) {
        const Int exact = exact_count_ct(inst);
        j["oracle_count"] = exact.str();
        if (!sandwich_ok(exact, Rational(res.count), eps)) {
            emit(j, cfg, out);
            err << "oracle violation: count outside [exact, (1+eps) exact]\n";
            return kViolation;
        }
    }
    emit(j, cfg, out);
    return kOk;
}

inline int run_count_source(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const Knapsack01Instance inst = load_knap01(load_json(cfg.file));
    const Rational delta = required_rational(cfg.delta, "--delta");
    const SmallSpaceSource d = load_source(cfg.source, inst.size());
    const auto t0 = std::chrono::steady_clock::now();
    Knapsack01Space space(inst);
    const SourcedRoundedProgram prog = round_under_source(space, d, delta);
    const Rational p = prog.root_probability();
    json j{{"count", to_string(p)},
           {"delta", to_string(delta)},
           {"source", cfg.source},
           {"layers", inst.size()},
           {"max_width", prog.max_width()},
           {"elapsed_ms", elapsed_ms(t0)}};
    if (cfg.oracle) {
        const Rational exact = eval_prob(exact_program(inst), d);
        j["oracle_count"] = to_string(exact);
        if (!(exact <= p && p <= (1 + delta) * exact)) {
            emit(j, cfg, out);
            err << "oracle violation: probability outside [exact, (1+delta) exact]\n";
            return kViolation;
        }
    }
    emit(j, cfg, out);
    return kOk;
}

inline int run_learn(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const json spec_json = load_json(cfg.file);
    const OracleSpec spec = load_oracle_spec(spec_json);
    const int n = static_cast<int>(spec.halfspaces.front().a.size());
    const int k = static_cast<int>(spec.halfspaces.size());
    const MembershipOracle f =
        spec.single ? halfspace_oracle(spec.halfspaces.front().a, spec.halfspaces.front().b)
                    : k_function_oracle(spec.halfspaces, spec.truth_table);

    const Rational eps_final = cfg.eps.empty() ? Rational(1, 10) : parse_rational(cfg.eps);
    const Rational confidence = cfg.delta.empty() ? Rational(1, 20) : parse_rational(cfg.delta);
    const AlmostRobpParams params = halfspace_learning_params(n, k, eps_final, confidence);

    const auto t0 = std::chrono::steady_clock::now();
    const LearnResult res = learn(f, params, cfg.seed);
    json j{{"eps_final", to_string(eps_final)},
           {"eps", to_string(params.eps)},
           {"width_cap", params.width_cap},
           {"samples_per_estimate", params.samples},
           {"queries", res.queries},
           {"failed", res.failed},
           {"elapsed_ms", elapsed_ms(t0)}};
    if (res.failed) {
        j["fail_layer"] = res.fail_layer;
        emit(j, cfg, out);
        err << "learner FAIL: layer " << res.fail_layer << " exceeded the width cap\n";
        return kLearnFail;
    }
    const std::uint64_t merr_samples = cfg.samples == 0 ? 200000 : cfg.samples;
    j["measured_error"] = to_string(measure_error(*res.program, f, merr_samples, cfg.seed));
    j["robp"] = robp_to_json(*res.program);
    emit(j, cfg, out);
    return kOk;
}

inline int run_oracle(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    const json j = load_json(cfg.file);
    const auto t0 = std::chrono::steady_clock::now();
    Int count;
    std::string kind;
    if (j.contains("rows")) {
        count = exact_count_multi(load_multi(j));
        kind = "multiknapsack";
    } else if (j.contains("u")) {
        count = exact_count_int(load_intknap(j));
        kind = "integer knapsack";
    } else if (j.contains("r") && j.contains("c")) {
        count = exact_count_ct(load_ct(j));
        kind = "contingency";
    } else {
        count = exact_count(load_knap01(j));
        kind = "knapsack01";
    }
    json outj{{"count", count.str()},
              {"delta", "0"}, // exact
              {"instance_kind", kind},
              {"elapsed_ms", elapsed_ms(t0)}};
    emit(outj, cfg, out);
    return kOk;
}

struct BenchCell {
    std::string ladder;
    int n;
    Rational eps;
    double ms = 0;
    std::size_t max_width = 0;
};

inline Knapsack01Instance bench_instance(std::uint64_t seed, int n, int bits) {
    CounterRng rng{seed, 0x62656e6368ULL, static_cast<std::uint64_t>(n)};
    Knapsack01Instance inst;
    Int total = 0;
    for (int i = 0; i < n; ++i) {
        Int a = rng.uniform_below(Int(1) << bits) + 1;
        total += a;
        inst.a.push_back(std::move(a));
    }
    inst.b = total / 2;
    return inst;
}

// Seeded instance ladders: n doubling at fixed eps, then 1/eps doubling at
// fixed n. Each cell reports the better of two timed builds, checks the width
// bound exactly, and trend violations come back as warnings.
inline int run_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::vector<BenchCell> cells;
    auto run_cell = [&](const std::string& ladder, int n, const Rational& eps) {
        const Knapsack01Instance inst = bench_instance(cfg.seed, n, 40);
        BenchCell cell{ladder, n, eps, 0, 0};
        for (int rep = 0; rep < 2; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            const RoundedProgram prog = build_approx(inst, eps);
            const double ms = elapsed_ms(t0);
            if (rep == 0 || ms < cell.ms) cell.ms = ms;
            cell.max_width = prog.max_width();
            for (int i = 0; i <= n; ++i)
                if (!width_within_bound(prog.width(i), eps, n))
                    throw std::runtime_error("bench: width bound violated");
        }
        cells.push_back(cell);
    };

    for (int n : {64, 128, 256}) run_cell("n", n, Rational(1, 10));
    for (int d = 0; d < 4; ++d) run_cell("eps", 96, Rational(1, 10 * (1 << d)));

    std::vector<std::string> warnings;
    for (std::size_t i = 1; i < cells.size(); ++i) {
        const auto& prev = cells[i - 1];
        const auto& cur = cells[i];
        if (cur.ladder != prev.ladder) continue;
        const double ratio = prev.ms > 0 ? cur.ms / prev.ms : 0;
        if (cur.ladder == "eps" && ratio > 2.5)
            warnings.push_back("eps ladder: time grew " + std::to_string(ratio) +
                               "x on one doubling of 1/eps (near-linear expected)");
        if (cur.ladder == "n" && ratio > 12.0)
            warnings.push_back("n ladder: time grew " + std::to_string(ratio) +
                               "x on one doubling of n (near-cubic expected)");
    }

    json rows = json::array();
    for (const auto& cell : cells)
        rows.push_back({{"ladder", cell.ladder},
                        {"n", cell.n},
                        {"eps", to_string(cell.eps)},
                        {"elapsed_ms", cell.ms},
                        {"max_width", cell.max_width}});
    json j{{"cells", std::move(rows)}, {"warnings", warnings}, {"seed", cfg.seed}};
    emit(j, cfg, out);
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    return kOk;
}

} // namespace detail

// Argument grammar:
//   knapcount <subcommand> --file PATH [--delta R] [--eps R] [--seed U64]
//             [--samples N] [--oracle] [--source SPEC] [--format json|tsv]
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"deterministic approximate counting for knapsack-type problems"};
    app.require_subcommand(1);

    RunConfig cfg;
    auto add_common = [&](CLI::App* sub, bool needs_file) {
        if (needs_file)
            sub->add_option("--file", cfg.file, "instance JSON path")->required();
        sub->add_option("--delta", cfg.delta, "accuracy parameter, e.g. 0.1 or 1/10");
        sub->add_option("--eps", cfg.eps, "accuracy parameter, e.g. 0.1 or 1/10");
        sub->add_option("--seed", cfg.seed, "64-bit RNG seed");
        sub->add_option("--samples", cfg.samples, "sample count");
        sub->add_flag("--oracle", cfg.oracle, "cross-check against the exact oracle");
        sub->add_option("--source", cfg.source,
                        "source: uniform|hamming:r|product:file|symmetric:file|robp:file");
        sub->add_option("--format", cfg.format, "output format: json|tsv")
            ->check(CLI::IsMember({"json", "tsv"}));
    };

    for (const char* name : {"count01", "sample01", "count-multi", "count-int", "count-ct",
                             "count-source", "learn", "oracle"})
        add_common(app.add_subcommand(name), true);
    add_common(app.add_subcommand("bench"), false);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    cfg.subcommand = app.get_subcommands().front()->get_name();
    try {
        if (cfg.subcommand == "count01") return detail::run_count01(cfg, out, err);
        if (cfg.subcommand == "sample01") return detail::run_sample01(cfg, out, err);
        if (cfg.subcommand == "count-multi") return detail::run_count_multi(cfg, out, err);
        if (cfg.subcommand == "count-int") return detail::run_count_int(cfg, out, err);
        if (cfg.subcommand == "count-ct") return detail::run_count_ct(cfg, out, err);
        if (cfg.subcommand == "count-source") return detail::run_count_source(cfg, out, err);
        if (cfg.subcommand == "learn") return detail::run_learn(cfg, out, err);
        if (cfg.subcommand == "oracle") return detail::run_oracle(cfg, out, err);
        if (cfg.subcommand == "bench") return detail::run_bench(cfg, out, err);
        err << "unknown subcommand\n";
        return kInputError;
    } catch (const input_error& e) {
        err << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const capacity_error& e) {
        err << "capacity error: " << e.what() << "\n";
        return kCapacityError;
    } catch (const sampling_failure& e) {
        err << "sampling failure: " << e.what() << "\n";
        return kSamplingFailure;
    }
}

} // namespace knapcount::cli
