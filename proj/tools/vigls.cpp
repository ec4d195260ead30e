// vigls command-line driver: gen, run, oracle, export-graph.
//
// Exit codes: 0 success, 2 config/usage error, 3 runtime failure,
// 4 instance too large for an enumeration oracle.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vigls/experiment.hpp"
#include "vigls/featsel.hpp"
#include "vigls/knapsack.hpp"
#include "vigls/nk.hpp"
#include "vigls/oracles.hpp"
#include "vigls/vigw.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitCapability = 4;

void write_text(const fs::path& p, const std::string& content) {
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
    std::ofstream out(p, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + p.string() + "'");
    }
    out << content;
}

void write_json(const fs::path& p, const ordered_json& j) { write_text(p, j.dump(1) + "\n"); }

ordered_json sidecar(const std::string& kind, const ordered_json& params, std::uint64_t seed) {
    ordered_json j;
    j["format"] = "vigls.meta";
    j["version"] = 1;
    j["tool_version"] = vigls::kToolVersion;
    j["kind"] = kind;
    j["seed"] = seed;
    j["rng"] = vigls::Rng::algorithm;
    j["params"] = params;
    return j;
}

fs::path meta_path(const fs::path& out) { return fs::path(out.string() + ".meta.json"); }

struct GenArgs {
    std::string kind;
    std::size_t n = 0;
    std::size_t k = 0;
    std::string model = "adjacent";
    std::size_t nex = 500;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_gen(const GenArgs& a) {
    fs::path out = a.out;
    ordered_json params;
    if (a.kind == "nk") {
        const auto model = vigls::parse_nk_model(a.model);
        const auto inst = vigls::nk_generate(a.n, a.k, model, a.seed);
        if (out.empty()) {
            out = "nk_" + a.model + "_n" + std::to_string(a.n) + "_k" + std::to_string(a.k) + "_s" +
                  std::to_string(a.seed) + ".nk.json";
        }
        write_json(out, vigls::to_json(inst));
        params = {{"n", a.n}, {"k", a.k}, {"model", a.model}};
    } else if (a.kind == "knapsack") {
        const auto inst = vigls::knapsack_generate(a.n, a.seed);
        if (out.empty()) {
            out = "knapsack_n" + std::to_string(a.n) + "_s" + std::to_string(a.seed) + ".kp.json";
        }
        write_json(out, vigls::to_json(inst));
        params = {{"n", a.n}, {"capacity", inst.capacity()}};
    } else {
        vigls::Rng rng(a.seed);
        const auto data = vigls::friedman_generate(a.nex, rng);
        if (out.empty()) {
            out = "friedman_nex" + std::to_string(a.nex) + "_s" + std::to_string(a.seed) + ".csv";
        }
        write_text(out, vigls::friedman_csv(data));
        params = {{"nex", a.nex}, {"features", vigls::kFriedmanFeatures}, {"sigma", data.sigma}};
    }
    write_json(meta_path(out), sidecar(a.kind, params, a.seed));
    std::cout << out.string() << '\n';
    return kExitOk;
}

int cmd_run(const std::string& config_path, std::optional<std::size_t> parallelism) {
    auto cfg = vigls::load_experiment_config(config_path);
    if (parallelism) {
        cfg.parallelism = *parallelism;
    }
    const auto res = vigls::run_experiment(cfg);
    std::cout << res.runs.size() << " runs; summary at " << (cfg.output_dir / "summary.csv").string() << '\n';
    return kExitOk;
}

/// Returns the problem behind an instance file plus the knapsack view, if any.
struct OracleInput {
    vigls::AnyProblem problem;
    std::optional<vigls::KnapsackInstance> knapsack;
};

OracleInput load_oracle_input(const fs::path& path) {
    const auto j = vigls::read_json_file(path);
    const auto format = j.value("format", "");
    if (format == "vigls.nk") {
        return {vigls::AnyProblem(vigls::ProblemKind::nk, std::make_shared<const vigls::NkInstance>(vigls::nk_from_json(j))),
                std::nullopt};
    }
    if (format == "vigls.knapsack") {
        auto kp = vigls::knapsack_from_json(j);
        auto shared = std::make_shared<const vigls::KnapsackInstance>(kp);
        return {vigls::AnyProblem(vigls::ProblemKind::knapsack, shared), std::move(kp)};
    }
    throw std::runtime_error(path.string() + ": unrecognized instance format '" + format + "'");
}

int cmd_oracle(const std::string& kind, const fs::path& instance, fs::path out) {
    const auto in = load_oracle_input(instance);
    const auto n = in.problem.dimension();
    const std::string stem = instance.stem().stem().string();
    ordered_json j;
    if (kind == "vig") {
        const auto spectrum = vigls::walsh_transform(in.problem);
        j = vigls::truevig_to_json(n, vigls::true_vig(spectrum));
        if (out.empty()) {
            out = stem + ".truevig.json";
        }
    } else if (kind == "vigw") {
        const auto t = vigls::true_vigw(in.problem);
        j = vigls::truevig_to_json(n, t.edges(), &t);
        if (out.empty()) {
            out = stem + ".truevig.json";
        }
    } else if (kind == "optimum") {
        const auto [x, f] = vigls::exhaustive_optimum(in.problem);
        j["format"] = "vigls.optimum";
        j["version"] = 1;
        j["tool_version"] = vigls::kToolVersion;
        j["method"] = "exhaustive";
        j["n"] = n;
        j["fitness"] = f;
        j["solution"] = x.to_string();
        if (out.empty()) {
            out = stem + ".optimum.json";
        }
    } else {
        if (!in.knapsack) {
            throw std::runtime_error("knapsack-dp needs a knapsack instance");
        }
        j["format"] = "vigls.optimum";
        j["version"] = 1;
        j["tool_version"] = vigls::kToolVersion;
        j["method"] = "knapsack-dp";
        j["n"] = n;
        j["fitness"] = vigls::knapsack_dp(*in.knapsack);
        if (out.empty()) {
            out = stem + ".optimum.json";
        }
    }
    write_json(out, j);
    std::cout << out.string() << '\n';
    return kExitOk;
}

int cmd_export(const fs::path& input, const std::string& format, bool top, fs::path out) {
    std::ifstream in(input);
    if (!in) {
        throw std::runtime_error("cannot open '" + input.string() + "'");
    }
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const ordered_json::parse_error& e) {
        throw std::runtime_error(input.string() + ": " + e.what());
    }
    auto doc = vigls::vigw_from_json(j);
    const auto fmt = vigls::parse_graph_format(format);
    vigls::ExportOptions opt;
    opt.top_edges_only = top;
    opt.annotations = std::move(doc.annotations);
    opt.meta = std::move(doc.meta);
    const auto text = vigls::export_graph(doc.graph, fmt, opt);
    if (out.empty() || out == "-") {
        std::cout << text;
    } else {
        write_text(out, text);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vigls: iterated local search with linkage learning"};
    app.set_version_flag("--version", std::string(vigls::kToolVersion));
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Generate an NK or knapsack instance, or a Friedman dataset");
    g->add_option("kind", gen.kind, "nk | knapsack | friedman")
        ->required()
        ->check(CLI::IsMember({"nk", "knapsack", "friedman"}));
    g->add_option("--n", gen.n, "Number of variables");
    g->add_option("--k", gen.k, "Subfunction size (NK)");
    g->add_option("--model", gen.model, "adjacent | random (NK)")->check(CLI::IsMember({"adjacent", "random"}));
    g->add_option("--nex", gen.nex, "Number of examples (Friedman)");
    g->add_option("--seed", gen.seed, "RNG seed");
    g->add_option("-o,--out", gen.out, "Output path");

    std::string config;
    std::optional<std::size_t> parallelism;
    auto* r = app.add_subcommand("run", "Execute an experiment config");
    r->add_option("config", config, "Experiment JSON")->required();
    r->add_option("-j,--parallelism", parallelism, "Override the config's worker count")->check(CLI::PositiveNumber);

    std::string oracle_kind;
    std::string oracle_instance;
    std::string oracle_out;
    auto* o = app.add_subcommand("oracle", "Compute ground truth by enumeration");
    o->add_option("kind", oracle_kind, "vig | vigw | optimum | knapsack-dp")
        ->required()
        ->check(CLI::IsMember({"vig", "vigw", "optimum", "knapsack-dp"}));
    o->add_option("instance", oracle_instance, "Instance JSON")->required()->check(CLI::ExistingFile);
    o->add_option("-o,--out", oracle_out, "Output path");

    std::string export_in;
    std::string export_format = "dot";
    bool export_top = false;
    std::string export_out;
    auto* e = app.add_subcommand("export-graph", "Convert a *.vigw.json graph");
    e->add_option("vigw", export_in, "Input *.vigw.json")->required()->check(CLI::ExistingFile);
    e->add_option("--format", export_format, "dot | graphml | json")->check(CLI::IsMember({"dot", "graphml", "json"}));
    e->add_flag("--top-edges", export_top, "Keep only edges above the box-plot fence");
    e->add_option("-o,--out", export_out, "Output path (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int rc = app.exit(err);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (g->parsed()) {
            if (gen.kind != "friedman" && gen.n == 0) {
                std::cerr << "error: gen " << gen.kind << " requires --n\n";
                return kExitConfig;
            }
            if (gen.kind == "nk" && gen.k == 0) {
                std::cerr << "error: gen nk requires --k\n";
                return kExitConfig;
            }
            return cmd_gen(gen);
        }
        if (r->parsed()) {
            return cmd_run(config, parallelism);
        }
        if (o->parsed()) {
            return cmd_oracle(oracle_kind, oracle_instance, oracle_out);
        }
        return cmd_export(export_in, export_format, export_top, export_out);
    } catch (const vigls::ConfigError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitConfig;
    } catch (const vigls::CapabilityError& err) {
        std::cerr << "capability error: " << err.what() << '\n';
        return kExitCapability;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitRuntime;
    }
}
