/// @file experiment.hpp
/// @brief Config-driven experiment matrices: instances x algorithms x runs,
/// executed on a bounded worker pool with order-deterministic output.
///
/// Config document (JSON):
///
///     {
///       "master_seed": 1,
///       "runs_per_cell": 10,
///       "parallelism": 4,
///       "output_dir": "out",
///       "stop": {"max_iterations": 5000}        // or {"max_seconds": 2.5}
///       "trace": "none" | "ils" | "inner",
///       "revisit_inclusive": false,
///       "instances": [
///         {"name": "a", "path": "a.nk.json"},
///         {"name": "b", "generate": {"kind": "nk", "n": 100, "k": 3, "model": "adjacent", "seed": 1}},
///         {"name": "c", "generate": {"kind": "knapsack", "n": 500, "seed": 7}},
///         {"name": "d", "dataset": {"path": "housing.csv", "task": "regression", "target": 14}},
///         {"name": "e", "generate": {"kind": "friedman", "nex": 500, "seed": 3}}
///       ],
///       "algorithms": [{"search": "lswll2", "perturbation": "vigwbp"}]
///     }
///
/// Optional per-instance "optimum": a number, "dp" (knapsack, the default
/// for knapsack instances) or "exhaustive" (N <= 24). Paths are resolved
/// relative to the config file. VIGLS_OUTPUT_DIR overrides output_dir.

#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "featsel.hpp"
#include "format.hpp"
#include "ils.hpp"
#include "knapsack.hpp"
#include "nk.hpp"
#include "oracles.hpp"
#include "vigw.hpp"

namespace vigls {

inline constexpr int kSummarySchemaVersion = 1;

/// Raised for invalid configs; carries every problem found.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(std::vector<std::string> problems)
        : std::runtime_error(join(problems)), problems_(std::move(problems)) {}
    const std::vector<std::string>& problems() const { return problems_; }

  private:
    static std::string join(const std::vector<std::string>& p) {
        std::string s = "invalid experiment config:";
        for (const auto& x : p) {
            s += "\n  - " + x;
        }
        return s;
    }
    std::vector<std::string> problems_;
};

struct DatasetSource {
    std::filesystem::path path;
    Task task = Task::classification;
    std::optional<std::size_t> target_column;
};

struct InstanceSpec {
    std::string name;
    std::optional<std::filesystem::path> path;
    nlohmann::json generate;
    std::optional<DatasetSource> dataset;
    /// "", "dp", "exhaustive" or a number.
    nlohmann::json optimum;
};

struct AlgorithmSpec {
    SearchEngine search = SearchEngine::lswll2;
    PerturbationKind perturbation = PerturbationKind::vigwbp;

    std::string name() const { return std::string(to_string(search)) + "+" + std::string(to_string(perturbation)); }
};

enum class TraceLevel { none, ils, inner };

struct ExperimentConfig {
    std::vector<InstanceSpec> instances;
    std::vector<AlgorithmSpec> algorithms;
    std::size_t runs_per_cell = 1;
    std::uint64_t master_seed = 0;
    StopCriterion stop = StopCriterion::iterations(1000);
    std::filesystem::path output_dir = "out";
    std::size_t parallelism = 1;
    TraceLevel trace = TraceLevel::none;
    bool revisit_inclusive = false;
};

namespace detail {

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

inline bool safe_name(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    });
}

} // namespace detail

/// Parses and validates; every problem is collected before throwing.
inline ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    std::vector<std::string> errs;
    ExperimentConfig cfg;
    const auto get = [&](const char* key, auto fallback) {
        using T = decltype(fallback);
        if (!j.contains(key)) {
            return fallback;
        }
        try {
            return j.at(key).get<T>();
        } catch (const std::exception& e) {
            errs.push_back(std::string("field '") + key + "': " + e.what());
            return fallback;
        }
    };
    if (!j.is_object()) {
        throw ConfigError({"config must be a JSON object"});
    }
    if (!j.contains("master_seed")) {
        errs.emplace_back("missing 'master_seed'");
    }
    cfg.master_seed = get("master_seed", std::uint64_t{0});
    const auto runs = get("runs_per_cell", std::int64_t{1});
    if (runs < 1) {
        errs.emplace_back("runs_per_cell must be >= 1");
    }
    cfg.runs_per_cell = static_cast<std::size_t>(std::max<std::int64_t>(runs, 1));
    const auto par = get("parallelism", std::int64_t{1});
    if (par < 1) {
        errs.emplace_back("parallelism must be >= 1");
    }
    cfg.parallelism = static_cast<std::size_t>(std::max<std::int64_t>(par, 1));
    cfg.output_dir = detail::resolve(base_dir, get("output_dir", std::string("out")));
    if (const char* env = std::getenv("VIGLS_OUTPUT_DIR"); env != nullptr && *env != '\0') {
        cfg.output_dir = env;
    }
    cfg.revisit_inclusive = get("revisit_inclusive", false);
    const auto trace = get("trace", std::string("none"));
    if (trace == "none") {
        cfg.trace = TraceLevel::none;
    } else if (trace == "ils") {
        cfg.trace = TraceLevel::ils;
    } else if (trace == "inner") {
        cfg.trace = TraceLevel::inner;
    } else {
        errs.push_back("trace must be one of none|ils|inner, got '" + trace + "'");
    }

    if (!j.contains("stop") || !j.at("stop").is_object()) {
        errs.emplace_back("missing 'stop' object");
    } else {
        const auto& s = j.at("stop");
        const bool has_it = s.contains("max_iterations");
        const bool has_time = s.contains("max_seconds");
        if (has_it == has_time) {
            errs.emplace_back("stop: set exactly one of max_iterations / max_seconds");
        } else if (has_it) {
            const auto v = s.at("max_iterations");
            if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
                errs.emplace_back("stop.max_iterations must be a positive integer");
            } else {
                cfg.stop = StopCriterion::iterations(v.get<std::size_t>());
            }
        } else {
            const auto v = s.at("max_seconds");
            if (!v.is_number() || !(v.get<double>() > 0.0)) {
                errs.emplace_back("stop.max_seconds must be a positive number");
            } else {
                cfg.stop = StopCriterion::seconds(v.get<double>());
            }
        }
    }

    if (!j.contains("instances") || !j.at("instances").is_array() || j.at("instances").empty()) {
        errs.emplace_back("'instances' must be a non-empty array");
    } else {
        std::size_t idx = 0;
        for (const auto& ji : j.at("instances")) {
            ++idx;
            const std::string where = "instances[" + std::to_string(idx - 1) + "]";
            InstanceSpec spec;
            spec.name = ji.value("name", "");
            if (!detail::safe_name(spec.name)) {
                errs.push_back(where + ": 'name' must be non-empty and use only [A-Za-z0-9._-]");
            }
            const int sources = static_cast<int>(ji.contains("path")) + static_cast<int>(ji.contains("generate")) +
                                static_cast<int>(ji.contains("dataset"));
            if (sources != 1) {
                errs.push_back(where + ": set exactly one of path / generate / dataset");
            }
            if (ji.contains("path")) {
                spec.path = detail::resolve(base_dir, ji.at("path").get<std::string>());
                if (!std::filesystem::exists(*spec.path)) {
                    errs.push_back(where + ": instance file '" + spec.path->string() + "' does not exist");
                }
            }
            if (ji.contains("generate")) {
                spec.generate = ji.at("generate");
                const auto kind = spec.generate.value("kind", "");
                if (kind != "nk" && kind != "knapsack" && kind != "friedman") {
                    errs.push_back(where + ": generate.kind must be nk|knapsack|friedman");
                }
            }
            if (ji.contains("dataset")) {
                const auto& jd = ji.at("dataset");
                DatasetSource ds;
                ds.path = detail::resolve(base_dir, jd.value("path", ""));
                if (!std::filesystem::exists(ds.path)) {
                    errs.push_back(where + ": dataset '" + ds.path.string() + "' does not exist");
                }
                try {
                    ds.task = parse_task(jd.value("task", "classification"));
                } catch (const std::exception& e) {
                    errs.push_back(where + ": " + e.what());
                }
                if (jd.contains("target")) {
                    const auto t = jd.at("target").get<std::int64_t>();
                    if (t < 1) {
                        errs.push_back(where + ": dataset.target is a 1-based column index");
                    } else {
                        ds.target_column = static_cast<std::size_t>(t - 1);
                    }
                }
                spec.dataset = ds;
            }
            if (ji.contains("optimum")) {
                spec.optimum = ji.at("optimum");
                const bool ok = spec.optimum.is_number() ||
                                (spec.optimum.is_string() &&
                                 (spec.optimum == "dp" || spec.optimum == "exhaustive" || spec.optimum == "none"));
                if (!ok) {
                    errs.push_back(where + ": optimum must be a number, \"dp\", \"exhaustive\" or \"none\"");
                }
            }
            cfg.instances.push_back(std::move(spec));
        }
        std::map<std::string, int> seen;
        for (const auto& s : cfg.instances) {
            if (++seen[s.name] == 2) {
                errs.push_back("duplicate instance name '" + s.name + "'");
            }
        }
    }

    if (!j.contains("algorithms") || !j.at("algorithms").is_array() || j.at("algorithms").empty()) {
        errs.emplace_back("'algorithms' must be a non-empty array");
    } else {
        std::size_t idx = 0;
        for (const auto& ja : j.at("algorithms")) {
            const std::string where = "algorithms[" + std::to_string(idx++) + "]";
            AlgorithmSpec a;
            try {
                a.search = parse_search_engine(ja.value("search", "lswll2"));
                a.perturbation = parse_perturbation(ja.value("perturbation", ""));
            } catch (const std::exception& e) {
                errs.push_back(where + ": " + e.what());
                continue;
            }
            if (a.perturbation == PerturbationKind::vigwbp && a.search != SearchEngine::lswll2) {
                errs.push_back(where + ": vigwbp requires search lswll2");
            }
            cfg.algorithms.push_back(a);
        }
    }
    if (!errs.empty()) {
        throw ConfigError(std::move(errs));
    }
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError({"cannot open config '" + path.string() + "'"});
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError({"config is not valid JSON: " + std::string(e.what())});
    }
    return parse_experiment_config(j, path.parent_path());
}

/// Loads an `*.nk.json` / `*.kp.json` document into a runtime handle.
inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    nlohmann::json j;
    in >> j;
    return j;
}

struct LoadedInstance {
    /// Problem for a given run; feature selection re-splits per run seed.
    std::function<AnyProblem(std::uint64_t split_seed)> make;
    std::optional<double> optimum;
    std::size_t n = 0;
};

inline LoadedInstance load_instance(const InstanceSpec& spec) {
    LoadedInstance out;
    std::shared_ptr<const KnapsackInstance> kp;
    std::shared_ptr<const NkInstance> nk;
    std::shared_ptr<const Dataset> ds;

    if (spec.path) {
        const auto j = read_json_file(*spec.path);
        const auto format = j.value("format", "");
        if (format == "vigls.nk") {
            nk = std::make_shared<const NkInstance>(nk_from_json(j));
        } else if (format == "vigls.knapsack") {
            kp = std::make_shared<const KnapsackInstance>(knapsack_from_json(j));
        } else {
            throw std::runtime_error(spec.path->string() + ": unrecognized instance format '" + format + "'");
        }
    } else if (!spec.generate.is_null()) {
        const auto& g = spec.generate;
        const auto kind = g.at("kind").get<std::string>();
        const auto seed = g.value("seed", std::uint64_t{0});
        if (kind == "nk") {
            nk = std::make_shared<const NkInstance>(nk_generate(g.at("n").get<std::size_t>(), g.at("k").get<std::size_t>(),
                                                                parse_nk_model(g.value("model", "adjacent")), seed));
        } else if (kind == "knapsack") {
            kp = std::make_shared<const KnapsackInstance>(knapsack_generate(g.at("n").get<std::size_t>(), seed));
        } else {
            Rng rng(seed);
            ds = std::make_shared<const Dataset>(friedman_generate(g.value("nex", std::size_t{500}), rng).dataset);
        }
    } else {
        ds = std::make_shared<const Dataset>(
            load_dataset(spec.dataset->path.string(), spec.dataset->task, spec.dataset->target_column));
    }

    if (nk) {
        out.n = nk->dimension();
        out.make = [nk](std::uint64_t) { return AnyProblem(ProblemKind::nk, nk); };
    } else if (kp) {
        out.n = kp->dimension();
        out.make = [kp](std::uint64_t) { return AnyProblem(ProblemKind::knapsack, kp); };
    } else {
        out.n = ds->n_features();
        out.make = [ds](std::uint64_t seed) {
            return AnyProblem(ProblemKind::feature_selection, std::make_shared<const FsProblem>(make_split(*ds, seed)));
        };
    }

    const auto& opt = spec.optimum;
    if (opt.is_number()) {
        out.optimum = opt.get<double>();
    } else if ((opt.is_null() && kp) || opt == "dp") {
        if (!kp) {
            throw std::runtime_error("instance '" + spec.name + "': optimum \"dp\" needs a knapsack instance");
        }
        out.optimum = static_cast<double>(knapsack_dp(*kp));
    } else if (opt == "exhaustive") {
        out.optimum = exhaustive_optimum(out.make(0)).second;
    }
    return out;
}

struct RunKey {
    std::size_t instance;
    std::size_t algorithm;
    std::size_t run;
};

struct RunOutcome {
    RunKey key;
    std::string instance_name;
    std::string algorithm_name;
    std::size_t n = 0;
    RunReport report;
    std::string ils_trace;
    std::string inner_trace;
};

inline std::uint64_t run_seed(std::uint64_t master, const RunKey& k) {
    return derive_seed(derive_seed(derive_seed(master, k.instance), k.algorithm), k.run);
}

/// Shared by all algorithms so run r of every algorithm sees the same split.
inline std::uint64_t split_seed(std::uint64_t master, const RunKey& k) {
    return derive_seed(derive_seed(master ^ 0x5A17C0DEULL, k.instance), k.run);
}

struct ExperimentResult {
    std::vector<RunOutcome> runs;
    std::vector<std::filesystem::path> files;
};

namespace detail {

inline std::string csv_opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

inline std::string summary_header() {
    return "instance,algorithm,search,perturbation,run,seed,n,ni,fit,err,pelo,hdlo,hdp,fdp,fhrp,"
           "fhrp_mean_of_ratios,nils,evaluations,edges,master_seed,rng,tool_version,schema_version\n";
}

inline std::string summary_row(const RunOutcome& o, const AlgorithmSpec& a, std::uint64_t master) {
    const auto& r = o.report;
    std::ostringstream os;
    os << o.instance_name << ',' << o.algorithm_name << ',' << to_string(a.search) << ',' << to_string(a.perturbation)
       << ',' << o.key.run + 1 << ',' << r.seed << ',' << o.n << ',' << r.ni << ',' << format_double(r.fit) << ','
       << csv_opt(r.err) << ',' << format_double(r.metrics.pelo) << ',' << format_double(r.metrics.hdlo) << ','
       << format_double(r.metrics.hdp) << ',' << format_double(r.metrics.fdp) << ',' << format_double(r.metrics.fhrp)
       << ',' << format_double(r.metrics.fhrp_mean_of_ratios) << ',' << format_double(r.metrics.nils) << ','
       << r.evaluations << ',' << (r.graph ? std::to_string(r.graph->n_edges()) : std::string()) << ',' << master
       << ',' << Rng::algorithm << ',' << kToolVersion << ',' << kSummarySchemaVersion << '\n';
    return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + p.string() + "'");
    }
    out << content;
}

} // namespace detail

/// Executes every (instance, algorithm, run) cell and writes:
///   summary.csv, timings.csv, runs/<instance>__<algorithm>__r<run>.vigw.json
///   and, when tracing, traces/<...>.ils.csv / .inner.csv
/// Everything except timings.csv is byte-identical for a fixed config in
/// iteration mode, independent of parallelism.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    std::vector<LoadedInstance> loaded;
    loaded.reserve(cfg.instances.size());
    for (const auto& spec : cfg.instances) {
        loaded.push_back(load_instance(spec));
    }

    std::vector<RunKey> keys;
    for (std::size_t i = 0; i < cfg.instances.size(); ++i) {
        for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
            for (std::size_t r = 0; r < cfg.runs_per_cell; ++r) {
                keys.push_back({i, a, r});
            }
        }
    }

    ExperimentResult result;
    result.runs.resize(keys.size());
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;

    const auto worker = [&] {
        while (true) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= keys.size()) {
                return;
            }
            try {
                const auto& k = keys[idx];
                const auto& alg = cfg.algorithms[k.algorithm];
                RunOutcome o;
                o.key = k;
                o.instance_name = cfg.instances[k.instance].name;
                o.algorithm_name = alg.name();
                o.n = loaded[k.instance].n;
                const AnyProblem problem = loaded[k.instance].make(split_seed(cfg.master_seed, k));

                IlsConfig ic;
                ic.search = alg.search;
                ic.perturbation = alg.perturbation;
                ic.stop = cfg.stop;
                ic.seed = run_seed(cfg.master_seed, k);
                ic.optimum = loaded[k.instance].optimum;
                ic.revisit_inclusive = cfg.revisit_inclusive;
                std::ostringstream inner;
                if (cfg.trace == TraceLevel::inner) {
                    inner << "ils_iteration,inner_iteration,branch,g,delta,accepted,h,stored,observation\n";
                    ic.inner_trace = [&inner](std::size_t it, const TraceEvent& e) {
                        inner << it << ',' << e.iteration << ','
                              << (e.branch == Branch::fresh ? "fresh" : "revisit") << ',' << e.g + 1 << ','
                              << format_double(e.delta) << ',' << (e.accepted ? 1 : 0) << ','
                              << (e.h ? std::to_string(*e.h + 1) : std::string()) << ','
                              << detail::csv_opt(e.stored) << ',' << detail::csv_opt(e.observation) << '\n';
                    };
                }
                o.report = run_ils(problem, ic);
                o.inner_trace = inner.str();
                if (cfg.trace != TraceLevel::none) {
                    std::ostringstream os;
                    os << "iteration,alpha,hdp,fdp,hdlo,escaped,accepted,candidate_fitness,current_fitness,nils\n";
                    std::size_t t = 0;
                    for (const auto& rec : o.report.series) {
                        os << ++t << ',' << rec.alpha << ',' << rec.hdp << ',' << format_double(rec.fdp) << ','
                           << rec.hdlo << ',' << (rec.escaped ? 1 : 0) << ',' << (rec.accepted ? 1 : 0) << ','
                           << format_double(rec.candidate_fitness) << ',' << format_double(rec.current_fitness) << ','
                           << rec.nils << '\n';
                    }
                    o.ils_trace = os.str();
                }
                result.runs[idx] = std::move(o);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
            }
        }
    };

    const std::size_t n_workers = std::min(cfg.parallelism, std::max<std::size_t>(keys.size(), 1));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }

    std::vector<std::size_t> order(result.runs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = result.runs[a];
        const auto& y = result.runs[b];
        return std::tie(x.instance_name, x.algorithm_name, x.key.run) <
               std::tie(y.instance_name, y.algorithm_name, y.key.run);
    });

    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir / "runs");
    std::string summary = detail::summary_header();
    std::string timings = "instance,algorithm,run,ni,time_seconds,master_seed,tool_version\n";
    for (const auto idx : order) {
        const auto& o = result.runs[idx];
        summary += detail::summary_row(o, cfg.algorithms[o.key.algorithm], cfg.master_seed);
        timings += o.instance_name + "," + o.algorithm_name + "," + std::to_string(o.key.run + 1) + "," +
                   std::to_string(o.report.ni) + "," + format_double(o.report.time_seconds) + "," +
                   std::to_string(cfg.master_seed) + "," + kToolVersion + "\n";
        const std::string stem = o.instance_name + "__" + o.algorithm_name + "__r" + std::to_string(o.key.run + 1);
        if (o.report.graph) {
            ExportOptions opt;
            opt.meta["master_seed"] = cfg.master_seed;
            opt.meta["run_seed"] = o.report.seed;
            opt.meta["rng"] = Rng::algorithm;
            opt.meta["instance"] = o.instance_name;
            opt.meta["algorithm"] = o.algorithm_name;
            opt.meta["run"] = o.key.run + 1;
            const auto p = cfg.output_dir / "runs" / (stem + ".vigw.json");
            detail::write_file(p, export_graph(*o.report.graph, GraphFormat::json, opt));
            result.files.push_back(p);
        }
        if (cfg.trace != TraceLevel::none) {
            fs::create_directories(cfg.output_dir / "traces");
            const auto p = cfg.output_dir / "traces" / (stem + ".ils.csv");
            detail::write_file(p, o.ils_trace);
            result.files.push_back(p);
            if (cfg.trace == TraceLevel::inner) {
                const auto q = cfg.output_dir / "traces" / (stem + ".inner.csv");
                detail::write_file(q, o.inner_trace);
                result.files.push_back(q);
            }
        }
    }
    detail::write_file(cfg.output_dir / "summary.csv", summary);
    detail::write_file(cfg.output_dir / "timings.csv", timings);
    result.files.push_back(cfg.output_dir / "summary.csv");
    result.files.push_back(cfg.output_dir / "timings.csv");
    return result;
}

} // namespace vigls
