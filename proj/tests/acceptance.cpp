// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vigls/experiment.hpp"
#include "vigls/featsel.hpp"
#include "vigls/ils.hpp"
#include "vigls/knapsack.hpp"
#include "vigls/nk.hpp"
#include "vigls/oracles.hpp"
#include "vigls/search.hpp"

using namespace vigls;

namespace {

constexpr std::uint64_t kMaster = 20210901;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

IlsConfig ils_config(PerturbationKind p, std::size_t ni, std::uint64_t seed) {
    IlsConfig c;
    c.search = SearchEngine::lswll2;
    c.perturbation = p;
    c.stop = StopCriterion::iterations(ni);
    c.seed = seed;
    return c;
}

BitString random_start(std::size_t n, Rng& rng) {
    BitString x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x.set(i, rng.uniform_index(2) == 1);
    }
    return x;
}

// Shared between criteria 2 and 4.
const NkInstance& adjacent100() {
    static const NkInstance inst = nk_generate(100, 3, NkModel::adjacent, derive_seed(kMaster, 100));
    return inst;
}

std::vector<RunReport>& vigwbp_nk_runs() {
    static std::vector<RunReport> runs = [] {
        std::vector<RunReport> out;
        for (std::uint64_t r = 0; r < 10; ++r) {
            out.push_back(run_ils(adjacent100(), ils_config(PerturbationKind::vigwbp, 5000, derive_seed(kMaster, 1000 + r))));
        }
        return out;
    }();
    return runs;
}

// Shared between criteria 3 and 5.
std::vector<RunReport>& knapsack_srp2_runs() {
    static std::vector<RunReport> runs = [] {
        const auto inst = knapsack_generate(500, derive_seed(kMaster, 500));
        const auto opt = static_cast<double>(knapsack_dp(inst));
        std::vector<RunReport> out;
        for (std::uint64_t r = 0; r < 10; ++r) {
            auto cfg = ils_config(PerturbationKind::srp2, 30000, derive_seed(kMaster, 3000 + r));
            cfg.optimum = opt;
            out.push_back(run_ils(inst, cfg));
        }
        return out;
    }();
    return runs;
}

Outcome no_false_linkage() {
    std::size_t instances = 0;
    std::size_t violations = 0;
    std::size_t edges = 0;
    for (std::size_t n = 8; n <= 14; ++n) {
        for (std::size_t k : {2u, 3u}) {
            for (auto model : {NkModel::adjacent, NkModel::random}) {
                for (std::uint64_t rep = 0; rep < 2; ++rep) {
                    const auto inst = nk_generate(n, k, model, derive_seed(kMaster, instances));
                    const auto truth = true_vig(walsh_transform(inst));
                    const auto rpt =
                        run_ils(inst, ils_config(PerturbationKind::vigwbp, 2000, derive_seed(kMaster, 10000 + instances)));
                    violations += false_edges(*rpt.graph, truth).size();
                    edges += rpt.graph->n_edges();
                    ++instances;
                }
            }
        }
    }
    return {instances >= 50 && violations == 0, std::to_string(instances) + " NK instances, " + std::to_string(edges) +
                                                     " learned edges, " + std::to_string(violations) + " false"};
}

Outcome edge_recovery() {
    const auto truth = make_edge_set(adjacent100().cooccurrence_edges());
    std::vector<double> cov;
    for (const auto& r : vigwbp_nk_runs()) {
        cov.push_back(coverage(*r.graph, truth));
    }
    const double m = median(cov);
    return {m >= 0.90, "median coverage " + fmt(m) + " over 10 runs (>= 0.90), min " +
                           fmt(*std::min_element(cov.begin(), cov.end()))};
}

Outcome knapsack_quality() {
    std::vector<double> err;
    for (const auto& r : knapsack_srp2_runs()) {
        err.push_back(*r.err);
    }
    const double m = median(err);
    return {m <= 0.01, "median ERR " + fmt(m, 5) + " over 10 runs (<= 0.01)"};
}

Outcome comparative_ordering() {
    std::vector<double> vigwbp_fit;
    for (const auto& r : vigwbp_nk_runs()) {
        vigwbp_fit.push_back(r.fit);
    }
    std::vector<double> srp50_fit;
    for (std::uint64_t r = 0; r < 10; ++r) {
        srp50_fit.push_back(
            run_ils(adjacent100(), ils_config(PerturbationKind::srp50, 5000, derive_seed(kMaster, 4000 + r))).fit);
    }
    const double a = median(vigwbp_fit);
    const double b = median(srp50_fit);
    return {a >= b, "median FIT vigwbp " + fmt(a) + " vs srp50 " + fmt(b)};
}

Outcome hdp_exactness() {
    std::size_t exact = 0;
    const auto& runs = knapsack_srp2_runs();
    for (const auto& r : runs) {
        exact += static_cast<std::size_t>(r.metrics.hdp == 2.0);
    }
    // also on an NK landscape
    const auto inst = nk_generate(100, 3, NkModel::random, derive_seed(kMaster, 5));
    std::size_t nk_runs = 0;
    for (std::uint64_t r = 0; r < 5; ++r) {
        const auto rep = run_ils(inst, ils_config(PerturbationKind::srp2, 1000, derive_seed(kMaster, 5000 + r)));
        exact += static_cast<std::size_t>(rep.metrics.hdp == 2.0);
        ++nk_runs;
    }
    const std::size_t total = runs.size() + nk_runs;
    return {exact == total, std::to_string(exact) + "/" + std::to_string(total) + " SRP(2) runs with HDP == 2 exactly"};
}

Outcome oracle_cross_validation() {
    Rng rng(derive_seed(kMaster, 6));
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 2 + rng.uniform_index(11);
        std::vector<double> table(std::size_t{1} << n);
        for (auto& v : table) {
            v = rng.uniform01() * 2.0 - 1.0;
        }
        const FunctionProblem p(n, [&table](const BitString& x) { return table[x.to_u64()]; });
        const auto all = walsh_transform(p).reconstruct();
        for (std::size_t x = 0; x < table.size(); ++x) {
            worst = std::max(worst, std::abs(all[x] - table[x]));
        }
    }
    std::size_t dp_agree = 0;
    for (std::uint64_t t = 0; t < 50; ++t) {
        const auto inst = knapsack_generate(1 + rng.uniform_index(16), derive_seed(kMaster, 600 + t));
        std::int64_t best = 0;
        const std::size_t n = inst.dimension();
        for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
            std::int64_t w = 0;
            std::int64_t p = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if ((m >> i) & 1U) {
                    w += inst.weights()[i];
                    p += inst.profits()[i];
                }
            }
            if (w <= inst.capacity()) {
                best = std::max(best, p);
            }
        }
        dp_agree += static_cast<std::size_t>(knapsack_dp(inst) == best);
    }
    std::size_t off_vig_nonzero = 0;
    std::size_t off_vig_pairs = 0;
    for (std::uint64_t t = 0; t < 10; ++t) {
        const auto inst = nk_generate(8 + t % 5, 2 + t % 2, t % 2 ? NkModel::random : NkModel::adjacent,
                                      derive_seed(kMaster, 700 + t));
        const auto truth = true_vig(walsh_transform(inst));
        const auto w = true_vigw(inst);
        for (std::size_t g = 0; g < inst.dimension(); ++g) {
            for (std::size_t h = g + 1; h < inst.dimension(); ++h) {
                if (!std::binary_search(truth.begin(), truth.end(), Edge{g, h})) {
                    ++off_vig_pairs;
                    off_vig_nonzero += static_cast<std::size_t>(w(g, h) != 0.0);
                }
            }
        }
    }
    std::ostringstream os;
    os << "walsh max error " << worst << " (< 1e-9); dp == brute force " << dp_agree << "/50; "
       << off_vig_nonzero << " nonzero strengths on " << off_vig_pairs << " non-edges";
    return {worst < 1e-9 && dp_agree == 50 && off_vig_nonzero == 0, os.str()};
}

Outcome observer_purity() {
    Rng rng(derive_seed(kMaster, 7));
    std::size_t same = 0;
    for (std::size_t t = 0; t < 100; ++t) {
        const auto inst = nk_generate(20 + rng.uniform_index(81), 2 + rng.uniform_index(4), NkModel::random,
                                      derive_seed(kMaster, 7000 + t));
        const auto x = random_start(inst.dimension(), rng);
        const auto seed = rng.next_u64();
        Rng a(seed);
        Rng b(seed);
        EmpiricalVigw ga(inst.dimension());
        EmpiricalVigw gb(inst.dimension());
        LswllOptions off;
        off.learn = false;
        const auto ra = lswll2(inst, x, ga, a);
        const auto rb = lswll2(inst, x, gb, b, off);
        same += static_cast<std::size_t>(ra.trajectory_hash == rb.trajectory_hash && ra.optimum == rb.optimum &&
                                         gb.n_edges() == 0);
    }
    return {same == 100, std::to_string(same) + "/100 starts with identical trajectory hashes"};
}

Outcome weight_fidelity() {
    std::size_t observations = 0;
    std::size_t bad_obs = 0;
    std::size_t edges = 0;
    std::size_t bad_edges = 0;
    double worst = 0.0;
    const auto check = [&](const auto& problem, std::uint64_t seed, PerturbationKind p) {
        std::map<Edge, std::vector<double>> log;
        auto cfg = ils_config(p, 300, seed);
        cfg.inner_trace = [&](std::size_t, const TraceEvent& e) {
            if (!e.observation) {
                return;
            }
            ++observations;
            const double sd = second_difference(problem, *e.state, e.g, *e.h);
            worst = std::max(worst, std::abs(sd - *e.observation));
            bad_obs += static_cast<std::size_t>(std::abs(sd - *e.observation) > 1e-12);
            log[canonical(e.g, *e.h)].push_back(*e.observation);
        };
        const auto rep = run_ils(problem, cfg);
        for (const auto& we : rep.graph->edges()) {
            ++edges;
            const auto it = log.find(Edge{we.u, we.v});
            if (it == log.end()) {
                ++bad_edges;
                continue;
            }
            double s = 0.0;
            for (double v : it->second) {
                s += v;
            }
            const double mean = s / static_cast<double>(it->second.size());
            bad_edges += static_cast<std::size_t>(std::abs(mean - we.stat.weight()) > 1e-12 ||
                                                  it->second.size() != we.stat.count);
        }
        bad_edges += log.size() != rep.graph->n_edges() ? 1 : 0;
    };
    for (std::uint64_t t = 0; t < 5; ++t) {
        check(nk_generate(30, 3 + t % 3, t % 2 ? NkModel::random : NkModel::adjacent, derive_seed(kMaster, 800 + t)),
              derive_seed(kMaster, 8000 + t), t % 2 ? PerturbationKind::vigwbp : PerturbationKind::srp2);
    }
    check(knapsack_generate(40, derive_seed(kMaster, 810)), derive_seed(kMaster, 8100), PerturbationKind::vigwbp);
    std::ostringstream os;
    os << observations << " observations (" << bad_obs << " off second_difference, max dev " << worst << "), "
       << edges << " edges (" << bad_edges << " off logged mean)";
    return {observations > 0 && bad_obs == 0 && bad_edges == 0, os.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome determinism() {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "vigls_acceptance_determinism";
    fs::remove_all(root);
    auto j = nlohmann::json::parse(R"({
      "master_seed": 99,
      "runs_per_cell": 4,
      "stop": {"max_iterations": 300},
      "instances": [
        {"name": "nk-adj", "generate": {"kind": "nk", "n": 60, "k": 3, "model": "adjacent", "seed": 1}},
        {"name": "nk-rnd", "generate": {"kind": "nk", "n": 40, "k": 4, "model": "random", "seed": 2}},
        {"name": "kp", "generate": {"kind": "knapsack", "n": 80, "seed": 3}},
        {"name": "fried", "generate": {"kind": "friedman", "nex": 80, "seed": 4}}
      ],
      "algorithms": [
        {"search": "lswll2", "perturbation": "vigwbp"},
        {"search": "lswll2", "perturbation": "adp"},
        {"search": "ls", "perturbation": "srp50"}
      ]
    })");
    std::vector<std::string> dirs{"seq", "par4", "par4-again"};
    for (std::size_t d = 0; d < dirs.size(); ++d) {
        j["parallelism"] = d == 0 ? 1 : 4;
        j["output_dir"] = (root / dirs[d]).string();
        run_experiment(parse_experiment_config(j));
    }
    std::size_t files = 0;
    std::size_t mismatches = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "seq")) {
        if (!e.is_regular_file() || e.path().filename() == "timings.csv") {
            continue;
        }
        const auto rel = fs::relative(e.path(), root / "seq");
        const auto ref = slurp(e.path());
        for (std::size_t d = 1; d < dirs.size(); ++d) {
            mismatches += static_cast<std::size_t>(slurp(root / dirs[d] / rel) != ref);
        }
        ++files;
    }
    fs::remove_all(root);
    return {files > 1 && mismatches == 0, std::to_string(files) + " files compared at parallelism 1/4/4, " +
                                              std::to_string(mismatches) + " differ"};
}

Outcome friedman_ratio() {
    Rng rng(derive_seed(kMaster, 10));
    const auto data = friedman_generate(10000, rng);
    // variance of the noise-free targets, recomputed from the features
    std::vector<double> clean;
    for (const auto& row : data.dataset.rows) {
        const auto& u = row;
        const double lead = 9.0 * std::exp(-3.0 * ((1 - u[0]) * (1 - u[0]) + (1 - u[1]) * (1 - u[1]) +
                                                   (1 - u[2]) * (1 - u[2])));
        const double s = std::sin(M_PI * u[5]);
        clean.push_back(lead - 0.8 * std::exp(-2.0 * (u[3] - u[4])) + 2.0 * s * s - 2.5 * (u[6] - u[7]));
    }
    double mean = 0.0;
    for (double c : clean) {
        mean += c;
    }
    mean /= static_cast<double>(clean.size());
    double var = 0.0;
    for (double c : clean) {
        var += (c - mean) * (c - mean);
    }
    var /= static_cast<double>(clean.size() - 1);
    // noise variance as realised in the generated targets
    double noise_ss = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const double e = data.raw_targets[i] - clean[i];
        noise_ss += e * e;
    }
    const double noise_var = noise_ss / static_cast<double>(clean.size());
    const double ratio = var / (data.sigma * data.sigma);
    const double realised = var / noise_var;
    return {ratio >= 1.8 && ratio <= 2.2 && realised >= 1.8 && realised <= 2.2,
            "Var(clean)/sigma^2 = " + fmt(ratio) + ", Var(clean)/Var(noise) = " + fmt(realised) + " (in [1.8, 2.2])"};
}

Outcome feature_selection_smoke() {
    const auto data = load_dataset(VIGLS_DATA_DIR "/housing.csv", Task::regression);
    std::vector<double> fit;
    for (std::uint64_t r = 0; r < 5; ++r) {
        const FsProblem p(make_split(data, derive_seed(kMaster, 11000 + r)));
        fit.push_back(run_ils(p, ils_config(PerturbationKind::vigwbp, 200, derive_seed(kMaster, 11100 + r))).fit);
    }
    const double m = median(fit);
    return {m >= 0.95, "housing median FIT " + fmt(m) + " over 5 runs (>= 0.95)"};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"C1 no-false-linkage", no_false_linkage},
        {"C2 edge-recovery", edge_recovery},
        {"C3 knapsack-quality", knapsack_quality},
        {"C4 comparative-ordering", comparative_ordering},
        {"C5 hdp-exactness", hdp_exactness},
        {"C6 oracle-cross-validation", oracle_cross_validation},
        {"C7 observer-purity", observer_purity},
        {"C8 weight-fidelity", weight_fidelity},
        {"C9 determinism", determinism},
        {"C10 friedman-snr", friedman_ratio},
        {"C11 feature-selection-smoke", feature_selection_smoke},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %-28s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
