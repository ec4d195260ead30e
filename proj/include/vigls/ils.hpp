/// @file ils.hpp
/// @brief Iterated local search: perturb, local search, elitist acceptance.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "core.hpp"
#include "perturbation.hpp"
#include "rng.hpp"
#include "search.hpp"
#include "vigw.hpp"

namespace vigls {

enum class SearchEngine { ls, lswll2 };
enum class PerturbationKind { srp2, srp50, adp, vigwbp };

inline std::string_view to_string(SearchEngine s) { return s == SearchEngine::ls ? "ls" : "lswll2"; }

inline std::string_view to_string(PerturbationKind p) {
    switch (p) {
    case PerturbationKind::srp2: return "srp2";
    case PerturbationKind::srp50: return "srp50";
    case PerturbationKind::adp: return "adp";
    case PerturbationKind::vigwbp: return "vigwbp";
    }
    return "unknown";
}

inline SearchEngine parse_search_engine(std::string_view s) {
    if (s == "ls") {
        return SearchEngine::ls;
    }
    if (s == "lswll2") {
        return SearchEngine::lswll2;
    }
    throw std::invalid_argument("unknown search engine '" + std::string(s) + "'");
}

inline PerturbationKind parse_perturbation(std::string_view s) {
    if (s == "srp2") {
        return PerturbationKind::srp2;
    }
    if (s == "srp50") {
        return PerturbationKind::srp50;
    }
    if (s == "adp") {
        return PerturbationKind::adp;
    }
    if (s == "vigwbp") {
        return PerturbationKind::vigwbp;
    }
    throw std::invalid_argument("unknown perturbation '" + std::string(s) + "'");
}

/// Exactly one of the two limits must be set.
struct StopCriterion {
    std::optional<std::size_t> max_iterations;
    std::optional<double> max_seconds;

    static StopCriterion iterations(std::size_t n) { return {n, std::nullopt}; }
    static StopCriterion seconds(double s) { return {std::nullopt, s}; }
};

struct IlsConfig {
    SearchEngine search = SearchEngine::lswll2;
    PerturbationKind perturbation = PerturbationKind::vigwbp;
    StopCriterion stop = StopCriterion::iterations(1000);
    std::uint64_t seed = 0;
    /// Fitness of the global optimum; enables ERR.
    std::optional<double> optimum;
    bool revisit_inclusive = false;
    VigwbpOptions vigwbp;
    /// Receives inner local-search events; the argument is the ILS iteration
    /// (0 for the initial descent, t for iteration t).
    std::function<void(std::size_t, const TraceEvent&)> inner_trace;

    void validate() const {
        if (stop.max_iterations.has_value() == stop.max_seconds.has_value()) {
            throw std::invalid_argument("IlsConfig: set exactly one stop criterion");
        }
        if (stop.max_seconds && !(*stop.max_seconds > 0.0)) {
            throw std::invalid_argument("IlsConfig: max_seconds must be positive");
        }
        if (perturbation == PerturbationKind::vigwbp && search != SearchEngine::lswll2) {
            throw std::invalid_argument("IlsConfig: vigwbp requires the lswll2 search engine");
        }
    }
};

struct IterationRecord {
    std::size_t hdp = 0;
    /// |f(perturbed) - f(current)|.
    double fdp = 0.0;
    /// Hamming distance from the perturbed local optimum to the new one.
    std::size_t hdlo = 0;
    bool escaped = false;
    bool accepted = false;
    double candidate_fitness = 0.0;
    double current_fitness = 0.0;
    std::size_t nils = 0;
    std::size_t alpha = 0;
};

struct RunMetrics {
    double pelo = 0.0;
    double hdlo = 0.0;
    double hdp = 0.0;
    double fdp = 0.0;
    /// mean(FDP) / mean(HDP).
    double fhrp = 0.0;
    /// mean(FDP_t / HDP_t).
    double fhrp_mean_of_ratios = 0.0;
    double nils = 0.0;
};

inline RunMetrics compute_metrics(const std::vector<IterationRecord>& series) {
    if (series.empty()) {
        throw std::invalid_argument("compute_metrics: empty series");
    }
    RunMetrics m;
    double ratio_sum = 0.0;
    for (const auto& r : series) {
        m.pelo += r.escaped ? 1.0 : 0.0;
        m.hdlo += static_cast<double>(r.hdlo);
        m.hdp += static_cast<double>(r.hdp);
        m.fdp += r.fdp;
        m.nils += static_cast<double>(r.nils);
        ratio_sum += r.hdp > 0 ? r.fdp / static_cast<double>(r.hdp) : 0.0;
    }
    const auto count = static_cast<double>(series.size());
    m.pelo /= count;
    m.hdlo /= count;
    m.hdp /= count;
    m.fdp /= count;
    m.nils /= count;
    m.fhrp = m.hdp > 0.0 ? m.fdp / m.hdp : 0.0;
    m.fhrp_mean_of_ratios = ratio_sum / count;
    return m;
}

struct Candidate {
    BitString x;
    double fitness = 0.0;
};

/// Elitist acceptance: the candidate replaces the current solution only if
/// strictly better.
inline const Candidate& accept(const Candidate& current, const Candidate& candidate) {
    return candidate.fitness > current.fitness ? candidate : current;
}

struct RunReport {
    BitString best;
    double fit = 0.0;
    std::optional<double> err;
    std::vector<IterationRecord> series;
    RunMetrics metrics;
    std::size_t ni = 0;
    double time_seconds = 0.0;
    std::size_t evaluations = 0;
    /// Inner iterations of the initial descent.
    std::size_t initial_nils = 0;
    std::optional<EmpiricalVigw> graph;
    std::uint64_t seed = 0;
};

/// Runs one ILS. All randomness comes from a single stream seeded with
/// cfg.seed, so a fixed config replays bit-identically in iteration mode.
template <Problem P>
RunReport run_ils(const P& problem, const IlsConfig& cfg) {
    cfg.validate();
    const std::size_t n = problem.dimension();
    if (n < 2) {
        throw std::invalid_argument("run_ils: problem needs at least two variables");
    }
    const auto started = std::chrono::steady_clock::now();
    const auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    };

    Rng rng(cfg.seed);
    RunReport rep;
    rep.seed = cfg.seed;
    if (cfg.search == SearchEngine::lswll2) {
        rep.graph.emplace(n);
    }

    std::size_t ils_iteration = 0;
    LswllOptions ls_opt;
    ls_opt.revisit_inclusive = cfg.revisit_inclusive;
    if (cfg.inner_trace) {
        ls_opt.trace = [&](const TraceEvent& e) { cfg.inner_trace(ils_iteration, e); };
    }
    const auto descend = [&](BitString start) {
        LocalSearchResult r = cfg.search == SearchEngine::lswll2 ? lswll2(problem, std::move(start), *rep.graph, rng, ls_opt)
                                                                 : ls(problem, std::move(start), rng, ls_opt.trace);
        rep.evaluations += r.evaluations;
        return r;
    };

    BitString start(n);
    for (std::size_t i = 0; i < n; ++i) {
        start.set(i, rng.uniform_index(2) == 1);
    }
    auto first = descend(std::move(start));
    rep.initial_nils = first.iterations;
    Candidate current{std::move(first.optimum), 0.0};
    current.fitness = problem.evaluate(current.x);
    Candidate best = current;

    AdpState adp(n);
    const bool time_mode = cfg.stop.max_seconds.has_value();
    while (time_mode ? elapsed() < *cfg.stop.max_seconds : rep.series.size() < *cfg.stop.max_iterations) {
        ++ils_iteration;
        PerturbationOutcome pert;
        std::size_t alpha = 0;
        switch (cfg.perturbation) {
        case PerturbationKind::srp2: alpha = 2; break;
        case PerturbationKind::srp50: alpha = srp50_strength(n); break;
        case PerturbationKind::adp: alpha = adp.alpha; break;
        case PerturbationKind::vigwbp: break;
        }
        pert = cfg.perturbation == PerturbationKind::vigwbp ? vigwbp(current.x, *rep.graph, rng, cfg.vigwbp)
                                                            : srp(current.x, alpha, rng);

        IterationRecord rec;
        rec.alpha = alpha;
        rec.hdp = pert.hdp;
        rec.fdp = std::abs(problem.evaluate(pert.perturbed) - current.fitness);
        ++rep.evaluations;

        auto res = descend(std::move(pert.perturbed));
        Candidate cand{std::move(res.optimum), 0.0};
        cand.fitness = problem.evaluate(cand.x);
        rec.nils = res.iterations;
        rec.hdlo = hamming(current.x, cand.x);
        rec.escaped = rec.hdlo != 0;
        rec.candidate_fitness = cand.fitness;
        const bool improved = cand.fitness > current.fitness;

        if (cfg.perturbation == PerturbationKind::adp) {
            adp_update(adp, AdpObservation{!rec.escaped, rec.hdp, rec.hdlo, improved});
        }
        if (cand.fitness > best.fitness) {
            best = cand;
        }
        if (&accept(current, cand) == &cand) {
            current = std::move(cand);
            rec.accepted = true;
        }
        rec.current_fitness = current.fitness;
        rep.series.push_back(rec);
    }

    rep.ni = rep.series.size();
    rep.best = best.x;
    rep.fit = best.fitness;
    if (cfg.optimum) {
        rep.err = (*cfg.optimum - rep.fit) / *cfg.optimum;
    }
    if (!rep.series.empty()) {
        rep.metrics = compute_metrics(rep.series);
    }
    rep.time_seconds = elapsed();
    return rep;
}

} // namespace vigls
