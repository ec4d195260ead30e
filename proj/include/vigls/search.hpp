/// @file search.hpp
/// @brief First-improvement local search, plain and with linkage learning.
///
/// Both engines scan variables in a random permutation that is fixed for the
/// whole call and cycled, so a variable is tested again only after every
/// other one. A flip is accepted iff its delta exceeds kEpsilon.
///
/// The learning engine (lswll2) additionally keeps the list Q of variables
/// tested since the last improvement together with their deltas F. After an
/// improving flip of x_h the stored variables are tested again; any change
/// |delta_g(x ^ 1_h) - delta_g(x)| > kEpsilon is a second difference of the
/// pre-flip state and is recorded as an observation on edge (g, h). No extra
/// evaluations are spent: every revisit is also a regular improvement test.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "rng.hpp"
#include "vigw.hpp"

namespace vigls {

struct LocalSearchResult {
    BitString optimum;
    double fitness = 0.0;
    /// Inner iterations, i.e. single-flip tests (fresh and revisit).
    std::size_t iterations = 0;
    /// Fitness evaluations, counting one per delta plus the start point.
    std::size_t evaluations = 0;
    /// FNV-1a over the sequence of accepted flips.
    std::uint64_t trajectory_hash = 1469598103934665603ULL;
};

enum class Branch { fresh, revisit };

/// One inner iteration, reported before an accepted flip is applied.
struct TraceEvent {
    std::size_t iteration;
    Branch branch;
    std::size_t g;
    double delta;
    bool accepted;
    /// Last improving variable, if any.
    std::optional<std::size_t> h;
    /// Stored delta F_j (revisit branch only).
    std::optional<double> stored;
    /// Value passed to the graph (revisit branch, above kEpsilon, learning on).
    std::optional<double> observation;
    /// Solution at the time of the test.
    const BitString* state;
};

using TraceSink = std::function<void(const TraceEvent&)>;

struct LswllOptions {
    /// When false the graph is left untouched; the trajectory is unchanged.
    bool learn = true;
    /// Also revisit the last queued variable (the reference pseudocode stops
    /// one short of the end of Q).
    bool revisit_inclusive = false;
    TraceSink trace;
};

namespace detail {
inline void hash_flip(std::uint64_t& h, std::size_t g) {
    h = (h ^ static_cast<std::uint64_t>(g)) * 1099511628211ULL;
}
} // namespace detail

/// Plain first-improvement local search. Stops after N consecutive
/// non-improving tests.
template <Problem P>
LocalSearchResult ls(const P& p, BitString x, Rng& rng, const TraceSink& trace = {}) {
    const std::size_t n = p.dimension();
    auto ev = make_evaluator(p, std::move(x));
    LocalSearchResult res;
    res.evaluations = 1;
    if (n > 0) {
        const auto order = rng.permutation(n);
        std::size_t k = 0;
        std::size_t stall = 0;
        std::optional<std::size_t> h;
        while (stall < n) {
            const std::size_t g = order[k];
            k = (k + 1) % n;
            const double d = ev.delta(g);
            ++res.evaluations;
            const bool accept = d > kEpsilon;
            if (trace) {
                trace({res.iterations, Branch::fresh, g, d, accept, h, std::nullopt, std::nullopt, &ev.solution()});
            }
            ++res.iterations;
            if (accept) {
                ev.flip(g);
                h = g;
                detail::hash_flip(res.trajectory_hash, g);
                stall = 0;
            } else {
                ++stall;
            }
        }
    }
    res.fitness = ev.fitness();
    res.optimum = ev.solution();
    return res;
}

/// First-improvement local search that learns the empirical VIGw `graph`
/// as a side effect.
template <Problem P>
LocalSearchResult lswll2(const P& p, BitString x, EmpiricalVigw& graph, Rng& rng, const LswllOptions& opt = {}) {
    const std::size_t n = p.dimension();
    if (graph.n_vertices() != n) {
        throw std::invalid_argument("lswll2: graph size does not match problem dimension");
    }
    auto ev = make_evaluator(p, std::move(x));
    LocalSearchResult res;
    res.evaluations = 1;
    if (n == 0) {
        res.optimum = ev.solution();
        res.fitness = ev.fitness();
        return res;
    }

    const auto order = rng.permutation(n);
    std::size_t k = 0;
    std::size_t j = 0; // 0-based cursor into queue
    bool revisit_phase = false;
    std::vector<std::size_t> queue;
    std::vector<double> stored;
    std::optional<std::size_t> h;
    std::size_t stall = 0;

    const std::size_t lookahead = opt.revisit_inclusive ? 0 : 1;
    while (true) {
        const bool revisit = j + lookahead < queue.size();
        if (stall >= n && !revisit) {
            break;
        }
        std::size_t g = 0;
        double d = 0.0;
        std::optional<double> observation;
        if (revisit) {
            g = queue[j];
            d = ev.delta(g);
            const double obs = std::abs(d - stored[j]);
            if (obs > kEpsilon && opt.learn) {
                graph.record(g, *h, obs);
                observation = obs;
            }
        } else {
            g = order[k];
            k = (k + 1) % n;
            d = ev.delta(g);
        }
        ++res.evaluations;

        const bool accept = d > kEpsilon;
        if (opt.trace) {
            opt.trace({res.iterations, revisit ? Branch::revisit : Branch::fresh, g, d, accept, h,
                       revisit ? std::optional<double>(stored[j]) : std::nullopt, observation, &ev.solution()});
        }
        ++res.iterations;

        if (accept) {
            ev.flip(g);
            detail::hash_flip(res.trajectory_hash, g);
            h = g;
            if (revisit || revisit_phase) {
                queue.clear();
                stored.clear();
            }
            revisit_phase = !revisit_phase;
            j = 0;
            stall = 0;
        } else {
            if (!revisit) {
                queue.push_back(g);
                stored.push_back(d);
                ++stall;
            }
            ++j;
        }
    }
    res.fitness = ev.fitness();
    res.optimum = ev.solution();
    return res;
}

/// True when no single flip improves f(x) by more than kEpsilon.
template <Problem P>
bool is_local_optimum(const P& p, const BitString& x) {
    const double fx = p.evaluate(x);
    for (std::size_t g = 0; g < x.size(); ++g) {
        if (p.evaluate(flip(x, g)) - fx > kEpsilon) {
            return false;
        }
    }
    return true;
}

} // namespace vigls
