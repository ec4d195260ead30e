/// @file perturbation.hpp
/// @brief ILS perturbation operators: fixed-strength random (SRP), adaptive
/// strength (ADP) and the graph-guided VIGwbP.

#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "rng.hpp"
#include "vigw.hpp"

namespace vigls {

struct PerturbationOutcome {
    BitString perturbed;
    /// Flipped variables in application order (0-based).
    std::vector<std::size_t> flipped;
    std::size_t hdp = 0;
};

/// Flips a uniformly drawn subset of exactly `alpha` distinct positions.
inline PerturbationOutcome srp(const BitString& x, std::size_t alpha, Rng& rng) {
    if (alpha < 1 || alpha > x.size()) {
        throw std::invalid_argument("srp: alpha must lie in [1, N]");
    }
    PerturbationOutcome out{x, rng.sample(x.size(), alpha), alpha};
    for (const auto g : out.flipped) {
        out.perturbed.toggle(g);
    }
    return out;
}

/// Strength used by "SRP, alpha = 50": min(50, floor(N/2)).
constexpr std::size_t srp50_strength(std::size_t n) { return std::min<std::size_t>(50, n / 2); }

/// Per-iteration observations fed to the adaptive strength rule.
struct AdpObservation {
    /// The new local optimum equals the one that was perturbed.
    bool same_basin = false;
    std::size_t hdp = 0;
    std::size_t hdlo = 0;
    /// The new local optimum is strictly better than the current one.
    bool improved = false;
};

struct AdpState {
    static constexpr std::size_t kWindow = 5;

    std::size_t alpha = 2;
    std::size_t min_alpha = 2;
    std::size_t max_alpha = 2;
    std::size_t iterations = 0;
    double mean_hdlo = 0.0;

    explicit AdpState(std::size_t n)
        : alpha(std::min<std::size_t>(2, n)), min_alpha(alpha), max_alpha(std::clamp<std::size_t>(n / 2, alpha, n)) {}
};

/// Every fifth call: grow alpha when the last perturbation stayed in the
/// same basin or jumped less than the mean local-optimum distance; otherwise
/// shrink it, unless the last iteration improved. Step size is one.
inline void adp_update(AdpState& s, const AdpObservation& obs) {
    ++s.iterations;
    s.mean_hdlo += (static_cast<double>(obs.hdlo) - s.mean_hdlo) / static_cast<double>(s.iterations);
    if (s.iterations % AdpState::kWindow != 0) {
        return;
    }
    if (obs.same_basin || static_cast<double>(obs.hdp) < s.mean_hdlo) {
        ++s.alpha;
    } else if (!obs.improved && s.alpha > 0) {
        --s.alpha;
    }
    s.alpha = std::clamp(s.alpha, s.min_alpha, s.max_alpha);
}

/// Which weights form the sample for the box-plot threshold around v_i.
enum class ThresholdSample {
    /// Weights from v_i to every other vertex, 0 for non-neighbors.
    all_vertices,
    /// Only the weights of edges incident to v_i.
    neighbors,
};

struct VigwbpOptions {
    ThresholdSample sample = ThresholdSample::all_vertices;
};

/// Flips a random x_i, its strongest neighbor in `graph`, and every other
/// neighbor whose weight exceeds the upper box-plot fence. An isolated v_i
/// gets one extra random flip instead, so at least two bits always change.
inline PerturbationOutcome vigwbp(const BitString& x, const EmpiricalVigw& graph, Rng& rng,
                                  const VigwbpOptions& opt = {}) {
    const std::size_t n = x.size();
    if (graph.n_vertices() != n) {
        throw std::invalid_argument("vigwbp: graph size does not match solution length");
    }
    if (n < 2) {
        throw std::invalid_argument("vigwbp: need at least two variables");
    }
    PerturbationOutcome out{x, {}, 0};
    const std::size_t i = rng.uniform_index(n);
    out.flipped.push_back(i);

    const auto nbrs = graph.neighbors_sorted(i);
    if (nbrs.empty()) {
        std::size_t j = rng.uniform_index(n - 1);
        if (j >= i) {
            ++j;
        }
        out.flipped.push_back(j);
    } else {
        std::vector<double> sample;
        if (opt.sample == ThresholdSample::all_vertices) {
            sample.assign(n - 1 - nbrs.size(), 0.0);
        }
        for (const auto& nb : nbrs) {
            sample.push_back(nb.second);
        }
        const double beta = threshold_computation(sample);
        out.flipped.push_back(nbrs.back().first);
        for (std::size_t c = nbrs.size() - 1; c-- > 0;) {
            if (!(nbrs[c].second > beta)) {
                break;
            }
            out.flipped.push_back(nbrs[c].first);
        }
    }
    for (const auto g : out.flipped) {
        out.perturbed.toggle(g);
    }
    out.hdp = out.flipped.size();
    return out;
}

} // namespace vigls
