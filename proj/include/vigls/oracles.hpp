/// @file oracles.hpp
/// @brief Ground truth by enumeration: Walsh spectrum, true VIG/VIGw,
/// exhaustive optimum and the knapsack dynamic program.
///
/// Enumeration index convention: bit b of the integer index is x_b
/// (0-based), for both solutions and Walsh masks.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "format.hpp"
#include "knapsack.hpp"
#include "vigw.hpp"

namespace vigls {

/// Instance is too large for an enumeration-based oracle.
class CapabilityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kWalshMaxN = 20;
inline constexpr std::size_t kTrueVigwMaxN = 16;
inline constexpr std::size_t kExhaustiveMaxN = 24;
inline constexpr double kWalshZero = 1e-9;

namespace detail {
inline void require_cap(std::size_t n, std::size_t cap, const char* what) {
    if (n > cap) {
        throw CapabilityError(std::string(what) + ": N = " + std::to_string(n) + " exceeds the enumeration cap of " +
                              std::to_string(cap));
    }
}

/// f over all 2^N inputs, index bit b = x_b.
template <Problem P>
std::vector<double> enumerate_values(const P& p) {
    const std::size_t n = p.dimension();
    const std::size_t total = std::size_t{1} << n;
    std::vector<double> f(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        f[idx] = p.evaluate(BitString::from_u64(idx, n));
    }
    return f;
}

/// Unnormalized in-place Walsh-Hadamard butterfly.
inline void fwht(std::vector<double>& a) {
    for (std::size_t len = 1; len < a.size(); len <<= 1) {
        for (std::size_t i = 0; i < a.size(); i += len << 1) {
            for (std::size_t j = i; j < i + len; ++j) {
                const double u = a[j];
                const double v = a[j + len];
                a[j] = u + v;
                a[j + len] = u - v;
            }
        }
    }
}
} // namespace detail

/// f(x) = sum_i w_i (-1)^{popcount(i & x)}.
struct WalshSpectrum {
    std::size_t n = 0;
    std::vector<double> coefficients;

    /// f at every input, by the inverse transform.
    std::vector<double> reconstruct() const {
        auto a = coefficients;
        detail::fwht(a);
        return a;
    }

    double reconstruct(std::uint64_t x) const {
        double s = 0.0;
        for (std::size_t i = 0; i < coefficients.size(); ++i) {
            s += (std::popcount(static_cast<std::uint64_t>(i) & x) & 1U) ? -coefficients[i] : coefficients[i];
        }
        return s;
    }
};

template <Problem P>
WalshSpectrum walsh_transform(const P& p) {
    const std::size_t n = p.dimension();
    detail::require_cap(n, kWalshMaxN, "walsh_transform");
    WalshSpectrum s{n, detail::enumerate_values(p)};
    detail::fwht(s.coefficients);
    const double scale = 1.0 / static_cast<double>(s.coefficients.size());
    for (auto& w : s.coefficients) {
        w *= scale;
    }
    return s;
}

/// (g, h) is an edge iff some coefficient with |w_i| > 1e-9 has both bits set.
inline EdgeSet true_vig(const WalshSpectrum& s) {
    std::vector<std::vector<bool>> adj(s.n, std::vector<bool>(s.n, false));
    std::vector<std::size_t> bits;
    for (std::size_t i = 0; i < s.coefficients.size(); ++i) {
        if (std::popcount(static_cast<std::uint64_t>(i)) < 2 || !(std::abs(s.coefficients[i]) > kWalshZero)) {
            continue;
        }
        bits.clear();
        for (std::size_t b = 0; b < s.n; ++b) {
            if ((i >> b) & 1U) {
                bits.push_back(b);
            }
        }
        for (std::size_t a = 0; a < bits.size(); ++a) {
            for (std::size_t c = a + 1; c < bits.size(); ++c) {
                adj[bits[a]][bits[c]] = true;
            }
        }
    }
    EdgeSet out;
    for (std::size_t g = 0; g < s.n; ++g) {
        for (std::size_t h = g + 1; h < s.n; ++h) {
            if (adj[g][h]) {
                out.emplace_back(g, h);
            }
        }
    }
    return out;
}

/// Exact interaction strengths: mean of omega_{g,h}(x) over all of B^N.
struct TrueVigw {
    std::size_t n = 0;
    /// Dense symmetric N x N matrix, zero diagonal.
    std::vector<double> strength;

    double operator()(std::size_t g, std::size_t h) const { return strength[g * n + h]; }

    EdgeSet edges() const {
        EdgeSet out;
        for (std::size_t g = 0; g < n; ++g) {
            for (std::size_t h = g + 1; h < n; ++h) {
                if ((*this)(g, h) > 0.0) {
                    out.emplace_back(g, h);
                }
            }
        }
        return out;
    }
};

/// Per-state omega values at or below kEpsilon are counted as zero, the same
/// rule the search applies, so non-interacting pairs get strength exactly 0.
template <Problem P>
TrueVigw true_vigw(const P& p) {
    const std::size_t n = p.dimension();
    detail::require_cap(n, kTrueVigwMaxN, "true_vigw");
    const auto f = detail::enumerate_values(p);
    TrueVigw t{n, std::vector<double>(n * n, 0.0)};
    for (std::size_t g = 0; g < n; ++g) {
        for (std::size_t h = g + 1; h < n; ++h) {
            const std::size_t mg = std::size_t{1} << g;
            const std::size_t mh = std::size_t{1} << h;
            double sum = 0.0;
            for (std::size_t x = 0; x < f.size(); ++x) {
                const double omega = std::abs((f[x ^ mg ^ mh] + f[x]) - (f[x ^ mg] + f[x ^ mh]));
                if (omega > kEpsilon) {
                    sum += omega;
                }
            }
            const double v = sum / static_cast<double>(f.size());
            t.strength[g * n + h] = v;
            t.strength[h * n + g] = v;
        }
    }
    return t;
}

/// Global maximum by enumeration in lexicographic order of the string
/// x_1 x_2 ... x_N; the first (smallest) maximizer wins ties.
template <Problem P>
std::pair<BitString, double> exhaustive_optimum(const P& p) {
    const std::size_t n = p.dimension();
    detail::require_cap(n, kExhaustiveMaxN, "exhaustive_optimum");
    BitString x(n);
    BitString best = x;
    double best_f = p.evaluate(x);
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t lex = 1; lex < total; ++lex) {
        // lex's most significant bit is x_1
        for (std::size_t i = 0; i < n; ++i) {
            x.set(i, ((lex >> (n - 1 - i)) & 1U) != 0);
        }
        const double v = p.evaluate(x);
        if (v > best_f) {
            best_f = v;
            best = x;
        }
    }
    return {best, best_f};
}

/// Maximum feasible profit, O(N C) capacity-indexed table.
inline std::int64_t knapsack_dp(const KnapsackInstance& inst) {
    const auto cap = static_cast<std::size_t>(inst.capacity());
    std::vector<std::int64_t> best(cap + 1, 0);
    for (std::size_t i = 0; i < inst.dimension(); ++i) {
        const auto w = static_cast<std::size_t>(inst.weights()[i]);
        const auto p = inst.profits()[i];
        if (w > cap) {
            continue;
        }
        for (std::size_t c = cap; c >= w; --c) {
            best[c] = std::max(best[c], best[c - w] + p);
            if (c == w) {
                break;
            }
        }
    }
    return best[cap];
}

inline constexpr int kTrueVigFormatVersion = 1;

/// `*.truevig.json`; readable by edge_set_from_json().
inline nlohmann::ordered_json truevig_to_json(std::size_t n, const EdgeSet& edges, const TrueVigw* strengths = nullptr) {
    nlohmann::ordered_json j;
    j["format"] = "vigls.truevig";
    j["version"] = kTrueVigFormatVersion;
    j["tool_version"] = kToolVersion;
    j["n_vertices"] = n;
    auto je = nlohmann::ordered_json::array();
    for (const auto& [u, v] : edges) {
        nlohmann::ordered_json e;
        e["u"] = u + 1;
        e["v"] = v + 1;
        if (strengths != nullptr) {
            e["strength"] = (*strengths)(u, v);
        }
        je.push_back(std::move(e));
    }
    j["edges"] = std::move(je);
    return j;
}

} // namespace vigls
