/// @file nk.hpp
/// @brief NK landscapes (adjacent and random models) with incremental
/// single-flip evaluation and JSON serialization.
///
/// f(x) = (1/N) * sum_i f_i(z_i), where z_i is x restricted to masks[i].
/// The N-normalization keeps fitness values in [0, 1) for every N.
///
/// Table indexing: bit b of the lookup index is x[masks[i][b]], so
/// masks[i][0] (always i itself) is the least significant bit.

#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "rng.hpp"

namespace vigls {

enum class NkModel { adjacent, random };

inline std::string_view to_string(NkModel m) { return m == NkModel::adjacent ? "adjacent" : "random"; }

inline NkModel parse_nk_model(std::string_view s) {
    if (s == "adjacent") {
        return NkModel::adjacent;
    }
    if (s == "random") {
        return NkModel::random;
    }
    throw std::invalid_argument("unknown NK model '" + std::string(s) + "'");
}

class NkEvaluator;

class NkInstance {
  public:
    static constexpr int kFormatVersion = 1;
    static constexpr std::size_t kMaxInputs = 20;

    NkInstance(std::size_t n, std::size_t k, NkModel model, std::vector<std::vector<std::size_t>> masks,
               std::vector<std::vector<double>> tables, std::uint64_t seed = 0)
        : n_(n), k_(k), model_(model), seed_(seed), masks_(std::move(masks)), tables_(std::move(tables)) {
        validate();
        occurrences_.assign(n_, {});
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t b = 0; b < k_; ++b) {
                occurrences_[masks_[i][b]].push_back({i, b});
            }
        }
    }

    std::size_t dimension() const { return n_; }
    std::size_t n() const { return n_; }
    std::size_t k() const { return k_; }
    NkModel model() const { return model_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<std::vector<std::size_t>>& masks() const { return masks_; }
    const std::vector<std::vector<double>>& tables() const { return tables_; }

    std::size_t pattern(std::size_t i, const BitString& x) const {
        std::size_t idx = 0;
        const auto& m = masks_[i];
        for (std::size_t b = 0; b < k_; ++b) {
            idx |= static_cast<std::size_t>(x[m[b]]) << b;
        }
        return idx;
    }

    /// Contribution f_i(z_i) of subfunction i, before normalization.
    double contribution(std::size_t i, const BitString& x) const { return tables_[i][pattern(i, x)]; }

    double evaluate(const BitString& x) const {
        if (x.size() != n_) {
            throw std::invalid_argument("nk_evaluate: dimension mismatch");
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            sum += contribution(i, x);
        }
        return sum / static_cast<double>(n_);
    }

    NkEvaluator make_evaluator(BitString x) const;

    /// Mask co-occurrence graph: (g, h) with g < h that share some mask.
    std::vector<std::pair<std::size_t, std::size_t>> cooccurrence_edges() const {
        std::vector<std::vector<bool>> adj(n_, std::vector<bool>(n_, false));
        for (const auto& m : masks_) {
            for (std::size_t a = 0; a < m.size(); ++a) {
                for (std::size_t b = a + 1; b < m.size(); ++b) {
                    adj[m[a]][m[b]] = adj[m[b]][m[a]] = true;
                }
            }
        }
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (std::size_t g = 0; g < n_; ++g) {
            for (std::size_t h = g + 1; h < n_; ++h) {
                if (adj[g][h]) {
                    out.emplace_back(g, h);
                }
            }
        }
        return out;
    }

    struct Occurrence {
        std::size_t subfunction;
        std::size_t bit;
    };
    const std::vector<Occurrence>& occurrences(std::size_t g) const { return occurrences_[g]; }

  private:
    void validate() const {
        if (k_ < 2 || k_ > n_ || k_ > kMaxInputs) {
            throw std::invalid_argument("NkInstance: require 2 <= k <= min(n, 20)");
        }
        if (masks_.size() != n_ || tables_.size() != n_) {
            throw std::invalid_argument("NkInstance: expected one mask and one table per variable");
        }
        const std::size_t table_size = std::size_t{1} << k_;
        for (std::size_t i = 0; i < n_; ++i) {
            const auto& m = masks_[i];
            if (m.size() != k_ || m[0] != i) {
                throw std::invalid_argument("NkInstance: mask " + std::to_string(i + 1) +
                                            " must have k entries starting with its own index");
            }
            for (std::size_t a = 0; a < k_; ++a) {
                if (m[a] >= n_) {
                    throw std::invalid_argument("NkInstance: mask index out of range");
                }
                for (std::size_t b = a + 1; b < k_; ++b) {
                    if (m[a] == m[b]) {
                        throw std::invalid_argument("NkInstance: duplicate index in mask " + std::to_string(i + 1));
                    }
                }
            }
            if (tables_[i].size() != table_size) {
                throw std::invalid_argument("NkInstance: table " + std::to_string(i + 1) + " must have 2^k entries");
            }
            for (const double v : tables_[i]) {
                if (!(v >= 0.0 && v < 1.0)) {
                    throw std::invalid_argument("NkInstance: table entries must lie in [0,1)");
                }
            }
        }
    }

    std::size_t n_;
    std::size_t k_;
    NkModel model_;
    std::uint64_t seed_;
    std::vector<std::vector<std::size_t>> masks_;
    std::vector<std::vector<double>> tables_;
    std::vector<std::vector<Occurrence>> occurrences_;
};

/// Tracks the lookup pattern of every subfunction so a delta costs
/// O(occurrences of g) instead of a full evaluation.
class NkEvaluator {
  public:
    NkEvaluator(const NkInstance& inst, BitString x) : inst_(&inst), x_(std::move(x)), patterns_(inst.n()) {
        for (std::size_t i = 0; i < inst.n(); ++i) {
            patterns_[i] = inst.pattern(i, x_);
        }
        fitness_ = inst.evaluate(x_);
    }

    double fitness() const { return fitness_; }
    const BitString& solution() const { return x_; }

    double delta(std::size_t g) const {
        double d = 0.0;
        const auto& tables = inst_->tables();
        for (const auto& [i, b] : inst_->occurrences(g)) {
            const std::size_t p = patterns_[i];
            d += tables[i][p ^ (std::size_t{1} << b)] - tables[i][p];
        }
        return d / static_cast<double>(inst_->n());
    }

    void flip(std::size_t g) {
        fitness_ += delta(g);
        x_.toggle(g);
        for (const auto& [i, b] : inst_->occurrences(g)) {
            patterns_[i] ^= std::size_t{1} << b;
        }
    }

  private:
    const NkInstance* inst_;
    BitString x_;
    std::vector<std::size_t> patterns_;
    double fitness_ = 0.0;
};

inline NkEvaluator NkInstance::make_evaluator(BitString x) const {
    if (x.size() != n_) {
        throw std::invalid_argument("NkInstance: dimension mismatch");
    }
    return NkEvaluator(*this, std::move(x));
}

/// Draws masks and tables. Each variable consumes its mask draws (random
/// model only) followed by its 2^k table draws.
inline NkInstance nk_generate(std::size_t n, std::size_t k, NkModel model, Rng& rng) {
    if (k < 2 || k > n) {
        throw std::invalid_argument("nk_generate: require n >= k >= 2");
    }
    if (k > NkInstance::kMaxInputs) {
        throw std::invalid_argument("nk_generate: k too large");
    }
    std::vector<std::vector<std::size_t>> masks(n);
    std::vector<std::vector<double>> tables(n);
    const std::size_t table_size = std::size_t{1} << k;
    for (std::size_t i = 0; i < n; ++i) {
        auto& m = masks[i];
        m.push_back(i);
        if (model == NkModel::adjacent) {
            for (std::size_t b = 1; b < k; ++b) {
                m.push_back((i + b) % n);
            }
        } else {
            auto extra = rng.sample(n - 1, k - 1);
            for (auto& e : extra) {
                if (e >= i) {
                    ++e;
                }
            }
            std::sort(extra.begin(), extra.end());
            m.insert(m.end(), extra.begin(), extra.end());
        }
        tables[i].resize(table_size);
        for (auto& v : tables[i]) {
            v = rng.uniform01();
        }
    }
    return NkInstance(n, k, model, std::move(masks), std::move(tables), rng.seed());
}

inline NkInstance nk_generate(std::size_t n, std::size_t k, NkModel model, std::uint64_t seed) {
    Rng rng(seed);
    return nk_generate(n, k, model, rng);
}

inline nlohmann::ordered_json to_json(const NkInstance& inst) {
    nlohmann::ordered_json j;
    j["format"] = "vigls.nk";
    j["version"] = NkInstance::kFormatVersion;
    j["rng"] = Rng::algorithm;
    j["seed"] = inst.seed();
    j["n"] = inst.n();
    j["k"] = inst.k();
    j["model"] = to_string(inst.model());
    auto masks = nlohmann::ordered_json::array();
    for (const auto& m : inst.masks()) {
        auto row = nlohmann::ordered_json::array();
        for (const auto v : m) {
            row.push_back(v + 1);
        }
        masks.push_back(std::move(row));
    }
    j["masks"] = std::move(masks);
    j["tables"] = inst.tables();
    return j;
}

inline NkInstance nk_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "vigls.nk") {
        throw std::runtime_error("not an NK instance document");
    }
    if (j.at("version").get<int>() != NkInstance::kFormatVersion) {
        throw std::runtime_error("unsupported NK format version");
    }
    const auto n = j.at("n").get<std::size_t>();
    const auto k = j.at("k").get<std::size_t>();
    auto masks = j.at("masks").get<std::vector<std::vector<std::size_t>>>();
    for (auto& m : masks) {
        for (auto& v : m) {
            if (v == 0) {
                throw std::runtime_error("NK masks are 1-based");
            }
            --v;
        }
    }
    return NkInstance(n, k, parse_nk_model(j.at("model").get<std::string>()), std::move(masks),
                      j.at("tables").get<std::vector<std::vector<double>>>(), j.value("seed", std::uint64_t{0}));
}

} // namespace vigls
