/// @file knapsack.hpp
/// @brief Penalized 0-1 knapsack.
///
/// f(x) = sum p_i x_i - r(x), r(x) = max(0, sum w_i x_i - C) * max_i(p_i / w_i).

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "rng.hpp"

namespace vigls {

class KnapsackEvaluator;

class KnapsackInstance {
  public:
    static constexpr int kFormatVersion = 1;
    static constexpr std::int64_t kMinWeight = 5;
    static constexpr std::int64_t kMaxWeight = 20;
    static constexpr std::int64_t kMinProfit = 40;
    static constexpr std::int64_t kMaxProfit = 100;

    /// Capacity defaults to floor(0.5 * sum of weights).
    KnapsackInstance(std::vector<std::int64_t> weights, std::vector<std::int64_t> profits, std::uint64_t seed = 0)
        : KnapsackInstance(weights, profits, std::accumulate(weights.begin(), weights.end(), std::int64_t{0}) / 2,
                           seed) {}

    KnapsackInstance(std::vector<std::int64_t> weights, std::vector<std::int64_t> profits, std::int64_t capacity,
                     std::uint64_t seed)
        : weights_(std::move(weights)), profits_(std::move(profits)), capacity_(capacity), seed_(seed) {
        if (weights_.size() != profits_.size()) {
            throw std::invalid_argument("KnapsackInstance: weights/profits length mismatch");
        }
        if (capacity_ < 0) {
            throw std::invalid_argument("KnapsackInstance: negative capacity");
        }
        for (std::size_t i = 0; i < weights_.size(); ++i) {
            if (weights_[i] <= 0 || profits_[i] <= 0) {
                throw std::invalid_argument("KnapsackInstance: weights and profits must be positive");
            }
            penalty_rate_ = std::max(penalty_rate_, static_cast<double>(profits_[i]) / static_cast<double>(weights_[i]));
        }
    }

    std::size_t dimension() const { return weights_.size(); }
    const std::vector<std::int64_t>& weights() const { return weights_; }
    const std::vector<std::int64_t>& profits() const { return profits_; }
    std::int64_t capacity() const { return capacity_; }
    double penalty_rate() const { return penalty_rate_; }
    std::uint64_t seed() const { return seed_; }

    double fitness_from_totals(std::int64_t weight, std::int64_t profit) const {
        const double p = static_cast<double>(profit);
        if (weight <= capacity_) {
            return p;
        }
        return p - static_cast<double>(weight - capacity_) * penalty_rate_;
    }

    double evaluate(const BitString& x) const {
        if (x.size() != weights_.size()) {
            throw std::invalid_argument("knapsack_evaluate: dimension mismatch");
        }
        std::int64_t w = 0;
        std::int64_t p = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i]) {
                w += weights_[i];
                p += profits_[i];
            }
        }
        return fitness_from_totals(w, p);
    }

    KnapsackEvaluator make_evaluator(BitString x) const;

  private:
    std::vector<std::int64_t> weights_;
    std::vector<std::int64_t> profits_;
    std::int64_t capacity_;
    double penalty_rate_ = 0.0;
    std::uint64_t seed_;
};

/// Keeps integer weight/profit totals; deltas are exact replays of two
/// full evaluations.
class KnapsackEvaluator {
  public:
    KnapsackEvaluator(const KnapsackInstance& inst, BitString x) : inst_(&inst), x_(std::move(x)) {
        for (std::size_t i = 0; i < x_.size(); ++i) {
            if (x_[i]) {
                weight_ += inst.weights()[i];
                profit_ += inst.profits()[i];
            }
        }
    }

    double fitness() const { return inst_->fitness_from_totals(weight_, profit_); }
    const BitString& solution() const { return x_; }

    double delta(std::size_t g) const {
        const std::int64_t sign = x_[g] ? -1 : 1;
        return inst_->fitness_from_totals(weight_ + sign * inst_->weights()[g],
                                          profit_ + sign * inst_->profits()[g]) -
               fitness();
    }

    void flip(std::size_t g) {
        const std::int64_t sign = x_[g] ? -1 : 1;
        weight_ += sign * inst_->weights()[g];
        profit_ += sign * inst_->profits()[g];
        x_.toggle(g);
    }

  private:
    const KnapsackInstance* inst_;
    BitString x_;
    std::int64_t weight_ = 0;
    std::int64_t profit_ = 0;
};

inline KnapsackEvaluator KnapsackInstance::make_evaluator(BitString x) const {
    if (x.size() != weights_.size()) {
        throw std::invalid_argument("KnapsackInstance: dimension mismatch");
    }
    return KnapsackEvaluator(*this, std::move(x));
}

/// Items are drawn in index order: weight first, then profit.
inline KnapsackInstance knapsack_generate(std::size_t n, Rng& rng) {
    if (n < 1) {
        throw std::invalid_argument("knapsack_generate: n must be >= 1");
    }
    std::vector<std::int64_t> w(n);
    std::vector<std::int64_t> p(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = rng.uniform_int(KnapsackInstance::kMinWeight, KnapsackInstance::kMaxWeight);
        p[i] = rng.uniform_int(KnapsackInstance::kMinProfit, KnapsackInstance::kMaxProfit);
    }
    return KnapsackInstance(std::move(w), std::move(p), rng.seed());
}

inline KnapsackInstance knapsack_generate(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return knapsack_generate(n, rng);
}

inline nlohmann::ordered_json to_json(const KnapsackInstance& inst) {
    nlohmann::ordered_json j;
    j["format"] = "vigls.knapsack";
    j["version"] = KnapsackInstance::kFormatVersion;
    j["rng"] = Rng::algorithm;
    j["seed"] = inst.seed();
    j["n"] = inst.dimension();
    j["capacity"] = inst.capacity();
    j["penalty_rate"] = inst.penalty_rate();
    j["weights"] = inst.weights();
    j["profits"] = inst.profits();
    return j;
}

inline KnapsackInstance knapsack_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "vigls.knapsack") {
        throw std::runtime_error("not a knapsack instance document");
    }
    if (j.at("version").get<int>() != KnapsackInstance::kFormatVersion) {
        throw std::runtime_error("unsupported knapsack format version");
    }
    KnapsackInstance inst(j.at("weights").get<std::vector<std::int64_t>>(),
                          j.at("profits").get<std::vector<std::int64_t>>(), j.at("capacity").get<std::int64_t>(),
                          j.value("seed", std::uint64_t{0}));
    if (inst.dimension() != j.at("n").get<std::size_t>()) {
        throw std::runtime_error("knapsack document: n does not match item count");
    }
    return inst;
}

} // namespace vigls
