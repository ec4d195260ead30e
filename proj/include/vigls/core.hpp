/// @file core.hpp
/// @brief Bit strings, the problem/evaluator contract and the single-flip
/// difference primitives every search component builds on.
///
/// Variable indices are 0-based inside the library. Everything written to
/// files or printed for users is 1-based.

#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vigls {

/// Tolerance for every "strictly positive" fitness-difference test.
inline constexpr double kEpsilon = 1e-10;

/// Fixed-length binary string.
class BitString {
  public:
    BitString() = default;
    explicit BitString(std::size_t n) : bits_(n, 0) {}

    /// Parses a string of '0'/'1' characters, leftmost character is variable 1.
    static BitString from_string(std::string_view s) {
        BitString out(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] != '0' && s[i] != '1') {
                throw std::invalid_argument("BitString: invalid character '" + std::string(1, s[i]) + "'");
            }
            out.bits_[i] = static_cast<std::uint8_t>(s[i] - '0');
        }
        return out;
    }

    std::size_t size() const noexcept { return bits_.size(); }
    bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }

    bool at(std::size_t i) const {
        check(i);
        return bits_[i] != 0;
    }

    void set(std::size_t i, bool v) {
        check(i);
        bits_[i] = v ? 1 : 0;
    }

    void toggle(std::size_t i) {
        check(i);
        bits_[i] ^= 1;
    }

    std::size_t count() const noexcept {
        return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
    }

    std::string to_string() const {
        std::string s(bits_.size(), '0');
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            if (bits_[i] != 0) {
                s[i] = '1';
            }
        }
        return s;
    }

    /// Bits 0..63 packed little-endian; only meaningful for size() <= 64.
    std::uint64_t to_u64() const noexcept {
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < bits_.size() && i < 64; ++i) {
            v |= static_cast<std::uint64_t>(bits_[i]) << i;
        }
        return v;
    }

    static BitString from_u64(std::uint64_t v, std::size_t n) {
        BitString out(n);
        for (std::size_t i = 0; i < n && i < 64; ++i) {
            out.bits_[i] = static_cast<std::uint8_t>((v >> i) & 1U);
        }
        return out;
    }

    std::size_t hash() const noexcept {
        std::uint64_t h = 1469598103934665603ULL;
        for (const auto b : bits_) {
            h = (h ^ b) * 1099511628211ULL;
        }
        return static_cast<std::size_t>(h ^ bits_.size());
    }

    friend bool operator==(const BitString&, const BitString&) = default;

  private:
    void check(std::size_t i) const {
        if (i >= bits_.size()) {
            throw std::out_of_range("BitString: index " + std::to_string(i) + " out of range for length " +
                                    std::to_string(bits_.size()));
        }
    }

    std::vector<std::uint8_t> bits_;
};

struct BitStringHash {
    std::size_t operator()(const BitString& x) const noexcept { return x.hash(); }
};

/// Copy of `x` with bit `g` toggled.
inline BitString flip(BitString x, std::size_t g) {
    x.toggle(g);
    return x;
}

inline std::size_t hamming(const BitString& x, const BitString& y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("hamming: length mismatch");
    }
    std::size_t d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        d += static_cast<std::size_t>(x[i] != y[i]);
    }
    return d;
}

/// A maximization problem over B^N.
template <typename P>
concept Problem = requires(const P& p, const BitString& x) {
    { p.dimension() } -> std::convertible_to<std::size_t>;
    { p.evaluate(x) } -> std::convertible_to<double>;
};

/// Stateful view of one solution that answers single-flip questions.
template <typename E>
concept Evaluator = requires(E& e, const E& ce, std::size_t g) {
    { ce.fitness() } -> std::convertible_to<double>;
    { ce.delta(g) } -> std::convertible_to<double>;
    { ce.solution() } -> std::convertible_to<const BitString&>;
    e.flip(g);
};

/// Problems that ship their own incremental evaluator.
template <typename P>
concept IncrementalProblem = Problem<P> && requires(const P& p, BitString x) {
    { p.make_evaluator(std::move(x)) } -> Evaluator;
};

/// Two-evaluation delta: f(x xor 1_g) - f(x), with f(x) cached.
template <Problem P>
class FullEvaluator {
  public:
    FullEvaluator(const P& problem, BitString x)
        : problem_(&problem), x_(std::move(x)), fitness_(problem.evaluate(x_)) {}

    double fitness() const { return fitness_; }
    const BitString& solution() const { return x_; }

    double delta(std::size_t g) const {
        x_.toggle(g);
        const double flipped = problem_->evaluate(x_);
        x_.toggle(g);
        return flipped - fitness_;
    }

    void flip(std::size_t g) {
        x_.toggle(g);
        fitness_ = problem_->evaluate(x_);
    }

  private:
    const P* problem_;
    mutable BitString x_;
    double fitness_;
};

template <Problem P>
auto make_evaluator(const P& p, BitString x) {
    if (x.size() != p.dimension()) {
        throw std::invalid_argument("make_evaluator: dimension mismatch");
    }
    if constexpr (IncrementalProblem<P>) {
        return p.make_evaluator(std::move(x));
    } else {
        return FullEvaluator<P>(p, std::move(x));
    }
}

/// delta_g(x) computed from two full evaluations.
template <Problem P>
double delta(const P& p, const BitString& x, std::size_t g) {
    const BitString y = flip(x, g);
    return p.evaluate(y) - p.evaluate(x);
}

/// |f(x^h^g) - f(x^h) - f(x^g) + f(x)|, exactly symmetric in (g, h).
template <Problem P>
double second_difference(const P& p, const BitString& x, std::size_t g, std::size_t h) {
    if (g == h) {
        throw std::invalid_argument("second_difference: g == h");
    }
    const double f11 = p.evaluate(flip(flip(x, g), h));
    const double f10 = p.evaluate(flip(x, g));
    const double f01 = p.evaluate(flip(x, h));
    const double f00 = p.evaluate(x);
    return std::abs((f11 + f00) - (f10 + f01));
}

/// Arbitrary function wrapped as a problem; used for tests and toy landscapes.
class FunctionProblem {
  public:
    using Fn = std::function<double(const BitString&)>;

    FunctionProblem(std::size_t n, Fn fn) : n_(n), fn_(std::move(fn)) {}

    std::size_t dimension() const { return n_; }
    double evaluate(const BitString& x) const {
        if (x.size() != n_) {
            throw std::invalid_argument("FunctionProblem: dimension mismatch");
        }
        return fn_(x);
    }

  private:
    std::size_t n_;
    Fn fn_;
};

/// sum(x) / N.
inline FunctionProblem onemax(std::size_t n) {
    return FunctionProblem(n, [n](const BitString& x) {
        return static_cast<double>(x.count()) / static_cast<double>(n);
    });
}

enum class ProblemKind { nk, knapsack, feature_selection, custom_test };

inline std::string_view to_string(ProblemKind k) {
    switch (k) {
    case ProblemKind::nk: return "nk";
    case ProblemKind::knapsack: return "knapsack";
    case ProblemKind::feature_selection: return "feature-selection";
    case ProblemKind::custom_test: return "custom-test";
    }
    return "unknown";
}

/// Type-erased evaluator handed out by AnyProblem.
class AnyEvaluator {
  public:
    template <Evaluator E>
    explicit AnyEvaluator(E e) : self_(std::make_unique<Model<E>>(std::move(e))) {}

    double fitness() const { return self_->fitness(); }
    double delta(std::size_t g) const { return self_->delta(g); }
    void flip(std::size_t g) { self_->flip(g); }
    const BitString& solution() const { return self_->solution(); }

  private:
    struct Concept {
        virtual ~Concept() = default;
        virtual double fitness() const = 0;
        virtual double delta(std::size_t g) const = 0;
        virtual void flip(std::size_t g) = 0;
        virtual const BitString& solution() const = 0;
    };
    template <typename E>
    struct Model final : Concept {
        explicit Model(E e) : inner(std::move(e)) {}
        double fitness() const override { return inner.fitness(); }
        double delta(std::size_t g) const override { return inner.delta(g); }
        void flip(std::size_t g) override { inner.flip(g); }
        const BitString& solution() const override { return inner.solution(); }
        E inner;
    };
    std::unique_ptr<Concept> self_;
};

/// Runtime problem handle for config-driven experiments. Cheap to copy; the
/// wrapped instance is shared read-only.
class AnyProblem {
  public:
    template <Problem P>
    AnyProblem(ProblemKind kind, std::shared_ptr<const P> p)
        : kind_(kind), self_(std::make_shared<Model<P>>(std::move(p))) {}

    ProblemKind kind() const { return kind_; }
    std::size_t dimension() const { return self_->dimension(); }
    double evaluate(const BitString& x) const { return self_->evaluate(x); }
    AnyEvaluator make_evaluator(BitString x) const { return self_->make_evaluator(std::move(x)); }

  private:
    struct Concept {
        virtual ~Concept() = default;
        virtual std::size_t dimension() const = 0;
        virtual double evaluate(const BitString& x) const = 0;
        virtual AnyEvaluator make_evaluator(BitString x) const = 0;
    };
    template <typename P>
    struct Model final : Concept {
        explicit Model(std::shared_ptr<const P> p) : inner(std::move(p)) {}
        std::size_t dimension() const override { return inner->dimension(); }
        double evaluate(const BitString& x) const override { return inner->evaluate(x); }
        AnyEvaluator make_evaluator(BitString x) const override {
            return AnyEvaluator(vigls::make_evaluator(*inner, std::move(x)));
        }
        std::shared_ptr<const P> inner;
    };

    ProblemKind kind_;
    std::shared_ptr<const Concept> self_;
};

} // namespace vigls
