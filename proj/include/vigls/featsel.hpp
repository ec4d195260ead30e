/// @file featsel.hpp
/// @brief Wrapper feature selection with a K=3 nearest-neighbour learner.
///
/// f(x) = 0.98 f1(x) + 0.02 (N - |x|) / N, where f1 is test accuracy
/// (classification) or 1 - MSE on [0,1]-scaled targets (regression).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "core.hpp"
#include "format.hpp"
#include "rng.hpp"

namespace vigls {

enum class Task { classification, regression };

inline Task parse_task(std::string_view s) {
    if (s == "classification") {
        return Task::classification;
    }
    if (s == "regression") {
        return Task::regression;
    }
    throw std::invalid_argument("unknown task '" + std::string(s) + "'");
}

inline std::string_view to_string(Task t) { return t == Task::classification ? "classification" : "regression"; }

class IngestionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Dataset {
    Task task = Task::classification;
    std::vector<std::string> feature_names;
    std::string target_name;
    /// n_examples x n_features.
    std::vector<std::vector<double>> rows;
    /// Class index (classification) or target scaled to [0,1] (regression).
    std::vector<double> targets;
    /// Classification: label text per class index, first-appearance order.
    std::vector<std::string> class_labels;
    /// Regression: range of the raw targets before scaling.
    double target_min = 0.0;
    double target_max = 0.0;

    std::size_t n_features() const { return feature_names.size(); }
    std::size_t n_examples() const { return rows.size(); }
    std::size_t n_classes() const { return class_labels.size(); }
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(std::move(cur));
    for (auto& s : cells) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }
    return cells;
}

inline std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) {
        return std::nullopt;
    }
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (pos != s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

} // namespace detail

/// Reads a header-first CSV. `target_column` is 0-based; defaults to the last
/// column. Classification labels may be arbitrary text.
inline Dataset parse_dataset(std::istream& in, Task task, std::optional<std::size_t> target_column = std::nullopt) {
    std::string line;
    if (!std::getline(in, line)) {
        throw IngestionError("dataset is empty (no header row)");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const auto header = detail::split_csv_line(line);
    if (header.size() < 2) {
        throw IngestionError("dataset header needs at least one feature and one target column");
    }
    const std::size_t target = target_column.value_or(header.size() - 1);
    if (target >= header.size()) {
        throw IngestionError("unknown target column " + std::to_string(target + 1) + " (header has " +
                             std::to_string(header.size()) + " columns)");
    }
    Dataset d;
    d.task = task;
    d.target_name = header[target];
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != target) {
            d.feature_names.push_back(header[c]);
        }
    }
    std::map<std::string, std::size_t> label_index;
    std::vector<double> raw_targets;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size()) {
            throw IngestionError("row " + std::to_string(row_no) + ": expected " + std::to_string(header.size()) +
                                 " cells, found " + std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(header.size() - 1);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == target) {
                continue;
            }
            const auto v = detail::parse_number(cells[c]);
            if (!v) {
                throw IngestionError("row " + std::to_string(row_no) + ", column " + std::to_string(c + 1) + " ('" +
                                     header[c] + "'): non-numeric or missing value '" + cells[c] + "'");
            }
            row.push_back(*v);
        }
        if (task == Task::classification) {
            const auto [it, inserted] = label_index.try_emplace(cells[target], d.class_labels.size());
            if (inserted) {
                d.class_labels.push_back(cells[target]);
            }
            d.targets.push_back(static_cast<double>(it->second));
        } else {
            const auto v = detail::parse_number(cells[target]);
            if (!v) {
                throw IngestionError("row " + std::to_string(row_no) + ", column " + std::to_string(target + 1) +
                                     " ('" + header[target] + "'): non-numeric target '" + cells[target] + "'");
            }
            raw_targets.push_back(*v);
        }
        d.rows.push_back(std::move(row));
    }
    if (d.rows.empty()) {
        throw IngestionError("dataset has a header but no data rows");
    }
    if (task == Task::regression) {
        const auto [lo, hi] = std::minmax_element(raw_targets.begin(), raw_targets.end());
        d.target_min = *lo;
        d.target_max = *hi;
        const double range = d.target_max - d.target_min;
        d.targets.reserve(raw_targets.size());
        for (const double t : raw_targets) {
            d.targets.push_back(range > 0.0 ? (t - d.target_min) / range : 0.0);
        }
    }
    return d;
}

inline Dataset load_dataset(const std::string& path, Task task, std::optional<std::size_t> target_column = std::nullopt) {
    std::ifstream in(path);
    if (!in) {
        throw IngestionError("cannot open dataset '" + path + "'");
    }
    try {
        return parse_dataset(in, task, target_column);
    } catch (const IngestionError& e) {
        throw IngestionError(path + ": " + e.what());
    }
}

/// Train/test partition with features z-scored by training statistics.
struct FsInstance {
    static constexpr std::size_t kNeighbors = 3;

    Task task = Task::classification;
    std::size_t n_features = 0;
    std::size_t n_classes = 0;
    std::uint64_t split_seed = 0;
    /// Original row index of each training / test example.
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    /// Row-major standardized features.
    std::vector<double> train_x;
    std::vector<double> test_x;
    std::vector<double> train_y;
    std::vector<double> test_y;
    std::vector<double> mean;
    /// Population std; 0 marks a constant feature (contributes no distance).
    std::vector<double> stdev;

    std::size_t n_train() const { return train_y.size(); }
    std::size_t n_test() const { return test_y.size(); }

    std::vector<double> standardize(const std::vector<double>& raw) const {
        if (raw.size() != n_features) {
            throw std::invalid_argument("standardize: feature count mismatch");
        }
        std::vector<double> z(n_features, 0.0);
        for (std::size_t f = 0; f < n_features; ++f) {
            z[f] = stdev[f] > 0.0 ? (raw[f] - mean[f]) / stdev[f] : 0.0;
        }
        return z;
    }
};

/// Shuffles rows with `seed`, then puts the first floor(0.7 n) in training.
inline FsInstance make_split(const Dataset& d, std::uint64_t seed) {
    const std::size_t n = d.n_examples();
    if (n < 10) {
        throw std::invalid_argument("make_split: need at least 10 examples");
    }
    Rng rng(seed);
    const auto order = rng.permutation(n);
    const std::size_t n_train = n * 7 / 10;

    FsInstance inst;
    inst.task = d.task;
    inst.n_features = d.n_features();
    inst.n_classes = d.n_classes();
    inst.split_seed = seed;
    inst.train_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    inst.test_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

    const std::size_t nf = inst.n_features;
    inst.mean.assign(nf, 0.0);
    inst.stdev.assign(nf, 0.0);
    for (const auto r : inst.train_rows) {
        for (std::size_t f = 0; f < nf; ++f) {
            inst.mean[f] += d.rows[r][f];
        }
    }
    for (auto& m : inst.mean) {
        m /= static_cast<double>(n_train);
    }
    for (const auto r : inst.train_rows) {
        for (std::size_t f = 0; f < nf; ++f) {
            const double dv = d.rows[r][f] - inst.mean[f];
            inst.stdev[f] += dv * dv;
        }
    }
    for (auto& s : inst.stdev) {
        s = std::sqrt(s / static_cast<double>(n_train));
        if (!(s > 1e-12)) {
            s = 0.0;
        }
    }
    const auto fill = [&](const std::vector<std::size_t>& rows, std::vector<double>& xs, std::vector<double>& ys) {
        for (const auto r : rows) {
            const auto z = inst.standardize(d.rows[r]);
            xs.insert(xs.end(), z.begin(), z.end());
            ys.push_back(d.targets[r]);
        }
    };
    fill(inst.train_rows, inst.train_x, inst.train_y);
    fill(inst.test_rows, inst.test_x, inst.test_y);
    return inst;
}

namespace detail {

inline double majority_class(const std::vector<double>& labels, std::size_t n_classes) {
    std::vector<std::size_t> votes(std::max<std::size_t>(n_classes, 1), 0);
    for (const double y : labels) {
        ++votes[static_cast<std::size_t>(y)];
    }
    return static_cast<double>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (const double y : v) {
        s += y;
    }
    return s / static_cast<double>(v.size());
}

} // namespace detail

/// Prediction for an already standardized query. Ties: nearer rows first,
/// then lower training index; class votes tie toward the lower class.
inline double knn_predict_standardized(const FsInstance& inst, const BitString& mask, const double* query) {
    if (mask.size() != inst.n_features) {
        throw std::invalid_argument("knn_predict: mask length does not match feature count");
    }
    if (inst.n_train() == 0) {
        throw std::invalid_argument("knn_predict: empty training set");
    }
    if (mask.count() == 0) {
        return inst.task == Task::classification ? detail::majority_class(inst.train_y, inst.n_classes)
                                                 : detail::mean_of(inst.train_y);
    }
    std::vector<std::size_t> features;
    for (std::size_t f = 0; f < inst.n_features; ++f) {
        if (mask[f] && inst.stdev[f] > 0.0) {
            features.push_back(f);
        }
    }
    constexpr std::size_t K = FsInstance::kNeighbors;
    std::array<std::pair<double, std::size_t>, K> nearest;
    nearest.fill({std::numeric_limits<double>::infinity(), std::numeric_limits<std::size_t>::max()});
    const std::size_t nf = inst.n_features;
    for (std::size_t r = 0; r < inst.n_train(); ++r) {
        const double* row = inst.train_x.data() + r * nf;
        double dist = 0.0;
        for (const auto f : features) {
            const double dv = row[f] - query[f];
            dist += dv * dv;
        }
        const std::pair<double, std::size_t> cand{dist, r};
        if (!(cand < nearest[K - 1])) {
            continue;
        }
        std::size_t pos = K - 1;
        while (pos > 0 && cand < nearest[pos - 1]) {
            nearest[pos] = nearest[pos - 1];
            --pos;
        }
        nearest[pos] = cand;
    }
    const std::size_t used = std::min(K, inst.n_train());
    if (inst.task == Task::regression) {
        double s = 0.0;
        for (std::size_t i = 0; i < used; ++i) {
            s += inst.train_y[nearest[i].second];
        }
        return s / static_cast<double>(used);
    }
    std::vector<std::size_t> votes(std::max<std::size_t>(inst.n_classes, 1), 0);
    for (std::size_t i = 0; i < used; ++i) {
        ++votes[static_cast<std::size_t>(inst.train_y[nearest[i].second])];
    }
    return static_cast<double>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

/// Prediction for a raw (unstandardized) feature vector.
inline double knn_predict(const FsInstance& inst, const BitString& mask, const std::vector<double>& query) {
    const auto z = inst.standardize(query);
    return knn_predict_standardized(inst, mask, z.data());
}

/// Model quality term f1 on the test set.
inline double fs_model_quality(const FsInstance& inst, const BitString& mask) {
    const std::size_t nf = inst.n_features;
    if (inst.task == Task::classification) {
        std::size_t correct = 0;
        for (std::size_t t = 0; t < inst.n_test(); ++t) {
            correct += static_cast<std::size_t>(knn_predict_standardized(inst, mask, inst.test_x.data() + t * nf) ==
                                                inst.test_y[t]);
        }
        return static_cast<double>(correct) / static_cast<double>(inst.n_test());
    }
    double sse = 0.0;
    for (std::size_t t = 0; t < inst.n_test(); ++t) {
        const double e = knn_predict_standardized(inst, mask, inst.test_x.data() + t * nf) - inst.test_y[t];
        sse += e * e;
    }
    return std::max(0.0, 1.0 - sse / static_cast<double>(inst.n_test()));
}

inline double fs_evaluate(const FsInstance& inst, const BitString& x) {
    if (x.size() != inst.n_features) {
        throw std::invalid_argument("fs_evaluate: dimension mismatch");
    }
    const double n = static_cast<double>(inst.n_features);
    return 0.98 * fs_model_quality(inst, x) + 0.02 * (n - static_cast<double>(x.count())) / n;
}

/// Feature-selection problem with an exact memo of every evaluated mask.
class FsProblem {
  public:
    explicit FsProblem(FsInstance inst) : inst_(std::make_shared<const FsInstance>(std::move(inst))) {}

    std::size_t dimension() const { return inst_->n_features; }
    const FsInstance& instance() const { return *inst_; }

    double evaluate(const BitString& x) const {
        {
            std::lock_guard lock(mutex_);
            const auto it = cache_.find(x);
            if (it != cache_.end()) {
                ++hits_;
                return it->second;
            }
        }
        const double v = fs_evaluate(*inst_, x);
        std::lock_guard lock(mutex_);
        cache_.emplace(x, v);
        return v;
    }

    std::size_t cache_size() const {
        std::lock_guard lock(mutex_);
        return cache_.size();
    }
    std::size_t cache_hits() const {
        std::lock_guard lock(mutex_);
        return hits_;
    }

  private:
    std::shared_ptr<const FsInstance> inst_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<BitString, double, BitStringHash> cache_;
    mutable std::size_t hits_ = 0;
};

// ---------------------------------------------------------------------------
// Synthetic data with known feature interactions.

inline constexpr std::size_t kFriedmanFeatures = 100;
inline constexpr int kFriedmanLevels = 11;

/// Noise-free target; depends on u[0..7] only.
inline double friedman_clean(const std::vector<double>& u) {
    const double lead = 9.0 * std::exp(-3.0 * (1.0 - u[0]) * (1.0 - u[0])) *
                        std::exp(-3.0 * (1.0 - u[1]) * (1.0 - u[1])) * std::exp(-3.0 * (1.0 - u[2]) * (1.0 - u[2]));
    const double s = std::sin(std::numbers::pi * u[5]);
    return lead - 0.8 * std::exp(-2.0 * (u[3] - u[4])) + 2.0 * s * s - 2.5 * (u[6] - u[7]);
}

struct FriedmanData {
    /// Regression dataset with targets scaled to [0,1].
    Dataset dataset;
    std::vector<double> clean_targets;
    /// clean + noise, before scaling.
    std::vector<double> raw_targets;
    double sigma = 0.0;
};

/// Features are drawn on the 11-level grid {0, 0.1, ..., 1}; the noise
/// standard deviation is sqrt(sample variance of the clean targets / 2),
/// giving a 2:1 signal-to-noise ratio.
inline FriedmanData friedman_generate(std::size_t n_ex, Rng& rng) {
    if (n_ex < 2) {
        throw std::invalid_argument("friedman_generate: need at least two examples");
    }
    FriedmanData out;
    auto& d = out.dataset;
    d.task = Task::regression;
    for (std::size_t f = 0; f < kFriedmanFeatures; ++f) {
        d.feature_names.push_back("u" + std::to_string(f));
    }
    d.target_name = "y";
    d.rows.resize(n_ex);
    for (auto& row : d.rows) {
        row.resize(kFriedmanFeatures);
        for (auto& v : row) {
            v = static_cast<double>(rng.uniform_index(kFriedmanLevels)) / 10.0;
        }
        out.clean_targets.push_back(friedman_clean(row));
    }
    const double mean = detail::mean_of(out.clean_targets);
    double ss = 0.0;
    for (const double t : out.clean_targets) {
        ss += (t - mean) * (t - mean);
    }
    out.sigma = std::sqrt(ss / static_cast<double>(n_ex - 1) / 2.0);
    for (const double t : out.clean_targets) {
        out.raw_targets.push_back(t + out.sigma * rng.normal());
    }
    const auto [lo, hi] = std::minmax_element(out.raw_targets.begin(), out.raw_targets.end());
    d.target_min = *lo;
    d.target_max = *hi;
    const double range = d.target_max - d.target_min;
    for (const double t : out.raw_targets) {
        d.targets.push_back(range > 0.0 ? (t - d.target_min) / range : 0.0);
    }
    return out;
}

/// Header row u0..u99,y then one row per example; raw (unscaled) target last.
inline std::string friedman_csv(const FriedmanData& data) {
    std::ostringstream os;
    const auto& d = data.dataset;
    for (const auto& name : d.feature_names) {
        os << name << ',';
    }
    os << d.target_name << '\n';
    for (std::size_t r = 0; r < d.n_examples(); ++r) {
        for (const double v : d.rows[r]) {
            os << format_double(v) << ',';
        }
        os << format_double(data.raw_targets[r]) << '\n';
    }
    return os.str();
}

} // namespace vigls
