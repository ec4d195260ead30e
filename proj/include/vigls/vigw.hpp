/// @file vigw.hpp
/// @brief Empirical weighted variable-interaction graph.
///
/// Edge weights are running means of the positive second differences seen
/// during search. Edges are stored once under (min, max) ordering and never
/// decay within a run.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "format.hpp"

namespace vigls {

using Edge = std::pair<std::size_t, std::size_t>;

/// Canonical, sorted, duplicate-free edge list (0-based, first < second).
using EdgeSet = std::vector<Edge>;

inline Edge canonical(std::size_t g, std::size_t h) { return g < h ? Edge{g, h} : Edge{h, g}; }

inline EdgeSet make_edge_set(std::vector<Edge> edges) {
    for (auto& e : edges) {
        if (e.first == e.second) {
            throw std::invalid_argument("edge set: self-loop");
        }
        e = canonical(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

struct EdgeStat {
    double sum = 0.0;
    std::uint64_t count = 0;

    double weight() const { return sum / static_cast<double>(count); }
};

struct WeightedEdge {
    std::size_t u;
    std::size_t v;
    EdgeStat stat;
};

class EmpiricalVigw {
  public:
    EmpiricalVigw() = default;
    explicit EmpiricalVigw(std::size_t n) : n_(n), incident_(n) {}

    std::size_t n_vertices() const { return n_; }
    std::size_t n_edges() const { return edges_.size(); }

    /// Adds one observation of |delta_g(x ^ 1_h) - delta_g(x)|. Values not
    /// exceeding kEpsilon are ignored and reported as false.
    bool record(std::size_t g, std::size_t h, double value) {
        if (g == h) {
            throw std::invalid_argument("record_interaction: g == h");
        }
        if (g >= n_ || h >= n_) {
            throw std::out_of_range("record_interaction: vertex out of range");
        }
        if (!(value > kEpsilon)) {
            return false;
        }
        const auto [u, v] = canonical(g, h);
        const auto [it, inserted] = index_.try_emplace(key(u, v), edges_.size());
        if (inserted) {
            edges_.push_back({u, v, EdgeStat{value, 1}});
            incident_[u].push_back(it->second);
            incident_[v].push_back(it->second);
        } else {
            auto& s = edges_[it->second].stat;
            s.sum += value;
            ++s.count;
        }
        return true;
    }

    /// Inserts a complete edge statistic; used when reading graph files.
    void insert(std::size_t g, std::size_t h, EdgeStat stat) {
        if (g == h || g >= n_ || h >= n_) {
            throw std::invalid_argument("EmpiricalVigw::insert: bad edge");
        }
        if (stat.count == 0 || !(stat.sum > 0.0)) {
            throw std::invalid_argument("EmpiricalVigw::insert: edge needs count >= 1 and positive weight");
        }
        const auto [u, v] = canonical(g, h);
        const auto [it, inserted] = index_.try_emplace(key(u, v), edges_.size());
        if (!inserted) {
            throw std::invalid_argument("EmpiricalVigw::insert: duplicate edge");
        }
        edges_.push_back({u, v, stat});
        incident_[u].push_back(it->second);
        incident_[v].push_back(it->second);
    }

    std::optional<EdgeStat> edge(std::size_t g, std::size_t h) const {
        if (g == h) {
            return std::nullopt;
        }
        const auto [u, v] = canonical(g, h);
        const auto it = index_.find(key(u, v));
        if (it == index_.end()) {
            return std::nullopt;
        }
        return edges_[it->second].stat;
    }

    std::size_t degree(std::size_t i) const { return incident_.at(i).size(); }

    /// Neighbors of i ascending by weight, ties by vertex index.
    std::vector<std::pair<std::size_t, double>> neighbors_sorted(std::size_t i) const {
        std::vector<std::pair<std::size_t, double>> out;
        out.reserve(incident_.at(i).size());
        for (const auto id : incident_[i]) {
            const auto& e = edges_[id];
            out.emplace_back(e.u == i ? e.v : e.u, e.stat.weight());
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            return a.second != b.second ? a.second < b.second : a.first < b.first;
        });
        return out;
    }

    /// All edges ordered by (u, v).
    std::vector<WeightedEdge> edges() const {
        auto out = edges_;
        std::sort(out.begin(), out.end(),
                  [](const auto& a, const auto& b) { return std::pair(a.u, a.v) < std::pair(b.u, b.v); });
        return out;
    }

    EdgeSet edge_set() const {
        EdgeSet out;
        out.reserve(edges_.size());
        for (const auto& e : edges_) {
            out.emplace_back(e.u, e.v);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

  private:
    static std::uint64_t key(std::size_t u, std::size_t v) {
        return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(v);
    }

    std::size_t n_ = 0;
    std::vector<WeightedEdge> edges_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
    std::vector<std::vector<std::size_t>> incident_;
};

/// Quantile of an ascending sample by linear interpolation between order
/// statistics (the "type 7" rule).
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) {
        throw std::invalid_argument("quantile: empty sample");
    }
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) {
        return sorted.back();
    }
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

/// Upper box-plot fence Q3 + 1.5 IQR of an ascending sample; the sample
/// maximum when fewer than four values are available.
inline double threshold_computation(const std::vector<double>& ascending) {
    if (ascending.empty()) {
        throw std::invalid_argument("threshold_computation: empty sample");
    }
    if (!std::is_sorted(ascending.begin(), ascending.end())) {
        throw std::invalid_argument("threshold_computation: sample must be ascending");
    }
    if (ascending.size() < 4) {
        return ascending.back();
    }
    const double q1 = quantile_sorted(ascending, 0.25);
    const double q3 = quantile_sorted(ascending, 0.75);
    return q3 + 1.5 * (q3 - q1);
}

/// |G ∩ truth| / |truth|.
inline double coverage(const EmpiricalVigw& g, const EdgeSet& truth) {
    if (truth.empty()) {
        throw std::invalid_argument("coverage: empty truth set");
    }
    std::size_t hit = 0;
    for (const auto& [u, v] : truth) {
        hit += static_cast<std::size_t>(g.edge(u, v).has_value());
    }
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

/// Edges of `g` that are absent from `truth`.
inline EdgeSet false_edges(const EmpiricalVigw& g, const EdgeSet& truth) {
    EdgeSet out;
    for (const auto& e : g.edge_set()) {
        if (!std::binary_search(truth.begin(), truth.end(), e)) {
            out.push_back(e);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Export

enum class GraphFormat { dot, graphml, json };

inline GraphFormat parse_graph_format(std::string_view s) {
    if (s == "dot") {
        return GraphFormat::dot;
    }
    if (s == "graphml") {
        return GraphFormat::graphml;
    }
    if (s == "json") {
        return GraphFormat::json;
    }
    throw std::invalid_argument("unknown graph format '" + std::string(s) + "'");
}

struct VertexAnnotation {
    std::string label;
    std::optional<double> size;
};

/// Keyed by 0-based vertex.
using Annotations = std::map<std::size_t, VertexAnnotation>;

struct ExportOptions {
    bool top_edges_only = false;
    Annotations annotations;
    /// Free-form provenance (seeds, tool version); written verbatim.
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
};

/// Edges kept by the "top edges" view: weight above the box-plot fence of
/// all edge weights, plus the strongest edge(s).
inline std::vector<WeightedEdge> top_edges(const std::vector<WeightedEdge>& all) {
    if (all.empty()) {
        return {};
    }
    std::vector<double> w;
    w.reserve(all.size());
    for (const auto& e : all) {
        w.push_back(e.stat.weight());
    }
    std::sort(w.begin(), w.end());
    const double beta = threshold_computation(w);
    const double max_w = w.back();
    std::vector<WeightedEdge> out;
    for (const auto& e : all) {
        const double x = e.stat.weight();
        if (x > beta || x == max_w) {
            out.push_back(e);
        }
    }
    return out;
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string dot_escape(std::string_view s) {
    std::string out;
    for (const char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    return out;
}

} // namespace detail

inline std::string export_dot(const EmpiricalVigw& g, const ExportOptions& opt) {
    auto edges = g.edges();
    if (opt.top_edges_only) {
        edges = top_edges(edges);
    }
    double lo = 0.0;
    double hi = 0.0;
    if (!edges.empty()) {
        lo = hi = edges.front().stat.weight();
        for (const auto& e : edges) {
            lo = std::min(lo, e.stat.weight());
            hi = std::max(hi, e.stat.weight());
        }
    }
    std::ostringstream os;
    os << "// vigls " << kToolVersion;
    if (!opt.meta.empty()) {
        os << ' ' << opt.meta.dump();
    }
    os << "\ngraph vigw {\n";
    for (std::size_t v = 0; v < g.n_vertices(); ++v) {
        os << "  " << v + 1;
        const auto it = opt.annotations.find(v);
        if (it != opt.annotations.end()) {
            os << " [";
            bool first = true;
            if (!it->second.label.empty()) {
                os << "label=\"" << detail::dot_escape(it->second.label) << '"';
                first = false;
            }
            if (it->second.size) {
                os << (first ? "" : ", ") << "width=" << format_double(*it->second.size);
            }
            os << ']';
        }
        os << ";\n";
    }
    for (const auto& e : edges) {
        const double w = e.stat.weight();
        const double pen = hi > lo ? 1.0 + 4.0 * (w - lo) / (hi - lo) : 3.0;
        os << "  " << e.u + 1 << " -- " << e.v + 1 << " [weight=" << format_double(w)
           << ", count=" << e.stat.count << ", penwidth=" << format_double(pen) << "];\n";
    }
    os << "}\n";
    return os.str();
}

inline std::string export_graphml(const EmpiricalVigw& g, const ExportOptions& opt) {
    auto edges = g.edges();
    if (opt.top_edges_only) {
        edges = top_edges(edges);
    }
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<!-- vigls " << kToolVersion;
    if (!opt.meta.empty()) {
        os << ' ' << detail::xml_escape(opt.meta.dump());
    }
    os << " -->\n"
       << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
       << "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
       << "  <key id=\"size\" for=\"node\" attr.name=\"size\" attr.type=\"double\"/>\n"
       << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
       << "  <key id=\"count\" for=\"edge\" attr.name=\"count\" attr.type=\"long\"/>\n"
       << "  <graph id=\"vigw\" edgedefault=\"undirected\">\n";
    for (std::size_t v = 0; v < g.n_vertices(); ++v) {
        os << "    <node id=\"n" << v + 1 << "\"";
        const auto it = opt.annotations.find(v);
        if (it == opt.annotations.end()) {
            os << "/>\n";
            continue;
        }
        os << ">\n";
        if (!it->second.label.empty()) {
            os << "      <data key=\"label\">" << detail::xml_escape(it->second.label) << "</data>\n";
        }
        if (it->second.size) {
            os << "      <data key=\"size\">" << format_double(*it->second.size) << "</data>\n";
        }
        os << "    </node>\n";
    }
    for (const auto& e : edges) {
        os << "    <edge source=\"n" << e.u + 1 << "\" target=\"n" << e.v + 1 << "\">\n"
           << "      <data key=\"weight\">" << format_double(e.stat.weight()) << "</data>\n"
           << "      <data key=\"count\">" << e.stat.count << "</data>\n"
           << "    </edge>\n";
    }
    os << "  </graph>\n</graphml>\n";
    return os.str();
}

inline constexpr int kVigwFormatVersion = 1;

inline nlohmann::ordered_json vigw_to_json(const EmpiricalVigw& g, const ExportOptions& opt) {
    auto edges = g.edges();
    if (opt.top_edges_only) {
        edges = top_edges(edges);
    }
    nlohmann::ordered_json j;
    j["format"] = "vigls.vigw";
    j["version"] = kVigwFormatVersion;
    j["tool_version"] = kToolVersion;
    j["meta"] = opt.meta;
    j["n_vertices"] = g.n_vertices();
    auto vertices = nlohmann::ordered_json::array();
    for (std::size_t v = 0; v < g.n_vertices(); ++v) {
        nlohmann::ordered_json jv;
        jv["id"] = v + 1;
        const auto it = opt.annotations.find(v);
        if (it != opt.annotations.end()) {
            if (!it->second.label.empty()) {
                jv["label"] = it->second.label;
            }
            if (it->second.size) {
                jv["size"] = *it->second.size;
            }
        }
        vertices.push_back(std::move(jv));
    }
    j["vertices"] = std::move(vertices);
    auto je = nlohmann::ordered_json::array();
    for (const auto& e : edges) {
        nlohmann::ordered_json x;
        x["u"] = e.u + 1;
        x["v"] = e.v + 1;
        x["weight"] = e.stat.weight();
        x["count"] = e.stat.count;
        x["sum"] = e.stat.sum;
        je.push_back(std::move(x));
    }
    j["edges"] = std::move(je);
    return j;
}

inline std::string export_graph(const EmpiricalVigw& g, GraphFormat format, const ExportOptions& opt = {}) {
    switch (format) {
    case GraphFormat::dot: return export_dot(g, opt);
    case GraphFormat::graphml: return export_graphml(g, opt);
    case GraphFormat::json: return vigw_to_json(g, opt).dump(1) + "\n";
    }
    throw std::invalid_argument("export_graph: unknown format");
}

struct VigwDocument {
    EmpiricalVigw graph;
    Annotations annotations;
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
};

inline VigwDocument vigw_from_json(const nlohmann::ordered_json& j) {
    if (j.value("format", "") != "vigls.vigw") {
        throw std::runtime_error("not a vigw document (missing format \"vigls.vigw\")");
    }
    if (j.at("version").get<int>() != kVigwFormatVersion) {
        throw std::runtime_error("unsupported vigw format version");
    }
    VigwDocument doc;
    const auto n = j.at("n_vertices").get<std::size_t>();
    doc.graph = EmpiricalVigw(n);
    if (j.contains("meta")) {
        doc.meta = j.at("meta");
    }
    if (j.contains("vertices")) {
        for (const auto& jv : j.at("vertices")) {
            const auto id = jv.at("id").get<std::size_t>();
            if (id == 0 || id > n) {
                throw std::runtime_error("vigw document: vertex id out of range");
            }
            if (jv.contains("label") || jv.contains("size")) {
                VertexAnnotation a;
                a.label = jv.value("label", "");
                if (jv.contains("size")) {
                    a.size = jv.at("size").get<double>();
                }
                doc.annotations[id - 1] = std::move(a);
            }
        }
    }
    std::size_t idx = 0;
    for (const auto& je : j.at("edges")) {
        const auto u = je.at("u").get<std::size_t>();
        const auto v = je.at("v").get<std::size_t>();
        if (u == 0 || v == 0 || u > n || v > n) {
            throw std::runtime_error("vigw document: edge " + std::to_string(idx) + " has out-of-range endpoint");
        }
        EdgeStat s;
        s.count = je.at("count").get<std::uint64_t>();
        s.sum = je.contains("sum") ? je.at("sum").get<double>()
                                   : je.at("weight").get<double>() * static_cast<double>(s.count);
        doc.graph.insert(u - 1, v - 1, s);
        ++idx;
    }
    return doc;
}

/// Reads the edge list of a `*.truevig.json` or `*.vigw.json` document.
inline EdgeSet edge_set_from_json(const nlohmann::ordered_json& j) {
    std::vector<Edge> edges;
    const auto n = j.at("n_vertices").get<std::size_t>();
    for (const auto& je : j.at("edges")) {
        const auto u = je.at("u").get<std::size_t>();
        const auto v = je.at("v").get<std::size_t>();
        if (u == 0 || v == 0 || u > n || v > n) {
            throw std::runtime_error("edge endpoint out of range");
        }
        edges.emplace_back(u - 1, v - 1);
    }
    return make_edge_set(std::move(edges));
}

} // namespace vigls
