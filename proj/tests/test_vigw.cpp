#include <algorithm>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "vigls/rng.hpp"
#include "vigls/vigw.hpp"

using namespace vigls;

namespace {

EmpiricalVigw star(std::size_t n, const std::vector<double>& weights) {
    EmpiricalVigw g(n);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        g.record(0, i + 1, weights[i]);
    }
    return g;
}

std::size_t count_substr(const std::string& s, const std::string& needle) {
    std::size_t c = 0;
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) {
        ++c;
    }
    return c;
}

} // namespace

TEST(RecordInteraction, RunningMean) {
    EmpiricalVigw g(4);
    EXPECT_TRUE(g.record(1, 3, 0.3));
    auto e = g.edge(3, 1);
    ASSERT_TRUE(e);
    EXPECT_DOUBLE_EQ(e->weight(), 0.3);
    EXPECT_EQ(e->count, 1u);
    g.record(3, 1, 0.5);
    e = g.edge(1, 3);
    EXPECT_DOUBLE_EQ(e->weight(), 0.4);
    EXPECT_EQ(e->count, 2u);
    EXPECT_EQ(g.n_edges(), 1u);
}

TEST(RecordInteraction, RejectsInvalidInput) {
    EmpiricalVigw g(3);
    EXPECT_THROW(g.record(1, 1, 0.5), std::invalid_argument);
    EXPECT_THROW(g.record(0, 3, 0.5), std::out_of_range);
    EXPECT_FALSE(g.record(0, 1, 0.0));
    EXPECT_FALSE(g.record(0, 1, 1e-11));
    EXPECT_EQ(g.n_edges(), 0u);
}

TEST(RecordInteraction, OrderInsensitiveWeight) {
    Rng rng(1);
    std::vector<double> values(500);
    for (auto& v : values) {
        v = rng.uniform01() + 1e-3;
    }
    EmpiricalVigw a(2);
    EmpiricalVigw b(2);
    for (double v : values) {
        a.record(0, 1, v);
    }
    std::reverse(values.begin(), values.end());
    for (double v : values) {
        b.record(1, 0, v);
    }
    EXPECT_NEAR(a.edge(0, 1)->weight(), b.edge(0, 1)->weight(), 1e-12);
}

TEST(NeighborsSorted, Examples) {
    EmpiricalVigw g(8);
    EXPECT_TRUE(g.neighbors_sorted(0).empty());
    g.record(2, 1, 0.5);
    g.record(2, 6, 0.1);
    const auto n = g.neighbors_sorted(2);
    ASSERT_EQ(n.size(), 2u);
    EXPECT_EQ(n[0].first, 6u);
    EXPECT_EQ(n[1].first, 1u);

    EmpiricalVigw t(5);
    t.record(0, 4, 0.2);
    t.record(0, 2, 0.2);
    t.record(0, 3, 0.2);
    const auto tied = t.neighbors_sorted(0);
    EXPECT_EQ(tied[0].first, 2u);
    EXPECT_EQ(tied[1].first, 3u);
    EXPECT_EQ(tied[2].first, 4u);
}

TEST(Threshold, Examples) {
    EXPECT_DOUBLE_EQ(threshold_computation({1, 1, 1, 1, 1}), 1.0);
    EXPECT_NEAR(threshold_computation({0.1, 0.1, 0.1, 0.1, 10}), 0.1, 1e-15);
    EXPECT_DOUBLE_EQ(threshold_computation({0.7}), 0.7);
    EXPECT_DOUBLE_EQ(threshold_computation({0.2, 0.9, 1.5}), 1.5);
    EXPECT_THROW((void)threshold_computation({}), std::invalid_argument);
    EXPECT_THROW((void)threshold_computation({2, 1, 3, 4}), std::invalid_argument);
}

TEST(Threshold, TypeSevenQuartiles) {
    // 1..8: Q1 = 1 + 0.25*7 = 2.75, Q3 = 1 + 0.75*7 = 6.25
    const std::vector<double> s{1, 2, 3, 4, 5, 6, 7, 8};
    EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.25), 2.75);
    EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.75), 6.25);
    EXPECT_DOUBLE_EQ(threshold_computation(s), 6.25 + 1.5 * 3.5);
}

TEST(Coverage, Examples) {
    const EdgeSet truth = make_edge_set({{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    EmpiricalVigw g(4);
    EXPECT_DOUBLE_EQ(coverage(g, truth), 0.0);
    g.record(0, 1, 1.0);
    g.record(2, 1, 1.0);
    EXPECT_DOUBLE_EQ(coverage(g, truth), 0.5);
    g.record(3, 2, 1.0);
    g.record(0, 3, 1.0);
    EXPECT_DOUBLE_EQ(coverage(g, truth), 1.0);
    EXPECT_TRUE(false_edges(g, truth).empty());
    g.record(0, 2, 1.0);
    EXPECT_EQ(false_edges(g, truth), make_edge_set({{0, 2}}));
    EXPECT_THROW((void)coverage(g, {}), std::invalid_argument);
}

TEST(Export, EmptyGraphListsIsolatedVertices) {
    const EmpiricalVigw g(3);
    const auto dot = export_graph(g, GraphFormat::dot);
    EXPECT_NE(dot.find("graph vigw {"), std::string::npos);
    EXPECT_NE(dot.find("  3;"), std::string::npos);
    EXPECT_EQ(count_substr(dot, " -- "), 0u);
    const auto gml = export_graph(g, GraphFormat::graphml);
    EXPECT_EQ(count_substr(gml, "<node "), 3u);
    EXPECT_EQ(count_substr(gml, "<edge "), 0u);
}

TEST(Export, ThreeEdgeDot) {
    EmpiricalVigw g(4);
    g.record(0, 1, 0.5);
    g.record(1, 2, 0.25);
    g.record(2, 3, 1.0);
    const auto dot = export_graph(g, GraphFormat::dot);
    EXPECT_EQ(count_substr(dot, " -- "), 3u);
    EXPECT_NE(dot.find("1 -- 2 [weight=0.5, count=1"), std::string::npos) << dot;
    EXPECT_NE(dot.find("3 -- 4 [weight=1, count=1, penwidth=5]"), std::string::npos) << dot;
    EXPECT_NE(dot.find("2 -- 3 [weight=0.25, count=1, penwidth=1]"), std::string::npos) << dot;
}

TEST(Export, TopEdgesKeepsTheDominantEdge) {
    const auto g = star(6, {0.1, 0.1, 0.1, 0.1, 10});
    ExportOptions opt;
    opt.top_edges_only = true;
    const auto dot = export_graph(g, GraphFormat::dot, opt);
    EXPECT_EQ(count_substr(dot, " -- "), 1u);
    EXPECT_NE(dot.find("1 -- 6 [weight=10"), std::string::npos);
    const auto kept = top_edges(g.edges());
    ASSERT_EQ(kept.size(), 1u);
    EXPECT_EQ(kept[0].v, 5u);
}

TEST(Export, TopEdgesOnUniformWeightsKeepsAll) {
    const auto g = star(6, {1, 1, 1, 1, 1});
    EXPECT_EQ(top_edges(g.edges()).size(), 5u);
}

TEST(Export, AnnotationsAndEscaping) {
    EmpiricalVigw g(2);
    g.record(0, 1, 0.5);
    ExportOptions opt;
    opt.annotations[0] = {"CRIM \"rate\" <x>", 2.5};
    const auto dot = export_graph(g, GraphFormat::dot, opt);
    EXPECT_NE(dot.find("label=\"CRIM \\\"rate\\\" <x>\", width=2.5"), std::string::npos) << dot;
    const auto gml = export_graph(g, GraphFormat::graphml, opt);
    EXPECT_NE(gml.find("CRIM &quot;rate&quot; &lt;x&gt;"), std::string::npos) << gml;
}

TEST(Export, JsonRoundTripIsByteIdentical) {
    Rng rng(9);
    EmpiricalVigw g(12);
    for (int t = 0; t < 200; ++t) {
        const auto u = rng.uniform_index(12);
        const auto v = (u + 1 + rng.uniform_index(11)) % 12;
        g.record(u, v, rng.uniform01() + 1e-6);
    }
    ExportOptions opt;
    opt.meta["master_seed"] = 42;
    opt.annotations[3] = {"x4", std::nullopt};
    const auto once = export_graph(g, GraphFormat::json, opt);
    const auto doc = vigw_from_json(nlohmann::ordered_json::parse(once));
    ExportOptions opt2;
    opt2.meta = doc.meta;
    opt2.annotations = doc.annotations;
    const auto twice = export_graph(doc.graph, GraphFormat::json, opt2);
    EXPECT_EQ(once, twice);
    for (const auto& e : g.edges()) {
        const auto back = doc.graph.edge(e.u, e.v);
        ASSERT_TRUE(back);
        EXPECT_EQ(back->sum, e.stat.sum);
        EXPECT_EQ(back->count, e.stat.count);
    }
    EXPECT_EQ(edge_set_from_json(nlohmann::ordered_json::parse(once)), g.edge_set());
}

TEST(Export, MalformedJsonIsRejected) {
    EXPECT_THROW(vigw_from_json(nlohmann::ordered_json{{"format", "other"}}), std::runtime_error);
    auto bad = nlohmann::ordered_json::parse(
        R"({"format":"vigls.vigw","version":1,"n_vertices":2,"edges":[{"u":1,"v":3,"count":1,"sum":1}]})");
    EXPECT_THROW(vigw_from_json(bad), std::runtime_error);
}
