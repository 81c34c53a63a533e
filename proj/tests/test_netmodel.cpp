#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <memory>
#include <random>

#include "actinet/error.hpp"
#include "actinet/netmodel.hpp"
#include "support.hpp"

using namespace actinet;
using namespace actinet::net;

namespace {

const char* two_nodes = R"({"pixel_scale_nm": 244.14,
  "nodes": [{"id": 1, "x_um": 0, "y_um": 0, "z_um": 0}, {"id": 2, "x_um": 3, "y_um": 4, "z_um": 0}],
  "edges": [{"id": 7, "a": 1, "b": 2, "radius_um": 0.1, "length_um": 5.5}]})";

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

NetworkGraph star(std::size_t leaves) {
    std::vector<Node> ns{{0, {0, 0, 0}}};
    std::vector<Edge> es;
    for (std::size_t i = 1; i <= leaves; ++i) {
        ns.push_back({static_cast<std::int64_t>(i), {static_cast<double>(i), 0, 0}});
        es.push_back({static_cast<std::int64_t>(i), 0, static_cast<std::int64_t>(i), 0.1,
                      static_cast<double>(i)});
    }
    return NetworkGraph(ns, es, 244.14);
}

const NetworkGraph& seed42_net() {
    static const NetworkGraph g = generate_synthetic(GeneratorSpec::paper_defaults(), 42);
    return g;
}

}  // namespace

TEST_CASE("minimal network file") {
    const auto g = parse_network(two_nodes);
    CHECK(g.nodes().size() == 2);
    CHECK(g.edges().size() == 1);
    CHECK(g.edges()[0].length == 5.5);
}

TEST_CASE("dangling endpoint names the missing node") {
    std::string text = two_nodes;
    text.replace(text.find("\"b\": 2"), 6, "\"b\": 99");
    try {
        parse_network(text);
        FAIL("expected an error");
    } catch (const InvariantError& e) {
        CHECK(std::string(e.what()).find("99") != std::string::npos);
        CHECK(std::string(e.what()).find("edge 7") != std::string::npos);
    }
}

TEST_CASE("non-positive radius and short edges are rejected") {
    std::string text = two_nodes;
    text.replace(text.find("0.1"), 3, "0.0");
    CHECK_THROWS_AS(parse_network(text), InvariantError);
    text = two_nodes;
    text.replace(text.find("5.5"), 3, "4.0");
    CHECK_THROWS_AS(parse_network(text), InvariantError);
    CHECK_THROWS_AS(parse_network("{\"nodes\": []"), ParseError);
}

TEST_CASE("save and load round trip") {
    std::mt19937_64 rng(5);
    const auto g = oracle::random_network(rng, 30, 20);
    const auto text = dump_network(g);
    CHECK(dump_network(parse_network(text)) == text);
    const auto path = std::filesystem::temp_directory_path() / "actinet_roundtrip.json";
    save_network(g, path);
    CHECK(dump_network(load_network(path)) == text);
    std::filesystem::remove(path);
}

TEST_CASE("input order does not change the canonical text") {
    std::mt19937_64 rng(8);
    const auto g = oracle::random_network(rng, 12, 6);
    auto nodes = g.nodes();
    auto edges = g.edges();
    std::shuffle(nodes.begin(), nodes.end(), rng);
    std::shuffle(edges.begin(), edges.end(), rng);
    CHECK(dump_network(NetworkGraph(nodes, edges, 244.14, g.bbox())) == dump_network(g));
}

TEST_CASE("stats of a single edge") {
    const double len_um = 70.11 * 0.24414;
    const NetworkGraph g({{1, {0, 0, 0}}, {2, {1, 0, 0}}}, {{1, 1, 2, 0.5, len_um}}, 244.14);
    const auto s = network_stats(g);
    CHECK(s.length_px.mean == doctest::Approx(70.11));
    CHECK(rel(s.length_um.mean, 17.12) < 0.001);
}

TEST_CASE("star graph degrees") {
    const auto s = network_stats(star(5));
    CHECK(s.degree.max == 5);
    CHECK(s.degree.mean == doctest::Approx(10.0 / 6.0));
    CHECK(s.nodes == 6);
}

TEST_CASE("stats use the largest component") {
    auto big = star(5);
    auto nodes = big.nodes();
    auto edges = big.edges();
    nodes.push_back({100, {50, 50, 0}});
    nodes.push_back({101, {51, 50, 0}});
    edges.push_back({100, 100, 101, 0.1, 1.0});
    const NetworkGraph g(nodes, edges, 244.14);
    CHECK(network_stats(g).nodes == 6);
    CHECK(largest_component(g).nodes().size() == 6);
    CHECK_THROWS(network_stats(NetworkGraph{}));
}

TEST_CASE("generator reproduces the published summary") {
    const auto& g = seed42_net();
    const auto s = network_stats(g);
    const auto t = NetworkStats::paper_table();
    CHECK(rel(static_cast<double>(s.nodes), 2968) < 0.15);
    CHECK(rel(static_cast<double>(s.edges), 7583) < 0.15);
    CHECK(rel(s.degree.mean, t.degree.mean) < 0.15);
    CHECK(rel(s.radius_px.mean, t.radius_px.mean) < 0.15);
    CHECK(rel(s.length_um.mean, 17.12) < 0.15);
    CHECK(component_labels(g) == std::vector<std::size_t>(g.nodes().size(), 0));
}

TEST_CASE("generator is a pure function of spec and seed") {
    GeneratorSpec spec;
    spec.target.nodes = 300;
    spec.target.edges = 760;
    spec.extent = {120, 120, 50};
    CHECK(dump_network(generate_synthetic(spec, 9)) == dump_network(generate_synthetic(spec, 9)));
    CHECK(dump_network(generate_synthetic(spec, 9)) != dump_network(generate_synthetic(spec, 10)));
}

TEST_CASE("infeasible generator spec") {
    GeneratorSpec spec;
    spec.target.nodes = 4;
    spec.target.degree.mean = 10;
    CHECK_THROWS(generate_synthetic(spec, 1));
}

TEST_CASE("one edge becomes a chain") {
    auto g = std::make_shared<const NetworkGraph>(NetworkGraph(
        {{1, {0, 0, 0}}, {2, {1, 0, 0}}}, {{1, 1, 2, 0.1, 1.0}}, 244.14));
    const ElementGraph eg(g, 0.1);
    REQUIRE(eg.size() == 12);
    CHECK(eg.chain_length(0) == 10);
    CHECK(eg.degree(0) == 1);
    CHECK(eg.degree(1) == 1);
    for (ElementId e = 2; e < 12; ++e) CHECK(eg.degree(e) == 2);
}

TEST_CASE("y junction has a degree three centre") {
    auto g = std::make_shared<const NetworkGraph>(NetworkGraph(
        {{0, {0, 0, 0}}, {1, {1, 0, 0}}, {2, {0, 1, 0}}, {3, {0, 0, 1}}},
        {{1, 0, 1, 0.1, 1.0}, {2, 0, 2, 0.1, 1.0}, {3, 0, 3, 0.1, 1.0}}, 244.14));
    const ElementGraph eg(g, 0.25);
    CHECK(eg.degree(0) == 3);
    CHECK(eg.size() == 4 + 3 * 4);
}

TEST_CASE("element adjacency matches the documented layout") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        auto g = std::make_shared<const NetworkGraph>(oracle::random_network(rng, 8 + trial, 5));
        const double h = 0.5 + 0.1 * trial;
        const ElementGraph eg(g, h);
        std::size_t total = 0;
        auto expect = oracle::element_adjacency(*g, h, &total);
        REQUIRE(eg.size() == total);
        CHECK(element_count(*g, h) == total);
        std::vector<std::pair<std::size_t, std::size_t>> got;
        std::size_t degree_sum = 0;
        for (ElementId e = 0; e < eg.size(); ++e) {
            degree_sum += eg.degree(e);
            eg.for_each_neighbor(e, [&](ElementId f) {
                if (e < f) got.emplace_back(e, f);
            });
        }
        for (auto& [a, b] : expect)
            if (a > b) std::swap(a, b);
        std::sort(expect.begin(), expect.end());
        std::sort(got.begin(), got.end());
        CHECK(got == expect);
        CHECK(degree_sum == 2 * expect.size());
        const auto hist = eg.degree_histogram();
        for (std::size_t m = 0; m < hist.size(); ++m)
            if (m != 2) CHECK(hist[2] >= hist[m]);
    }
}

TEST_CASE("node elements take their widest edge") {
    auto g = std::make_shared<const NetworkGraph>(NetworkGraph(
        {{0, {0, 0, 0}}, {1, {1, 0, 0}}, {2, {0, 1, 0}}},
        {{1, 0, 1, 0.05, 1.0}, {2, 0, 2, 0.2, 1.0}}, 244.14));
    const ElementGraph eg(g, 0.5, high_density_assigner());
    CHECK(eg.params(0).radius == doctest::Approx(0.2e-6));
    CHECK(eg.params(1).radius == doctest::Approx(0.05e-6));
    CHECK(eg.params(eg.chain_offset(1)).radius == doctest::Approx(0.2e-6));
}

TEST_CASE("element length calibration hits the target count") {
    const auto& g = seed42_net();
    const double h = calibrate_element_length(g, 3843876);
    CHECK(rel(static_cast<double>(element_count(g, h)), 3843876) < 0.01);
    CHECK_THROWS_AS(calibrate_element_length(g, 10), DomainError);
}
