#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <random>
#include <set>

#include "actinet/error.hpp"
#include "actinet/fsm.hpp"
#include "support.hpp"

using namespace actinet;
using namespace actinet::fsm;
using gates::ResponseTable;

namespace {

std::string fixture(const std::string& name) {
    const char* dir = std::getenv("ACTINET_FIXTURES");
    return oracle::slurp(std::filesystem::path(dir ? dir : "tests/fixtures") / name);
}

State st(const char* label) { return static_cast<State>(std::stoul(label, nullptr, 2)); }

ResponseTable random_table(std::mt19937_64& rng, std::size_t k, std::size_t pairs) {
    std::vector<std::uint8_t> bits((std::size_t{1} << k) * pairs);
    for (auto& b : bits) b = rng() & 1;
    return gates::table_from_bits(k, pairs, std::move(bits));
}

Machine random_machine(std::mt19937_64& rng, std::size_t k) {
    Machine m;
    m.k = k;
    for (std::size_t s = 0; s < m.states(); ++s) m.next.push_back(static_cast<State>(rng() % m.states()));
    return m;
}

Digraph random_digraph(std::mt19937_64& rng, std::size_t k, double p) {
    Digraph g;
    g.k = k;
    g.succ.resize(std::size_t{1} << k);
    std::bernoulli_distribution arc(p);
    for (State s = 0; s < g.states(); ++s)
        for (State t = 0; t < g.states(); ++t)
            if (arc(rng)) g.succ[s].push_back(t);
    return g;
}

void check_against_brute(const Digraph& g) {
    const auto a = analyze(g);
    const auto b = oracle::brute_analyze(g.succ);
    CHECK(a.components == b.components);
    CHECK(a.garden_of_eden == b.goe);
    CHECK(a.absorbing == b.absorbing);
    CHECK(a.cycles == b.cycles);
    CHECK_FALSE(a.cycles_truncated);
}

std::set<std::pair<State, State>> arc_set(const Digraph& g) {
    const auto v = g.arcs();
    return {v.begin(), v.end()};
}

}  // namespace

TEST_CASE("filters") {
    CHECK(parse_filter(">6,<11") == std::pair<std::size_t, std::size_t>{6, 11});
    CHECK(parse_filter("=32") == std::pair<std::size_t, std::size_t>{32, 32});
    CHECK(parse_filter("32") == std::pair<std::size_t, std::size_t>{32, 32});
    CHECK_THROWS_AS(parse_filter("<6"), ParseError);
    CHECK_THROWS_AS(resolve_filter(gates::table_from_bits(1, 1, {0, 1}), "auto:x"), ParseError);

    // Column p has p ones out of 16.
    std::vector<std::uint8_t> bits(16 * 17);
    for (std::size_t p = 0; p <= 16; ++p)
        for (State s = 0; s < p; ++s) bits[s * 17 + p] = 1;
    const auto rt = gates::table_from_bits(4, 17, bits);
    CHECK(select_output_bits(rt, 6, 11) == std::vector<std::size_t>{7, 8, 9, 10});
    CHECK(select_output_bits(rt, 8, 8) == std::vector<std::size_t>{8});
    CHECK(window_filter(rt, 1) == std::pair<std::size_t, std::size_t>{8, 8});
    CHECK(window_filter(rt, 3) == std::pair<std::size_t, std::size_t>{6, 10});
    CHECK(resolve_filter(rt, "auto:5") == std::pair<std::size_t, std::size_t>{5, 11});
    CHECK_THROWS_AS(select_output_bits(rt, 3, 2), DomainError);

    const auto zeros = gates::table_from_bits(3, 4, std::vector<std::uint8_t>(32, 0));
    CHECK(select_output_bits(zeros, 0, 8).empty());
}

TEST_CASE("machines from a table") {
    const auto echo = gates::table_from_bits(1, 1, {0, 1});
    const std::vector<std::size_t> sel{0};
    CHECK(build_machine(echo, sel).next == std::vector<State>{0, 1});

    const auto constant = gates::table_from_bits(2, 2, {1, 0, 1, 0, 1, 0, 1, 0});
    const std::vector<std::size_t> both{0, 1};
    const auto m = build_machine(constant, both);
    CHECK(m.next == std::vector<State>(4, 2));
    const auto a = analyze(functional_graph(m));
    CHECK(a.absorbing == std::vector<State>{2});

    auto with_inputs = constant;
    with_inputs.pairs = {{0, 5}, {6, 7}};
    with_inputs.inputs = {5};
    CHECK_THROWS_AS(build_machine(with_inputs, both), DomainError);
    CHECK_THROWS_AS(build_machine(constant, sel), DomainError);
}

TEST_CASE("machine bits re-read the table") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 1 + trial % 5;
        const auto rt = random_table(rng, k, 9);
        std::vector<std::size_t> sel(9);
        std::iota(sel.begin(), sel.end(), 0);
        std::shuffle(sel.begin(), sel.end(), rng);
        sel.resize(k);
        const auto m = build_machine(rt, sel);
        for (State s = 0; s < m.states(); ++s)
            for (std::size_t j = 0; j < k; ++j)
                CHECK(electrodes::state_bit(m.next[s], k, j) == rt.bit(s, sel[j]));
    }
}

TEST_CASE("binomial bookkeeping") {
    CHECK(binomial(11, 4) == 330);
    CHECK(binomial(11, 6) == 462);
    CHECK(binomial(10, 2) == 45);
    CHECK(binomial(15, 2) == 105);
    CHECK(binomial(5, 7) == 0);
    CHECK(binomial(60, 30) == 118264581564861424ull);
    CHECK_THROWS_AS(binomial(100, 50), DomainError);

    std::vector<std::vector<std::size_t>> seen;
    for_each_combination(5, 3, [&](auto c) { seen.emplace_back(c.begin(), c.end()); });
    CHECK(seen.size() == 10);
    CHECK(std::is_sorted(seen.begin(), seen.end()));
    CHECK(seen.front() == std::vector<std::size_t>{0, 1, 2});

    std::mt19937_64 rng(1);
    for (std::size_t n = 4; n <= 11; ++n) {
        const auto rt = random_table(rng, 4, n + 2);
        std::vector<std::size_t> cand(n);
        std::iota(cand.begin(), cand.end(), 2);
        const auto ms = build_machines(rt, cand, 3);
        CHECK(ms.size() == binomial(n, 4));
        const auto ms1 = build_machines(rt, cand, 1);
        for (std::size_t i = 0; i < ms.size(); ++i) CHECK(ms[i].next == ms1[i].next);
    }
}

TEST_CASE("aggregation") {
    std::mt19937_64 rng(3);
    const auto one = random_machine(rng, 3);
    const auto w1 = aggregate(std::vector<Machine>{one});
    CHECK(arc_set(trim(w1, 1.0)) == arc_set(functional_graph(one)));
    for (const auto& out : w1.out)
        for (const auto& a : out) CHECK(a.weight == 1.0);

    auto two = one;
    two.next[5] = (one.next[5] + 1) % 8;
    const auto w2 = aggregate(std::vector<Machine>{one, two});
    CHECK(w2.out[5].size() == 2);
    CHECK(w2.weight(5, one.next[5]) == 0.5);
    CHECK(w2.weight(5, two.next[5]) == 0.5);

    std::vector<Machine> many;
    for (int i = 0; i < 330; ++i) many.push_back(random_machine(rng, 4));
    const auto w = aggregate(many);
    for (const auto& out : w.out) {
        double sum = 0;
        for (const auto& a : out) sum += a.weight;
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
    CHECK_THROWS_AS(aggregate(std::vector<Machine>{}), DomainError);
}

TEST_CASE("trimming") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Machine> ms;
        const std::size_t count = 1 + rng() % 40;
        for (std::size_t i = 0; i < count; ++i) ms.push_back(random_machine(rng, 3));
        const auto w = aggregate(ms);
        std::set<std::pair<State, State>> all;
        for (const auto& m : ms)
            for (State s = 0; s < 8; ++s) all.insert({s, m.next[s]});
        CHECK(arc_set(trim(w, 0.0)) == all);
        CHECK(arc_set(trim(w, 1.0 / static_cast<double>(count) - 1e-12)) == all);
        std::set<std::pair<State, State>> prev = all;
        for (double th = 0.1; th <= 1.0; th += 0.1) {
            const auto cur = arc_set(trim(w, th));
            CHECK(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
            prev = cur;
        }
        for (const auto& [s, t] : arc_set(trim(w, 1.0)))
            for (const auto& m : ms) CHECK(m.next[s] == t);
        CHECK(trim(w, 0.5).states() == 8);
    }
    CHECK_THROWS_AS(trim(aggregate(std::vector<Machine>{random_machine(rng, 2)}), 1.5), DomainError);
}

TEST_CASE("max likelihood graph") {
    std::mt19937_64 rng(5);
    std::vector<Machine> ms;
    for (int i = 0; i < 25; ++i) ms.push_back(random_machine(rng, 4));
    const auto w = aggregate(ms);
    const auto g = max_likelihood_graph(w);
    CHECK(g.arc_count() == 16);
    for (State s = 0; s < 16; ++s) {
        REQUIRE(g.succ[s].size() == 1);
        for (const auto& a : w.out[s]) {
            const double best = w.weight(s, g.succ[s][0]);
            CHECK(a.weight <= best);
            if (a.weight == best) CHECK(g.succ[s][0] <= a.to);
        }
        // Every walk reaches a cycle within 16 steps.
        State x = s;
        std::set<State> visited;
        for (int i = 0; i < 17; ++i) visited.insert(x), x = g.succ[x][0];
        CHECK(visited.count(x) == 1);
    }

    Machine a, b;
    a.k = b.k = 1;
    a.next = {1, 1};
    b.next = {0, 1};
    const auto tie = max_likelihood_graph(aggregate(std::vector<Machine>{a, b}));
    CHECK(tie.succ[0] == std::vector<State>{0});
}

TEST_CASE("analysis of small hand graphs") {
    Digraph id;
    id.k = 3;
    for (State s = 0; s < 8; ++s) id.succ.push_back({s});
    const auto a = analyze(id);
    CHECK(a.components == 8);
    CHECK(a.absorbing.size() == 8);
    CHECK(a.garden_of_eden.empty());
    CHECK(a.cycles.empty());

    Machine m;
    m.k = 2;
    m.next = {st("01"), st("11"), st("11"), st("11")};
    const auto b = analyze(functional_graph(m));
    CHECK(b.garden_of_eden == std::vector<State>{st("00"), st("10")});
    CHECK(b.absorbing == std::vector<State>{st("11")});
    CHECK(b.components == 1);
    CHECK(b.cycles.empty());
    check_against_brute(functional_graph(m));
}

TEST_CASE("analysis equals exhaustive search on 3-bit functional graphs") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 10000; ++trial) check_against_brute(functional_graph(random_machine(rng, 3)));
}

TEST_CASE("analysis equals exhaustive search on general digraphs") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 2000; ++trial) check_against_brute(random_digraph(rng, 3, 0.05 + 0.3 * (trial % 4) / 3.0));
    for (int trial = 0; trial < 50; ++trial) check_against_brute(random_digraph(rng, 4, 0.08));
}

TEST_CASE("cycle length bound and cap") {
    Digraph g;
    g.k = 3;
    g.succ.resize(8);
    for (State s = 0; s < 8; ++s) g.succ[s] = {static_cast<State>((s + 1) % 8), static_cast<State>((s + 2) % 8)};
    const auto all = analyze(g);
    const auto brute = oracle::brute_analyze(g.succ);
    CHECK(all.cycles == brute.cycles);
    const auto short_only = analyze(g, 4);
    for (const auto& c : short_only.cycles) CHECK(c.size() <= 4);
    std::size_t expect = 0;
    for (const auto& c : brute.cycles) expect += c.size() <= 4;
    CHECK(short_only.cycles.size() == expect);
    const auto capped = analyze(g, std::nullopt, 1);
    CHECK(capped.cycles.size() == 1);
    CHECK(capped.cycles_truncated);
}

TEST_CASE("analysis is invariant under bit permutations") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 4;
        std::vector<Machine> ms;
        for (int i = 0; i < 4; ++i) ms.push_back(random_machine(rng, k));
        std::vector<std::size_t> perm{0, 1, 2, 3};
        std::shuffle(perm.begin(), perm.end(), rng);
        auto relabel = [&](State s) {
            State r = 0;
            for (std::size_t j = 0; j < k; ++j)
                if (electrodes::state_bit(s, k, j)) r |= 1u << (k - 1 - perm[j]);
            return r;
        };
        auto moved = ms;
        for (std::size_t i = 0; i < ms.size(); ++i)
            for (State s = 0; s < 16; ++s) moved[i].next[relabel(s)] = relabel(ms[i].next[s]);
        const auto w = aggregate(ms), w2 = aggregate(moved);
        for (double th : {0.2, 0.3, 0.5}) {
            const auto a = analyze(trim(w, th)), b = analyze(trim(w2, th));
            CHECK(a.components == b.components);
            std::vector<State> goe;
            for (State s : a.garden_of_eden) goe.push_back(relabel(s));
            std::sort(goe.begin(), goe.end());
            CHECK(goe == b.garden_of_eden);
            CHECK(a.absorbing.size() == b.absorbing.size());
            CHECK(a.cycles.size() == b.cycles.size());
        }
    }
}

TEST_CASE("4-bit fixture") {
    const auto g = parse_dot(fixture("g4.dot"));
    REQUIRE(g.k == 4);
    CHECK(g.arc_count() == 16);
    for (const auto& s : g.succ) CHECK(s.size() == 1);
    const auto a = analyze(g);
    CHECK(a.components == 2);
    CHECK(a.garden_of_eden.size() == 8);
    CHECK(a.absorbing == std::vector<State>{st("0000"), st("1111")});
    CHECK(a.cycles.empty());
}

TEST_CASE("6-bit fixture") {
    const auto g = parse_dot(fixture("g6.dot"));
    REQUIRE(g.k == 6);
    CHECK(g.states() == 64);
    for (const auto& s : g.succ) CHECK(s.size() == 1);
    const auto a = analyze(g);
    CHECK(a.components == 5);
    CHECK(a.absorbing == std::vector<State>{st("000000"), st("101010")});
    const std::vector<std::vector<State>> cycles{
        {st("000010"), st("100001"), st("001100"), st("000011"), st("110001"), st("001001")},
        {st("001111"), st("100110"), st("111100")},
        {st("111110"), st("111111")}};
    CHECK(a.cycles == cycles);
    std::size_t six = 0;
    for (const auto& c : a.cycles) six += c.size() == 6;
    CHECK(six == 1);
    check_against_brute(g);
}

TEST_CASE("dot export") {
    Digraph one;
    one.k = 0;
    one.succ = {{0}};
    const auto text = export_dot(one, "G");
    CHECK(text.find("\"0\" -> \"0\"") != std::string::npos);

    Digraph g;
    g.k = 5;
    g.succ.resize(32);
    g.succ[3] = {4};
    const auto five = export_dot(g);
    CHECK(five.find("\"00011\" -> \"00100\"") != std::string::npos);
    CHECK(five.find("\"11111\"") != std::string::npos);
    const auto back = parse_dot(five);
    CHECK(back.succ == g.succ);
    CHECK_THROWS_AS(parse_dot("digraph { \"01\" -> \"011\"; }"), ParseError);
    CHECK_THROWS_AS(parse_dot("graph { }"), ParseError);
}

TEST_CASE("weighted export re-parses and agrees with trimming") {
    std::mt19937_64 rng(7);
    std::vector<Machine> ms;
    for (int i = 0; i < 30; ++i) ms.push_back(random_machine(rng, 3));
    const auto w = aggregate(ms);
    const auto back = parse_weighted_dot(export_dot(w, "W"));
    CHECK(back.machines == 30);
    CHECK(back.k == 3);
    for (State s = 0; s < 8; ++s) {
        REQUIRE(back.out[s].size() == w.out[s].size());
        for (std::size_t i = 0; i < w.out[s].size(); ++i) {
            CHECK(back.out[s][i].to == w.out[s][i].to);
            CHECK(back.out[s][i].count == w.out[s][i].count);
            CHECK(back.out[s][i].weight == w.out[s][i].weight);
        }
    }
    for (double th : {0.1, 0.2, 0.3}) {
        const auto trimmed = parse_dot(export_dot(trim(w, th)));
        std::set<std::pair<State, State>> expect;
        for (State s = 0; s < 8; ++s)
            for (const auto& a : back.out[s])
                if (a.weight >= th) expect.insert({s, a.to});
        CHECK(arc_set(trimmed) == expect);
    }
    CHECK_THROWS_AS(parse_weighted_dot("digraph { \"0\" -> \"1\"; }"), ParseError);
}

TEST_CASE("machines csv round trip") {
    std::mt19937_64 rng(8);
    const auto rt = random_table(rng, 3, 6);
    std::vector<std::size_t> cand{0, 1, 2, 3, 4, 5};
    const auto ms = build_machines(rt, cand);
    const auto back = parse_machines_csv(machines_csv(rt, ms));
    REQUIRE(back.size() == ms.size());
    for (std::size_t i = 0; i < ms.size(); ++i) {
        CHECK(back[i].k == 3);
        CHECK(back[i].next == ms[i].next);
    }
}

TEST_CASE("analysis json") {
    Machine m;
    m.k = 2;
    m.next = {1, 3, 3, 3};
    const auto j = analysis_json(analyze(functional_graph(m)), 2);
    CHECK(j.find("\"11\"") != std::string::npos);
    CHECK(j.find("garden_of_eden") != std::string::npos);
}
