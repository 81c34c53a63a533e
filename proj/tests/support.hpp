// Independent oracles for the tests. Nothing here calls the code it checks
// except to build inputs.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "actinet/electrodes.hpp"
#include "actinet/gates.hpp"
#include "actinet/netmodel.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

// Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(Matrix a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            if (f == 0) continue;
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
        x[r] = s / a[r][r];
    }
    return x;
}

// Element adjacency rebuilt from the documented id layout: node elements
// first, then each edge's chain a -> b.
inline std::vector<std::pair<std::size_t, std::size_t>> element_adjacency(
    const actinet::net::NetworkGraph& g, double element_length, std::size_t* total = nullptr) {
    std::vector<std::pair<std::size_t, std::size_t>> adj;
    std::size_t next = g.nodes().size();
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
        const auto& edge = g.edges()[e];
        const std::size_t m = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(edge.length / element_length)));
        std::size_t prev = g.node_index(edge.a);
        for (std::size_t i = 0; i < m; ++i) {
            adj.emplace_back(prev, next);
            prev = next++;
        }
        adj.emplace_back(prev, g.node_index(edge.b));
    }
    if (total) *total = next;
    return adj;
}

// Steady state of sum_k V_k - M V + F = 0 on a connected element graph with
// sum V = 0, by a bordered dense system.
inline std::vector<double> dense_steady(std::size_t n,
                                        const std::vector<std::pair<std::size_t, std::size_t>>& adj,
                                        const std::vector<double>& f) {
    Matrix a(n + 1, std::vector<double>(n + 1, 0.0));
    for (auto [i, j] : adj) {
        a[i][i] += 1, a[j][j] += 1;
        a[i][j] -= 1, a[j][i] -= 1;
    }
    for (std::size_t i = 0; i < n; ++i) a[i][n] = a[n][i] = 1;
    std::vector<double> b(f);
    b.push_back(0);
    auto x = dense_solve(std::move(a), std::move(b));
    x.pop_back();
    return x;
}

// Connected random network: a random tree plus `extra` edges (self-loops and
// parallel edges allowed). Lengths are distance times [1, 1.5) plus a floor.
inline actinet::net::NetworkGraph random_network(std::mt19937_64& rng, std::size_t nodes,
                                                 std::size_t extra, double box = 20.0) {
    using namespace actinet::net;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Node> ns;
    for (std::size_t i = 0; i < nodes; ++i)
        ns.push_back({static_cast<std::int64_t>(10 + 3 * i), {box * u(rng), box * u(rng), box * u(rng)}});
    std::vector<Edge> es;
    auto add = [&](std::size_t a, std::size_t b) {
        const double d = distance(ns[a].pos, ns[b].pos);
        es.push_back({static_cast<std::int64_t>(es.size() + 1), ns[a].id, ns[b].id,
                      0.05 + 0.1 * u(rng), d * (1.0 + 0.5 * u(rng)) + 0.5});
    };
    for (std::size_t i = 1; i < nodes; ++i) add(rng() % i, i);
    for (std::size_t i = 0; i < extra; ++i) add(rng() % nodes, rng() % nodes);
    return NetworkGraph(std::move(ns), std::move(es), 244.14);
}

// Brute-force gate enumeration straight from the definitions.
inline std::vector<actinet::gates::GateRecord> brute_gates(const actinet::gates::ResponseTable& rt) {
    using actinet::gates::GateRecord;
    using actinet::gates::GateType;
    const std::size_t k = rt.k;
    auto mask = [&](std::size_t j) { return 1u << (k - 1 - j); };
    std::vector<GateRecord> out;
    for (std::size_t p = 0; p < rt.pairs.size(); ++p) {
        for (std::size_t j = 0; j < k; ++j)
            for (std::uint32_t s = 0; s < (1u << k); ++s) {
                if (s & mask(j)) continue;
                if (rt.bit(s, p) && !rt.bit(s | mask(j), p))
                    out.push_back({GateType::NOT, p, {j}, s, {s, s | mask(j)}});
            }
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j)
                for (std::uint32_t s = 0; s < (1u << k); ++s) {
                    if (s & (mask(i) | mask(j))) continue;
                    const std::uint32_t w[4] = {s, s | mask(j), s | mask(i), s | mask(i) | mask(j)};
                    const bool o[4] = {rt.bit(w[0], p), rt.bit(w[1], p), rt.bit(w[2], p), rt.bit(w[3], p)};
                    const std::vector<std::uint32_t> ws(w, w + 4);
                    if (!o[0] && o[1] && o[2] && o[3]) out.push_back({GateType::OR, p, {i, j}, s, ws});
                    if (!o[0] && !o[1] && !o[2] && o[3]) out.push_back({GateType::AND, p, {i, j}, s, ws});
                    if (!o[0] && o[1] && o[2] && !o[3]) out.push_back({GateType::XOR, p, {i, j}, s, ws});
                }
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct GraphFacts {
    std::size_t components = 0;
    std::vector<std::uint32_t> goe, absorbing;
    std::vector<std::vector<std::uint32_t>> cycles;
};

// Exhaustive analysis of a digraph given as successor lists: flood fill for
// weak components, and a plain DFS from each start over larger vertices for
// simple cycles (each found once, smallest vertex first).
inline GraphFacts brute_analyze(const std::vector<std::vector<std::uint32_t>>& succ) {
    const std::size_t n = succ.size();
    GraphFacts f;
    std::vector<std::vector<std::uint32_t>> und(n);
    std::vector<std::size_t> indeg(n, 0);
    for (std::uint32_t v = 0; v < n; ++v)
        for (auto w : succ[v]) {
            und[v].push_back(w), und[w].push_back(v);
            if (w != v) ++indeg[w];
        }
    std::vector<int> seen(n, 0);
    for (std::uint32_t v = 0; v < n; ++v) {
        if (seen[v]) continue;
        ++f.components;
        std::vector<std::uint32_t> stack{v};
        seen[v] = 1;
        while (!stack.empty()) {
            auto x = stack.back();
            stack.pop_back();
            for (auto y : und[x])
                if (!seen[y]) seen[y] = 1, stack.push_back(y);
        }
    }
    for (std::uint32_t v = 0; v < n; ++v) {
        const bool absorbing = !succ[v].empty() &&
                               std::all_of(succ[v].begin(), succ[v].end(), [&](auto w) { return w == v; });
        if (absorbing) f.absorbing.push_back(v);
        if (indeg[v] == 0 && !absorbing) f.goe.push_back(v);
    }
    std::vector<std::uint32_t> path;
    std::vector<char> on(n, 0);
    auto dfs = [&](auto&& self, std::uint32_t start, std::uint32_t v) -> void {
        for (auto w : std::set<std::uint32_t>(succ[v].begin(), succ[v].end())) {
            if (w == start && path.size() >= 2) f.cycles.push_back(path);
            if (w <= start || on[w]) continue;
            on[w] = 1, path.push_back(w);
            self(self, start, w);
            on[w] = 0, path.pop_back();
        }
    };
    for (std::uint32_t s = 0; s < n; ++s) {
        path = {s};
        on.assign(n, 0);
        on[s] = 1;
        dfs(dfs, s, s);
    }
    std::sort(f.cycles.begin(), f.cycles.end());
    return f;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace oracle
