#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "actinet/error.hpp"
#include "actinet/netmodel.hpp"

namespace actinet::net {

using json = nlohmann::json;

namespace {

void check_summary(const Summary& s, const char* name) {
    if (!(s.min > 0) || !(s.min <= s.mean) || !(s.mean <= s.max) || !(s.stddev >= 0))
        throw DomainError(std::string("generator spec: ") + name +
                          " needs 0 < min <= mean <= max and stddev >= 0");
}

json summary_to(const Summary& s) {
    return {{"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"std", s.stddev}};
}

Summary summary_from(const json& j) {
    return {j.at("min").get<double>(), j.at("max").get<double>(), j.at("mean").get<double>(),
            j.at("std").get<double>()};
}

// Draws from a distribution restricted to [lo, hi] by rejection; falls back to
// clamping after many rejections so pathological specs still terminate.
template <class Dist>
double truncated(Dist& dist, std::mt19937_64& rng, double lo, double hi) {
    for (int i = 0; i < 64; ++i) {
        const double v = dist(rng);
        if (v >= lo && v <= hi) return v;
    }
    return std::clamp(dist(rng), lo, hi);
}

}  // namespace

void GeneratorSpec::validate() const {
    const auto& t = target;
    if (t.nodes < 2) throw DomainError("generator spec: need at least 2 nodes");
    if (t.edges < t.nodes - 1)
        throw DomainError("generator spec: " + std::to_string(t.edges) +
                          " edges cannot connect " + std::to_string(t.nodes) + " nodes");
    const double n1 = static_cast<double>(t.nodes - 1);
    if (t.degree.mean > n1)
        throw DomainError("generator spec: mean degree " + std::to_string(t.degree.mean) +
                          " exceeds node count - 1");
    if (2.0 * static_cast<double>(t.edges) / static_cast<double>(t.nodes) > n1)
        throw DomainError("generator spec: edge count needs mean degree above node count - 1");
    if (!(t.degree.max >= 1) || t.degree.stddev < 0 || t.degree.mean < 1)
        throw DomainError("generator spec: degree needs mean >= 1, max >= 1, std >= 0");
    check_summary(t.radius_px, "radius");
    check_summary(t.length_px, "length");
    if (!(t.pixel_scale_nm > 0)) throw DomainError("generator spec: pixel scale must be positive");
    if (!(extent.x > 0 && extent.y > 0 && extent.z >= 0))
        throw DomainError("generator spec: extent must be positive");
}

std::string dump_generator_spec(const GeneratorSpec& spec) {
    const auto& t = spec.target;
    json doc = {{"nodes", t.nodes},
                {"edges", t.edges},
                {"degree", {{"mean", t.degree.mean}, {"std", t.degree.stddev}, {"max", t.degree.max}}},
                {"radius_px", summary_to(t.radius_px)},
                {"length_px", summary_to(t.length_px)},
                {"pixel_scale_nm", t.pixel_scale_nm},
                {"extent_um", {spec.extent.x, spec.extent.y, spec.extent.z}}};
    return doc.dump(2) + "\n";
}

GeneratorSpec parse_generator_spec(const std::string& json_text) {
    GeneratorSpec spec;
    auto& t = spec.target;
    try {
        const json doc = json::parse(json_text);
        t.nodes = doc.at("nodes").get<std::size_t>();
        t.edges = doc.at("edges").get<std::size_t>();
        const auto& d = doc.at("degree");
        t.degree = {1.0, d.at("max").get<double>(), d.at("mean").get<double>(),
                    d.at("std").get<double>()};
        t.radius_px = summary_from(doc.at("radius_px"));
        t.length_px = summary_from(doc.at("length_px"));
        t.pixel_scale_nm = doc.value("pixel_scale_nm", 244.14);
        if (doc.contains("extent_um")) {
            const auto& e = doc["extent_um"];
            spec.extent = {e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>()};
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("generator spec: ") + e.what());
    }
    const double k = t.pixel_scale_nm / 1000.0;
    t.radius_um = {t.radius_px.min * k, t.radius_px.max * k, t.radius_px.mean * k,
                   t.radius_px.stddev * k};
    t.length_um = {t.length_px.min * k, t.length_px.max * k, t.length_px.mean * k,
                   t.length_px.stddev * k};
    spec.validate();
    return spec;
}

GeneratorSpec load_generator_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open generator spec " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_generator_spec(buf.str());
}

// Nodes are scattered uniformly in the extent. Every node gets a target
// degree; stubs are then matched in random order, each stub drawing a target
// bundle length and pairing with the free node whose distance is the largest
// one not exceeding it (the nearest free node when none qualifies). The
// declared length is max(target, distance), so bundles may be curved but never
// shorter than the chord. Leftover components are stitched to the largest one
// with their shortest available link.
NetworkGraph generate_synthetic(const GeneratorSpec& spec, std::uint64_t seed) {
    spec.validate();
    const auto& t = spec.target;
    const std::size_t n = t.nodes;
    const double px = t.pixel_scale_nm / 1000.0;
    std::mt19937_64 rng(seed);

    std::vector<Node> nodes(n);
    {
        std::uniform_real_distribution<double> ux(0.0, spec.extent.x), uy(0.0, spec.extent.y),
            uz(0.0, spec.extent.z);
        for (std::size_t i = 0; i < n; ++i)
            nodes[i] = {static_cast<std::int64_t>(i), {ux(rng), uy(rng), uz(rng)}};
    }

    // Degree sequence with the requested spread, rescaled to sum to 2E.
    const int max_deg = std::max(1, static_cast<int>(std::lround(t.degree.max)));
    std::vector<int> want(n);
    {
        const double mean = 2.0 * static_cast<double>(t.edges) / static_cast<double>(n);
        std::normal_distribution<double> nd(mean, t.degree.stddev);
        long total = 0;
        for (auto& d : want) {
            d = static_cast<int>(std::lround(truncated(nd, rng, 1.0, max_deg)));
            total += d;
        }
        const long goal = 2 * static_cast<long>(t.edges);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (long guard = 0; total != goal && guard < 100 * goal; ++guard) {
            auto& d = want[pick(rng)];
            if (total < goal && d < max_deg) {
                ++d;
                ++total;
            } else if (total > goal && d > 1) {
                --d;
                --total;
            }
        }
    }

    std::lognormal_distribution<double> length_dist;
    {
        const double m = t.length_px.mean, s = t.length_px.stddev;
        const double sigma2 = std::log1p((s * s) / (m * m));
        length_dist = std::lognormal_distribution<double>(std::log(m) - 0.5 * sigma2,
                                                          std::sqrt(sigma2));
    }
    std::normal_distribution<double> radius_dist(t.radius_px.mean, t.radius_px.stddev);

    std::vector<std::set<std::size_t>> adj(n);
    std::vector<Edge> edges;
    edges.reserve(t.edges + 16);
    auto add_edge = [&](std::size_t u, std::size_t v, double target_um) {
        const double d = distance(nodes[u].pos, nodes[v].pos);
        Edge e;
        e.id = static_cast<std::int64_t>(edges.size());
        e.a = static_cast<std::int64_t>(std::min(u, v));
        e.b = static_cast<std::int64_t>(std::max(u, v));
        e.length = std::max(target_um, d);
        e.radius = truncated(radius_dist, rng, t.radius_px.min, t.radius_px.max) * px;
        edges.push_back(e);
        adj[u].insert(v);
        adj[v].insert(u);
    };

    // Best partner for `u` at target length `len` among nodes accepted by `ok`.
    auto partner = [&](std::size_t u, double len, auto&& ok) {
        constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
        std::size_t below = none, above = none;
        double below_d = -1.0, above_d = std::numeric_limits<double>::infinity();
        for (std::size_t v = 0; v < n; ++v) {
            if (v == u || adj[u].count(v) || !ok(v)) continue;
            const double d = distance(nodes[u].pos, nodes[v].pos);
            if (d <= len) {
                if (d > below_d) below_d = d, below = v;
            } else if (d < above_d) {
                above_d = d, above = v;
            }
        }
        return below != none ? below : above;
    };

    std::vector<std::size_t> stubs;
    for (std::size_t i = 0; i < n; ++i) stubs.insert(stubs.end(), want[i], i);
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::vector<int> free = want;
    for (std::size_t u : stubs) {
        if (free[u] == 0 || edges.size() >= t.edges) continue;
        const double len =
            truncated(length_dist, rng, t.length_px.min, t.length_px.max) * px;
        const std::size_t v = partner(u, len, [&](std::size_t w) { return free[w] > 0; });
        if (v >= n) continue;
        add_edge(u, v, len);
        --free[u];
        --free[v];
    }

    // Unmatched stubs: top up to the requested edge count.
    {
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        while (edges.size() < t.edges) {
            std::size_t u = pick(rng);
            for (std::size_t i = 0; i < n; ++i)
                if (free[(u + i) % n] > 0) {
                    u = (u + i) % n;
                    break;
                }
            const double len =
                truncated(length_dist, rng, t.length_px.min, t.length_px.max) * px;
            const std::size_t v = partner(u, len, [](std::size_t) { return true; });
            if (v >= n) break;  // u is adjacent to everyone
            add_edge(u, v, len);
            if (free[u] > 0) --free[u];
            if (free[v] > 0) --free[v];
        }
    }

    // Stitch components onto the largest one.
    for (;;) {
        std::vector<std::size_t> label(n, n);
        std::vector<std::size_t> size;
        for (std::size_t s = 0; s < n; ++s) {
            if (label[s] != n) continue;
            const std::size_t id = size.size();
            size.push_back(0);
            std::vector<std::size_t> stack{s};
            label[s] = id;
            while (!stack.empty()) {
                const std::size_t u = stack.back();
                stack.pop_back();
                ++size[id];
                for (std::size_t v : adj[u])
                    if (label[v] == n) label[v] = id, stack.push_back(v);
            }
        }
        if (size.size() == 1) break;
        const std::size_t main =
            static_cast<std::size_t>(std::max_element(size.begin(), size.end()) - size.begin());
        const std::size_t other = main == 0 ? 1 : 0;
        double best = std::numeric_limits<double>::infinity();
        std::size_t bu = 0, bv = 0;
        for (std::size_t u = 0; u < n; ++u) {
            if (label[u] != other) continue;
            for (std::size_t v = 0; v < n; ++v) {
                if (label[v] != main) continue;
                const double d = distance(nodes[u].pos, nodes[v].pos);
                if (d < best) best = d, bu = u, bv = v;
            }
        }
        add_edge(bu, bv, std::max(best, t.length_px.min * px));
    }

    BoundingBox box{{0, 0, 0}, spec.extent};
    return NetworkGraph(std::move(nodes), std::move(edges), t.pixel_scale_nm, box);
}

}  // namespace actinet::net
