#include "actinet/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "actinet/error.hpp"

namespace actinet::net {

using json = nlohmann::json;

double distance(Vec3 a, Vec3 b) {
    const Vec3 d = a - b;
    return std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
}

NetworkGraph::NetworkGraph(std::vector<Node> nodes, std::vector<Edge> edges,
                           double pixel_scale_nm, std::optional<BoundingBox> bbox)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), pixel_scale_nm_(pixel_scale_nm) {
    if (!(pixel_scale_nm_ > 0))
        throw InvariantError("pixel scale must be positive");

    std::sort(nodes_.begin(), nodes_.end(),
              [](const Node& l, const Node& r) { return l.id < r.id; });
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& l, const Edge& r) { return l.id < r.id; });

    index_.reserve(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (!std::isfinite(n.pos.x) || !std::isfinite(n.pos.y) || !std::isfinite(n.pos.z))
            throw InvariantError("node " + std::to_string(n.id) + ": non-finite position");
        if (!index_.emplace(n.id, i).second)
            throw InvariantError("node " + std::to_string(n.id) + ": duplicate id");
    }

    endpoints_.reserve(edges_.size());
    std::vector<std::size_t> deg(nodes_.size(), 0);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const auto& e = edges_[i];
        const std::string tag = "edge " + std::to_string(e.id) + ": ";
        if (i > 0 && edges_[i - 1].id == e.id) throw InvariantError(tag + "duplicate id");
        auto ia = index_.find(e.a);
        if (ia == index_.end())
            throw InvariantError(tag + "references missing node " + std::to_string(e.a));
        auto ib = index_.find(e.b);
        if (ib == index_.end())
            throw InvariantError(tag + "references missing node " + std::to_string(e.b));
        if (!(e.radius > 0) || !std::isfinite(e.radius))
            throw InvariantError(tag + "radius must be positive");
        if (!(e.length > 0) || !std::isfinite(e.length))
            throw InvariantError(tag + "length must be positive");
        const double d = distance(nodes_[ia->second].pos, nodes_[ib->second].pos);
        if (e.length < d * (1.0 - 1e-9))
            throw InvariantError(tag + "length " + std::to_string(e.length) +
                                 " shorter than endpoint distance " + std::to_string(d));
        endpoints_.emplace_back(ia->second, ib->second);
        ++deg[ia->second];
        ++deg[ib->second];
    }

    incidence_offsets_.assign(nodes_.size() + 1, 0);
    for (std::size_t n = 0; n < nodes_.size(); ++n)
        incidence_offsets_[n + 1] = incidence_offsets_[n] + deg[n];
    incidence_.resize(incidence_offsets_.back());
    std::vector<std::size_t> fill(incidence_offsets_.begin(), incidence_offsets_.end() - 1);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        incidence_[fill[endpoints_[i].first]++] = i;
        incidence_[fill[endpoints_[i].second]++] = i;
    }

    if (bbox) {
        bbox_ = *bbox;
    } else if (!nodes_.empty()) {
        constexpr double inf = std::numeric_limits<double>::infinity();
        bbox_ = {{inf, inf, inf}, {-inf, -inf, -inf}};
        for (const auto& n : nodes_) {
            bbox_.min = {std::min(bbox_.min.x, n.pos.x), std::min(bbox_.min.y, n.pos.y),
                         std::min(bbox_.min.z, n.pos.z)};
            bbox_.max = {std::max(bbox_.max.x, n.pos.x), std::max(bbox_.max.y, n.pos.y),
                         std::max(bbox_.max.z, n.pos.z)};
        }
    }
}

std::size_t NetworkGraph::node_index(std::int64_t id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw DomainError("no node with id " + std::to_string(id));
    return it->second;
}

std::span<const std::size_t> NetworkGraph::incident(std::size_t n) const {
    return {incidence_.data() + incidence_offsets_[n],
            incidence_offsets_[n + 1] - incidence_offsets_[n]};
}

namespace {

Vec3 vec_from(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec_to(Vec3 v) { return json::array({v.x, v.y, v.z}); }

}  // namespace

NetworkGraph parse_network(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("network file: ") + e.what());
    }
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    double scale = 0;
    std::optional<BoundingBox> bbox;
    std::size_t record = 0;
    std::string where = "header";
    try {
        scale = doc.at("pixel_scale_nm").get<double>();
        where = "node";
        for (const auto& n : doc.at("nodes")) {
            nodes.push_back({n.at("id").get<std::int64_t>(),
                             {n.at("x_um").get<double>(), n.at("y_um").get<double>(),
                              n.at("z_um").get<double>()}});
            ++record;
        }
        where = "edge";
        record = 0;
        for (const auto& e : doc.at("edges")) {
            edges.push_back({e.at("id").get<std::int64_t>(), e.at("a").get<std::int64_t>(),
                             e.at("b").get<std::int64_t>(), e.at("radius_um").get<double>(),
                             e.at("length_um").get<double>()});
            ++record;
        }
        where = "bbox_um";
        if (doc.contains("bbox_um"))
            bbox = BoundingBox{vec_from(doc["bbox_um"].at("min")),
                               vec_from(doc["bbox_um"].at("max"))};
    } catch (const json::exception& e) {
        throw ParseError("network file: " + where + " record " + std::to_string(record) +
                         ": " + e.what());
    }
    return NetworkGraph(std::move(nodes), std::move(edges), scale, bbox);
}

NetworkGraph load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open network file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_network(buf.str());
}

std::string dump_network(const NetworkGraph& g) {
    json doc;
    doc["pixel_scale_nm"] = g.pixel_scale_nm();
    doc["bbox_um"] = {{"min", vec_to(g.bbox().min)}, {"max", vec_to(g.bbox().max)}};
    json nodes = json::array();
    for (const auto& n : g.nodes())
        nodes.push_back({{"id", n.id}, {"x_um", n.pos.x}, {"y_um", n.pos.y}, {"z_um", n.pos.z}});
    json edges = json::array();
    for (const auto& e : g.edges())
        edges.push_back({{"id", e.id},
                         {"a", e.a},
                         {"b", e.b},
                         {"radius_um", e.radius},
                         {"length_um", e.length}});
    doc["nodes"] = std::move(nodes);
    doc["edges"] = std::move(edges);
    return doc.dump(1) + "\n";
}

void save_network(const NetworkGraph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << dump_network(g);
}

std::vector<std::size_t> component_labels(const NetworkGraph& g) {
    constexpr std::size_t unset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> label(g.nodes().size(), unset);
    std::vector<std::size_t> stack;
    std::size_t next = 0;
    for (std::size_t s = 0; s < label.size(); ++s) {
        if (label[s] != unset) continue;
        label[s] = next;
        stack.push_back(s);
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t e : g.incident(u)) {
                const std::size_t v = g.a_index(e) == u ? g.b_index(e) : g.a_index(e);
                if (label[v] == unset) {
                    label[v] = next;
                    stack.push_back(v);
                }
            }
        }
        ++next;
    }
    return label;
}

NetworkGraph largest_component(const NetworkGraph& g) {
    if (g.empty()) return g;
    const auto label = component_labels(g);
    const std::size_t count = *std::max_element(label.begin(), label.end()) + 1;
    std::vector<std::size_t> size(count, 0);
    for (auto l : label) ++size[l];
    const std::size_t best = static_cast<std::size_t>(
        std::max_element(size.begin(), size.end()) - size.begin());
    if (size[best] == g.nodes().size()) return g;

    std::vector<Node> nodes;
    for (std::size_t i = 0; i < g.nodes().size(); ++i)
        if (label[i] == best) nodes.push_back(g.nodes()[i]);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < g.edges().size(); ++i)
        if (label[g.a_index(i)] == best) edges.push_back(g.edges()[i]);
    return NetworkGraph(std::move(nodes), std::move(edges), g.pixel_scale_nm(), g.bbox());
}

Summary summarize(std::span<const double> values) {
    if (values.empty()) throw DomainError("cannot summarize an empty sample");
    Summary s;
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / n);
    // Rounding in the mean can push it a hair outside [min, max].
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

NetworkStats NetworkStats::paper_table() {
    NetworkStats t;
    t.nodes = 2968;
    t.edges = 7583;
    t.degree = {1.0, 13.0, 5.07, 2.14};
    t.radius_px = {3.0, 20.0, 8.48, 2.62};
    t.length_px = {4.12, 465.40, 70.11, 41.54};
    t.pixel_scale_nm = 244.14;
    const double k = t.pixel_scale_nm / 1000.0;
    t.radius_um = {t.radius_px.min * k, t.radius_px.max * k, t.radius_px.mean * k,
                   t.radius_px.stddev * k};
    t.length_um = {t.length_px.min * k, t.length_px.max * k, t.length_px.mean * k,
                   t.length_px.stddev * k};
    return t;
}

NetworkStats network_stats(const NetworkGraph& g) {
    return network_stats(g, g.pixel_scale_nm());
}

NetworkStats network_stats(const NetworkGraph& full, double pixel_scale_nm) {
    if (full.empty()) throw DomainError("network_stats: empty graph");
    if (!(pixel_scale_nm > 0)) throw DomainError("pixel scale must be positive");
    const NetworkGraph g = largest_component(full);

    NetworkStats s;
    s.nodes = g.nodes().size();
    s.edges = g.edges().size();
    s.pixel_scale_nm = pixel_scale_nm;

    std::vector<double> degree(s.nodes);
    std::vector<std::size_t> seen;
    for (std::size_t u = 0; u < s.nodes; ++u) {
        seen.clear();
        for (std::size_t e : g.incident(u)) {
            const std::size_t v = g.a_index(e) == u ? g.b_index(e) : g.a_index(e);
            if (v != u) seen.push_back(v);
        }
        std::sort(seen.begin(), seen.end());
        degree[u] = static_cast<double>(std::unique(seen.begin(), seen.end()) - seen.begin());
    }
    s.degree = summarize(degree);

    if (s.edges > 0) {
        const double to_px = 1000.0 / pixel_scale_nm;
        std::vector<double> radius, length;
        for (const auto& e : g.edges()) {
            radius.push_back(e.radius);
            length.push_back(e.length);
        }
        s.radius_um = summarize(radius);
        s.length_um = summarize(length);
        for (auto& r : radius) r *= to_px;
        for (auto& l : length) l *= to_px;
        s.radius_px = summarize(radius);
        s.length_px = summarize(length);
    }
    return s;
}

std::string stats_json(const NetworkStats& s) {
    auto summary = [](const Summary& x) {
        return json{{"min", x.min}, {"max", x.max}, {"mean", x.mean}, {"stddev", x.stddev}};
    };
    json j;
    j["nodes"] = s.nodes;
    j["edges"] = s.edges;
    j["pixel_scale_nm"] = s.pixel_scale_nm;
    j["degree"] = summary(s.degree);
    j["radius_px"] = summary(s.radius_px);
    j["radius_um"] = summary(s.radius_um);
    j["length_px"] = summary(s.length_px);
    j["length_um"] = summary(s.length_um);
    return j.dump(1) + "\n";
}

}  // namespace actinet::net
