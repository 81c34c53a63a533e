#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "actinet/params.hpp"

namespace actinet::net {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

double distance(Vec3 a, Vec3 b);

struct BoundingBox {
    Vec3 min;
    Vec3 max;

    Vec3 extent() const { return max - min; }
    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Node {
    std::int64_t id = 0;
    Vec3 pos;  // um
};

/// A bundle between nodes `a` and `b` (node ids, possibly equal).
struct Edge {
    std::int64_t id = 0;
    std::int64_t a = 0;
    std::int64_t b = 0;
    double radius = 0;  // um
    double length = 0;  // um, >= straight-line distance
};

/// Spatial multigraph of actin bundles. Immutable after construction.
///
/// Nodes and edges are stored sorted by id; `a_index`/`b_index` give the
/// positions of an edge's endpoints in `nodes()`.
class NetworkGraph {
public:
    NetworkGraph() = default;

    /// Validates every invariant; throws InvariantError naming the offending
    /// record. `bbox` defaults to the tight box around the nodes.
    NetworkGraph(std::vector<Node> nodes, std::vector<Edge> edges, double pixel_scale_nm,
                 std::optional<BoundingBox> bbox = std::nullopt);

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    double pixel_scale_nm() const noexcept { return pixel_scale_nm_; }
    const BoundingBox& bbox() const noexcept { return bbox_; }
    bool empty() const noexcept { return nodes_.empty(); }

    std::size_t node_index(std::int64_t id) const;
    std::size_t a_index(std::size_t edge) const { return endpoints_[edge].first; }
    std::size_t b_index(std::size_t edge) const { return endpoints_[edge].second; }

    /// Edge indices incident to node index `n`; a self-loop appears twice.
    std::span<const std::size_t> incident(std::size_t n) const;

private:
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    double pixel_scale_nm_ = 244.14;
    BoundingBox bbox_;
    std::unordered_map<std::int64_t, std::size_t> index_;
    std::vector<std::pair<std::size_t, std::size_t>> endpoints_;
    std::vector<std::size_t> incidence_offsets_;
    std::vector<std::size_t> incidence_;
};

NetworkGraph load_network(const std::filesystem::path& path);
NetworkGraph parse_network(const std::string& json_text);

/// Canonical JSON text (nodes then edges, each sorted by id).
std::string dump_network(const NetworkGraph& g);
void save_network(const NetworkGraph& g, const std::filesystem::path& path);

/// Component label per node index, labels numbered in order of first node.
std::vector<std::size_t> component_labels(const NetworkGraph& g);

/// Subgraph induced by the component with the most nodes (ties: lowest label).
NetworkGraph largest_component(const NetworkGraph& g);

struct Summary {
    double min = 0, max = 0, mean = 0, stddev = 0;
};

/// Population statistics of a sample; throws on empty input.
Summary summarize(std::span<const double> values);

struct NetworkStats {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    Summary degree;      // distinct neighbouring nodes
    Summary radius_px;
    Summary radius_um;
    Summary length_px;
    Summary length_um;
    double pixel_scale_nm = 244.14;

    /// The network summary published for the experimental droplet.
    static NetworkStats paper_table();
};

/// Statistics over the largest connected component.
NetworkStats network_stats(const NetworkGraph& g, double pixel_scale_nm);
NetworkStats network_stats(const NetworkGraph& g);

/// Stats as a JSON object (one key per table row).
std::string stats_json(const NetworkStats& s);

struct GeneratorSpec {
    NetworkStats target = NetworkStats::paper_table();
    Vec3 extent{250.0, 250.0, 110.0};  // um

    static GeneratorSpec paper_defaults() { return {}; }
    void validate() const;
};

GeneratorSpec parse_generator_spec(const std::string& json_text);
GeneratorSpec load_generator_spec(const std::filesystem::path& path);
std::string dump_generator_spec(const GeneratorSpec& spec);

/// Random spatial multigraph with the requested size, degree, radius and
/// length statistics. Pure function of (spec, seed). The result is connected.
NetworkGraph generate_synthetic(const GeneratorSpec& spec, std::uint64_t seed);

using ElementId = std::size_t;
using ParamsAssigner = std::function<params::BundleParams(const Edge&)>;

/// Assigns high-density parameters using each edge's own radius.
ParamsAssigner high_density_assigner(const params::IonEnvironment& env = {},
                                     const params::FilamentGeometry& geom = {});

/// Same parameters for every edge.
ParamsAssigner uniform_assigner(const params::BundleParams& p);

/// Element-level discretisation of a network.
///
/// Element ids [0, node count) are node elements, in node order. Edge `e` then
/// owns the contiguous block [chain_offset(e), chain_offset(e) + chain_length(e))
/// running from endpoint a to endpoint b. Adjacency is implicit, so the
/// structure stays O(nodes + edges) in memory regardless of element count.
class ElementGraph {
public:
    ElementGraph(std::shared_ptr<const NetworkGraph> net, double element_length_um,
                 const ParamsAssigner& assign = uniform_assigner(
                     params::filament_params({}, {})));

    const NetworkGraph& network() const noexcept { return *net_; }
    std::shared_ptr<const NetworkGraph> network_ptr() const noexcept { return net_; }
    double element_length() const noexcept { return element_length_; }

    std::size_t size() const noexcept { return total_; }
    std::size_t node_elements() const noexcept { return net_->nodes().size(); }
    std::size_t chain_offset(std::size_t edge) const { return offsets_[edge]; }
    std::size_t chain_length(std::size_t edge) const { return counts_[edge]; }

    bool is_node(ElementId e) const noexcept { return e < node_elements(); }
    /// Edge index owning a chain element (not valid for node elements).
    std::size_t edge_of(ElementId e) const;
    /// Position of a chain element inside its chain, 0 at the a-end.
    std::size_t chain_position(ElementId e) const { return e - offsets_[edge_of(e)]; }

    /// The M of the element: number of neighbouring elements.
    std::size_t degree(ElementId e) const;

    template <class F>
    void for_each_neighbor(ElementId e, F&& f) const {
        if (is_node(e)) {
            const auto inc = net_->incident(e);
            for (std::size_t k = 0; k < inc.size(); ++k) {
                const std::size_t edge = inc[k];
                const std::size_t first = offsets_[edge];
                const std::size_t last = first + counts_[edge] - 1;
                if (net_->a_index(edge) == net_->b_index(edge)) {
                    // Self-loops are listed twice in a row: a-end, then b-end.
                    f(k > 0 && inc[k - 1] == edge ? last : first);
                } else if (net_->a_index(edge) == e) {
                    f(first);
                } else {
                    f(last);
                }
            }
            return;
        }
        const std::size_t edge = edge_of(e);
        const std::size_t i = e - offsets_[edge];
        f(i == 0 ? net_->a_index(edge) : e - 1);
        f(i + 1 == counts_[edge] ? net_->b_index(edge) : e + 1);
    }

    Vec3 position(ElementId e) const;
    const params::BundleParams& params(ElementId e) const;

    /// histogram[m] = number of elements with degree m.
    std::vector<std::size_t> degree_histogram() const;

private:
    std::shared_ptr<const NetworkGraph> net_;
    double element_length_;
    std::size_t total_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> counts_;
    std::vector<params::BundleParams> edge_params_;
    std::vector<std::size_t> node_param_edge_;
    params::BundleParams fallback_;
};

/// ceil(length / element_length) for one edge, never below 1.
std::size_t chain_length(const Edge& e, double element_length_um);

/// Node elements plus all chain elements, without building anything.
std::size_t element_count(const NetworkGraph& g, double element_length_um);

/// Element length (um) whose element_count is as close as possible to
/// `target`. Throws DomainError when the target is below the node count plus
/// one element per edge.
double calibrate_element_length(const NetworkGraph& g, std::size_t target);

ElementGraph discretize(std::shared_ptr<const NetworkGraph> g, double element_length_um,
                        const ParamsAssigner& assign);

}  // namespace actinet::net
