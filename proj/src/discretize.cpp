#include <algorithm>
#include <cmath>

#include "actinet/error.hpp"
#include "actinet/netmodel.hpp"

namespace actinet::net {

ParamsAssigner high_density_assigner(const params::IonEnvironment& env,
                                     const params::FilamentGeometry& geom) {
    return [env, geom](const Edge& e) {
        const double r = std::max(e.radius * 1e-6, geom.radius);
        return params::bundle_params(env, geom, params::HighDensity{r});
    };
}

ParamsAssigner uniform_assigner(const params::BundleParams& p) {
    return [p](const Edge&) { return p; };
}

std::size_t chain_length(const Edge& e, double element_length_um) {
    const double m = std::ceil(e.length / element_length_um);
    return std::max<std::size_t>(1, static_cast<std::size_t>(m));
}

std::size_t element_count(const NetworkGraph& g, double element_length_um) {
    if (!(element_length_um > 0)) throw DomainError("element length must be positive");
    std::size_t total = g.nodes().size();
    for (const auto& e : g.edges()) total += chain_length(e, element_length_um);
    return total;
}

double calibrate_element_length(const NetworkGraph& g, std::size_t target) {
    const std::size_t floor_count = g.nodes().size() + g.edges().size();
    if (target < floor_count)
        throw DomainError("target element count " + std::to_string(target) +
                          " is below nodes + edges = " + std::to_string(floor_count));
    double longest = 0;
    for (const auto& e : g.edges()) longest = std::max(longest, e.length);
    if (longest == 0) return 1.0;
    // element_count is non-increasing in the element length.
    double lo = longest / static_cast<double>(target);  // count >= target here
    double hi = longest * 2.0;                            // count == floor_count
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (element_count(g, mid) >= target)
            lo = mid;
        else
            hi = mid;
    }
    const auto gap = [&](double len) {
        const auto c = static_cast<double>(element_count(g, len));
        return std::abs(c - static_cast<double>(target));
    };
    return gap(lo) <= gap(hi) ? lo : hi;
}

ElementGraph::ElementGraph(std::shared_ptr<const NetworkGraph> net, double element_length_um,
                           const ParamsAssigner& assign)
    : net_(std::move(net)), element_length_(element_length_um) {
    if (!net_) throw DomainError("discretize: null network");
    if (!(element_length_ > 0) || !std::isfinite(element_length_))
        throw DomainError("discretize: element length must be positive");

    const auto& edges = net_->edges();
    offsets_.resize(edges.size());
    counts_.resize(edges.size());
    edge_params_.reserve(edges.size());
    total_ = net_->nodes().size();
    for (std::size_t i = 0; i < edges.size(); ++i) {
        offsets_[i] = total_;
        counts_[i] = net::chain_length(edges[i], element_length_);
        total_ += counts_[i];
        edge_params_.push_back(assign(edges[i]));
        edge_params_.back().validate();
    }

    // Node elements inherit the parameters of their widest incident bundle.
    constexpr auto none = static_cast<std::size_t>(-1);
    node_param_edge_.assign(net_->nodes().size(), none);
    for (std::size_t n = 0; n < net_->nodes().size(); ++n) {
        for (std::size_t e : net_->incident(n)) {
            auto& best = node_param_edge_[n];
            if (best == none || edges[e].radius > edges[best].radius) best = e;
        }
    }
    fallback_ = edge_params_.empty() ? params::filament_params({}, {}) : edge_params_.front();
}

std::size_t ElementGraph::edge_of(ElementId e) const {
    if (is_node(e) || e >= total_) throw DomainError("element " + std::to_string(e) +
                                                      " is not a chain element");
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), e);
    return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

std::size_t ElementGraph::degree(ElementId e) const {
    if (is_node(e)) return net_->incident(e).size();
    return 2;
}

Vec3 ElementGraph::position(ElementId e) const {
    if (is_node(e)) return net_->nodes()[e].pos;
    const std::size_t edge = edge_of(e);
    const Vec3 a = net_->nodes()[net_->a_index(edge)].pos;
    const Vec3 b = net_->nodes()[net_->b_index(edge)].pos;
    const double f = static_cast<double>(e - offsets_[edge] + 1) /
                     static_cast<double>(counts_[edge] + 1);
    return a + f * (b - a);
}

const params::BundleParams& ElementGraph::params(ElementId e) const {
    if (is_node(e)) {
        const std::size_t edge = node_param_edge_[e];
        return edge == static_cast<std::size_t>(-1) ? fallback_ : edge_params_[edge];
    }
    return edge_params_[edge_of(e)];
}

std::vector<std::size_t> ElementGraph::degree_histogram() const {
    std::vector<std::size_t> hist(3, 0);
    for (std::size_t n = 0; n < node_elements(); ++n) {
        const std::size_t m = degree(n);
        if (m >= hist.size()) hist.resize(m + 1, 0);
        ++hist[m];
    }
    hist[2] += total_ - node_elements();
    return hist;
}

ElementGraph discretize(std::shared_ptr<const NetworkGraph> g, double element_length_um,
                        const ParamsAssigner& assign) {
    return ElementGraph(std::move(g), element_length_um, assign);
}

}  // namespace actinet::net
