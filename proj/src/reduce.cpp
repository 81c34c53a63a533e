#include <algorithm>

#include "actinet/error.hpp"
#include "actinet/solver.hpp"

namespace actinet::solver {

ReducedSystem::ReducedSystem(net::ElementGraph eg, std::span<const ElementId> taps,
                             SteadyOptions opts)
    : eg_(std::move(eg)) {
    const std::size_t nodes = eg_.node_elements();
    terminals_.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i) terminals_[i] = i;
    std::vector<ElementId> chain_taps;
    for (ElementId t : taps) {
        if (t >= eg_.size()) throw DomainError("tap element " + std::to_string(t) + " out of range");
        if (!eg_.is_node(t)) chain_taps.push_back(t);
    }
    std::sort(chain_taps.begin(), chain_taps.end());
    chain_taps.erase(std::unique(chain_taps.begin(), chain_taps.end()), chain_taps.end());
    terminals_.insert(terminals_.end(), chain_taps.begin(), chain_taps.end());

    const auto& g = eg_.network();
    mean_weights_.assign(terminals_.size(), 1.0);
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
        const ElementId first = eg_.chain_offset(e);
        const ElementId end = first + eg_.chain_length(e);
        auto lo = std::lower_bound(terminals_.begin() + static_cast<std::ptrdiff_t>(nodes),
                                   terminals_.end(), first);
        auto hi = std::lower_bound(lo, terminals_.end(), end);

        std::size_t prev_slot = g.a_index(e);
        ElementId next_interior = first;
        auto close = [&](std::size_t slot, ElementId stop) {
            Segment s{prev_slot, slot, next_interior, stop - next_interior};
            segments_.push_back(s);
            const double w = 1.0 / static_cast<double>(s.interior + 1);
            links_.push_back({s.u, s.v, w});
            mean_weights_[s.u] += 0.5 * static_cast<double>(s.interior);
            mean_weights_[s.v] += 0.5 * static_cast<double>(s.interior);
        };
        for (auto it = lo; it != hi; ++it) {
            const auto slot = static_cast<std::size_t>(it - terminals_.begin());
            close(slot, *it);
            prev_slot = slot;
            next_interior = *it + 1;
        }
        close(g.b_index(e), end);
    }
    laplacian_ = std::make_unique<LaplacianSolver>(terminals_.size(), links_, opts);
}

bool ReducedSystem::is_terminal(ElementId e) const {
    if (eg_.is_node(e)) return true;
    return std::binary_search(terminals_.begin() + static_cast<std::ptrdiff_t>(eg_.node_elements()),
                              terminals_.end(), e);
}

std::size_t ReducedSystem::slot(ElementId e) const {
    if (eg_.is_node(e)) return e;
    auto begin = terminals_.begin() + static_cast<std::ptrdiff_t>(eg_.node_elements());
    auto it = std::lower_bound(begin, terminals_.end(), e);
    if (it == terminals_.end() || *it != e)
        throw DomainError("element " + std::to_string(e) +
                          " lies inside a chain of the reduced system; add it as a tap or "
                          "use the element-level solver");
    return static_cast<std::size_t>(it - terminals_.begin());
}

ReducedField ReducedSystem::solve(const StimulusPattern& s, const Gauge& gauge) const {
    std::vector<double> rhs(terminals_.size(), 0.0);
    for (const auto& [e, v] : s.entries()) {
        if (e >= eg_.size())
            throw DomainError("stimulus element " + std::to_string(e) + " out of range");
        rhs[slot(e)] += v;
    }
    std::optional<std::size_t> pin;
    if (const auto* p = std::get_if<Pinned>(&gauge)) pin = slot(p->element);
    auto sol = laplacian_->solve(rhs, mean_weights_, pin);
    ReducedField f;
    f.terminal_values = std::move(sol.values);
    f.gauge = gauge;
    f.residual = sol.residual;
    f.warnings = std::move(sol.warnings);
    return f;
}

double ReducedSystem::value(const ReducedField& f, ElementId e) const {
    return f.terminal_values.at(slot(e));
}

std::vector<double> ReducedSystem::interpolate(const ReducedField& f) const {
    std::vector<double> v(eg_.size(), 0.0);
    for (std::size_t i = 0; i < terminals_.size(); ++i) v[terminals_[i]] = f.terminal_values[i];
    for (const auto& s : segments_) {
        const double vu = f.terminal_values[s.u], vv = f.terminal_values[s.v];
        const double span = static_cast<double>(s.interior + 1);
        for (std::size_t j = 0; j < s.interior; ++j)
            v[s.first + j] = vu + (vv - vu) * static_cast<double>(j + 1) / span;
    }
    return v;
}

ReducedSystem reduce_to_weighted(std::shared_ptr<const net::NetworkGraph> g,
                                 double element_length_um, std::span<const ElementId> taps) {
    return ReducedSystem(net::ElementGraph(std::move(g), element_length_um), taps);
}

}  // namespace actinet::solver
