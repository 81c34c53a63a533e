#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <json.hpp>

#include "actinet/error.hpp"
#include "actinet/solver.hpp"

namespace actinet::solver {

using SpMat = Eigen::SparseMatrix<double>;
using json = nlohmann::json;

StimulusPattern StimulusPattern::dipole(std::span<const ElementId> plus,
                                        std::span<const ElementId> minus, double amplitude,
                                        std::optional<double> t_off) {
    StimulusPattern s;
    for (ElementId e : plus)
        if (std::find(minus.begin(), minus.end(), e) != minus.end())
            throw DomainError("element " + std::to_string(e) + " is in both plus and minus sets");
    for (ElementId e : plus) s.add(e, amplitude);
    for (ElementId e : minus) s.add(e, -amplitude);
    s.amplitude = amplitude;
    s.t_off = t_off;
    return s;
}

void StimulusPattern::add(ElementId e, double value) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), e,
                               [](const auto& p, ElementId k) { return p.first < k; });
    if (it != entries_.end() && it->first == e)
        it->second += value;
    else
        entries_.insert(it, {e, value});
}

StimulusPattern& StimulusPattern::operator+=(const StimulusPattern& other) {
    for (const auto& [e, v] : other.entries_) add(e, v);
    return *this;
}

double StimulusPattern::total() const {
    double t = 0;
    for (const auto& [e, v] : entries_) t += v;
    return t;
}

double StimulusPattern::max_abs() const {
    double m = 0;
    for (const auto& [e, v] : entries_) m = std::max(m, std::abs(v));
    return m;
}

StimulusPattern parse_stimulus(const std::string& json_text) {
    try {
        const json doc = json::parse(json_text);
        const auto plus = doc.value("plus", std::vector<ElementId>{});
        const auto minus = doc.value("minus", std::vector<ElementId>{});
        const double amplitude = doc.value("amplitude", 1.0);
        std::optional<double> t_off;
        if (doc.contains("t1") && !doc["t1"].is_null()) t_off = doc["t1"].get<double>();
        return StimulusPattern::dipole(plus, minus, amplitude, t_off);
    } catch (const json::exception& e) {
        throw ParseError(std::string("stimulus file: ") + e.what());
    }
}

StimulusPattern load_stimulus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open stimulus file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_stimulus(buf.str());
}

struct LaplacianSolver::Impl {
    struct Component {
        std::vector<std::size_t> vertices;
        bool direct = true;
        SpMat reduced;  // Laplacian with the first vertex removed
        std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> ldlt;
    };

    std::size_t n = 0;
    SteadyOptions opts;
    SpMat full;
    std::vector<std::size_t> comp_of;
    std::vector<std::size_t> local;
    std::vector<Component> comps;
};

LaplacianSolver::LaplacianSolver(std::size_t n, std::span<const Link> links, SteadyOptions opts)
    : impl_(std::make_unique<Impl>()) {
    auto& im = *impl_;
    im.n = n;
    im.opts = opts;

    // Union-find for components.
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * links.size());
    for (const auto& l : links) {
        if (l.i >= n || l.j >= n) throw DomainError("Laplacian link out of range");
        if (!(l.weight > 0)) throw DomainError("Laplacian weights must be positive");
        if (l.i == l.j) continue;
        parent[find(l.i)] = find(l.j);
        trip.emplace_back(l.i, l.i, l.weight);
        trip.emplace_back(l.j, l.j, l.weight);
        trip.emplace_back(l.i, l.j, -l.weight);
        trip.emplace_back(l.j, l.i, -l.weight);
    }
    im.full.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    im.full.setFromTriplets(trip.begin(), trip.end());

    std::vector<std::size_t> root_comp(n, static_cast<std::size_t>(-1));
    im.comp_of.resize(n);
    im.local.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        const std::size_t r = find(v);
        if (root_comp[r] == static_cast<std::size_t>(-1)) {
            root_comp[r] = im.comps.size();
            im.comps.emplace_back();
        }
        auto& c = im.comps[root_comp[r]];
        im.comp_of[v] = root_comp[r];
        im.local[v] = c.vertices.size();
        c.vertices.push_back(v);
    }

    std::vector<std::vector<Eigen::Triplet<double>>> per(im.comps.size());
    for (int k = 0; k < im.full.outerSize(); ++k)
        for (SpMat::InnerIterator it(im.full, k); it; ++it) {
            const auto r = static_cast<std::size_t>(it.row());
            const auto c = static_cast<std::size_t>(it.col());
            const std::size_t lr = im.local[r], lc = im.local[c];
            if (lr == 0 || lc == 0) continue;
            per[im.comp_of[r]].emplace_back(lr - 1, lc - 1, it.value());
        }
    for (std::size_t ci = 0; ci < im.comps.size(); ++ci) {
        auto& c = im.comps[ci];
        const auto m = static_cast<Eigen::Index>(c.vertices.size() - 1);
        if (m == 0) continue;
        c.reduced.resize(m, m);
        c.reduced.setFromTriplets(per[ci].begin(), per[ci].end());
        c.direct = c.vertices.size() <= opts.direct_limit;
        if (c.direct) {
            c.ldlt = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(c.reduced);
            if (c.ldlt->info() != Eigen::Success)
                throw SolverError("sparse LDLT factorisation failed");
        }
    }
}

LaplacianSolver::~LaplacianSolver() = default;
LaplacianSolver::LaplacianSolver(LaplacianSolver&&) noexcept = default;
LaplacianSolver& LaplacianSolver::operator=(LaplacianSolver&&) noexcept = default;

std::size_t LaplacianSolver::size() const { return impl_->n; }
std::size_t LaplacianSolver::component_count() const { return impl_->comps.size(); }
const std::vector<std::size_t>& LaplacianSolver::component_of() const { return impl_->comp_of; }

std::vector<double> LaplacianSolver::apply(std::span<const double> x) const {
    const auto& im = *impl_;
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::VectorXd y = im.full * xv;
    return {y.data(), y.data() + y.size()};
}

LaplacianSolver::Solution LaplacianSolver::solve(std::span<const double> rhs,
                                                 std::span<const double> mean_weights,
                                                 std::optional<std::size_t> pin) const {
    const auto& im = *impl_;
    if (rhs.size() != im.n) throw DomainError("right-hand side has the wrong size");
    if (!mean_weights.empty() && mean_weights.size() != im.n)
        throw DomainError("mean weights have the wrong size");
    if (pin && *pin >= im.n) throw DomainError("pinned vertex out of range");

    Solution out;
    out.values.assign(im.n, 0.0);
    std::vector<double> projected(rhs.begin(), rhs.end());
    double rhs_max = 0;
    for (double v : rhs) rhs_max = std::max(rhs_max, std::abs(v));
    const double bound = im.opts.tolerance * std::max(1.0, rhs_max);

    for (std::size_t ci = 0; ci < im.comps.size(); ++ci) {
        const auto& c = im.comps[ci];
        double sum = 0, mag = 0;
        for (std::size_t v : c.vertices) sum += rhs[v], mag += std::abs(rhs[v]);
        if (std::abs(sum) > 1e-12 * std::max(1.0, mag)) {
            std::ostringstream msg;
            msg << "component " << ci << " (vertex " << c.vertices.front()
                << "): stimulus sums to " << sum << ", solved in least-squares sense";
            out.warnings.push_back(msg.str());
        }
        const double shift = sum / static_cast<double>(c.vertices.size());
        for (std::size_t v : c.vertices) projected[v] -= shift;
        if (c.vertices.size() == 1) continue;

        const auto m = static_cast<Eigen::Index>(c.vertices.size() - 1);
        Eigen::VectorXd b(m);
        for (Eigen::Index i = 0; i < m; ++i) b[i] = projected[c.vertices[i + 1]];
        Eigen::VectorXd x;
        if (c.direct) {
            x = c.ldlt->solve(b);
            for (int refine = 0; refine < 3; ++refine) {
                const Eigen::VectorXd r = b - c.reduced * x;
                if (r.lpNorm<Eigen::Infinity>() <= 0.1 * bound) break;
                x += c.ldlt->solve(r);
            }
        } else {
            Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                                     Eigen::DiagonalPreconditioner<double>>
                cg;
            cg.compute(c.reduced);
            const double bnorm = b.norm();
            if (bnorm > 0) {
                cg.setTolerance(std::min(0.5, 0.25 * bound / bnorm));
                cg.setMaxIterations(20 * m + 100);
                x = cg.solve(b);
                if (cg.info() != Eigen::Success)
                    throw SolverError("conjugate gradients did not converge after " +
                                      std::to_string(cg.iterations()) + " iterations");
            } else {
                x = Eigen::VectorXd::Zero(m);
            }
        }
        for (Eigen::Index i = 0; i < m; ++i) out.values[c.vertices[i + 1]] = x[i];

        // Gauge.
        double offset = 0;
        if (pin && im.comp_of[*pin] == ci) {
            offset = out.values[*pin];
        } else {
            double wsum = 0, acc = 0;
            for (std::size_t v : c.vertices) {
                const double w = mean_weights.empty() ? 1.0 : mean_weights[v];
                wsum += w;
                acc += w * out.values[v];
            }
            offset = acc / wsum;
        }
        for (std::size_t v : c.vertices) out.values[v] -= offset;
    }

    const auto lx = apply(out.values);
    for (std::size_t i = 0; i < im.n; ++i)
        out.residual = std::max(out.residual, std::abs(lx[i] - projected[i]));
    if (out.residual > bound) {
        std::ostringstream msg;
        msg << "steady solve residual " << out.residual << " exceeds bound " << bound;
        throw SolverError(msg.str());
    }
    return out;
}

std::vector<LaplacianSolver::Link> element_links(const net::ElementGraph& eg) {
    const auto& g = eg.network();
    std::vector<LaplacianSolver::Link> links;
    links.reserve(eg.size() - eg.node_elements() + g.edges().size());
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
        const std::size_t first = eg.chain_offset(e);
        const std::size_t m = eg.chain_length(e);
        links.push_back({g.a_index(e), first, 1.0});
        for (std::size_t i = 0; i + 1 < m; ++i) links.push_back({first + i, first + i + 1, 1.0});
        links.push_back({first + m - 1, g.b_index(e), 1.0});
    }
    return links;
}

namespace {

std::vector<double> dense_rhs(const StimulusPattern& s, std::size_t n) {
    std::vector<double> f(n, 0.0);
    for (const auto& [e, v] : s.entries()) {
        if (e >= n) throw DomainError("stimulus element " + std::to_string(e) + " out of range");
        f[e] = v;
    }
    return f;
}

}  // namespace

SteadySolver::SteadySolver(const net::ElementGraph& eg, SteadyOptions opts)
    : size_(eg.size()), laplacian_(eg.size(), element_links(eg), opts) {}

PotentialField SteadySolver::solve(const StimulusPattern& s, const Gauge& gauge) const {
    std::optional<std::size_t> pin;
    if (const auto* p = std::get_if<Pinned>(&gauge)) {
        if (p->element >= size_) throw DomainError("pinned element out of range");
        pin = p->element;
    }
    auto sol = laplacian_.solve(dense_rhs(s, size_), {}, pin);
    PotentialField f;
    f.values = std::move(sol.values);
    f.gauge = gauge;
    f.residual = sol.residual;
    f.warnings = std::move(sol.warnings);
    return f;
}

PotentialField steady_state(const net::ElementGraph& eg, const StimulusPattern& s,
                            const Gauge& gauge, SteadyOptions opts) {
    return SteadySolver(eg, opts).solve(s, gauge);
}

}  // namespace actinet::solver
