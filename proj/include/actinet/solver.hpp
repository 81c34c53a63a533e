#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "actinet/netmodel.hpp"
#include "actinet/params.hpp"

namespace actinet::solver {

using net::ElementId;

/// Forcing terms F_n. Entries are kept sorted by element with duplicates merged.
class StimulusPattern {
public:
    StimulusPattern() = default;

    /// +amplitude on every `plus` element, -amplitude on every `minus` element.
    static StimulusPattern dipole(std::span<const ElementId> plus,
                                  std::span<const ElementId> minus, double amplitude = 1.0,
                                  std::optional<double> t_off = std::nullopt);

    void add(ElementId e, double value);
    StimulusPattern& operator+=(const StimulusPattern& other);

    std::span<const std::pair<ElementId, double>> entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    double total() const;
    double max_abs() const;

    /// Nominal input amplitude A (used for convergence and blow-up scales).
    double amplitude = 1.0;
    /// Inputs are active for t < t_off (in element time units); empty = always.
    std::optional<double> t_off;

private:
    std::vector<std::pair<ElementId, double>> entries_;
};

/// JSON {plus: [ids], minus: [ids], amplitude, t1}; t1 may be null or absent.
StimulusPattern parse_stimulus(const std::string& json_text);
StimulusPattern load_stimulus(const std::filesystem::path& path);

struct ZeroMean {};
struct Pinned {
    ElementId element;
};
/// The steady Laplacian is singular per component; the gauge picks the constant.
using Gauge = std::variant<ZeroMean, Pinned>;

struct PotentialField {
    std::vector<double> values;
    Gauge gauge = ZeroMean{};
    /// max-norm residual of L V = F after projecting F onto the range of L.
    double residual = 0;
    std::vector<std::string> warnings;

    double at(ElementId e) const { return values.at(e); }
};

struct SteadyOptions {
    /// Components up to this size use a sparse LDLT factorisation, larger ones
    /// diagonally preconditioned conjugate gradients.
    std::size_t direct_limit = 100000;
    double tolerance = 1e-10;
};

/// Weighted graph Laplacian L with per-component factorisation; solves L x = b.
///
/// Right-hand sides whose sum on a component is nonzero are projected onto the
/// range of L (the least-squares reading) and reported in `warnings`.
class LaplacianSolver {
public:
    struct Link {
        std::size_t i, j;
        double weight;
    };

    struct Solution {
        std::vector<double> values;
        double residual = 0;
        std::vector<std::string> warnings;
    };

    LaplacianSolver(std::size_t n, std::span<const Link> links, SteadyOptions opts = {});
    ~LaplacianSolver();
    LaplacianSolver(LaplacianSolver&&) noexcept;
    LaplacianSolver& operator=(LaplacianSolver&&) noexcept;

    std::size_t size() const;
    std::size_t component_count() const;
    const std::vector<std::size_t>& component_of() const;

    /// `mean_weights` (empty = uniform) define the zero-mean gauge
    /// sum_i w_i x_i = 0 per component; `pin` instead fixes x[pin] = 0 on its
    /// own component.
    Solution solve(std::span<const double> rhs, std::span<const double> mean_weights = {},
                   std::optional<std::size_t> pin = std::nullopt) const;

    /// y = L x
    std::vector<double> apply(std::span<const double> x) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Unit-weight links of the element graph (one per adjacent element pair,
/// repeated for parallel adjacencies).
std::vector<LaplacianSolver::Link> element_links(const net::ElementGraph& eg);

/// Steady solver for a fixed element graph; factorises once, solves many.
class SteadySolver {
public:
    explicit SteadySolver(const net::ElementGraph& eg, SteadyOptions opts = {});
    PotentialField solve(const StimulusPattern& s, const Gauge& gauge = ZeroMean{}) const;
    const LaplacianSolver& laplacian() const { return laplacian_; }

private:
    std::size_t size_;
    LaplacianSolver laplacian_;
};

/// Time-independent solution of the element equations:
/// sum_k V_{n_k} - M V_n + F_n = 0.
PotentialField steady_state(const net::ElementGraph& eg, const StimulusPattern& s,
                            const Gauge& gauge = ZeroMean{}, SteadyOptions opts = {});

class ReducedSystem;

struct ReducedField {
    /// One value per terminal, in ReducedSystem::terminals() order.
    std::vector<double> terminal_values;
    Gauge gauge = ZeroMean{};
    double residual = 0;
    std::vector<std::string> warnings;
};

/// Exact node-level reduction of the steady element system.
///
/// Terminals are all node elements plus optional tap elements on chains. Each
/// run of chain elements between consecutive terminals collapses to one link
/// of weight 1 / (interior elements + 1); interior potentials are the linear
/// interpolation between the terminals. Stimuli must sit on terminals.
class ReducedSystem {
public:
    explicit ReducedSystem(net::ElementGraph eg, std::span<const ElementId> taps = {},
                           SteadyOptions opts = {});

    const net::ElementGraph& elements() const { return eg_; }
    std::span<const ElementId> terminals() const { return terminals_; }
    bool is_terminal(ElementId e) const;
    /// Index into terminals(); throws DomainError for non-terminals.
    std::size_t slot(ElementId e) const;

    const std::vector<LaplacianSolver::Link>& links() const { return links_; }
    /// Weight of each terminal in the element-level mean.
    std::span<const double> mean_weights() const { return mean_weights_; }

    ReducedField solve(const StimulusPattern& s, const Gauge& gauge = ZeroMean{}) const;

    /// Potential at a terminal. Chain interiors are refused: use interpolate()
    /// or the element-level solver.
    double value(const ReducedField& f, ElementId e) const;

    /// Full element-level field reconstructed by linear interpolation.
    std::vector<double> interpolate(const ReducedField& f) const;

private:
    struct Segment {
        std::size_t u, v;         // terminal slots
        ElementId first;          // first interior element (ids run contiguously)
        std::size_t interior;     // number of interior elements, ids increase u -> v
    };

    net::ElementGraph eg_;
    std::vector<ElementId> terminals_;
    std::vector<Segment> segments_;
    std::vector<LaplacianSolver::Link> links_;
    std::vector<double> mean_weights_;
    std::unique_ptr<LaplacianSolver> laplacian_;
};

/// reduce_to_weighted(g, element_length): node-level system of a network.
ReducedSystem reduce_to_weighted(std::shared_ptr<const net::NetworkGraph> g,
                                 double element_length_um,
                                 std::span<const ElementId> taps = {});

/// Root of V - b V^2 = W on the branch through V = W at b = 0.
/// Throws DomainError unless |4 b W| < 1.
double invert_w(double w, double b);

struct TransientOptions {
    /// Step and horizon in units of the reference time sqrt(L C0) (the
    /// smallest over all elements).
    double dt = 0.01;
    double t_end = 1.0;
    std::vector<ElementId> probes;
    std::size_t sample_every = 1;
    /// Record the discrete energy at every sample.
    bool record_energy = false;
    bool stop_when_converged = false;
    /// Converged once max|dW/dt| < convergence_tol * amplitude for one full
    /// characteristic period (2 pi time units).
    double convergence_tol = 1e-8;
    /// Abort when max|W| exceeds this multiple of the input scale.
    double blowup_factor = 1e6;
};

struct Trajectory {
    double time_unit = 1;  // seconds per unit of `times`
    double dt = 0;
    std::vector<ElementId> probes;
    std::vector<double> times;
    std::vector<double> samples;  // row-major: times.size() x probes.size()
    std::vector<double> energy;   // filled when record_energy
    std::vector<double> w;        // final W_n
    std::vector<double> w_dot;    // final dW_n/dt
    std::vector<double> v;        // final V_n
    std::optional<double> converged_at;

    double sample(std::size_t step, std::size_t probe) const {
        return samples[step * probes.size() + probe];
    }
};

/// Largest step (in reference time units) for which fixed-step RK4 is stable
/// on the linearised element system.
double stable_step(const net::ElementGraph& eg);

/// Fixed-step RK4 integration of the second-order element equations in the
/// auxiliary variable W_n = V_n - b V_n^2, from rest.
Trajectory transient(const net::ElementGraph& eg, const StimulusPattern& s,
                     const TransientOptions& opts);

struct PropagationEstimate {
    double total_time = 0;   // s
    double velocity = 0;     // m/s
    double per_element = 0;  // s
    double path_length = 0;  // m
};

/// RC discharge estimate over `element_count` elements of length
/// `element_length` (m): total = count * R1 C0.
PropagationEstimate propagation_time(std::size_t element_count, const params::BundleParams& p,
                                     double element_length = 5.4e-9);
PropagationEstimate propagation_time(std::size_t element_count, double per_element_time,
                                     double element_length = 5.4e-9);

}  // namespace actinet::solver
