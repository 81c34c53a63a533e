#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include "actinet/error.hpp"
#include "actinet/solver.hpp"

namespace actinet::solver {

double invert_w(double w, double b) {
    if (b == 0.0) return w;
    const double disc = 1.0 - 4.0 * b * w;
    if (!(disc > 0.0)) {
        std::ostringstream msg;
        msg << "invert_w: |4 b W| = " << std::abs(4.0 * b * w) << " >= 1 (b = " << b
            << ", W = " << w << ")";
        throw DomainError(msg.str());
    }
    // Same root as (1 - sqrt(disc)) / (2 b), without the cancellation.
    return 2.0 * w / (1.0 + std::sqrt(disc));
}

namespace {

// Per-element coefficients in reference time units.
struct Coefficients {
    double tau = 1;  // seconds per unit time
    std::vector<double> stiffness;  // tau^2 / (L C0)
    std::vector<double> damping;    // R1 C0 / tau
    std::vector<double> coupling;   // R2 C0 / tau
    std::vector<double> b;
    std::vector<std::size_t> offsets;  // CSR adjacency
    std::vector<std::size_t> adj;
};

Coefficients coefficients(const net::ElementGraph& eg) {
    Coefficients c;
    const std::size_t n = eg.size();
    c.tau = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < n; ++e) c.tau = std::min(c.tau, eg.params(e).time_unit());
    c.stiffness.resize(n);
    c.damping.resize(n);
    c.coupling.resize(n);
    c.b.resize(n);
    c.offsets.assign(n + 1, 0);
    for (std::size_t e = 0; e < n; ++e) {
        const auto& p = eg.params(e);
        c.stiffness[e] = c.tau * c.tau / (p.inductance * p.c0);
        c.damping[e] = p.r1 * p.c0 / c.tau;
        c.coupling[e] = p.r2 * p.c0 / c.tau;
        c.b[e] = p.nonlinearity;
        c.offsets[e + 1] = c.offsets[e] + eg.degree(e);
    }
    c.adj.resize(c.offsets.back());
    for (std::size_t e = 0; e < n; ++e) {
        std::size_t k = c.offsets[e];
        eg.for_each_neighbor(e, [&](std::size_t nb) { c.adj[k++] = nb; });
    }
    return c;
}

// RK4 amplification <= 1 for both roots of mu^2 + (a + c lam) mu + k lam = 0.
bool rk4_stable(double dt, double k, double a, double c, double lam) {
    const double p = a + c * lam, q = k * lam;
    const std::complex<double> disc = std::sqrt(std::complex<double>(p * p - 4.0 * q, 0.0));
    for (const auto mu : {0.5 * (-p + disc), 0.5 * (-p - disc)}) {
        const std::complex<double> z = dt * mu;
        const std::complex<double> r = 1.0 + z + z * z / 2.0 + z * z * z / 6.0 +
                                       z * z * z * z / 24.0;
        if (std::abs(r) > 1.0 + 1e-12) return false;
    }
    return true;
}

}  // namespace

// Bounds the spectrum with the worst per-element coefficients and a Gershgorin
// bound 2 max(M) on the Laplacian, then searches the largest dt for which every
// mode lies in the RK4 stability region.
double stable_step(const net::ElementGraph& eg) {
    const Coefficients c = coefficients(eg);
    double k = 0, a = 0, cc = 0;
    std::size_t max_m = 0;
    for (std::size_t e = 0; e < eg.size(); ++e) {
        k = std::max(k, c.stiffness[e]);
        a = std::max(a, c.stiffness[e] * c.damping[e]);
        cc = std::max(cc, c.stiffness[e] * c.coupling[e]);
        max_m = std::max(max_m, c.offsets[e + 1] - c.offsets[e]);
    }
    const double lam_max = 2.0 * static_cast<double>(std::max<std::size_t>(max_m, 1));
    constexpr int samples = 512;
    auto ok = [&](double dt) {
        for (int i = 0; i <= samples; ++i) {
            const double lam = lam_max * static_cast<double>(i) / samples;
            if (!rk4_stable(dt, k, a, cc, lam)) return false;
        }
        return true;
    };
    double lo = 0, hi = 3.0 / std::sqrt(k * lam_max);
    for (int grow = 0; grow < 200 && ok(hi); ++grow) hi *= 2.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

Trajectory transient(const net::ElementGraph& eg, const StimulusPattern& s,
                     const TransientOptions& opts) {
    if (!(opts.dt > 0) || !(opts.t_end >= 0))
        throw DomainError("transient: dt must be positive and t_end non-negative");
    const double bound = stable_step(eg);
    if (opts.dt > bound * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "transient: dt = " << opts.dt << " exceeds the RK4 stability bound " << bound;
        throw DomainError(msg.str());
    }
    const std::size_t n = eg.size();
    for (ElementId p : opts.probes)
        if (p >= n) throw DomainError("probe element " + std::to_string(p) + " out of range");
    for (const auto& [e, v] : s.entries())
        if (e >= n) throw DomainError("stimulus element " + std::to_string(e) + " out of range");

    const Coefficients c = coefficients(eg);
    std::vector<double> forcing(n, 0.0);
    for (const auto& [e, v] : s.entries()) forcing[e] = v;
    const double input_scale = std::max({s.max_abs(), std::abs(s.amplitude), 1e-300});
    const double conv_level = opts.convergence_tol * std::max(std::abs(s.amplitude), 1e-300);
    const double period = 2.0 * std::numbers::pi;

    std::vector<double> w(n, 0.0), u(n, 0.0), v(n, 0.0);
    std::vector<double> kw[4], ku[4];
    for (int i = 0; i < 4; ++i) kw[i].resize(n), ku[i].resize(n);
    std::vector<double> ws(n), us(n);

    double t = 0;
    auto to_v = [&](const std::vector<double>& wv, std::vector<double>& out) {
        for (std::size_t e = 0; e < n; ++e) {
            const double b = c.b[e];
            if (b != 0.0 && !(std::abs(4.0 * b * wv[e]) < 1.0)) {
                std::ostringstream msg;
                msg << "transient: step rejected at t = " << t << ": |4 b W| >= 1 at element "
                    << e;
                throw DomainError(msg.str());
            }
            out[e] = invert_w(wv[e], b);
        }
    };
    const bool linear = std::all_of(c.b.begin(), c.b.end(), [](double b) { return b == 0.0; });
    auto rhs = [&](double time, const std::vector<double>& wv, const std::vector<double>& uv,
                   std::vector<double>& dw, std::vector<double>& du) {
        if (!linear) to_v(wv, v);
        const std::vector<double>& vv = linear ? wv : v;
        const bool on = !s.t_off || time < *s.t_off;
        for (std::size_t e = 0; e < n; ++e) {
            const std::size_t beg = c.offsets[e], end = c.offsets[e + 1];
            double sum_v = 0, sum_u = 0;
            for (std::size_t k = beg; k < end; ++k) {
                sum_v += vv[c.adj[k]];
                sum_u += uv[c.adj[k]];
            }
            const double m = static_cast<double>(end - beg);
            const double f = on ? forcing[e] : 0.0;
            dw[e] = uv[e];
            du[e] = c.stiffness[e] * (sum_v - m * vv[e] + f - c.damping[e] * uv[e] -
                                      c.coupling[e] * (m * uv[e] - sum_u));
        }
    };
    auto energy = [&]() {
        to_v(w, v);
        double en = 0;
        for (std::size_t e = 0; e < n; ++e) {
            en += 0.5 * u[e] * u[e] / c.stiffness[e];
            for (std::size_t k = c.offsets[e]; k < c.offsets[e + 1]; ++k) {
                const double d = v[e] - v[c.adj[k]];
                en += 0.25 * d * d;  // each link is visited from both ends
            }
        }
        return en;
    };

    Trajectory tr;
    tr.time_unit = c.tau;
    tr.dt = opts.dt;
    tr.probes = opts.probes;
    auto record = [&]() {
        to_v(w, v);
        tr.times.push_back(t);
        for (ElementId p : opts.probes) tr.samples.push_back(v[p]);
        if (opts.record_energy) tr.energy.push_back(energy());
    };
    record();

    const auto steps = static_cast<std::size_t>(std::ceil(opts.t_end / opts.dt - 1e-9));
    const std::size_t every = std::max<std::size_t>(1, opts.sample_every);
    double quiet_since = -1;  // < 0: not quiet
    const double h = opts.dt;
    for (std::size_t step = 1; step <= steps; ++step) {
        rhs(t, w, u, kw[0], ku[0]);
        for (std::size_t e = 0; e < n; ++e) ws[e] = w[e] + 0.5 * h * kw[0][e], us[e] = u[e] + 0.5 * h * ku[0][e];
        rhs(t + 0.5 * h, ws, us, kw[1], ku[1]);
        for (std::size_t e = 0; e < n; ++e) ws[e] = w[e] + 0.5 * h * kw[1][e], us[e] = u[e] + 0.5 * h * ku[1][e];
        rhs(t + 0.5 * h, ws, us, kw[2], ku[2]);
        for (std::size_t e = 0; e < n; ++e) ws[e] = w[e] + h * kw[2][e], us[e] = u[e] + h * ku[2][e];
        rhs(t + h, ws, us, kw[3], ku[3]);
        double wmax = 0, umax = 0;
        for (std::size_t e = 0; e < n; ++e) {
            w[e] += h / 6.0 * (kw[0][e] + 2.0 * kw[1][e] + 2.0 * kw[2][e] + kw[3][e]);
            u[e] += h / 6.0 * (ku[0][e] + 2.0 * ku[1][e] + 2.0 * ku[2][e] + ku[3][e]);
            wmax = std::max(wmax, std::abs(w[e]));
            umax = std::max(umax, std::abs(u[e]));
        }
        t = static_cast<double>(step) * h;
        if (!(wmax <= opts.blowup_factor * input_scale)) {
            std::ostringstream msg;
            msg << "transient: instability at t = " << t << ", max|W| = " << wmax
                << " exceeds " << opts.blowup_factor << " x input scale " << input_scale;
            throw SolverError(msg.str());
        }
        if (step % every == 0 || step == steps) record();

        const bool inputs_settled = !s.t_off || t >= *s.t_off;
        if (umax < conv_level && inputs_settled) {
            if (quiet_since < 0) quiet_since = t;
            if (!tr.converged_at && t - quiet_since >= period) {
                tr.converged_at = quiet_since;
                if (opts.stop_when_converged) {
                    if (tr.times.back() != t) record();
                    break;
                }
            }
        } else {
            quiet_since = -1;
        }
    }
    to_v(w, v);
    tr.w = std::move(w);
    tr.w_dot = std::move(u);
    tr.v = v;
    return tr;
}

PropagationEstimate propagation_time(std::size_t element_count, const params::BundleParams& p,
                                     double element_length) {
    p.validate();
    return propagation_time(element_count, p.rc_time(), element_length);
}

PropagationEstimate propagation_time(std::size_t element_count, double per_element_time,
                                     double element_length) {
    if (element_count == 0) throw DomainError("element count must be positive");
    if (!(per_element_time > 0)) throw DomainError("per-element time must be positive");
    if (!(element_length > 0)) throw DomainError("element length must be positive");
    PropagationEstimate out;
    out.per_element = per_element_time;
    out.total_time = static_cast<double>(element_count) * per_element_time;
    out.path_length = static_cast<double>(element_count) * element_length;
    out.velocity = out.path_length / out.total_time;
    return out;
}

}  // namespace actinet::solver
