#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "actinet/error.hpp"
#include "actinet/solver.hpp"
#include "support.hpp"

using namespace actinet;
using namespace actinet::net;
using namespace actinet::solver;

namespace {

std::shared_ptr<const NetworkGraph> chain_net(std::size_t interior) {
    const double len = static_cast<double>(interior);
    return std::make_shared<const NetworkGraph>(
        NetworkGraph({{0, {0, 0, 0}}, {1, {len, 0, 0}}}, {{1, 0, 1, 0.1, len}}, 244.14));
}

double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Balanced random stimulus on the given candidates.
std::vector<double> random_dipoles(std::mt19937_64& rng, std::size_t n,
                                   const std::vector<std::size_t>& sites, int count) {
    std::vector<double> f(n, 0.0);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < count; ++i) {
        const double a = u(rng);
        f[sites[rng() % sites.size()]] += a;
        f[sites[rng() % sites.size()]] -= a;
    }
    return f;
}

StimulusPattern to_pattern(const std::vector<double>& f) {
    StimulusPattern s;
    for (std::size_t e = 0; e < f.size(); ++e)
        if (f[e] != 0) s.add(e, f[e]);
    return s;
}

ElementGraph hd_elements(std::shared_ptr<const NetworkGraph> g, double h, double b = 0) {
    auto p = params::bundle_params({}, {}, params::HighDensity{100e-9});
    p.nonlinearity = b;
    return ElementGraph(std::move(g), h, uniform_assigner(p));
}

}  // namespace

TEST_CASE("no stimulus gives the zero field") {
    const ElementGraph eg(chain_net(7), 1.0);
    const auto f = steady_state(eg, StimulusPattern{});
    CHECK(max_abs(f.values) == 0.0);
}

TEST_CASE("path dipole is antisymmetric about the midpoint") {
    const ElementGraph eg(chain_net(9), 1.0);
    REQUIRE(eg.size() == 11);
    const std::vector<ElementId> plus{0}, minus{1};
    const auto f = steady_state(eg, StimulusPattern::dipole(plus, minus));
    CHECK(f.at(0) == doctest::Approx(-f.at(1)));
    for (std::size_t i = 0; i < 9; ++i) CHECK(f.at(2 + i) == doctest::Approx(-f.at(2 + 8 - i)));
    CHECK(std::abs(f.at(6)) < 1e-12);
    CHECK(f.at(0) - f.at(1) == doctest::Approx(10.0));
    CHECK(f.residual <= 1e-10);
}

TEST_CASE("steady state agrees with a dense solve on random trees") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        auto g = std::make_shared<const NetworkGraph>(oracle::random_network(rng, 6, 0, 8.0));
        const double h = 1.5;
        const ElementGraph eg(g, h);
        std::size_t n = 0;
        const auto adj = oracle::element_adjacency(*g, h, &n);
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        const auto f = random_dipoles(rng, n, all, 3);
        const auto want = oracle::dense_steady(n, adj, f);
        const auto got = steady_state(eg, to_pattern(f));
        for (std::size_t i = 0; i < n; ++i) CHECK(got.at(i) == doctest::Approx(want[i]).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("pinned gauge keeps every difference") {
    std::mt19937_64 rng(3);
    auto g = std::make_shared<const NetworkGraph>(oracle::random_network(rng, 10, 6));
    const ElementGraph eg(g, 2.0);
    const std::vector<ElementId> plus{0, 3}, minus{5};
    const auto s = StimulusPattern::dipole(plus, minus);
    const auto zm = steady_state(eg, s);
    const auto pin = steady_state(eg, s, Pinned{4});
    CHECK(pin.at(4) == 0.0);
    for (ElementId e = 0; e < eg.size(); ++e)
        CHECK(pin.at(e) - pin.at(0) == doctest::Approx(zm.at(e) - zm.at(0)).epsilon(1e-10).scale(1.0));
}

TEST_CASE("unbalanced stimulus is reported") {
    const ElementGraph eg(chain_net(3), 1.0);
    StimulusPattern s;
    s.add(0, 1.0);
    const auto f = steady_state(eg, s);
    CHECK_FALSE(f.warnings.empty());
}

TEST_CASE("superposition") {
    std::mt19937_64 rng(4);
    auto g = std::make_shared<const NetworkGraph>(oracle::random_network(rng, 12, 8));
    const ElementGraph eg(g, 1.0);
    std::vector<std::size_t> sites(eg.size());
    for (std::size_t i = 0; i < sites.size(); ++i) sites[i] = i;
    const auto f1 = random_dipoles(rng, eg.size(), sites, 2);
    const auto f2 = random_dipoles(rng, eg.size(), sites, 2);
    std::vector<double> f12(f1.size());
    for (std::size_t i = 0; i < f1.size(); ++i) f12[i] = f1[i] + f2[i];
    const auto a = steady_state(eg, to_pattern(f1)), b = steady_state(eg, to_pattern(f2)),
               ab = steady_state(eg, to_pattern(f12));
    for (std::size_t i = 0; i < f1.size(); ++i)
        CHECK(ab.at(i) == doctest::Approx(a.at(i) + b.at(i)).epsilon(1e-10).scale(1.0));
}

TEST_CASE("laplacian ignores constant shifts") {
    std::mt19937_64 rng(6);
    auto g = std::make_shared<const NetworkGraph>(oracle::random_network(rng, 9, 4));
    const ElementGraph eg(g, 1.0);
    const SteadySolver ss(eg);
    std::vector<double> x(eg.size());
    for (auto& v : x) v = std::uniform_real_distribution<double>(-1, 1)(rng);
    auto y = x;
    for (auto& v : y) v += 3.25;
    const auto lx = ss.laplacian().apply(x), ly = ss.laplacian().apply(y);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(lx[i] == doctest::Approx(ly[i]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("conjugate gradients agree with the factorisation") {
    std::mt19937_64 rng(12);
    auto g = std::make_shared<const NetworkGraph>(oracle::random_network(rng, 40, 30));
    const ElementGraph eg(g, 0.5);
    SteadyOptions cg;
    cg.direct_limit = 0;
    const std::vector<ElementId> plus{1, 2}, minus{7};
    const auto s = StimulusPattern::dipole(plus, minus);
    const auto a = steady_state(eg, s), b = steady_state(eg, s, ZeroMean{}, cg);
    for (ElementId e = 0; e < eg.size(); ++e) CHECK(b.at(e) == doctest::Approx(a.at(e)).epsilon(1e-8).scale(1.0));
}

TEST_CASE("a chain reduces to one link of weight one over its links") {
    const ReducedSystem rs(ElementGraph(chain_net(9), 1.0));
    REQUIRE(rs.links().size() == 1);
    CHECK(rs.links()[0].weight == doctest::Approx(0.1));
    CHECK(rs.terminals().size() == 2);
}

TEST_CASE("reduced and element solves agree") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 8; ++trial) {
        auto g = std::make_shared<const NetworkGraph>(oracle::random_network(rng, 15, 10));
        const ElementGraph eg(g, 0.7);
        std::vector<ElementId> taps;
        for (ElementId e = g->nodes().size(); e < eg.size(); e += 13) taps.push_back(e);
        const ReducedSystem rs(eg, taps);
        std::vector<std::size_t> sites(rs.terminals().begin(), rs.terminals().end());
        const auto f = random_dipoles(rng, eg.size(), sites, 4);
        const auto full = steady_state(eg, to_pattern(f));
        const auto red = rs.solve(to_pattern(f));
        for (ElementId t : rs.terminals()) CHECK(rs.value(red, t) == doctest::Approx(full.at(t)).epsilon(1e-10).scale(1.0));
        const auto all = rs.interpolate(red);
        for (ElementId e = 0; e < eg.size(); ++e) CHECK(all[e] == doctest::Approx(full.at(e)).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("y junction reduction") {
    auto g = std::make_shared<const NetworkGraph>(NetworkGraph(
        {{0, {0, 0, 0}}, {1, {3, 0, 0}}, {2, {0, 5, 0}}, {3, {0, 0, 7}}},
        {{1, 0, 1, 0.1, 3.0}, {2, 0, 2, 0.1, 5.0}, {3, 0, 3, 0.1, 7.0}}, 244.14));
    const ElementGraph eg(g, 0.5);
    const ReducedSystem rs(eg);
    const std::vector<ElementId> plus{1}, minus{3};
    const auto s = StimulusPattern::dipole(plus, minus);
    const auto full = steady_state(eg, s);
    const auto red = rs.solve(s);
    for (ElementId n = 0; n < 4; ++n) CHECK(rs.value(red, n) == doctest::Approx(full.at(n)).epsilon(1e-10).scale(1.0));
}

TEST_CASE("chain interiors are refused by the reduced system") {
    const ReducedSystem rs(ElementGraph(chain_net(5), 1.0));
    StimulusPattern s;
    s.add(3, 1.0);
    s.add(0, -1.0);
    CHECK_THROWS_AS(rs.solve(s), DomainError);
    CHECK_THROWS_AS(rs.slot(4), DomainError);
}

TEST_CASE("invert_w") {
    CHECK(invert_w(0.7, 0.0) == 0.7);
    for (double b : {0.0, 0.05, 0.1, -0.2}) CHECK(invert_w(0.0, b) == 0.0);
    const double v = invert_w(0.5, 0.1);
    CHECK(std::abs(v - 0.1 * v * v - 0.5) < 1e-12);
    CHECK_THROWS_AS(invert_w(2.5, 0.1), DomainError);
    CHECK_THROWS_AS(invert_w(3.0, 0.1), DomainError);

    // Bisection on the branch V < 1 / (2b), where V - b V^2 is increasing.
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 1000; ++i) {
        const double b = 0.2 * std::abs(u(rng)) + 1e-3, w = 0.99 / (4 * b) * u(rng);
        double lo = -1e3, hi = 1 / (2 * b);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (mid - b * mid * mid < w ? lo : hi) = mid;
        }
        CHECK(invert_w(w, b) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("propagation estimates") {
    const auto p = params::filament_params({}, {});
    CHECK(propagation_time(1, p).total_time == doctest::Approx(p.r1 * p.c0).epsilon(1e-15));
    const auto quoted = propagation_time(3843876, 2.248e-3 / 3843876);
    CHECK(quoted.total_time == doctest::Approx(2.248e-3).epsilon(1e-12));
    const auto ours = propagation_time(3843876, p);
    CHECK(std::abs(ours.total_time - 2.248e-3) / 2.248e-3 < 0.15);
    CHECK(ours.velocity == doctest::Approx(ours.path_length / ours.total_time));
    CHECK_THROWS_AS(propagation_time(0, p), DomainError);
}

TEST_CASE("three element path settles to the steady state") {
    const auto eg = hd_elements(chain_net(1), 1.0);
    const std::vector<ElementId> plus{0}, minus{1};
    const auto s = StimulusPattern::dipole(plus, minus);
    TransientOptions o;
    o.dt = 0.5 * stable_step(eg);
    o.t_end = 1e5;
    o.convergence_tol = 1e-12;
    o.stop_when_converged = true;
    const auto tr = transient(eg, s, o);
    CHECK(tr.converged_at.has_value());
    const auto st = steady_state(eg, s);
    for (ElementId e = 0; e < 3; ++e) CHECK(tr.v[e] == doctest::Approx(st.at(e)).epsilon(1e-6).scale(1.0));
}

TEST_CASE("too large a step is refused") {
    const auto eg = hd_elements(chain_net(4), 1.0);
    TransientOptions o;
    o.dt = 1.01 * stable_step(eg);
    CHECK_THROWS_AS(transient(eg, StimulusPattern{}, o), DomainError);
}

TEST_CASE("energy decays once inputs stop") {
    const auto eg = hd_elements(chain_net(10), 1.0);
    const std::vector<ElementId> plus{0}, minus{5};
    auto s = StimulusPattern::dipole(plus, minus);
    s.t_off = 20.0;
    TransientOptions o;
    o.dt = 0.25 * stable_step(eg);
    o.t_end = 200;
    o.record_energy = true;
    const auto tr = transient(eg, s, o);
    bool monotone = true;
    for (std::size_t i = 1; i < tr.times.size(); ++i)
        if (tr.times[i - 1] >= 20.0 && tr.energy[i] > tr.energy[i - 1] * (1 + 1e-9) + 1e-15) monotone = false;
    CHECK(monotone);
    CHECK(tr.energy.back() < tr.energy[static_cast<std::size_t>(20.0 / o.dt)]);
}

TEST_CASE("nonlinear branch violation stops the run") {
    const auto eg = hd_elements(chain_net(2), 1.0, 0.5);
    const std::vector<ElementId> plus{0}, minus{1};
    auto s = StimulusPattern::dipole(plus, minus, 5.0);
    TransientOptions o;
    o.dt = 0.5 * stable_step(eg);
    o.t_end = 500;
    CHECK_THROWS_AS(transient(eg, s, o), DomainError);
}
