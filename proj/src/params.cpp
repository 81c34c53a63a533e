#include "actinet/params.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "actinet/error.hpp"

namespace actinet::params {

namespace {

constexpr double pi = std::numbers::pi;

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError(std::string(name) + " must be positive and finite, got " +
                          std::to_string(v));
}

// Evaluates capacitance, inductance and resistance of a charged cylinder of
// radius `r` wrapped by a condensed-ion shell of thickness lambda_B.
BundleParams cylinder_params(const IonEnvironment& env, const FilamentGeometry& geom,
                             double r) {
    const double lb = bjerrum_length(env);
    const double eps = env.rel_permittivity * env.vacuum_permittivity;
    const double l = geom.monomer_length;
    const double log_ratio = std::log((r + lb) / r);
    const double n = winding_count(env, geom);

    BundleParams p;
    p.bjerrum = lb;
    p.resistivity = resistivity(env);
    p.c0 = 2.0 * pi * eps * l / log_ratio;
    p.inductance = env.permeability * n * n * pi * (r + lb) * (r + lb) / l;
    p.r1 = p.resistivity * log_ratio / (2.0 * pi * l);
    p.r2 = p.r1 / 7.0;
    p.radius = r;
    return p;
}

}  // namespace

void IonEnvironment::validate() const {
    require_positive(temperature_k, "temperature");
    require_positive(rel_permittivity, "relative permittivity");
    if (valence < 1) throw DomainError("valence must be >= 1");
    require_positive(elementary_charge, "elementary charge");
    require_positive(vacuum_permittivity, "vacuum permittivity");
    require_positive(boltzmann, "Boltzmann constant");
    require_positive(hydrated_ion_size, "hydrated ion size");
    require_positive(permeability, "permeability");
    if (conc_k < 0 || conc_na < 0 || (conc_k == 0 && conc_na == 0))
        throw DomainError("ion concentrations must be >= 0 and not both zero");
    if (molar_conductivity_k < 0 || molar_conductivity_na < 0)
        throw DomainError("molar conductivities must be >= 0");
}

void FilamentGeometry::validate() const {
    require_positive(radius, "filament radius");
    require_positive(monomer_length, "monomer length");
}

double BundleParams::time_unit() const { return std::sqrt(inductance * c0); }

double BundleParams::rc_time() const { return r1 * c0; }

void BundleParams::validate() const {
    require_positive(c0, "C0");
    require_positive(inductance, "L");
    require_positive(r1, "R1");
    require_positive(r2, "R2");
    if (!std::isfinite(nonlinearity)) throw DomainError("b must be finite");
}

double bjerrum_length(const IonEnvironment& env) {
    env.validate();
    const double e = env.elementary_charge;
    return env.valence * e * e /
           (4.0 * pi * env.rel_permittivity * env.vacuum_permittivity * env.boltzmann *
            env.temperature_k);
}

double resistivity(const IonEnvironment& env) {
    env.validate();
    const double g = env.molar_conductivity_k * env.conc_k +
                     env.molar_conductivity_na * env.conc_na;
    require_positive(g, "solution conductivity");
    return 1.0 / g;
}

double winding_count(const IonEnvironment& env, const FilamentGeometry& geom) {
    geom.validate();
    const double n = geom.monomer_length / env.hydrated_ion_size;
    if (n < 1.0) throw DomainError("winding count l/r_h must be >= 1");
    return n;
}

BundleParams filament_params(const IonEnvironment& env, const FilamentGeometry& geom) {
    env.validate();
    geom.validate();
    BundleParams p = cylinder_params(env, geom, geom.radius);
    p.regime = Regime::single;
    return p;
}

BundleParams bundle_params(const IonEnvironment& env, const FilamentGeometry& geom,
                           const BundleRegime& regime) {
    if (const auto* high = std::get_if<HighDensity>(&regime)) {
        geom.validate();
        if (!(high->radius >= geom.radius))
            throw DomainError("bundle radius must be at least the filament radius");
        BundleParams p = cylinder_params(env, geom, high->radius);
        p.regime = Regime::high;
        return p;
    }
    const auto& low = std::get<LowDensity>(regime);
    if (low.filaments < 1) throw DomainError("filament count must be >= 1");
    BundleParams p = filament_params(env, geom);
    const double n = static_cast<double>(low.filaments);
    p.c0 /= n;
    p.inductance /= n;
    p.r1 /= n;
    p.r2 = p.r1 / 7.0;
    p.regime = Regime::low;
    p.filaments = low.filaments;
    return p;
}

std::string params_csv_header() {
    return "label,regime,radius_nm,filaments,C0_pF,L_pH,R1_MOhm,R2_MOhm,rho_Ohm_m,bjerrum_nm,"
           "R1C0_ns,sqrtLC0_ns\n";
}

std::string params_csv_row(const std::string& label, const BundleParams& p) {
    static const char* names[] = {"single", "high", "low"};
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%s,%.6g,%zu,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n",
                  label.c_str(), names[static_cast<int>(p.regime)], p.radius * 1e9, p.filaments,
                  p.c0 * 1e12, p.inductance * 1e12, p.r1 * 1e-6, p.r2 * 1e-6, p.resistivity,
                  p.bjerrum * 1e9, p.rc_time() * 1e9, p.time_unit() * 1e9);
    return buf;
}

}  // namespace actinet::params
