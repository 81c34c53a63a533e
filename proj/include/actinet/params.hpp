#pragma once

#include <cstddef>
#include <string>
#include <variant>

namespace actinet::params {

/// Ionic solution surrounding the filaments. SI units throughout except
/// concentrations (mol/L) and molar conductivities ((Ohm m)^-1 M^-1).
struct IonEnvironment {
    double temperature_k = 293.0;
    double rel_permittivity = 80.0;
    int valence = 1;
    double elementary_charge = 1.60218e-19;    // C
    double vacuum_permittivity = 8.85419e-12;  // F/m
    double boltzmann = 1.38065e-23;            // J/K
    double molar_conductivity_k = 7.4;
    double molar_conductivity_na = 5.0;
    double conc_k = 0.15;   // M
    double conc_na = 0.02;  // M
    double hydrated_ion_size = 3.6e-10;  // m
    double permeability = 1.25664e-6;    // H/m, water ~ vacuum

    /// Throws DomainError when an invariant is violated.
    void validate() const;
};

struct FilamentGeometry {
    double radius = 2.5e-9;          // m
    double monomer_length = 5.4e-9;  // m

    void validate() const;
};

enum class Regime { single, high, low };

/// Lumped circuit constants of one discretised element (one monomer length).
struct BundleParams {
    double c0 = 0;           // F
    double inductance = 0;   // H
    double r1 = 0;           // Ohm
    double r2 = 0;           // Ohm
    double resistivity = 0;  // Ohm m
    double bjerrum = 0;      // m
    double nonlinearity = 0; // 1/V, the b in Q = C0 (V - b V^2)
    Regime regime = Regime::single;
    double radius = 0;            // m, conducting cylinder radius
    std::size_t filaments = 1;    // low regime only

    /// sqrt(L C0): the natural time unit of the element.
    double time_unit() const;
    /// R1 C0, the RC discharge time of the element.
    double rc_time() const;
    void validate() const;
};

/// z e^2 / (4 pi eps eps0 kB T)
double bjerrum_length(const IonEnvironment& env);

/// 1 / (Lambda_K c_K + Lambda_Na c_Na)
double resistivity(const IonEnvironment& env);

/// Number of ion windings per monomer, l / r_h.
double winding_count(const IonEnvironment& env, const FilamentGeometry& geom);

/// Circuit constants of a single filament.
BundleParams filament_params(const IonEnvironment& env, const FilamentGeometry& geom);

/// Densely packed bundle: one thick cylinder of the given radius.
struct HighDensity {
    double radius;  // m
};

/// Sparse bundle: independent filaments in parallel.
struct LowDensity {
    std::size_t filaments;
};

using BundleRegime = std::variant<HighDensity, LowDensity>;

/// Circuit constants of a bundle.
///
/// High density evaluates the single-filament formulas with the bundle radius.
/// Low density divides C0, L and R1 of one filament by the filament count
/// (C0 included: C0(n) = C0(1) / n, not the parallel-capacitor sum).
BundleParams bundle_params(const IonEnvironment& env, const FilamentGeometry& geom,
                           const BundleRegime& regime);

/// CSV header and row in report units: pF, pH, MOhm, Ohm m, nm, ns.
std::string params_csv_header();
std::string params_csv_row(const std::string& label, const BundleParams& p);

}  // namespace actinet::params
