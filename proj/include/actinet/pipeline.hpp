#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "actinet/electrodes.hpp"

namespace actinet::pipeline {

/// Everything a run depends on. Two equal configs give byte-identical outputs.
struct ExperimentConfig {
    std::string network_file;   // empty: synthetic network
    std::string spec_file;      // generator spec; empty: the built-in table
    std::uint64_t network_seed = 42;
    std::size_t target_elements = 3843876;  // 0: use element_length_um as given
    double element_length_um = 0.0054;

    electrodes::Mode mode = electrodes::Mode::realistic;
    electrodes::GridLayout grid;
    electrodes::Placement placement = electrodes::Placement::surface;
    double z_tol_um = 5.0;
    /// When nonzero, z_tol_um is replaced by the smallest tolerance that
    /// connects this many electrodes.
    std::size_t target_connected = 0;

    std::size_t k = 4;
    std::uint64_t input_seed = 3;
    std::string rule = "median";
    std::string filter = ">6,<11";
    std::vector<double> thetas{0.1, 0.2};
    std::size_t max_cycles = 100000;

    unsigned threads = 1;  // not part of the identity of a run
    std::filesystem::path output_dir = "run";

    /// Surface grid, k = 4, median rule, filter >6,<11, theta 0.1 and 0.2,
    /// contact depth calibrated to 18 connected electrodes.
    static ExperimentConfig paper_defaults();
    /// Mid-plane grid, k = 6, filter window sized for 11 candidates, 27
    /// connected electrodes.
    static ExperimentConfig paper_interior();
    static ExperimentConfig preset(const std::string& name);

    void validate() const;
};

/// `key = value` lines; '#' starts a comment. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
std::string dump_config(const ExperimentConfig& cfg);

struct Artifact {
    std::string path;  // relative to the output directory
    std::size_t bytes = 0;
    std::string sha256;
};

struct Manifest {
    std::vector<Artifact> files;  // sorted by path
    std::string json() const;
};

std::string sha256_hex(const std::string& data);

/// Runs network -> params -> electrodes -> responses -> gates -> fsm and
/// writes every artifact plus manifest.json. Stage failures are rethrown as
/// StageError. Progress lines go to `log` when given.
Manifest run_pipeline(const ExperimentConfig& cfg, std::ostream* log = nullptr);

}  // namespace actinet::pipeline
