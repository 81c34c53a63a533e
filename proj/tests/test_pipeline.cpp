#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "actinet/error.hpp"
#include "actinet/pipeline.hpp"
#include "support.hpp"

using namespace actinet;
using namespace actinet::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("actinet_test_" + name);
    fs::remove_all(p);
    return p;
}

std::size_t lines_with_prefix(const std::string& text, const std::string& prefix) {
    std::istringstream in(text);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) n += line.rfind(prefix, 0) == 0;
    return n;
}

}  // namespace

TEST_CASE("config text round trip") {
    auto cfg = ExperimentConfig::paper_interior();
    cfg.thetas = {0.1, 0.25, 0.5};
    cfg.rule = "fixed:0.5";
    const auto text = dump_config(cfg);
    CHECK(dump_config(parse_config(text)) == text);
    CHECK(dump_config(parse_config("# nothing\n\n")) == dump_config(ExperimentConfig{}));
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("colour = blue\n"), ParseError);
    CHECK_THROWS_AS(parse_config("k 4\n"), ParseError);
    CHECK_THROWS_AS(parse_config("mode = perfect\n"), ParseError);
    CHECK_THROWS_AS(ExperimentConfig::preset("nope"), Error);
    auto cfg = ExperimentConfig::paper_defaults();
    cfg.k = 0;
    CHECK_THROWS(cfg.validate());
    cfg = ExperimentConfig::paper_defaults();
    cfg.thetas = {1.5};
    CHECK_THROWS(cfg.validate());
    cfg = ExperimentConfig::paper_defaults();
    cfg.filter = ">11,<6";
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("sha256 of known strings") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("surface preset run") {
    auto cfg = ExperimentConfig::paper_defaults();
    cfg.output_dir = scratch("surface");
    cfg.threads = 4;
    std::ostringstream log;
    const auto m = run_pipeline(cfg, &log);
    CHECK(m.files.size() >= 9);
    for (std::size_t i = 1; i < m.files.size(); ++i) CHECK(m.files[i - 1].path < m.files[i].path);
    for (const auto& f : m.files) {
        const auto text = oracle::slurp(cfg.output_dir / f.path);
        CHECK(text.size() == f.bytes);
        CHECK(sha256_hex(text) == f.sha256);
    }
    CHECK(oracle::slurp(cfg.output_dir / "manifest.json") == m.json());
    for (const char* name : {"network_stats.json", "params.csv", "response_table.csv", "census.csv",
                             "machines.csv", "weighted.dot", "trim_0.1.dot", "trim_0.2.dot", "mlg.dot",
                             "mlg_analysis.json"})
        CHECK(fs::exists(cfg.output_dir / name));
    const auto table = oracle::slurp(cfg.output_dir / "response_table.csv");
    CHECK(lines_with_prefix(table, "1111,") == 45);  // 45 pairs in the last state
    CHECK(log.str().find("[fsm]") != std::string::npos);

    // Threads are not part of a run's identity.
    cfg.output_dir = scratch("surface_again");
    cfg.threads = 1;
    CHECK(run_pipeline(cfg).json() == m.json());
}

TEST_CASE("interior run has 64 states") {
    auto cfg = ExperimentConfig::paper_interior();
    cfg.output_dir = scratch("interior");
    cfg.threads = 4;
    run_pipeline(cfg);
    const auto table = gates::parse_table_csv(oracle::slurp(cfg.output_dir / "response_table.csv"));
    CHECK(table.states() == 64);
    CHECK(table.pairs.size() == 105);
}

TEST_CASE("stage failures name the stage") {
    auto cfg = ExperimentConfig::paper_defaults();
    cfg.output_dir = scratch("fail");
    cfg.k = 10;
    try {
        run_pipeline(cfg);
        FAIL("expected a stage error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "electrodes");
        CHECK(std::string(e.what()).rfind("[electrodes] ", 0) == 0);
    }
    cfg = ExperimentConfig::paper_defaults();
    cfg.output_dir = scratch("fail2");
    cfg.network_file = "/nonexistent/network.json";
    CHECK_THROWS_AS(run_pipeline(cfg), StageError);
}
