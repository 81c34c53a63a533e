#include "actinet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "actinet/error.hpp"
#include "actinet/fsm.hpp"
#include "actinet/gates.hpp"
#include "actinet/netmodel.hpp"
#include "actinet/params.hpp"
#include "actinet/solver.hpp"

namespace actinet::pipeline {

using nlohmann::json;

ExperimentConfig ExperimentConfig::paper_defaults() {
    ExperimentConfig c;
    c.target_connected = 18;
    return c;
}

ExperimentConfig ExperimentConfig::paper_interior() {
    ExperimentConfig c;
    c.placement = electrodes::Placement::mid;
    c.k = 6;
    c.filter = "auto:11";
    c.target_connected = 27;
    return c;
}

ExperimentConfig ExperimentConfig::preset(const std::string& name) {
    if (name == "paper-defaults") return paper_defaults();
    if (name == "paper-interior") return paper_interior();
    throw ParseError("unknown preset '" + name + "' (paper-defaults, paper-interior)");
}

void ExperimentConfig::validate() const {
    if (k == 0 || k > 12) throw DomainError("k must lie in [1, 12]");
    if (target_elements == 0 && !(element_length_um > 0))
        throw DomainError("element length must be positive");
    if (!(z_tol_um >= 0)) throw DomainError("z tolerance must be non-negative");
    grid.validate();
    electrodes::parse_rule(rule);
    if (filter.rfind("auto:", 0) != 0) {
        const auto [lo, hi] = fsm::parse_filter(filter);
        if (lo > hi) throw DomainError("filter lower bound exceeds upper bound");
    }
    for (double t : thetas)
        if (!(t >= 0 && t <= 1)) throw DomainError("theta values must lie in [0, 1]");
}

namespace {

std::string trim_ws(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, ExperimentConfig cfg) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim_ws(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        auto fail = [&](const std::string& why) -> void {
            throw ParseError("config line " + std::to_string(lineno) + ": " + why);
        };
        if (eq == std::string::npos) fail("expected key = value");
        const std::string key = trim_ws(line.substr(0, eq));
        const std::string val = trim_ws(line.substr(eq + 1));
        try {
            if (key == "network") cfg.network_file = val;
            else if (key == "spec") cfg.spec_file = val;
            else if (key == "network_seed") cfg.network_seed = std::stoull(val);
            else if (key == "target_elements") cfg.target_elements = std::stoull(val);
            else if (key == "element_length_um") cfg.element_length_um = std::stod(val);
            else if (key == "mode") {
                if (val != "ideal" && val != "realistic") fail("mode must be ideal or realistic");
                cfg.mode = val == "ideal" ? electrodes::Mode::ideal : electrodes::Mode::realistic;
            } else if (key == "rows") cfg.grid.rows = std::stoul(val);
            else if (key == "cols") cfg.grid.cols = std::stoul(val);
            else if (key == "pitch_um") cfg.grid.pitch = std::stod(val);
            else if (key == "diameter_um") cfg.grid.diameter = std::stod(val);
            else if (key == "placement") {
                if (val != "surface" && val != "mid") fail("placement must be surface or mid");
                cfg.placement = val == "mid" ? electrodes::Placement::mid : electrodes::Placement::surface;
            } else if (key == "z_tol_um") cfg.z_tol_um = std::stod(val);
            else if (key == "target_connected") cfg.target_connected = std::stoul(val);
            else if (key == "k") cfg.k = std::stoul(val);
            else if (key == "input_seed") cfg.input_seed = std::stoull(val);
            else if (key == "rule") cfg.rule = val;
            else if (key == "filter") cfg.filter = val;
            else if (key == "thetas") {
                cfg.thetas.clear();
                std::stringstream ts(val);
                for (std::string t; std::getline(ts, t, ',');)
                    if (!trim_ws(t).empty()) cfg.thetas.push_back(std::stod(trim_ws(t)));
            } else if (key == "max_cycles") cfg.max_cycles = std::stoul(val);
            else if (key == "output") cfg.output_dir = val;
            else fail("unknown key '" + key + "'");
        } catch (const std::logic_error&) {
            fail("bad value '" + val + "' for " + key);
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::string dump_config(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "network = " << c.network_file << "\n"
        << "spec = " << c.spec_file << "\n"
        << "network_seed = " << c.network_seed << "\n"
        << "target_elements = " << c.target_elements << "\n"
        << "element_length_um = " << num(c.element_length_um) << "\n"
        << "mode = " << (c.mode == electrodes::Mode::ideal ? "ideal" : "realistic") << "\n"
        << "rows = " << c.grid.rows << "\n"
        << "cols = " << c.grid.cols << "\n"
        << "pitch_um = " << num(c.grid.pitch) << "\n"
        << "diameter_um = " << num(c.grid.diameter) << "\n"
        << "placement = " << (c.placement == electrodes::Placement::mid ? "mid" : "surface") << "\n"
        << "z_tol_um = " << num(c.z_tol_um) << "\n"
        << "target_connected = " << c.target_connected << "\n"
        << "k = " << c.k << "\n"
        << "input_seed = " << c.input_seed << "\n"
        << "rule = " << c.rule << "\n"
        << "filter = " << c.filter << "\n"
        << "thetas = ";
    for (std::size_t i = 0; i < c.thetas.size(); ++i) out << (i ? "," : "") << num(c.thetas[i]);
    out << "\nmax_cycles = " << c.max_cycles << "\n";
    return out.str();
}

std::string Manifest::json() const {
    nlohmann::json j;
    j["files"] = nlohmann::json::array();
    for (const auto& a : files)
        j["files"].push_back({{"path", a.path}, {"bytes", a.bytes}, {"sha256", a.sha256}});
    return j.dump(1) + "\n";
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
        throw Error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) out += hex[md[i] >> 4], out += hex[md[i] & 15];
    return out;
}

namespace {

class Writer {
public:
    explicit Writer(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    void write(const std::string& rel, const std::string& content) {
        const auto path = dir_ / rel;
        std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write " + path.string());
        out << content;
        if (!out) throw Error("short write to " + path.string());
        files_[rel] = {rel, content.size(), sha256_hex(content)};
    }

    Manifest manifest() const {
        Manifest m;
        for (const auto& [_, a] : files_) m.files.push_back(a);
        return m;
    }

private:
    std::filesystem::path dir_;
    std::map<std::string, Artifact> files_;
};

template <class F>
auto stage(const char* name, std::ostream* log, F&& f) {
    if (log) *log << "[" << name << "] start" << std::endl;
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::string params_table() {
    using namespace params;
    const IonEnvironment env;
    const FilamentGeometry geom;
    std::string out = params_csv_header();
    out += params_csv_row("filament", filament_params(env, geom));
    for (double width : {200e-9, 450e-9, 700e-9})
        out += params_csv_row("high_" + short_num(width * 1e9) + "nm",
                              bundle_params(env, geom, HighDensity{width / 2}));
    for (std::size_t n : {25u, 50u, 75u})
        out += params_csv_row("low_" + std::to_string(n), bundle_params(env, geom, LowDensity{n}));
    return out;
}

std::string electrodes_csv(const electrodes::ElectrodeArray& arr, const electrodes::ContactMap& cm) {
    std::ostringstream out;
    out << "electrode_id,x_um,y_um,z_um,contacts,connected\n";
    for (std::size_t i = 0; i < arr.size(); ++i)
        out << i << ',' << num(arr.centers[i].x) << ',' << num(arr.centers[i].y) << ','
            << num(arr.centers[i].z) << ',' << cm.contacts[i].size() << ','
            << (cm.connected(i) ? 1 : 0) << '\n';
    return out.str();
}

}  // namespace

Manifest run_pipeline(const ExperimentConfig& cfg, std::ostream* log) {
    stage("config", log, [&] {
        cfg.validate();
        return 0;
    });
    Writer out(cfg.output_dir);
    out.write("config.kv", dump_config(cfg));
    json summary;

    auto graph = stage("network", log, [&] {
        net::NetworkGraph g;
        if (!cfg.network_file.empty()) {
            g = net::load_network(cfg.network_file);
        } else {
            const auto spec = cfg.spec_file.empty() ? net::GeneratorSpec::paper_defaults()
                                                    : net::load_generator_spec(cfg.spec_file);
            g = net::generate_synthetic(spec, cfg.network_seed);
        }
        out.write("network.json", net::dump_network(g));
        out.write("network_stats.json", net::stats_json(net::network_stats(g)));
        return std::make_shared<const net::NetworkGraph>(std::move(g));
    });

    stage("params", log, [&] {
        out.write("params.csv", params_table());
        return 0;
    });

    auto eg = stage("discretize", log, [&] {
        const double el = cfg.target_elements > 0
                              ? net::calibrate_element_length(*graph, cfg.target_elements)
                              : cfg.element_length_um;
        net::ElementGraph e(graph, el, net::high_density_assigner());
        summary["element_length_um"] = el;
        summary["elements"] = e.size();
        if (log) *log << "  " << e.size() << " elements of " << el << " um" << std::endl;
        return e;
    });

    struct Wiring {
        electrodes::ContactMap cm;
        electrodes::InputEncoding enc;
        std::vector<electrodes::OutputPair> pairs;
        std::vector<net::ElementId> taps;
    };
    auto wiring = stage("electrodes", log, [&] {
        Wiring w;
        if (cfg.mode == electrodes::Mode::realistic) {
            const auto arr = electrodes::place_grid(cfg.grid, cfg.placement, graph->bbox());
            const double z_tol = cfg.target_connected > 0
                                     ? electrodes::calibrate_z_tolerance(arr, eg, cfg.target_connected)
                                     : cfg.z_tol_um;
            summary["z_tol_um"] = z_tol;
            if (log) *log << "  contact depth " << z_tol << " um" << std::endl;
            w.cm = electrodes::contact_map(arr, eg, z_tol);
            out.write("electrodes.csv", electrodes_csv(arr, w.cm));
            w.enc = electrodes::random_encoding(w.cm, cfg.k, cfg.input_seed);
            w.pairs = electrodes::output_pairs(w.cm, w.enc);
            for (net::ElementId e : w.cm.contacted_elements())
                if (!eg.is_node(e)) w.taps.push_back(e);
        } else {
            // Point contacts on every junction; outputs read across single bundles.
            std::vector<net::ElementId> nodes(eg.node_elements());
            for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = i;
            w.cm = electrodes::point_contacts(nodes);
            w.enc = electrodes::random_encoding(w.cm, cfg.k, cfg.input_seed);
            const auto used = w.enc.electrodes();
            std::set<electrodes::OutputPair> seen;
            for (std::size_t e = 0; e < graph->edges().size(); ++e) {
                const std::size_t a = graph->a_index(e), b = graph->b_index(e);
                if (a == b || std::find(used.begin(), used.end(), a) != used.end() ||
                    std::find(used.begin(), used.end(), b) != used.end())
                    continue;
                if (seen.insert({a, b}).second) w.pairs.emplace_back(a, b);
            }
        }
        out.write("contacts.csv", electrodes::contacts_csv(w.cm));
        summary["electrodes"] = w.cm.size();
        summary["connected_electrodes"] = w.cm.connected_electrodes().size();
        summary["input_electrodes"] = w.enc.electrodes();
        summary["output_pairs"] = w.pairs.size();
        if (w.pairs.empty()) throw DomainError("no output pairs available");
        return w;
    });

    auto rt = stage("responses", log, [&] {
        solver::ReducedSystem rs(eg, wiring.taps);
        summary["reduced_unknowns"] = rs.terminals().size();
        if (log) *log << "  reduced system: " << rs.terminals().size() << " unknowns" << std::endl;
        auto table = gates::response_table(rs, wiring.enc, wiring.cm, wiring.pairs,
                                           electrodes::parse_rule(cfg.rule), cfg.threads);
        out.write("response_table.csv", gates::table_csv(table));
        return table;
    });

    stage("gates", log, [&] {
        const auto records = gates::mine_all(rt);
        const auto c = gates::census(records);
        out.write("gates.csv", gates::gates_csv(rt, records));
        out.write("census.csv", gates::census_csv(c));
        for (std::size_t t = 0; t < 4; ++t)
            summary["gates"][gates::gate_name(static_cast<gates::GateType>(t))] = c.records[t];
        return 0;
    });

    stage("fsm", log, [&] {
        const auto [lo, hi] = fsm::resolve_filter(rt, cfg.filter);
        summary["filter"] = {lo, hi};
        const auto candidates = fsm::select_output_bits(rt, lo, hi);
        summary["candidates"] = candidates.size();
        if (candidates.size() < cfg.k)
            throw DomainError("filter " + cfg.filter + " leaves " + std::to_string(candidates.size()) +
                              " candidate output bits, fewer than k = " + std::to_string(cfg.k));
        const auto machines = fsm::build_machines(rt, candidates, cfg.threads);
        summary["machines"] = machines.size();
        out.write("machines.csv", fsm::machines_csv(rt, machines));
        const auto w = fsm::aggregate(machines);
        out.write("weighted.dot", fsm::export_dot(w, "weighted"));
        for (double theta : cfg.thetas) {
            const auto g = fsm::trim(w, theta);
            const std::string tag = "trim_" + short_num(theta);
            out.write(tag + ".dot", fsm::export_dot(g, "trim"));
            out.write(tag + "_analysis.json",
                      fsm::analysis_json(fsm::analyze(g, std::nullopt, cfg.max_cycles), cfg.k));
        }
        const auto mlg = fsm::max_likelihood_graph(w);
        out.write("mlg.dot", fsm::export_dot(mlg, "mlg"));
        out.write("mlg_analysis.json",
                  fsm::analysis_json(fsm::analyze(mlg, std::nullopt, cfg.max_cycles), cfg.k));
        return 0;
    });

    out.write("summary.json", summary.dump(1) + "\n");
    auto manifest = out.manifest();
    std::ofstream mf(cfg.output_dir / "manifest.json", std::ios::binary);
    mf << manifest.json();
    if (!mf) throw StageError("manifest", "cannot write manifest.json");
    if (log) *log << "[manifest] " << manifest.files.size() << " files" << std::endl;
    return manifest;
}

}  // namespace actinet::pipeline
