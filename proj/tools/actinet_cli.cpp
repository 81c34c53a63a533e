// actinet: command-line front end for the actin network simulator.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "actinet/electrodes.hpp"
#include "actinet/error.hpp"
#include "actinet/fsm.hpp"
#include "actinet/gates.hpp"
#include "actinet/netmodel.hpp"
#include "actinet/params.hpp"
#include "actinet/pipeline.hpp"
#include "actinet/solver.hpp"

namespace {

using namespace actinet;

struct Globals {
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string out;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes to `path`, or stdout when it is empty or "-".
void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::size_t> parse_ids(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) out.push_back(std::stoul(tok));
    return out;
}

// Shared options for commands that discretise a network.
struct NetOpts {
    std::string net;
    double element_length_um = 0.0054;
    std::size_t target_elements = 0;

    void add(CLI::App* cmd) {
        cmd->add_option("--net", net, "network JSON")->required()->check(CLI::ExistingFile);
        cmd->add_option("--element-length-um", element_length_um, "element length (um)");
        cmd->add_option("--target-elements", target_elements,
                        "calibrate the element length to this element count");
    }

    net::ElementGraph build() const {
        auto g = std::make_shared<const net::NetworkGraph>(net::load_network(net));
        const double el = target_elements > 0 ? net::calibrate_element_length(*g, target_elements)
                                              : element_length_um;
        return net::ElementGraph(g, el, net::high_density_assigner());
    }
};

struct GridOpts {
    electrodes::GridLayout layout;
    std::string plane = "surface";
    std::string mode = "realistic";
    double z_tol = 5.0;

    void add(CLI::App* cmd) {
        cmd->add_option("--rows", layout.rows, "grid rows");
        cmd->add_option("--cols", layout.cols, "grid columns");
        cmd->add_option("--pitch-um", layout.pitch, "centre-to-centre distance (um)");
        cmd->add_option("--diam-um", layout.diameter, "electrode diameter (um)");
        cmd->add_option("--plane", plane, "surface or mid")->check(CLI::IsMember({"surface", "mid"}));
        cmd->add_option("--mode", mode, "realistic or ideal")->check(CLI::IsMember({"realistic", "ideal"}));
        cmd->add_option("--z-tol-um", z_tol, "contact depth tolerance (um)");
    }

    electrodes::ElectrodeArray place(const net::NetworkGraph& g) const {
        return electrodes::place_grid(
            layout, plane == "mid" ? electrodes::Placement::mid : electrodes::Placement::surface,
            g.bbox(), mode == "ideal" ? electrodes::Mode::ideal : electrodes::Mode::realistic);
    }
};

void add_net(CLI::App& app, Globals& gl) {
    auto* net_cmd = app.add_subcommand("net", "network generation and statistics");
    net_cmd->require_subcommand(1);

    auto* gen = net_cmd->add_subcommand("gen", "generate a synthetic network");
    static std::string spec_path;
    gen->add_option("--spec", spec_path, "generator spec JSON (default: built-in table)")
        ->check(CLI::ExistingFile);
    gen->callback([&gl] {
        const auto spec = spec_path.empty() ? net::GeneratorSpec::paper_defaults()
                                            : net::load_generator_spec(spec_path);
        const auto g = net::generate_synthetic(spec, gl.seed.value_or(42));
        emit(gl.out, net::dump_network(g));
    });

    auto* spec_cmd = net_cmd->add_subcommand("spec", "print the built-in generator spec");
    spec_cmd->callback([&gl] { emit(gl.out, net::dump_generator_spec(net::GeneratorSpec::paper_defaults())); });

    auto* stats = net_cmd->add_subcommand("stats", "statistics of the largest component");
    static std::string stats_in;
    static double scale = 0;
    stats->add_option("input", stats_in, "network JSON")->required()->check(CLI::ExistingFile);
    stats->add_option("--pixel-scale-nm", scale, "override the file's pixel scale");
    stats->callback([&gl] {
        const auto g = net::load_network(stats_in);
        const auto s = scale > 0 ? net::network_stats(g, scale) : net::network_stats(g);
        emit(gl.out, net::stats_json(s));
    });

    auto* count = net_cmd->add_subcommand("elements", "element count, or calibrate an element length");
    static std::string count_in;
    static double count_el = 0.0054;
    static std::size_t count_target = 0;
    count->add_option("input", count_in, "network JSON")->required()->check(CLI::ExistingFile);
    count->add_option("--element-length-um", count_el, "element length (um)");
    count->add_option("--target", count_target, "find the element length giving this count");
    count->callback([&gl] {
        const auto g = net::load_network(count_in);
        const double el = count_target > 0 ? net::calibrate_element_length(g, count_target) : count_el;
        emit(gl.out, "element_length_um,elements\n" + fmt(el) + "," +
                         std::to_string(net::element_count(g, el)) + "\n");
    });
}

void add_params(CLI::App& app, Globals& gl) {
    auto* cmd = app.add_subcommand("params", "electrical constants");
    cmd->require_subcommand(1);
    static params::IonEnvironment env;
    static params::FilamentGeometry geom;
    auto env_opts = [](CLI::App* c) {
        c->add_option("--temperature", env.temperature_k, "K");
        c->add_option("--valence", env.valence, "ion valence z");
        c->add_option("--permittivity", env.rel_permittivity, "relative permittivity");
        c->add_option("--c-k", env.conc_k, "K+ concentration (M)");
        c->add_option("--c-na", env.conc_na, "Na+ concentration (M)");
        c->add_option("--filament-radius-nm", geom.radius, "filament radius (nm)")
            ->transform([](std::string s) { return fmt(std::stod(s) * 1e-9); });
    };

    auto* fil = cmd->add_subcommand("filament", "single filament");
    env_opts(fil);
    fil->callback([&gl] {
        emit(gl.out, params::params_csv_header() +
                         params::params_csv_row("filament", params::filament_params(env, geom)));
    });

    auto* bun = cmd->add_subcommand("bundle", "bundle in the high or low density regime");
    env_opts(bun);
    static std::string regime = "high";
    static std::vector<double> widths;
    static std::vector<std::size_t> counts;
    bun->add_option("--regime", regime, "high or low")->check(CLI::IsMember({"high", "low"}));
    bun->add_option("--width-nm", widths, "bundle widths (diameters, nm)");
    bun->add_option("--filaments", counts, "filament counts (low regime)");
    bun->callback([&gl] {
        std::string out = params::params_csv_header();
        if (regime == "high") {
            if (widths.empty()) widths = {200, 450, 700};
            for (double w : widths)
                out += params::params_csv_row(
                    "high_" + fmt(w) + "nm",
                    params::bundle_params(env, geom, params::HighDensity{0.5 * w * 1e-9}));
        } else {
            if (counts.empty()) counts = {1, 25, 50, 75};
            for (std::size_t n : counts)
                out += params::params_csv_row("low_" + std::to_string(n),
                                              params::bundle_params(env, geom, params::LowDensity{n}));
        }
        emit(gl.out, out);
    });

    auto* prop = cmd->add_subcommand("propagation", "RC travel time over a number of elements");
    static std::size_t elements = 3843876;
    static std::optional<double> per_element;
    prop->add_option("--elements", elements, "element count");
    prop->add_option("--per-element-s", per_element, "use this R1 C0 instead of the filament value");
    prop->callback([&gl] {
        const auto est = per_element
                             ? solver::propagation_time(elements, *per_element)
                             : solver::propagation_time(elements, params::filament_params(env, geom));
        emit(gl.out, "elements,per_element_s,total_s,path_m,velocity_m_s\n" +
                         std::to_string(elements) + "," + fmt(est.per_element) + "," +
                         fmt(est.total_time) + "," + fmt(est.path_length) + "," +
                         fmt(est.velocity) + "\n");
    });
}

solver::Gauge parse_gauge(const std::string& g) {
    if (g == "zero-mean") return solver::ZeroMean{};
    if (g.rfind("pin:", 0) == 0) return solver::Pinned{std::stoul(g.substr(4))};
    throw ParseError("gauge must be zero-mean or pin:<element>");
}

void add_solve(CLI::App& app, Globals& gl) {
    auto* cmd = app.add_subcommand("solve", "steady and transient solves");
    cmd->require_subcommand(1);

    static NetOpts steady_net;
    static std::string stim, gauge = "zero-mean";
    auto* st = cmd->add_subcommand("steady", "steady state on the element graph");
    steady_net.add(st);
    st->add_option("--stim", stim, "stimulus JSON")->required()->check(CLI::ExistingFile);
    st->add_option("--gauge", gauge, "zero-mean or pin:<element>");
    st->callback([&gl] {
        const auto eg = steady_net.build();
        const auto field = solver::steady_state(eg, solver::load_stimulus(stim), parse_gauge(gauge));
        for (const auto& w : field.warnings) std::cerr << "warning: " << w << "\n";
        std::ostringstream out;
        out << "# residual=" << fmt(field.residual) << "\nelement_id,V\n";
        for (std::size_t e = 0; e < field.values.size(); ++e) out << e << ',' << fmt(field.values[e]) << '\n';
        emit(gl.out, out.str());
    });

    static NetOpts tr_net;
    static std::string tr_stim, probes;
    static solver::TransientOptions opts;
    static double b = 0;
    auto* tr = cmd->add_subcommand("transient", "RK4 integration of the element equations");
    tr_net.add(tr);
    tr->add_option("--stim", tr_stim, "stimulus JSON")->required()->check(CLI::ExistingFile);
    tr->add_option("--dt", opts.dt, "step, reference time units");
    tr->add_option("--t-end", opts.t_end, "horizon, reference time units");
    tr->add_option("--probes", probes, "comma separated element ids")->required();
    tr->add_option("--sample-every", opts.sample_every, "record every n-th step");
    tr->add_option("--b", b, "nonlinearity b (1/V)");
    tr->callback([&gl] {
        auto g = std::make_shared<const net::NetworkGraph>(net::load_network(tr_net.net));
        const double el = tr_net.target_elements > 0
                              ? net::calibrate_element_length(*g, tr_net.target_elements)
                              : tr_net.element_length_um;
        auto base = net::high_density_assigner();
        const double bb = b;
        net::ElementGraph eg(g, el, [base, bb](const net::Edge& e) {
            auto p = base(e);
            p.nonlinearity = bb;
            return p;
        });
        opts.probes = parse_ids(probes);
        const auto trj = solver::transient(eg, solver::load_stimulus(tr_stim), opts);
        std::ostringstream out;
        out << "# time_unit_s=" << fmt(trj.time_unit) << " dt=" << fmt(trj.dt);
        if (trj.converged_at) out << " converged_at=" << fmt(*trj.converged_at);
        out << "\nt,element_id,V\n";
        for (std::size_t i = 0; i < trj.times.size(); ++i)
            for (std::size_t p = 0; p < trj.probes.size(); ++p)
                out << fmt(trj.times[i]) << ',' << trj.probes[p] << ',' << fmt(trj.sample(i, p)) << '\n';
        emit(gl.out, out.str());
    });

    auto* bound = cmd->add_subcommand("stable-step", "largest stable RK4 step");
    static NetOpts bound_net;
    bound_net.add(bound);
    bound->callback([&gl] { emit(gl.out, fmt(solver::stable_step(bound_net.build())) + "\n"); });
}

void add_electrodes(CLI::App& app, Globals& gl) {
    auto* cmd = app.add_subcommand("electrodes", "electrode arrays");
    cmd->require_subcommand(1);
    auto* place = cmd->add_subcommand("place", "place a grid and list its contacts");
    static NetOpts n;
    static GridOpts grid;
    n.add(place);
    grid.add(place);
    place->callback([&gl] {
        const auto eg = n.build();
        const auto arr = grid.place(eg.network());
        const auto cm = electrodes::contact_map(arr, eg, grid.z_tol);
        std::cerr << cm.connected_electrodes().size() << " of " << cm.size()
                  << " electrodes connected\n";
        emit(gl.out, electrodes::contacts_csv(cm));
    });
}

void add_gates(CLI::App& app, Globals& gl) {
    auto* cmd = app.add_subcommand("gates", "response tables and gate mining");
    cmd->require_subcommand(1);
    auto* mine = cmd->add_subcommand("mine", "mine NOT/OR/AND/XOR gates");
    static NetOpts n;
    static GridOpts grid;
    static std::string rt_in, encoding = "random", pairs = "all", rule = "median", table_out, census_out;
    static std::size_t k = 4;
    mine->add_option("--net", n.net, "network JSON")->check(CLI::ExistingFile);
    mine->add_option("--element-length-um", n.element_length_um, "element length (um)");
    mine->add_option("--target-elements", n.target_elements, "calibrate to this element count");
    grid.add(mine);
    mine->add_option("--rt", rt_in, "mine an existing response table instead")->check(CLI::ExistingFile);
    mine->add_option("--encoding", encoding, "random, or electrode pairs a:b,c:d,...");
    mine->add_option("--k", k, "input bits (random encoding)");
    mine->add_option("--pairs", pairs, "output pairs: all, or a:b,c:d,...");
    mine->add_option("--rule", rule, "median, global-median or fixed:<value>");
    mine->add_option("--table", table_out, "also write the response table CSV here");
    mine->add_option("--census", census_out, "also write the census CSV here");
    mine->callback([&gl] {
        auto parse_pairs = [](const std::string& text) {
            std::vector<electrodes::OutputPair> out;
            std::stringstream ss(text);
            for (std::string tok; std::getline(ss, tok, ',');) {
                const auto colon = tok.find(':');
                if (colon == std::string::npos) throw ParseError("pair '" + tok + "' is not a:b");
                out.emplace_back(std::stoul(tok.substr(0, colon)), std::stoul(tok.substr(colon + 1)));
            }
            return out;
        };
        gates::ResponseTable rt;
        if (!rt_in.empty()) {
            rt = gates::parse_table_csv(read_file(rt_in));
            if (rule != rt.rule) rt = gates::threshold_table(rt.k, rt.pairs, rt.diffs, electrodes::parse_rule(rule));
        } else {
            if (n.net.empty()) throw DomainError("need --net or --rt");
            const auto eg = n.build();
            const auto arr = grid.place(eg.network());
            const auto cm = electrodes::contact_map(arr, eg, grid.z_tol);
            electrodes::InputEncoding enc;
            if (encoding == "random") enc = electrodes::random_encoding(cm, k, gl.seed.value_or(1));
            else enc.pairs = parse_pairs(encoding);
            const auto out_pairs = pairs == "all" ? electrodes::output_pairs(cm, enc) : parse_pairs(pairs);
            std::vector<net::ElementId> taps;
            for (auto e : cm.contacted_elements())
                if (!eg.is_node(e)) taps.push_back(e);
            solver::ReducedSystem rs(eg, taps);
            rt = gates::response_table(rs, enc, cm, out_pairs, electrodes::parse_rule(rule), gl.threads);
        }
        if (!table_out.empty()) emit(table_out, gates::table_csv(rt));
        const auto records = gates::mine_all(rt);
        if (!census_out.empty()) emit(census_out, gates::census_csv(gates::census(records)));
        emit(gl.out, gates::gates_csv(rt, records));
    });
}

void add_fsm(CLI::App& app, Globals& gl) {
    auto* cmd = app.add_subcommand("fsm", "state machines from response tables");
    cmd->require_subcommand(1);

    auto* build = cmd->add_subcommand("build", "one machine per k-subset of filtered outputs");
    static std::string rt_in, filter = ">6,<11";
    static std::size_t k = 0;
    build->add_option("--rt", rt_in, "response table CSV")->required()->check(CLI::ExistingFile);
    build->add_option("--filter", filter, "\">a,<b\", \"=n\" or \"auto:n\" on the count of 1s");
    build->add_option("--k", k, "machine width (must match the table)");
    build->callback([&gl] {
        const auto rt = gates::parse_table_csv(read_file(rt_in));
        if (k != 0 && k != rt.k)
            throw DomainError("--k " + std::to_string(k) + " does not match the table's k = " + std::to_string(rt.k));
        const auto [lo, hi] = fsm::resolve_filter(rt, filter);
        const auto cand = fsm::select_output_bits(rt, lo, hi);
        const auto machines = fsm::build_machines(rt, cand, gl.threads);
        std::cerr << cand.size() << " candidate outputs, " << machines.size() << " machines\n";
        std::string path = gl.out;
        if (!path.empty() && path != "-" && (path.back() == '/' || std::filesystem::is_directory(path))) {
            std::filesystem::create_directories(path);
            path = (std::filesystem::path(path) / "machines.csv").string();
        }
        emit(path, fsm::machines_csv(rt, machines));
    });

    static std::string machines_in;
    auto* agg = cmd->add_subcommand("aggregate", "probabilistic transition graph (DOT)");
    agg->add_option("--machines", machines_in, "machines CSV")->required()->check(CLI::ExistingFile);
    agg->callback([&gl] {
        const auto ms = fsm::parse_machines_csv(read_file(machines_in));
        emit(gl.out, fsm::export_dot(fsm::aggregate(ms), "weighted"));
    });

    static std::string weighted_in;
    static double theta = 0.1;
    auto* trim = cmd->add_subcommand("trim", "drop arcs lighter than theta");
    trim->add_option("--in", weighted_in, "weighted DOT")->required()->check(CLI::ExistingFile);
    trim->add_option("--theta", theta, "probability threshold");
    trim->callback([&gl] {
        emit(gl.out, fsm::export_dot(fsm::trim(fsm::parse_weighted_dot(read_file(weighted_in)), theta), "trim"));
    });

    auto* mlg = cmd->add_subcommand("mlg", "most likely successor of every state");
    mlg->add_option("--in", weighted_in, "weighted DOT")->required()->check(CLI::ExistingFile);
    mlg->callback([&gl] {
        emit(gl.out, fsm::export_dot(fsm::max_likelihood_graph(fsm::parse_weighted_dot(read_file(weighted_in))), "mlg"));
    });

    static std::string graph_in;
    static bool as_json = false;
    static std::size_t max_cycles = 1000000;
    auto* an = cmd->add_subcommand("analyze", "components, Garden-of-Eden and absorbing states, cycles");
    an->add_option("--in", graph_in, "DOT graph")->required()->check(CLI::ExistingFile);
    an->add_flag("--json", as_json, "JSON output");
    an->add_option("--max-cycles", max_cycles, "cycle count cap");
    an->callback([&gl] {
        const auto g = fsm::parse_dot(read_file(graph_in));
        const auto a = fsm::analyze(g, std::nullopt, max_cycles);
        if (as_json) {
            emit(gl.out, fsm::analysis_json(a, g.k));
            return;
        }
        std::ostringstream out;
        out << "components " << a.components << "\ngarden_of_eden " << a.garden_of_eden.size()
            << "\nabsorbing";
        for (auto s : a.absorbing) out << ' ' << electrodes::state_label(s, g.k);
        out << "\ncycles " << a.cycles.size() << (a.cycles_truncated ? " (truncated)" : "") << '\n';
        for (const auto& c : a.cycles) {
            for (auto s : c) out << electrodes::state_label(s, g.k) << " -> ";
            out << electrodes::state_label(c.front(), g.k) << '\n';
        }
        emit(gl.out, out.str());
    });

    static std::size_t index = 0;
    auto* dot = cmd->add_subcommand("dot", "transition graph of one machine");
    dot->add_option("--machines", machines_in, "machines CSV")->required()->check(CLI::ExistingFile);
    dot->add_option("--index", index, "machine index");
    dot->callback([&gl] {
        const auto ms = fsm::parse_machines_csv(read_file(machines_in));
        if (index >= ms.size()) throw DomainError("machine index out of range");
        emit(gl.out, fsm::export_dot(fsm::functional_graph(ms[index]), "machine"));
    });
}

void add_run(CLI::App& app, Globals& gl) {
    auto* run = app.add_subcommand("run", "full experiment pipeline");
    static std::string preset, config;
    run->add_option("--preset", preset, "paper-defaults or paper-interior");
    run->add_option("--config", config, "key = value config file")->check(CLI::ExistingFile);
    run->callback([&gl] {
        auto cfg = preset.empty() ? pipeline::ExperimentConfig::paper_defaults()
                                  : pipeline::ExperimentConfig::preset(preset);
        if (!config.empty()) cfg = pipeline::load_config(config, cfg);
        if (gl.seed) cfg.input_seed = *gl.seed;
        if (!gl.out.empty()) cfg.output_dir = gl.out;
        cfg.threads = gl.threads;
        const auto m = pipeline::run_pipeline(cfg, &std::cerr);
        std::cout << m.json();
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"actinet: actin bundle networks as RLC transmission lines"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals gl;
    gl.threads = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--seed", gl.seed, "random seed (network for net gen, inputs otherwise)");
    app.add_option("--threads", gl.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("-o,--out", gl.out, "output file or directory");
    add_net(app, gl);
    add_params(app, gl);
    add_solve(app, gl);
    add_electrodes(app, gl);
    add_gates(app, gl);
    add_fsm(app, gl);
    add_run(app, gl);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        const std::string sub = app.get_subcommands().empty() ? "actinet" : app.get_subcommands().front()->get_name();
        std::cerr << "error: [" << sub << "] " << e.what() << "\n";
        return 1;
    }
    return 0;
}
