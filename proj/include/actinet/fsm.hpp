#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "actinet/gates.hpp"

namespace actinet::fsm {

using electrodes::State;

/// Deterministic machine: next[s] is the successor of state s.
struct Machine {
    std::size_t k = 0;
    std::vector<std::size_t> selection;  // output pair indices, leftmost bit first
    std::vector<State> next;

    std::size_t states() const { return std::size_t{1} << k; }
};

/// Output pairs whose count of 1s over all states lies strictly between
/// min_ones and max_ones, or equals it when the two bounds coincide.
std::vector<std::size_t> select_output_bits(const gates::ResponseTable& rt, std::size_t min_ones,
                                            std::size_t max_ones);

/// Parses "N" (exactly N), ">a,<b" (strictly between) or "=N".
std::pair<std::size_t, std::size_t> parse_filter(const std::string& text);

/// Narrowest filter (c - w, c + w), c = 2^(k-1), passing at least `target`
/// pairs; (c, c) when the exact middle already does.
std::pair<std::size_t, std::size_t> window_filter(const gates::ResponseTable& rt, std::size_t target);

/// Filter text to bounds; "auto:N" calls window_filter.
std::pair<std::size_t, std::size_t> resolve_filter(const gates::ResponseTable& rt,
                                                   const std::string& text);

/// f(s) = thresholded bits of the selected pairs at s. The machine width is
/// the selection size, which must equal the table's k.
Machine build_machine(const gates::ResponseTable& rt, std::span<const std::size_t> selection);

/// n choose k, throwing on overflow.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Visits every k-subset of {0..n-1} in lexicographic order.
void for_each_combination(std::size_t n, std::size_t k,
                          const std::function<void(std::span<const std::size_t>)>& visit);

/// One machine per k-subset of `candidates`.
std::vector<Machine> build_machines(const gates::ResponseTable& rt,
                                    std::span<const std::size_t> candidates,
                                    unsigned threads = 1);

/// Directed graph on the 2^k states; successor lists are sorted and unique.
struct Digraph {
    std::size_t k = 0;
    std::vector<std::vector<State>> succ;

    std::size_t states() const { return succ.size(); }
    std::size_t arc_count() const;
    std::vector<std::pair<State, State>> arcs() const;
};

struct WeightedArc {
    State to;
    std::size_t count;
    double weight;
};

struct WeightedGraph {
    std::size_t k = 0;
    std::size_t machines = 0;
    std::vector<std::vector<WeightedArc>> out;  // sorted by target

    std::size_t states() const { return out.size(); }
    /// 0 for absent arcs.
    double weight(State from, State to) const;
};

Digraph functional_graph(const Machine& m);

/// weight(x -> y) = |{m : f_m(x) = y}| / |machines|.
WeightedGraph aggregate(std::span<const Machine> machines);

/// Keeps arcs with weight >= theta; every state stays in the graph.
Digraph trim(const WeightedGraph& w, double theta);

/// Heaviest outgoing arc per state; ties go to the smallest successor.
Digraph max_likelihood_graph(const WeightedGraph& w);

struct Analysis {
    std::size_t components = 0;                 // weakly connected
    std::vector<State> garden_of_eden;          // no incoming arcs besides self-loops
    std::vector<State> absorbing;               // every outgoing arc is a self-loop
    std::vector<std::vector<State>> cycles;     // simple, length >= 2, min state first
    bool cycles_truncated = false;
};

/// Cycles longer than `max_cycle_length` (default 2^k) are skipped; at most
/// `max_cycles` are listed.
Analysis analyze(const Digraph& g, std::optional<std::size_t> max_cycle_length = std::nullopt,
                 std::size_t max_cycles = 1000000);

std::string analysis_json(const Analysis& a, std::size_t k);

std::string export_dot(const Digraph& g, const std::string& name = "G");
std::string export_dot(const WeightedGraph& w, const std::string& name = "G");

/// Reads DOT written by export_dot (and hand-written files in the same
/// subset: quoted or bare binary labels, `a -> b` arcs, optional attributes).
/// The width k is taken from the label length.
Digraph parse_dot(const std::string& text);

/// Reads the weighted export back (needs weight, prob and the machines
/// graph attribute).
WeightedGraph parse_weighted_dot(const std::string& text);

/// Machines as CSV: machine,selection,state,next.
std::string machines_csv(const gates::ResponseTable& rt, std::span<const Machine> machines);
/// Reads machines_csv output back; selections are not recovered.
std::vector<Machine> parse_machines_csv(const std::string& text);

}  // namespace actinet::fsm
