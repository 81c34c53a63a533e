#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "actinet/electrodes.hpp"

namespace actinet::gates {

using electrodes::OutputPair;
using electrodes::State;
using electrodes::ThresholdRule;

/// Raw pair differences and thresholded bits for every k-bit input state.
struct ResponseTable {
    std::size_t k = 0;
    std::vector<OutputPair> pairs;
    std::vector<std::size_t> inputs;  // electrodes used as inputs
    std::vector<double> diffs;        // states() x pairs.size(), row-major
    std::vector<std::uint8_t> bits;
    std::vector<double> thresholds;   // per state
    std::string rule;

    std::size_t states() const { return std::size_t{1} << k; }
    double diff(State s, std::size_t p) const { return diffs[s * pairs.size() + p]; }
    bool bit(State s, std::size_t p) const { return bits[s * pairs.size() + p] != 0; }
    /// Number of states for which pair `p` reads 1.
    std::size_t ones(std::size_t p) const;

    /// Checks shapes and that bits agree with diffs and thresholds.
    void validate() const;
};

/// Thresholds a difference matrix (states x pairs) into a table.
ResponseTable threshold_table(std::size_t k, std::vector<OutputPair> pairs,
                              std::vector<double> diffs, const ThresholdRule& rule);

/// Table from a bit matrix alone; diffs are set to the bits and the rule to
/// fixed:0.5. For tests and hand-made tables.
ResponseTable table_from_bits(std::size_t k, std::size_t pair_count,
                              std::vector<std::uint8_t> bits);

/// Pair differences for one input state.
using StateSolver = std::function<std::vector<double>(State)>;

/// Evaluates `solve` on states 0 .. 2^k - 1 on up to `threads` threads.
ResponseTable response_table(std::size_t k, std::vector<OutputPair> pairs,
                             const StateSolver& solve, const ThresholdRule& rule,
                             unsigned threads = 1);

/// Steady solves on the node-level reduced system. Every contacted element
/// must be a terminal of `rs`.
ResponseTable response_table(const solver::ReducedSystem& rs,
                             const electrodes::InputEncoding& enc,
                             const electrodes::ContactMap& cm, std::vector<OutputPair> pairs,
                             const ThresholdRule& rule, unsigned threads = 1);

/// Steady solves on the full element graph.
ResponseTable response_table(const solver::SteadySolver& ss,
                             const electrodes::InputEncoding& enc,
                             const electrodes::ContactMap& cm, std::vector<OutputPair> pairs,
                             const ThresholdRule& rule, unsigned threads = 1);

enum class GateType { NOT, OR, AND, XOR };

std::string gate_name(GateType t);

struct GateRecord {
    GateType type = GateType::NOT;
    std::size_t pair = 0;            // index into ResponseTable::pairs
    std::vector<std::size_t> bits;   // acting input bits, ascending, 0 = leftmost
    State context = 0;               // state with the acting bits cleared
    std::vector<State> witnesses;    // states in truth-table order

    friend bool operator==(const GateRecord&, const GateRecord&) = default;
    friend auto operator<=>(const GateRecord&, const GateRecord&) = default;
};

/// Context label: the k-bit state with '-' at the acting bits.
std::string context_label(const GateRecord& g, std::size_t k);

/// Output 1 with bit j off and 0 with bit j on, for every (bit, context, pair).
std::vector<GateRecord> mine_not(const ResponseTable& rt);

/// Outputs at (bit i, bit j) = 00, 01, 10, 11 match the truth table of `type`.
std::vector<GateRecord> mine_binary(const ResponseTable& rt, GateType type);

/// NOT, OR, AND and XOR records, sorted.
std::vector<GateRecord> mine_all(const ResponseTable& rt);

/// Re-checks a record against the table's bit matrix.
bool verify(const GateRecord& g, const ResponseTable& rt);

struct Census {
    std::array<std::size_t, 4> records{};  // per (pair, bits, context), by GateType
    std::array<std::size_t, 4> pairs{};    // distinct output pairs per type
};

Census census(std::span<const GateRecord> records);

/// type,pair,bits,context,witness_states
std::string gates_csv(const ResponseTable& rt, std::span<const GateRecord> records);
std::string census_csv(const Census& c);

/// Long-format table: header comments, then state,pair_a,pair_b,diff,bit.
std::string table_csv(const ResponseTable& rt);
ResponseTable parse_table_csv(const std::string& text);

}  // namespace actinet::gates
