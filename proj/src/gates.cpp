#include "actinet/gates.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "actinet/error.hpp"

namespace actinet::gates {

using electrodes::state_bit;
using electrodes::state_label;
using net::ElementId;

std::size_t ResponseTable::ones(std::size_t p) const {
    std::size_t n = 0;
    for (State s = 0; s < states(); ++s) n += bit(s, p) ? 1 : 0;
    return n;
}

void ResponseTable::validate() const {
    const std::size_t cells = states() * pairs.size();
    if (diffs.size() != cells || bits.size() != cells || thresholds.size() != states())
        throw InvariantError("response table shape does not match k and pair count");
    for (State s = 0; s < states(); ++s)
        for (std::size_t p = 0; p < pairs.size(); ++p)
            if (bit(s, p) != (diff(s, p) > thresholds[s]))
                throw InvariantError("response bit disagrees with its threshold at state " +
                                     std::to_string(s));
}

ResponseTable threshold_table(std::size_t k, std::vector<OutputPair> pairs,
                              std::vector<double> diffs, const ThresholdRule& rule) {
    if (k == 0 || k > 20) throw DomainError("k must lie in [1, 20]");
    if (pairs.empty()) throw DomainError("no output pairs");
    ResponseTable rt;
    rt.k = k;
    rt.pairs = std::move(pairs);
    rt.diffs = std::move(diffs);
    rt.rule = electrodes::rule_name(rule);
    const std::size_t np = rt.pairs.size();
    if (rt.diffs.size() != rt.states() * np)
        throw DomainError("difference matrix has the wrong size");

    rt.thresholds.assign(rt.states(), 0.0);
    if (const auto* f = std::get_if<electrodes::FixedThreshold>(&rule)) {
        std::fill(rt.thresholds.begin(), rt.thresholds.end(), f->value);
    } else if (std::holds_alternative<electrodes::GlobalMedian>(rule)) {
        std::fill(rt.thresholds.begin(), rt.thresholds.end(), electrodes::median(rt.diffs));
    } else {
        for (State s = 0; s < rt.states(); ++s)
            rt.thresholds[s] = electrodes::median(
                std::vector<double>(rt.diffs.begin() + static_cast<std::ptrdiff_t>(s * np),
                                    rt.diffs.begin() + static_cast<std::ptrdiff_t>((s + 1) * np)));
    }
    rt.bits.resize(rt.diffs.size());
    for (State s = 0; s < rt.states(); ++s)
        for (std::size_t p = 0; p < np; ++p)
            rt.bits[s * np + p] = rt.diff(s, p) > rt.thresholds[s] ? 1 : 0;
    return rt;
}

ResponseTable table_from_bits(std::size_t k, std::size_t pair_count,
                              std::vector<std::uint8_t> bits) {
    std::vector<OutputPair> pairs;
    for (std::size_t p = 0; p < pair_count; ++p) pairs.emplace_back(2 * p, 2 * p + 1);
    std::vector<double> diffs(bits.begin(), bits.end());
    return threshold_table(k, std::move(pairs), std::move(diffs), electrodes::FixedThreshold{0.5});
}

ResponseTable response_table(std::size_t k, std::vector<OutputPair> pairs,
                             const StateSolver& solve, const ThresholdRule& rule,
                             unsigned threads) {
    if (k == 0 || k > 20) throw DomainError("k must lie in [1, 20]");
    const std::size_t n = std::size_t{1} << k, np = pairs.size();
    std::vector<double> diffs(n * np);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t s; (s = next.fetch_add(1)) < n;) {
            try {
                const auto row = solve(static_cast<State>(s));
                if (row.size() != np) throw DomainError("state solver returned the wrong width");
                std::copy(row.begin(), row.end(), diffs.begin() + static_cast<std::ptrdiff_t>(s * np));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n;
            }
        }
    };
    const unsigned t = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (t == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < t; ++i) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    return threshold_table(k, std::move(pairs), std::move(diffs), rule);
}

ResponseTable response_table(const solver::ReducedSystem& rs,
                             const electrodes::InputEncoding& enc,
                             const electrodes::ContactMap& cm, std::vector<OutputPair> pairs,
                             const ThresholdRule& rule, unsigned threads) {
    enc.validate(cm);
    for (ElementId e : cm.contacted_elements()) rs.slot(e);  // throws for chain interiors
    auto solve = [&](State s) {
        const auto field = rs.solve(electrodes::encode_input(s, enc, cm));
        const auto pot = electrodes::electrode_potentials(
            cm, [&](ElementId e) { return rs.value(field, e); });
        return electrodes::pair_differences(pot, pairs);
    };
    auto rt = response_table(enc.k(), pairs, solve, rule, threads);
    rt.inputs = enc.electrodes();
    return rt;
}

ResponseTable response_table(const solver::SteadySolver& ss,
                             const electrodes::InputEncoding& enc,
                             const electrodes::ContactMap& cm, std::vector<OutputPair> pairs,
                             const ThresholdRule& rule, unsigned threads) {
    enc.validate(cm);
    auto solve = [&](State s) {
        const auto field = ss.solve(electrodes::encode_input(s, enc, cm));
        const auto pot = electrodes::electrode_potentials(
            cm, [&](ElementId e) { return field.at(e); });
        return electrodes::pair_differences(pot, pairs);
    };
    auto rt = response_table(enc.k(), pairs, solve, rule, threads);
    rt.inputs = enc.electrodes();
    return rt;
}

std::string gate_name(GateType t) {
    switch (t) {
        case GateType::NOT: return "NOT";
        case GateType::OR: return "OR";
        case GateType::AND: return "AND";
        case GateType::XOR: return "XOR";
    }
    return "?";
}

std::string context_label(const GateRecord& g, std::size_t k) {
    std::string out = state_label(g.context, k);
    for (std::size_t j : g.bits) out[j] = '-';
    return out;
}

namespace {

State bit_mask(std::size_t k, std::size_t j) { return State{1} << (k - 1 - j); }

// Truth table over (00, 01, 10, 11), first bit being the leftmost acting bit.
std::array<bool, 4> truth(GateType t) {
    switch (t) {
        case GateType::OR: return {false, true, true, true};
        case GateType::AND: return {false, false, false, true};
        case GateType::XOR: return {false, true, true, false};
        default: throw DomainError("not a binary gate");
    }
}

}  // namespace

std::vector<GateRecord> mine_not(const ResponseTable& rt) {
    std::vector<GateRecord> out;
    for (std::size_t j = 0; j < rt.k; ++j) {
        const State m = bit_mask(rt.k, j);
        for (State s = 0; s < rt.states(); ++s) {
            if (s & m) continue;
            for (std::size_t p = 0; p < rt.pairs.size(); ++p)
                if (rt.bit(s, p) && !rt.bit(s | m, p))
                    out.push_back({GateType::NOT, p, {j}, s, {s, s | m}});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<GateRecord> mine_binary(const ResponseTable& rt, GateType type) {
    if (rt.k < 2) throw DomainError("binary gates need k >= 2");
    const auto tt = truth(type);
    std::vector<GateRecord> out;
    for (std::size_t i = 0; i < rt.k; ++i) {
        for (std::size_t j = i + 1; j < rt.k; ++j) {
            const State mi = bit_mask(rt.k, i), mj = bit_mask(rt.k, j);
            for (State s = 0; s < rt.states(); ++s) {
                if (s & (mi | mj)) continue;
                const std::array<State, 4> w{s, s | mj, s | mi, s | mi | mj};
                for (std::size_t p = 0; p < rt.pairs.size(); ++p) {
                    bool match = true;
                    for (int c = 0; c < 4 && match; ++c) match = rt.bit(w[c], p) == tt[c];
                    if (match) out.push_back({type, p, {i, j}, s, {w.begin(), w.end()}});
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<GateRecord> mine_all(const ResponseTable& rt) {
    auto out = mine_not(rt);
    if (rt.k >= 2)
        for (GateType t : {GateType::OR, GateType::AND, GateType::XOR}) {
            auto more = mine_binary(rt, t);
            out.insert(out.end(), more.begin(), more.end());
        }
    std::sort(out.begin(), out.end());
    return out;
}

bool verify(const GateRecord& g, const ResponseTable& rt) {
    if (g.pair >= rt.pairs.size()) return false;
    if (g.type == GateType::NOT) {
        if (g.bits.size() != 1 || g.witnesses.size() != 2) return false;
        return rt.bit(g.witnesses[0], g.pair) && !rt.bit(g.witnesses[1], g.pair) &&
               (g.witnesses[0] ^ g.witnesses[1]) == bit_mask(rt.k, g.bits[0]);
    }
    if (g.bits.size() != 2 || g.witnesses.size() != 4) return false;
    const auto tt = truth(g.type);
    for (int c = 0; c < 4; ++c)
        if (rt.bit(g.witnesses[c], g.pair) != tt[c]) return false;
    return true;
}

Census census(std::span<const GateRecord> records) {
    Census c;
    std::array<std::vector<std::size_t>, 4> seen;
    for (const auto& g : records) {
        const auto t = static_cast<std::size_t>(g.type);
        ++c.records[t];
        seen[t].push_back(g.pair);
    }
    for (std::size_t t = 0; t < 4; ++t) {
        std::sort(seen[t].begin(), seen[t].end());
        c.pairs[t] = static_cast<std::size_t>(
            std::unique(seen[t].begin(), seen[t].end()) - seen[t].begin());
    }
    return c;
}

std::string gates_csv(const ResponseTable& rt, std::span<const GateRecord> records) {
    std::ostringstream out;
    out << "type,pair,bits,context,witness_states\n";
    for (const auto& g : records) {
        const auto& [a, b] = rt.pairs.at(g.pair);
        out << gate_name(g.type) << ',' << a << '-' << b << ',';
        for (std::size_t i = 0; i < g.bits.size(); ++i) out << (i ? " " : "") << g.bits[i] + 1;
        out << ',' << context_label(g, rt.k) << ',';
        for (std::size_t i = 0; i < g.witnesses.size(); ++i)
            out << (i ? " " : "") << state_label(g.witnesses[i], rt.k);
        out << '\n';
    }
    return out.str();
}

std::string census_csv(const Census& c) {
    std::ostringstream out;
    out << "type,records,distinct_pairs\n";
    for (std::size_t t = 0; t < 4; ++t)
        out << gate_name(static_cast<GateType>(t)) << ',' << c.records[t] << ',' << c.pairs[t]
            << '\n';
    return out.str();
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string table_csv(const ResponseTable& rt) {
    std::ostringstream out;
    out << "# k=" << rt.k << "\n# rule=" << rt.rule << "\n# inputs=";
    for (std::size_t i = 0; i < rt.inputs.size(); ++i) out << (i ? " " : "") << rt.inputs[i];
    out << "\nstate,pair_a,pair_b,diff,threshold,bit\n";
    for (State s = 0; s < rt.states(); ++s)
        for (std::size_t p = 0; p < rt.pairs.size(); ++p)
            out << state_label(s, rt.k) << ',' << rt.pairs[p].first << ',' << rt.pairs[p].second
                << ',' << fmt(rt.diff(s, p)) << ',' << fmt(rt.thresholds[s]) << ','
                << int(rt.bit(s, p)) << '\n';
    return out.str();
}

ResponseTable parse_table_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::map<std::string, std::string> meta;
    std::size_t lineno = 0;
    bool header = false;
    std::vector<OutputPair> pairs;
    std::map<OutputPair, std::size_t> pair_index;
    std::vector<std::tuple<State, std::size_t, double>> cells;
    std::size_t k = 0;
    auto fail = [&](const std::string& why) {
        throw ParseError("response table line " + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(' '));
            meta[key] = line.substr(eq + 1);
            continue;
        }
        if (!header) {
            if (line.rfind("state,", 0) != 0) fail("expected column header");
            header = true;
            if (!meta.count("k")) fail("missing '# k=' header");
            k = std::stoul(meta["k"]);
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string tok; std::getline(ls, tok, ',');) f.push_back(tok);
        if (f.size() < 4) fail("expected at least 4 columns");
        if (f[0].size() != k || f[0].find_first_not_of("01") != std::string::npos)
            fail("bad state label '" + f[0] + "'");
        try {
            const State s = static_cast<State>(std::stoul(f[0], nullptr, 2));
            const OutputPair pr{std::stoul(f[1]), std::stoul(f[2])};
            auto [it, fresh] = pair_index.emplace(pr, pairs.size());
            if (fresh) pairs.push_back(pr);
            cells.emplace_back(s, it->second, std::stod(f[3]));
        } catch (const std::logic_error&) {
            fail("malformed number");
        }
    }
    if (!header) throw ParseError("response table has no column header");
    const std::size_t np = pairs.size();
    std::vector<double> diffs((std::size_t{1} << k) * np, 0.0);
    std::vector<std::uint8_t> filled(diffs.size(), 0);
    for (const auto& [s, p, d] : cells) {
        if (s >= (State{1} << k)) throw ParseError("state out of range");
        diffs[s * np + p] = d;
        filled[s * np + p] = 1;
    }
    if (std::find(filled.begin(), filled.end(), 0) != filled.end())
        throw ParseError("response table is missing cells");
    const std::string rule = meta.count("rule") ? meta["rule"] : "median";
    auto rt = threshold_table(k, std::move(pairs), std::move(diffs), electrodes::parse_rule(rule));
    if (meta.count("inputs")) {
        std::istringstream ids(meta["inputs"]);
        for (std::size_t id; ids >> id;) rt.inputs.push_back(id);
    }
    return rt;
}

}  // namespace actinet::gates
