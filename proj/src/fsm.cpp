#include "actinet/fsm.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "actinet/error.hpp"

namespace actinet::fsm {

using electrodes::state_label;

std::vector<std::size_t> select_output_bits(const gates::ResponseTable& rt, std::size_t min_ones,
                                            std::size_t max_ones) {
    if (min_ones > max_ones || max_ones > rt.states())
        throw DomainError("filter bounds must satisfy 0 <= min <= max <= 2^k");
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < rt.pairs.size(); ++p) {
        const std::size_t n = rt.ones(p);
        const bool keep = min_ones == max_ones ? n == min_ones : (n > min_ones && n < max_ones);
        if (keep) out.push_back(p);
    }
    return out;
}

std::pair<std::size_t, std::size_t> parse_filter(const std::string& text) {
    std::string t;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    auto num = [&](const std::string& s) -> std::size_t {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError("bad filter '" + text + "' (use \">a,<b\" or \"=n\")");
        return std::stoul(s);
    };
    if (!t.empty() && t[0] == '=') t = t.substr(1);
    const auto comma = t.find(',');
    if (comma == std::string::npos) {
        const std::size_t n = num(t);
        return {n, n};
    }
    const std::string lo = t.substr(0, comma), hi = t.substr(comma + 1);
    if (lo.empty() || hi.empty() || lo[0] != '>' || hi[0] != '<')
        throw ParseError("bad filter '" + text + "' (use \">a,<b\" or \"=n\")");
    return {num(lo.substr(1)), num(hi.substr(1))};
}

std::pair<std::size_t, std::size_t> window_filter(const gates::ResponseTable& rt,
                                                  std::size_t target) {
    const std::size_t c = rt.states() / 2;
    if (select_output_bits(rt, c, c).size() >= target) return {c, c};
    for (std::size_t w = 1; w <= c; ++w) {
        const std::size_t lo = c - w, hi = std::min(c + w, rt.states());
        if (select_output_bits(rt, lo, hi).size() >= target) return {lo, hi};
    }
    throw DomainError("no filter window passes " + std::to_string(target) + " output pairs");
}

std::pair<std::size_t, std::size_t> resolve_filter(const gates::ResponseTable& rt,
                                                   const std::string& text) {
    if (text.rfind("auto:", 0) == 0) {
        const std::string n = text.substr(5);
        if (n.empty() || n.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError("bad filter '" + text + "'");
        return window_filter(rt, std::stoul(n));
    }
    return parse_filter(text);
}

Machine build_machine(const gates::ResponseTable& rt, std::span<const std::size_t> selection) {
    if (selection.size() != rt.k)
        throw DomainError("selection has " + std::to_string(selection.size()) +
                          " pairs, machine width is " + std::to_string(rt.k));
    for (std::size_t p : selection) {
        if (p >= rt.pairs.size()) throw DomainError("selected pair " + std::to_string(p) + " out of range");
        for (std::size_t id : {rt.pairs[p].first, rt.pairs[p].second})
            if (std::find(rt.inputs.begin(), rt.inputs.end(), id) != rt.inputs.end())
                throw DomainError("selected pair " + std::to_string(p) + " uses input electrode " +
                                  std::to_string(id));
    }
    Machine m;
    m.k = rt.k;
    m.selection.assign(selection.begin(), selection.end());
    m.next.resize(m.states());
    for (State s = 0; s < m.states(); ++s) {
        State y = 0;
        for (std::size_t p : selection) y = (y << 1) | (rt.bit(s, p) ? 1u : 0u);
        m.next[s] = y;
    }
    return m;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // r * (n - k + i) / i stays exact: r is C(n - k + i - 1, i - 1).
        const std::uint64_t g = std::gcd(r, i);
        const std::uint64_t a = r / g, b = (n - k + i) / (i / g);
        if (a > std::numeric_limits<std::uint64_t>::max() / b)
            throw DomainError("binomial coefficient overflows");
        r = a * b;
    }
    return r;
}

void for_each_combination(std::size_t n, std::size_t k,
                          const std::function<void(std::span<const std::size_t>)>& visit) {
    if (k > n) return;
    std::vector<std::size_t> c(k);
    std::iota(c.begin(), c.end(), 0);
    while (true) {
        visit(c);
        std::size_t i = k;
        while (i > 0 && c[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++c[i - 1];
        for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
    }
}

std::vector<Machine> build_machines(const gates::ResponseTable& rt,
                                    std::span<const std::size_t> candidates, unsigned threads) {
    std::vector<std::vector<std::size_t>> selections;
    for_each_combination(candidates.size(), rt.k, [&](std::span<const std::size_t> idx) {
        std::vector<std::size_t> sel;
        for (std::size_t i : idx) sel.push_back(candidates[i]);
        selections.push_back(std::move(sel));
    });
    std::vector<Machine> out(selections.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < selections.size();)
            out[i] = build_machine(rt, selections[i]);
    };
    const unsigned t = std::max(1u, threads);
    if (t == 1 || selections.size() < 64) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < t; ++i) pool.emplace_back(work);
    }
    return out;
}

std::size_t Digraph::arc_count() const {
    std::size_t n = 0;
    for (const auto& s : succ) n += s.size();
    return n;
}

std::vector<std::pair<State, State>> Digraph::arcs() const {
    std::vector<std::pair<State, State>> out;
    for (State s = 0; s < succ.size(); ++s)
        for (State t : succ[s]) out.emplace_back(s, t);
    return out;
}

double WeightedGraph::weight(State from, State to) const {
    for (const auto& a : out.at(from))
        if (a.to == to) return a.weight;
    return 0.0;
}

Digraph functional_graph(const Machine& m) {
    Digraph g;
    g.k = m.k;
    g.succ.resize(m.states());
    for (State s = 0; s < m.states(); ++s) g.succ[s] = {m.next[s]};
    return g;
}

WeightedGraph aggregate(std::span<const Machine> machines) {
    if (machines.empty()) throw DomainError("cannot aggregate an empty machine list");
    const std::size_t k = machines.front().k;
    const std::size_t n = std::size_t{1} << k;
    std::vector<std::map<State, std::size_t>> counts(n);
    for (const auto& m : machines) {
        if (m.k != k || m.next.size() != n) throw DomainError("machines of different widths");
        for (State s = 0; s < n; ++s) ++counts[s][m.next[s]];
    }
    WeightedGraph w;
    w.k = k;
    w.machines = machines.size();
    w.out.resize(n);
    const double total = static_cast<double>(machines.size());
    for (State s = 0; s < n; ++s)
        for (const auto& [t, c] : counts[s])
            w.out[s].push_back({t, c, static_cast<double>(c) / total});
    return w;
}

Digraph trim(const WeightedGraph& w, double theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta must lie in [0, 1]");
    Digraph g;
    g.k = w.k;
    g.succ.resize(w.states());
    for (State s = 0; s < w.states(); ++s)
        for (const auto& a : w.out[s])
            // Counts are compared exactly: count >= theta * machines.
            if (static_cast<double>(a.count) >= theta * static_cast<double>(w.machines) - 1e-9)
                g.succ[s].push_back(a.to);
    return g;
}

Digraph max_likelihood_graph(const WeightedGraph& w) {
    Digraph g;
    g.k = w.k;
    g.succ.resize(w.states());
    for (State s = 0; s < w.states(); ++s) {
        if (w.out[s].empty())
            throw DomainError("state " + state_label(s, w.k) + " has no outgoing arc");
        const WeightedArc* best = &w.out[s].front();
        for (const auto& a : w.out[s])
            if (a.count > best->count) best = &a;  // targets ascend, so ties keep the smallest
        g.succ[s] = {best->to};
    }
    return g;
}

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a), b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

// Tarjan SCC restricted to vertices >= lo; returns the component label of each
// vertex (npos outside the range).
std::vector<std::size_t> scc_from(const std::vector<std::vector<State>>& adj, State lo) {
    constexpr auto none = std::numeric_limits<std::size_t>::max();
    const std::size_t n = adj.size();
    std::vector<std::size_t> index(n, none), low(n, 0), comp(n, none);
    std::vector<State> stack;
    std::vector<bool> on(n, false);
    std::size_t counter = 0, label = 0;
    struct Frame {
        State v;
        std::size_t i;
    };
    for (State root = lo; root < n; ++root) {
        if (index[root] != none) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.i < adj[f.v].size()) {
                const State w = adj[f.v][f.i++];
                if (w < lo) continue;
                if (index[w] == none) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on[w] = true;
                    call.push_back({w, 0});
                } else if (on[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
                continue;
            }
            const State v = f.v;
            call.pop_back();
            if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
            if (low[v] == index[v]) {
                State w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on[w] = false;
                    comp[w] = label;
                } while (w != v);
                ++label;
            }
        }
    }
    return comp;
}

}  // namespace

Analysis analyze(const Digraph& g, std::optional<std::size_t> max_cycle_length,
                 std::size_t max_cycles) {
    const std::size_t n = g.states();
    Analysis a;
    UnionFind uf(n);
    std::vector<std::size_t> indeg(n, 0);
    // Self-loops are dropped from the adjacency used for cycles.
    std::vector<std::vector<State>> adj(n);
    for (State s = 0; s < n; ++s)
        for (State t : g.succ[s]) {
            if (t >= n) throw InvariantError("arc to state " + std::to_string(t) + " out of range");
            uf.unite(s, t);
            if (t != s) ++indeg[t], adj[s].push_back(t);
        }
    for (State s = 0; s < n; ++s) a.components += uf.find(s) == s ? 1 : 0;
    for (State s = 0; s < n; ++s) {
        const bool absorbing = !g.succ[s].empty() && adj[s].empty();
        if (absorbing) a.absorbing.push_back(s);
        else if (indeg[s] == 0) a.garden_of_eden.push_back(s);
    }

    // Johnson's elementary circuit search, iterative.
    const std::size_t bound = max_cycle_length.value_or(n);
    std::vector<bool> blocked(n, false);
    std::vector<std::vector<State>> blist(n);
    std::vector<State> path;
    struct Frame {
        State v;
        std::size_t i;
        bool found;
    };
    auto unblock = [&](State u) {
        std::vector<State> todo{u};
        while (!todo.empty()) {
            const State x = todo.back();
            todo.pop_back();
            if (!blocked[x]) continue;
            blocked[x] = false;
            for (State y : blist[x]) todo.push_back(y);
            blist[x].clear();
        }
    };
    for (State s = 0; s < n && !a.cycles_truncated; ++s) {
        const auto comp = scc_from(adj, s);
        const std::size_t cs = comp[s];
        bool nontrivial = false;
        for (State t : adj[s]) nontrivial |= t >= s && comp[t] == cs;
        if (!nontrivial) continue;
        auto in_scc = [&](State v) { return v >= s && comp[v] == cs; };
        for (State v = s; v < n; ++v)
            if (in_scc(v)) blocked[v] = false, blist[v].clear();

        std::vector<Frame> call{{s, 0, false}};
        blocked[s] = true;
        path.assign(1, s);
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.i < adj[f.v].size()) {
                const State w = adj[f.v][f.i++];
                if (!in_scc(w)) continue;
                if (w == s) {
                    f.found = true;
                    if (path.size() <= bound) {
                        if (a.cycles.size() >= max_cycles) {
                            a.cycles_truncated = true;
                            break;
                        }
                        a.cycles.push_back(path);
                    }
                } else if (path.size() >= bound) {
                    f.found = true;  // pruned by length: never block on it
                } else if (!blocked[w]) {
                    blocked[w] = true;
                    path.push_back(w);
                    call.push_back({w, 0, false});
                }
                continue;
            }
            const Frame done = f;
            call.pop_back();
            if (done.found) {
                unblock(done.v);
            } else {
                for (State w : adj[done.v])
                    if (in_scc(w) &&
                        std::find(blist[w].begin(), blist[w].end(), done.v) == blist[w].end())
                        blist[w].push_back(done.v);
            }
            path.pop_back();
            if (!call.empty()) call.back().found |= done.found;
        }
    }
    std::sort(a.cycles.begin(), a.cycles.end());
    return a;
}

std::string analysis_json(const Analysis& a, std::size_t k) {
    auto labels = [&](const std::vector<State>& v) {
        nlohmann::json out = nlohmann::json::array();
        for (State s : v) out.push_back(state_label(s, k));
        return out;
    };
    nlohmann::json j;
    j["components"] = a.components;
    j["garden_of_eden"] = labels(a.garden_of_eden);
    j["absorbing"] = labels(a.absorbing);
    j["cycles"] = nlohmann::json::array();
    for (const auto& c : a.cycles) j["cycles"].push_back(labels(c));
    j["cycles_truncated"] = a.cycles_truncated;
    return j.dump(1) + "\n";
}

namespace {

std::string dot_label(State s, std::size_t k) {
    return "\"" + (k == 0 ? std::string("0") : state_label(s, k)) + "\"";
}

std::string fmt(double v, const char* spec) {
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

std::string export_dot(const Digraph& g, const std::string& name) {
    std::ostringstream out;
    out << "digraph " << name << " {\n";
    for (State s = 0; s < g.states(); ++s) out << "  " << dot_label(s, g.k) << ";\n";
    for (State s = 0; s < g.states(); ++s)
        for (State t : g.succ[s])
            out << "  " << dot_label(s, g.k) << " -> " << dot_label(t, g.k) << ";\n";
    out << "}\n";
    return out.str();
}

std::string export_dot(const WeightedGraph& w, const std::string& name) {
    std::ostringstream out;
    out << "digraph " << name << " {\n";
    out << "  graph [machines=" << w.machines << "];\n";
    for (State s = 0; s < w.states(); ++s) out << "  " << dot_label(s, w.k) << ";\n";
    for (State s = 0; s < w.states(); ++s)
        for (const auto& a : w.out[s])
            out << "  " << dot_label(s, w.k) << " -> " << dot_label(a.to, w.k)
                << " [weight=" << a.count << ", prob=\"" << fmt(a.weight, "%.17g")
                << "\", label=\"" << fmt(a.weight, "%.2f") << "\"];\n";
    out << "}\n";
    return out.str();
}

namespace {

struct Token {
    enum Kind { id, arrow, punct, end } kind;
    std::string text;
};

std::vector<Token> tokenize(const std::string& src) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = src.size();
    while (i < n) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
        } else if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            const auto close = src.find("*/", i + 2);
            if (close == std::string::npos) throw ParseError("DOT: unterminated comment");
            i = close + 2;
        } else if (c == '#') {
            while (i < n && src[i] != '\n') ++i;
        } else if (c == '-' && i + 1 < n && src[i + 1] == '>') {
            out.push_back({Token::arrow, "->"});
            i += 2;
        } else if (c == '"') {
            std::string s;
            ++i;
            while (i < n && src[i] != '"') {
                if (src[i] == '\\' && i + 1 < n) ++i;
                s += src[i++];
            }
            if (i >= n) throw ParseError("DOT: unterminated string");
            ++i;
            out.push_back({Token::id, s});
        } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-') {
            std::string s;
            while (i < n && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_' ||
                             src[i] == '.' || (src[i] == '-' && !(i + 1 < n && src[i + 1] == '>'))))
                s += src[i++];
            out.push_back({Token::id, s});
        } else if (std::string("{}[]=,;").find(c) != std::string::npos) {
            out.push_back({Token::punct, std::string(1, c)});
            ++i;
        } else {
            throw ParseError(std::string("DOT: unexpected character '") + c + "'");
        }
    }
    out.push_back({Token::end, ""});
    return out;
}

}  // namespace

namespace {

struct DotArc {
    std::string from, to;
    std::map<std::string, std::string> attrs;
};

struct DotDocument {
    std::vector<std::string> nodes;
    std::vector<DotArc> arcs;
    std::map<std::string, std::string> graph_attrs;
    std::size_t k = 0;
};

DotDocument read_dot(const std::string& text) {
    const auto tok = tokenize(text);
    std::size_t i = 0;
    auto is_punct = [&](const char* p) { return tok[i].kind == Token::punct && tok[i].text == p; };
    auto expect = [&](const char* p) {
        if (!is_punct(p)) throw ParseError(std::string("DOT: expected '") + p + "' near '" + tok[i].text + "'");
        ++i;
    };
    auto attr_list = [&] {
        std::map<std::string, std::string> out;
        if (!is_punct("[")) return out;
        ++i;
        while (!is_punct("]")) {
            if (tok[i].kind != Token::id) throw ParseError("DOT: bad attribute list");
            const std::string key = tok[i++].text;
            expect("=");
            if (tok[i].kind != Token::id) throw ParseError("DOT: attribute '" + key + "' has no value");
            out[key] = tok[i++].text;
            if (is_punct(",") || is_punct(";")) ++i;
        }
        ++i;
        return out;
    };

    if (tok[i].kind == Token::id && tok[i].text == "strict") ++i;
    if (tok[i].kind != Token::id || tok[i].text != "digraph") throw ParseError("DOT: expected 'digraph'");
    ++i;
    if (tok[i].kind == Token::id) ++i;
    expect("{");

    DotDocument doc;
    while (!is_punct("}")) {
        if (tok[i].kind == Token::end) throw ParseError("DOT: missing '}'");
        if (is_punct(";")) {
            ++i;
            continue;
        }
        if (tok[i].kind != Token::id) throw ParseError("DOT: unexpected '" + tok[i].text + "'");
        const std::string head = tok[i++].text;
        if ((head == "graph" || head == "node" || head == "edge") && is_punct("[")) {
            auto attrs = attr_list();
            if (head == "graph") doc.graph_attrs.insert(attrs.begin(), attrs.end());
            continue;
        }
        if (is_punct("=")) {
            ++i;
            if (tok[i].kind != Token::id) throw ParseError("DOT: graph attribute without value");
            doc.graph_attrs[head] = tok[i++].text;
            continue;
        }
        std::vector<std::string> chain{head};
        while (tok[i].kind == Token::arrow) {
            ++i;
            if (tok[i].kind != Token::id) throw ParseError("DOT: arc without a target");
            chain.push_back(tok[i++].text);
        }
        const auto attrs = attr_list();
        doc.nodes.insert(doc.nodes.end(), chain.begin(), chain.end());
        for (std::size_t c = 1; c < chain.size(); ++c) doc.arcs.push_back({chain[c - 1], chain[c], attrs});
    }

    bool first = true;
    for (const auto& s : doc.nodes) {
        if (s.empty() || s.find_first_not_of("01") != std::string::npos)
            throw ParseError("DOT: node '" + s + "' is not a binary state label");
        if (first) doc.k = s.size(), first = false;
        else if (s.size() != doc.k) throw ParseError("DOT: labels of different widths");
    }
    if (doc.k > 20) throw ParseError("DOT: state labels wider than 20 bits");
    return doc;
}

State parse_state(const std::string& s) { return static_cast<State>(std::stoul(s, nullptr, 2)); }

}  // namespace

Digraph parse_dot(const std::string& text) {
    const auto doc = read_dot(text);
    Digraph g;
    g.k = doc.k;
    g.succ.resize(doc.nodes.empty() ? 0 : std::size_t{1} << doc.k);
    for (const auto& a : doc.arcs) g.succ[parse_state(a.from)].push_back(parse_state(a.to));
    for (auto& s : g.succ) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    return g;
}

WeightedGraph parse_weighted_dot(const std::string& text) {
    const auto doc = read_dot(text);
    WeightedGraph w;
    w.k = doc.k;
    w.out.resize(doc.nodes.empty() ? 0 : std::size_t{1} << doc.k);
    const auto m = doc.graph_attrs.find("machines");
    if (m == doc.graph_attrs.end()) throw ParseError("DOT: weighted graph lacks the machines attribute");
    try {
        w.machines = std::stoul(m->second);
        for (const auto& a : doc.arcs) {
            const auto c = a.attrs.find("weight"), p = a.attrs.find("prob");
            if (c == a.attrs.end() || p == a.attrs.end())
                throw ParseError("DOT: arc " + a.from + " -> " + a.to + " lacks weight or prob");
            w.out[parse_state(a.from)].push_back({parse_state(a.to), std::stoul(c->second), std::stod(p->second)});
        }
    } catch (const std::logic_error&) {
        throw ParseError("DOT: malformed number in weighted graph");
    }
    for (auto& o : w.out)
        std::sort(o.begin(), o.end(), [](const WeightedArc& x, const WeightedArc& y) { return x.to < y.to; });
    return w;
}

std::string machines_csv(const gates::ResponseTable& rt, std::span<const Machine> machines) {
    std::ostringstream out;
    out << "machine,selection,state,next\n";
    for (std::size_t m = 0; m < machines.size(); ++m) {
        std::string sel;
        for (std::size_t p : machines[m].selection) {
            if (!sel.empty()) sel += ' ';
            sel += std::to_string(rt.pairs.at(p).first) + "-" + std::to_string(rt.pairs.at(p).second);
        }
        for (State s = 0; s < machines[m].states(); ++s)
            out << m << ',' << sel << ',' << state_label(s, machines[m].k) << ','
                << state_label(machines[m].next[s], machines[m].k) << '\n';
    }
    return out.str();
}

std::vector<Machine> parse_machines_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    std::vector<Machine> out;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || lineno == 1) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string tok; std::getline(ls, tok, ',');) f.push_back(tok);
        auto fail = [&](const std::string& why) {
            throw ParseError("machines line " + std::to_string(lineno) + ": " + why);
        };
        if (f.size() != 4) fail("expected 4 columns");
        if (f[2].empty() || f[2].size() != f[3].size() || f[2].size() > 20 ||
            f[2].find_first_not_of("01") != std::string::npos ||
            f[3].find_first_not_of("01") != std::string::npos)
            fail("bad state labels");
        std::size_t m = 0;
        try {
            m = std::stoul(f[0]);
        } catch (const std::logic_error&) {
            fail("bad machine index");
        }
        if (m > out.size()) fail("machine indices must be consecutive");
        if (m == out.size()) {
            Machine mc;
            mc.k = f[2].size();
            mc.next.assign(mc.states(), 0);
            out.push_back(std::move(mc));
        }
        Machine& mc = out[m];
        if (f[2].size() != mc.k) fail("state width changes inside a machine");
        mc.next[std::stoul(f[2], nullptr, 2)] = static_cast<State>(std::stoul(f[3], nullptr, 2));
    }
    return out;
}

}  // namespace actinet::fsm
