#include "actinet/electrodes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "actinet/error.hpp"

namespace actinet::electrodes {

void GridLayout::validate() const {
    if (rows == 0 || cols == 0) throw DomainError("grid needs at least one row and column");
    if (!(diameter > 0)) throw DomainError("electrode diameter must be positive");
    if ((rows > 1 || cols > 1) && !(pitch > diameter))
        throw DomainError("pitch must exceed the electrode diameter");
}

ElectrodeArray place_grid(const GridLayout& layout, Placement placement,
                          const net::BoundingBox& box, Mode mode) {
    layout.validate();
    const net::Vec3 ext = box.extent();
    const double span_x = static_cast<double>(layout.cols - 1) * layout.pitch;
    const double span_y = static_cast<double>(layout.rows - 1) * layout.pitch;
    // The outer disks must sit inside the footprint too.
    if (span_x + layout.diameter > ext.x || span_y + layout.diameter > ext.y) {
        std::ostringstream msg;
        msg << layout.rows << "x" << layout.cols << " grid spans " << span_y << " x " << span_x
            << " um (plus " << layout.diameter << " um disks), footprint is " << ext.y
            << " x " << ext.x << " um";
        throw DomainError(msg.str());
    }
    ElectrodeArray arr;
    arr.layout = layout;
    arr.placement = placement;
    arr.mode = mode;
    arr.plane_z = placement == Placement::surface ? box.min.z : 0.5 * (box.min.z + box.max.z);
    const double x0 = 0.5 * (box.min.x + box.max.x) - 0.5 * span_x;
    const double y0 = 0.5 * (box.min.y + box.max.y) - 0.5 * span_y;
    for (std::size_t r = 0; r < layout.rows; ++r)
        for (std::size_t c = 0; c < layout.cols; ++c)
            arr.centers.push_back({x0 + static_cast<double>(c) * layout.pitch,
                                   y0 + static_cast<double>(r) * layout.pitch, arr.plane_z});
    return arr;
}

std::vector<std::size_t> ContactMap::connected_electrodes() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < contacts.size(); ++i)
        if (!contacts[i].empty()) out.push_back(i);
    return out;
}

std::vector<ElementId> ContactMap::contacted_elements() const {
    std::vector<ElementId> out;
    for (const auto& c : contacts) out.insert(out.end(), c.begin(), c.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

ContactMap contact_map(const ElectrodeArray& arr, const net::ElementGraph& eg, double z_tol) {
    if (!(z_tol >= 0)) throw DomainError("z tolerance must be non-negative");
    ContactMap cm;
    cm.contacts.resize(arr.size());
    const std::size_t n = eg.size();
    if (arr.mode == Mode::ideal) {
        std::vector<double> best(arr.size(), std::numeric_limits<double>::infinity());
        std::vector<ElementId> arg(arr.size(), 0);
        for (ElementId e = 0; e < n; ++e) {
            const net::Vec3 p = eg.position(e);
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const double d = net::distance(p, arr.centers[i]);
                if (d < best[i]) best[i] = d, arg[i] = e;
            }
        }
        if (n > 0)
            for (std::size_t i = 0; i < arr.size(); ++i) cm.contacts[i] = {arg[i]};
        return cm;
    }
    const double r2 = 0.25 * arr.layout.diameter * arr.layout.diameter;
    for (ElementId e = 0; e < n; ++e) {
        const net::Vec3 p = eg.position(e);
        if (std::abs(p.z - arr.plane_z) > z_tol) continue;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const double dx = p.x - arr.centers[i].x, dy = p.y - arr.centers[i].y;
            if (dx * dx + dy * dy <= r2) cm.contacts[i].push_back(e);
        }
    }
    return cm;
}

std::vector<double> contact_depths(const ElectrodeArray& arr, const net::ElementGraph& eg) {
    std::vector<double> depth(arr.size(), std::numeric_limits<double>::infinity());
    const double r2 = 0.25 * arr.layout.diameter * arr.layout.diameter;
    for (ElementId e = 0; e < eg.size(); ++e) {
        const net::Vec3 p = eg.position(e);
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const double dx = p.x - arr.centers[i].x, dy = p.y - arr.centers[i].y;
            if (dx * dx + dy * dy <= r2) depth[i] = std::min(depth[i], std::abs(p.z - arr.plane_z));
        }
    }
    return depth;
}

double calibrate_z_tolerance(const ElectrodeArray& arr, const net::ElementGraph& eg,
                             std::size_t target) {
    if (target == 0) return 0.0;
    auto depth = contact_depths(arr, eg);
    std::sort(depth.begin(), depth.end());
    if (target > depth.size() || !std::isfinite(depth[target - 1])) {
        std::ostringstream msg;
        msg << "only " << std::count_if(depth.begin(), depth.end(), [](double d) { return std::isfinite(d); })
            << " electrodes can reach the network at any depth, " << target << " requested";
        throw DomainError(msg.str());
    }
    return depth[target - 1];
}

ContactMap point_contacts(std::span<const ElementId> elements) {
    ContactMap cm;
    for (ElementId e : elements) cm.contacts.push_back({e});
    return cm;
}

std::string contacts_csv(const ContactMap& cm) {
    std::ostringstream out;
    out << "electrode_id,element_id\n";
    for (std::size_t i = 0; i < cm.size(); ++i)
        for (ElementId e : cm.contacts[i]) out << i << ',' << e << '\n';
    return out.str();
}

std::vector<std::size_t> InputEncoding::electrodes() const {
    std::vector<std::size_t> out;
    for (const auto& [a, b] : pairs) out.push_back(a), out.push_back(b);
    return out;
}

void InputEncoding::validate(const ContactMap& cm) const {
    if (pairs.empty()) throw DomainError("input encoding has no bits");
    std::set<std::size_t> seen;
    for (std::size_t id : electrodes()) {
        if (id >= cm.size()) throw DomainError("input electrode " + std::to_string(id) + " does not exist");
        if (!cm.connected(id))
            throw DomainError("input electrode " + std::to_string(id) + " is not connected");
        if (!seen.insert(id).second)
            throw DomainError("input electrode " + std::to_string(id) + " used twice");
    }
}

InputEncoding random_encoding(const ContactMap& cm, std::size_t k, std::uint64_t seed,
                              double amplitude) {
    auto pool = cm.connected_electrodes();
    if (pool.size() < 2 * k) {
        std::ostringstream msg;
        msg << k << " input bits need " << 2 * k << " connected electrodes, only "
            << pool.size() << " available";
        throw DomainError(msg.str());
    }
    std::mt19937_64 rng(seed);
    // Fisher-Yates by hand: std::shuffle's draw sequence is library-specific.
    for (std::size_t i = pool.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(pool[i - 1], pool[j]);
    }
    InputEncoding enc;
    enc.amplitude = amplitude;
    for (std::size_t j = 0; j < k; ++j) enc.pairs.emplace_back(pool[2 * j], pool[2 * j + 1]);
    return enc;
}

std::string state_label(State s, std::size_t k) {
    std::string out(k, '0');
    for (std::size_t j = 0; j < k; ++j)
        if (state_bit(s, k, j)) out[j] = '1';
    return out;
}

solver::StimulusPattern encode_input(State s, const InputEncoding& enc, const ContactMap& cm) {
    enc.validate(cm);
    const std::size_t k = enc.k();
    if (k < 32 && (s >> k) != 0)
        throw DomainError("state " + std::to_string(s) + " has more than " + std::to_string(k) + " bits");
    solver::StimulusPattern out;
    out.amplitude = enc.amplitude;
    for (std::size_t j = 0; j < k; ++j) {
        if (!state_bit(s, k, j)) continue;
        const auto& plus = cm.contacts[enc.pairs[j].first];
        const auto& minus = cm.contacts[enc.pairs[j].second];
        for (ElementId e : plus) out.add(e, enc.amplitude / static_cast<double>(plus.size()));
        for (ElementId e : minus) out.add(e, -enc.amplitude / static_cast<double>(minus.size()));
    }
    return out;
}

std::vector<OutputPair> output_pairs(const ContactMap& cm, const InputEncoding& enc) {
    const auto used = enc.electrodes();
    std::vector<std::size_t> free;
    for (std::size_t id : cm.connected_electrodes())
        if (std::find(used.begin(), used.end(), id) == used.end()) free.push_back(id);
    std::vector<OutputPair> out;
    for (std::size_t i = 0; i < free.size(); ++i)
        for (std::size_t j = i + 1; j < free.size(); ++j) out.emplace_back(free[i], free[j]);
    return out;
}

std::vector<double> electrode_potentials(const ContactMap& cm,
                                         const std::function<double(ElementId)>& potential) {
    std::vector<double> out(cm.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < cm.size(); ++i) {
        if (cm.contacts[i].empty()) continue;
        double sum = 0;
        for (ElementId e : cm.contacts[i]) sum += potential(e);
        out[i] = sum / static_cast<double>(cm.contacts[i].size());
    }
    return out;
}

std::vector<double> pair_differences(std::span<const double> electrode_potential,
                                     std::span<const OutputPair> pairs) {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
        if (a >= electrode_potential.size() || b >= electrode_potential.size())
            throw DomainError("output pair references a missing electrode");
        out.push_back(electrode_potential[a] - electrode_potential[b]);
    }
    return out;
}

std::string rule_name(const ThresholdRule& rule) {
    if (const auto* f = std::get_if<FixedThreshold>(&rule)) {
        std::ostringstream out;
        out << "fixed:" << f->value;
        return out.str();
    }
    return std::holds_alternative<MedianPerState>(rule) ? "median" : "global-median";
}

ThresholdRule parse_rule(const std::string& text) {
    if (text == "median") return MedianPerState{};
    if (text == "global-median") return GlobalMedian{};
    std::string num = text;
    if (num.rfind("fixed:", 0) == 0) num = num.substr(6);
    try {
        std::size_t used = 0;
        const double v = std::stod(num, &used);
        if (used == num.size() && std::isfinite(v)) return FixedThreshold{v};
    } catch (const std::exception&) {
    }
    throw ParseError("unknown threshold rule '" + text + "' (median, global-median, fixed:<value>)");
}

double median(std::vector<double> values) {
    if (values.empty()) throw DomainError("median of an empty sample");
    const std::size_t n = values.size(), mid = n / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

Readout read_outputs(std::span<const double> electrode_potential,
                     std::span<const OutputPair> pairs, const ThresholdRule& rule) {
    if (pairs.empty()) throw DomainError("no output pairs to read");
    if (std::holds_alternative<GlobalMedian>(rule))
        throw DomainError("global median needs the whole response table");
    Readout r;
    r.differences = pair_differences(electrode_potential, pairs);
    r.threshold = std::holds_alternative<FixedThreshold>(rule)
                      ? std::get<FixedThreshold>(rule).value
                      : median(r.differences);
    r.bits.reserve(pairs.size());
    for (double d : r.differences) r.bits.push_back(d > r.threshold ? 1 : 0);
    return r;
}

}  // namespace actinet::electrodes
