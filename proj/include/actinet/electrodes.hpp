#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "actinet/netmodel.hpp"
#include "actinet/solver.hpp"

namespace actinet::electrodes {

using net::ElementId;
using State = std::uint32_t;

enum class Placement { surface, mid };
enum class Mode { ideal, realistic };

struct GridLayout {
    std::size_t rows = 5;
    std::size_t cols = 6;
    double pitch = 30.0;     // um, centre to centre
    double diameter = 10.0;  // um

    void validate() const;
};

/// Electrode centres in row-major order: id = row * cols + col, rows along y.
struct ElectrodeArray {
    GridLayout layout;
    Placement placement = Placement::surface;
    Mode mode = Mode::realistic;
    double plane_z = 0;  // um
    std::vector<net::Vec3> centers;

    std::size_t size() const { return centers.size(); }
};

/// Regular grid centred on the xy footprint of `box`. Surface placement puts
/// the plane at the bottom of the box, mid placement halfway up.
ElectrodeArray place_grid(const GridLayout& layout, Placement placement,
                          const net::BoundingBox& box, Mode mode = Mode::realistic);

struct ContactMap {
    std::vector<std::vector<ElementId>> contacts;  // per electrode, sorted

    std::size_t size() const { return contacts.size(); }
    bool connected(std::size_t electrode) const { return !contacts.at(electrode).empty(); }
    std::vector<std::size_t> connected_electrodes() const;
    /// Every contacted element, sorted and unique.
    std::vector<ElementId> contacted_elements() const;
};

/// Realistic mode: an element touches an electrode when its xy distance to the
/// centre is at most diameter/2 and |z - plane| <= z_tol. Ideal mode: the
/// element nearest to each centre (projected on the plane).
ContactMap contact_map(const ElectrodeArray& arr, const net::ElementGraph& eg,
                       double z_tol = 5.0);

/// Per electrode, the smallest |z - plane| over elements inside its xy disk
/// (infinity when none). An electrode is connected iff this is <= z_tol.
std::vector<double> contact_depths(const ElectrodeArray& arr, const net::ElementGraph& eg);

/// Smallest z tolerance connecting at least `target` electrodes. Throws
/// DomainError when fewer than `target` disks cover any element at all.
double calibrate_z_tolerance(const ElectrodeArray& arr, const net::ElementGraph& eg,
                             std::size_t target);

/// One electrode per listed element (point contacts at chosen sites).
ContactMap point_contacts(std::span<const ElementId> elements);

/// CSV with columns electrode_id,element_id.
std::string contacts_csv(const ContactMap& cm);

struct InputEncoding {
    /// Bit j (0 = most significant) drives pairs[j].first at +A and
    /// pairs[j].second at -A.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    double amplitude = 1.0;

    std::size_t k() const { return pairs.size(); }
    std::vector<std::size_t> electrodes() const;
    /// Throws DomainError unless all 2k electrodes are distinct and connected.
    void validate(const ContactMap& cm) const;
};

/// 2k distinct connected electrodes drawn with a seeded shuffle, paired in
/// draw order.
InputEncoding random_encoding(const ContactMap& cm, std::size_t k, std::uint64_t seed,
                              double amplitude = 1.0);

/// Bit j of a k-bit state, j = 0 being the leftmost character of its label.
inline bool state_bit(State s, std::size_t k, std::size_t j) {
    return ((s >> (k - 1 - j)) & 1u) != 0;
}

/// Zero-padded binary label of a state.
std::string state_label(State s, std::size_t k);

/// Each active bit spreads +A over the contacts of its first electrode and -A
/// over its second, split equally.
solver::StimulusPattern encode_input(State s, const InputEncoding& enc, const ContactMap& cm);

using OutputPair = std::pair<std::size_t, std::size_t>;

/// All unordered pairs (i < j) of connected electrodes not used as inputs.
std::vector<OutputPair> output_pairs(const ContactMap& cm, const InputEncoding& enc);

/// Mean potential over each electrode's contacts; NaN for unconnected ones.
std::vector<double> electrode_potentials(const ContactMap& cm,
                                         const std::function<double(ElementId)>& potential);

/// first - second for every pair.
std::vector<double> pair_differences(std::span<const double> electrode_potential,
                                     std::span<const OutputPair> pairs);

struct FixedThreshold {
    double value;
};
struct MedianPerState {};
struct GlobalMedian {};
using ThresholdRule = std::variant<FixedThreshold, MedianPerState, GlobalMedian>;

std::string rule_name(const ThresholdRule& rule);
/// "fixed:0.5", "median", "global-median".
ThresholdRule parse_rule(const std::string& text);

/// Median of a sample (mean of the two middle values for even counts).
double median(std::vector<double> values);

struct Readout {
    std::vector<double> differences;
    std::vector<std::uint8_t> bits;  // 1 iff difference > threshold
    double threshold = 0;
};

/// Reads one input state. GlobalMedian needs every state and is refused here.
Readout read_outputs(std::span<const double> electrode_potential,
                     std::span<const OutputPair> pairs, const ThresholdRule& rule);

}  // namespace actinet::electrodes
