#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tcrisk/topology.hpp"

namespace tcrisk {

/// 15-minute slots; an operating day (06:30-22:30) has 64 of them.
constexpr int kSlotsPerDay = 64;
constexpr double kSlotHours = 0.25;

/// Time-periodic demand shape: a base rate modulated by two Gaussian
/// time-of-day peaks, per-class attraction weights, and multiplicative
/// lognormal noise with unit mean. The defaults put the busiest stations and
/// sections of the bundled city-scale fixture into their saturated regime
/// with heavy slot-to-slot noise, which is the load level the forecasting
/// comparison is calibrated for; lighter or smoother settings make all
/// forecasting schemes nearly indistinguishable.
struct DemandProfile {
    double base_rate = 115.0;  ///< persons/hour scale per OD pair
    double peak_slots[2] = {8.0, 46.0};
    double peak_widths[2] = {60.0, 60.0};
    double peak_gains[2] = {1.0, 1.0};
    double noise_sigma = 1.3;
    std::map<CapacityClass, double> attraction = {
        {CapacityClass::Large, 1.5},
        {CapacityClass::Medium, 1.0},
        {CapacityClass::Small, 0.5},
    };

    /// Time-of-day multiplier g(s).
    double gain(double time_of_day_slot) const;

    void validate() const;  // throws Error on a bad profile
};

/// Lexicographically ordered origin/destination station pairs of a network;
/// fixes the meaning of ODBatch::demand indices.
struct PairTable {
    std::vector<std::pair<std::string, std::string>> pairs;

    explicit PairTable(const Network& net);
};

struct ODBatch {
    std::int64_t slot_index = 0;
    std::vector<double> demand;  ///< persons/hour per PairTable entry

    int time_of_day() const { return static_cast<int>(slot_index % kSlotsPerDay); }
};

/// Per-station admission/dissipation bookkeeping for one slot, persons.
struct SlotAccounting {
    double attempted = 0;   ///< carryover in + new demand
    double delivered = 0;   ///< reached its destination this slot
    double dissipated = 0;  ///< stranded passengers who left the system
    double carryover_out = 0;
    double pushed_back = 0;  ///< clipped in transit, returned upstream
};

struct FlowSnapshot {
    std::int64_t slot_index = 0;
    std::map<std::string, double> ps;  ///< station throughput, persons/hour
    std::map<std::string, double> pw;  ///< stranded persons at slot end
    std::map<std::string, double> pi;  ///< section flow, persons/hour
    SlotAccounting accounting;
};

/// One OD batch; noise draws are counter-based on (seed, slot, pair) so the
/// result is independent of generation order.
ODBatch generate_od_slot(const Network& net, const PairTable& pairs, const DemandProfile& profile,
                         std::int64_t slot_index, std::uint64_t seed);

std::vector<ODBatch> generate_od(const Network& net, const DemandProfile& profile, int days,
                                 std::uint64_t seed);

/// Capacity-constrained routing of OD batches. Routes for every pair are
/// computed once at construction, so repeated assignment over many slots is
/// cheap.
class FlowAssigner {
public:
    FlowAssigner(const Network& net, double transfer_penalty);
    ~FlowAssigner();
    FlowAssigner(FlowAssigner&&) noexcept;

    const PairTable& pairs() const;

    /// Routes one batch under station and section capacity limits. carryover
    /// maps station id to stranded persons waiting from the previous slot;
    /// the second result is the carryover for the next slot.
    std::pair<FlowSnapshot, std::map<std::string, double>> assign(
        const ODBatch& batch, const std::map<std::string, double>& carryover) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around FlowAssigner::assign.
std::pair<FlowSnapshot, std::map<std::string, double>> assign_flows(
    const Network& net, const ODBatch& batch, const std::map<std::string, double>& carryover,
    double transfer_penalty = 3.0);

struct SimulationConfig {
    DemandProfile profile;
    int days = 30;
    std::uint64_t seed = 1;
    double transfer_penalty = 3.0;
};

/// Folds assign_flows over days x 64 slots, threading carryover between slots
/// and resetting it at each day boundary.
std::vector<FlowSnapshot> run_simulation(const Network& net, const SimulationConfig& config);

/// CSV export with the fixed header `slot,kind,id,flow,stranded`.
void write_flows_csv(const std::vector<FlowSnapshot>& flows, const std::string& path);
std::vector<FlowSnapshot> read_flows_csv(const std::string& path);

}  // namespace tcrisk
