#pragma once

#include <map>
#include <string>
#include <vector>

#include "tcrisk/simulate.hpp"
#include "tcrisk/topology.hpp"

namespace tcrisk {

/// Saturation-to-probability curve 1/(1 + exp(-a*x + b)).
struct LogisticParams {
    double a = 6.0;
    double b = 7.0;
};

double logistic(double x, const LogisticParams& params = {});

/// Consequence weights tiered by the flow/capacity ratio. A ratio reaching a
/// threshold moves to the next tier (threshold values count as exceeded).
struct WeightRule {
    std::vector<double> thresholds = {0.5, 0.8};
    std::vector<double> weights = {1.0, 2.0, 4.0};

    void validate() const;
    double max_weight() const { return weights.back(); }
};

double consequence_weight(double flow_value, double capacity, const WeightRule& rule);

struct SaturationSnapshot {
    std::int64_t slot_index = 0;
    std::map<std::string, double> ss;  ///< station saturation, ratio
    std::map<std::string, double> sw;  ///< stranded dissipation time, hours
    std::map<std::string, double> si;  ///< section saturation, ratio
};

SaturationSnapshot compute_saturations(const FlowSnapshot& flow, const Network& net);

struct RiskSnapshot {
    std::int64_t slot_index = 0;
    std::map<std::string, double> rs;  ///< per station
    std::map<std::string, double> ri;  ///< per section
    std::map<std::string, double> rl;  ///< per line
    double rn = 0.0;                   ///< network risk
};

struct RiskConfig {
    WeightRule rule;
    LogisticParams logistic;
    /// Optional scale applied to SW before the logistic (dissipation time is
    /// in hours while the other channels are dimensionless ratios).
    double sw_scale = 1.0;
};

/// Which stations and sections each line aggregates; built once per network.
struct LineMembership {
    std::map<std::string, std::vector<std::string>> stations;
    std::map<std::string, std::vector<std::string>> sections;

    static LineMembership build(const Network& net);
};

/// Full risk hierarchy: RS per station, RI per section, RL per
/// line, RN over the deduplicated union of all stations and sections.
RiskSnapshot assess(const FlowSnapshot& flow, const Network& net, const RiskConfig& config = {});
RiskSnapshot assess(const FlowSnapshot& flow, const Network& net, const LineMembership& members,
                    const RiskConfig& config);

std::vector<RiskSnapshot> assess_series(const std::vector<FlowSnapshot>& flows, const Network& net,
                                        const RiskConfig& config = {});
std::vector<SaturationSnapshot> saturation_series(const std::vector<FlowSnapshot>& flows,
                                                  const Network& net);

/// CSV export: `slot,kind,id,risk` rows for stations/sections/lines plus one
/// `slot,global,RN,<value>` row per slot.
void write_risks_csv(const std::vector<RiskSnapshot>& risks, const std::string& path);

}  // namespace tcrisk
