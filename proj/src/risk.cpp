#include "tcrisk/risk.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace tcrisk {

double logistic(double x, const LogisticParams& params) {
    if (!(params.a > 0)) throw Error("logistic: slope a must be > 0");
    if (!std::isfinite(x)) throw Error("logistic: non-finite input");
    return 1.0 / (1.0 + std::exp(-params.a * x + params.b));
}

void WeightRule::validate() const {
    if (weights.size() != thresholds.size() + 1)
        throw Error("weight rule: need one more weight than thresholds");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > 0.0 && thresholds[i] <= 1.0))
            throw Error("weight rule: thresholds must lie in (0,1]");
        if (i && !(thresholds[i] > thresholds[i - 1]))
            throw Error("weight rule: thresholds must be strictly ascending");
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 0)) throw Error("weight rule: weights must be > 0");
        if (i && !(weights[i] > weights[i - 1]))
            throw Error("weight rule: weights must be strictly ascending");
    }
}

double consequence_weight(double flow_value, double capacity, const WeightRule& rule) {
    rule.validate();
    if (!(capacity > 0)) throw Error("consequence_weight: capacity must be > 0");
    double ratio = flow_value / capacity;
    std::size_t k = 0;
    while (k < rule.thresholds.size() && rule.thresholds[k] <= ratio) ++k;
    return rule.weights[k];
}

SaturationSnapshot compute_saturations(const FlowSnapshot& flow, const Network& net) {
    SaturationSnapshot sat;
    sat.slot_index = flow.slot_index;
    for (const auto& [id, ps] : flow.ps) sat.ss[id] = ps / net.stations.at(id).cs;
    for (const auto& [id, pw] : flow.pw) sat.sw[id] = pw / net.stations.at(id).cw;
    for (const auto& [id, pi] : flow.pi) sat.si[id] = pi / net.sections.at(id).ci;
    return sat;
}

LineMembership LineMembership::build(const Network& net) {
    LineMembership m;
    for (const auto& [lid, line] : net.lines) {
        std::vector<std::string> st;
        std::set<std::string> seen;
        for (const auto& sid : line.station_sequence) {
            if (seen.insert(sid).second) st.push_back(sid);
        }
        m.stations[lid] = std::move(st);
        m.sections[lid] = net.line_sections(lid);
    }
    return m;
}

RiskSnapshot assess(const FlowSnapshot& flow, const Network& net, const RiskConfig& config) {
    return assess(flow, net, LineMembership::build(net), config);
}

RiskSnapshot assess(const FlowSnapshot& flow, const Network& net, const LineMembership& members,
                    const RiskConfig& config) {
    config.rule.validate();
    SaturationSnapshot sat = compute_saturations(flow, net);

    RiskSnapshot risk;
    risk.slot_index = flow.slot_index;
    for (const auto& [id, st] : net.stations) {
        double ps = flow.ps.at(id);
        double pw = flow.pw.at(id);
        double w1 = consequence_weight(ps, st.cs, config.rule);
        // The detention channel weights the stranded count against one hour
        // of dissipation capacity.
        double w2 = consequence_weight(pw, st.cw, config.rule);
        risk.rs[id] = w1 * logistic(sat.ss.at(id), config.logistic) +
                      w2 * logistic(config.sw_scale * sat.sw.at(id), config.logistic);
    }
    for (const auto& [id, sec] : net.sections) {
        double pi = flow.pi.at(id);
        double w3 = consequence_weight(pi, sec.ci, config.rule);
        risk.ri[id] = w3 * logistic(sat.si.at(id), config.logistic);
    }
    for (const auto& [lid, line] : net.lines) {
        double rl = 0.0;
        for (const auto& sid : members.stations.at(lid)) rl += risk.rs.at(sid);
        for (const auto& sid : members.sections.at(lid)) rl += risk.ri.at(sid);
        risk.rl[lid] = rl;
    }
    for (const auto& [id, v] : risk.rs) risk.rn += v;
    for (const auto& [id, v] : risk.ri) risk.rn += v;
    return risk;
}

std::vector<RiskSnapshot> assess_series(const std::vector<FlowSnapshot>& flows, const Network& net,
                                        const RiskConfig& config) {
    LineMembership members = LineMembership::build(net);
    std::vector<RiskSnapshot> out;
    out.reserve(flows.size());
    for (const auto& f : flows) out.push_back(assess(f, net, members, config));
    return out;
}

std::vector<SaturationSnapshot> saturation_series(const std::vector<FlowSnapshot>& flows,
                                                  const Network& net) {
    std::vector<SaturationSnapshot> out;
    out.reserve(flows.size());
    for (const auto& f : flows) out.push_back(compute_saturations(f, net));
    return out;
}

void write_risks_csv(const std::vector<RiskSnapshot>& risks, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write risks CSV: " + path);
    out << "slot,kind,id,risk\n";
    char buf[32];
    auto emit = [&](std::int64_t slot, const char* kind, const std::string& id, double v) {
        std::snprintf(buf, sizeof buf, "%.6f", v);
        out << slot << ',' << kind << ',' << id << ',' << buf << '\n';
    };
    for (const auto& r : risks) {
        for (const auto& [id, v] : r.rs) emit(r.slot_index, "station", id, v);
        for (const auto& [id, v] : r.ri) emit(r.slot_index, "section", id, v);
        for (const auto& [id, v] : r.rl) emit(r.slot_index, "line", id, v);
        emit(r.slot_index, "global", "RN", r.rn);
    }
}

}  // namespace tcrisk
