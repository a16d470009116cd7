#include "tcrisk/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace tcrisk {

double DemandProfile::gain(double s) const {
    double g = 1.0;
    for (int p = 0; p < 2; ++p) {
        double d = s - peak_slots[p];
        g += peak_gains[p] * std::exp(-d * d / (2.0 * peak_widths[p] * peak_widths[p]));
    }
    return g;
}

void DemandProfile::validate() const {
    if (!(base_rate > 0)) throw Error("demand profile: base_rate must be > 0");
    for (int p = 0; p < 2; ++p) {
        if (!(peak_widths[p] > 0)) throw Error("demand profile: peak widths must be > 0");
        if (peak_gains[p] < 0) throw Error("demand profile: peak gains must be >= 0");
    }
    if (noise_sigma < 0) throw Error("demand profile: noise_sigma must be >= 0");
    for (const auto& [cls, w] : attraction) {
        if (!(w > 0)) throw Error(std::string("demand profile: attraction(") + to_string(cls) +
                                  ") must be > 0");
    }
}

PairTable::PairTable(const Network& net) {
    for (const auto& [o, so] : net.stations) {
        for (const auto& [d, sd] : net.stations) {
            if (o != d) pairs.emplace_back(o, d);
        }
    }
    // std::map iteration is already sorted, so pairs are lexicographic.
}

namespace {

// splitmix64; the standard 64-bit mixer.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double to_unit(std::uint64_t u) {
    // (0,1]: avoids log(0) in Box-Muller.
    return (static_cast<double>(u >> 11) + 1.0) * 0x1.0p-53;
}

// Counter-based standard normal draw for (seed, slot, counter).
double counter_normal(std::uint64_t seed, std::uint64_t slot, std::uint64_t counter) {
    std::uint64_t key = mix64(seed ^ mix64(slot) ^ mix64(counter * 2 + 1));
    double u1 = to_unit(mix64(key));
    double u2 = to_unit(mix64(key ^ 0xa5a5a5a5a5a5a5a5ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

ODBatch generate_od_slot(const Network& net, const PairTable& pairs, const DemandProfile& profile,
                         std::int64_t slot_index, std::uint64_t seed) {
    profile.validate();
    if (slot_index < 0) throw Error("generate_od_slot: negative slot index");
    ODBatch batch;
    batch.slot_index = slot_index;
    batch.demand.resize(pairs.pairs.size());
    double g = profile.gain(static_cast<double>(slot_index % kSlotsPerDay));
    double sigma = profile.noise_sigma;
    for (std::size_t p = 0; p < pairs.pairs.size(); ++p) {
        const auto& [o, d] = pairs.pairs[p];
        double w = profile.attraction.at(net.stations.at(o).capacity_class) *
                   profile.attraction.at(net.stations.at(d).capacity_class);
        double noise = 1.0;
        if (sigma > 0) {
            double z = counter_normal(seed, static_cast<std::uint64_t>(slot_index), p);
            noise = std::exp(sigma * z - 0.5 * sigma * sigma);  // unit-mean lognormal
        }
        batch.demand[p] = profile.base_rate * w * g * noise;
    }
    return batch;
}

std::vector<ODBatch> generate_od(const Network& net, const DemandProfile& profile, int days,
                                 std::uint64_t seed) {
    if (days < 1) throw Error("generate_od: days must be >= 1");
    PairTable pairs(net);
    std::vector<ODBatch> out;
    out.reserve(static_cast<std::size_t>(days) * kSlotsPerDay);
    for (std::int64_t s = 0; s < static_cast<std::int64_t>(days) * kSlotsPerDay; ++s)
        out.push_back(generate_od_slot(net, pairs, profile, s, seed));
    return out;
}

struct FlowAssigner::Impl {
    PairTable pairs;
    std::vector<std::string> station_ids, section_ids;
    std::map<std::string, int> station_index, section_index;
    std::vector<double> cs_slot, cw_slot, ci_slot;  // capacities per slot, persons
    std::vector<int> section_from, section_to;
    std::vector<int> pair_origin;
    std::vector<std::vector<int>> pair_route;  // section indices per pair

    Impl(const Network& net, double transfer_penalty) : pairs(net) {
        for (const auto& [id, st] : net.stations) {
            station_index[id] = static_cast<int>(station_ids.size());
            station_ids.push_back(id);
            cs_slot.push_back(st.cs * kSlotHours);
            cw_slot.push_back(st.cw * kSlotHours);
        }
        for (const auto& [id, sec] : net.sections) {
            section_index[id] = static_cast<int>(section_ids.size());
            section_ids.push_back(id);
            ci_slot.push_back(sec.ci * kSlotHours);
            section_from.push_back(station_index.at(sec.from_station));
            section_to.push_back(station_index.at(sec.to_station));
        }
        Router router(net, transfer_penalty);
        pair_route.reserve(pairs.pairs.size());
        pair_origin.reserve(pairs.pairs.size());
        for (const auto& [o, d] : pairs.pairs) {
            pair_origin.push_back(station_index.at(o));
            std::vector<int> route;
            for (const auto& sid : router.route(o, d)) route.push_back(section_index.at(sid));
            pair_route.push_back(std::move(route));
        }
    }
};

FlowAssigner::FlowAssigner(const Network& net, double transfer_penalty)
    : impl_(std::make_unique<Impl>(net, transfer_penalty)) {}
FlowAssigner::~FlowAssigner() = default;
FlowAssigner::FlowAssigner(FlowAssigner&&) noexcept = default;

const PairTable& FlowAssigner::pairs() const { return impl_->pairs; }

std::pair<FlowSnapshot, std::map<std::string, double>> FlowAssigner::assign(
    const ODBatch& batch, const std::map<std::string, double>& carryover) const {
    const Impl& im = *impl_;
    const std::size_t ns = im.station_ids.size();
    const std::size_t nj = im.section_ids.size();
    if (batch.demand.size() != im.pairs.pairs.size())
        throw Error("assign_flows: batch does not match the network's pair table");

    std::vector<double> carry_in(ns, 0.0);
    for (const auto& [id, v] : carryover) {
        if (v < 0) throw Error("assign_flows: negative carryover at " + id);
        auto it = im.station_index.find(id);
        if (it == im.station_index.end()) throw Error("assign_flows: unknown station " + id);
        carry_in[it->second] = v;
    }

    std::vector<double> rem_station = im.cs_slot;
    std::vector<double> rem_section = im.ci_slot;
    std::vector<double> through(ns, 0.0), stranded_new(ns, 0.0), pushed(ns, 0.0);
    std::vector<double> section_flow(nj, 0.0);
    double demand_total = 0.0, delivered = 0.0, pushed_total = 0.0;

    for (std::size_t p = 0; p < batch.demand.size(); ++p) {
        double f = batch.demand[p] * kSlotHours;  // persons this slot
        if (f < 0) throw Error("assign_flows: negative demand");
        if (f == 0) continue;
        demand_total += f;
        int origin = im.pair_origin[p];
        double admit = std::min(f, rem_station[origin]);
        stranded_new[origin] += f - admit;
        rem_station[origin] -= admit;
        through[origin] += admit;
        double flow = admit;
        for (int j : im.pair_route[p]) {
            if (flow <= 0) break;
            double g = std::min(flow, rem_section[j]);
            if (flow > g) {
                pushed[im.section_from[j]] += flow - g;
                pushed_total += flow - g;
            }
            rem_section[j] -= g;
            section_flow[j] += g;
            flow = g;
            if (flow <= 0) break;
            int t = im.section_to[j];
            double h = std::min(flow, rem_station[t]);
            if (flow > h) {
                pushed[im.section_from[j]] += flow - h;
                pushed_total += flow - h;
            }
            rem_station[t] -= h;
            through[t] += h;
            flow = h;
        }
        delivered += flow;
    }

    FlowSnapshot snap;
    snap.slot_index = batch.slot_index;
    std::map<std::string, double> carry_out;
    double carry_in_total = 0.0, dissipated_total = 0.0, carry_out_total = 0.0;
    for (std::size_t i = 0; i < ns; ++i) {
        carry_in_total += carry_in[i];
        double stranded = carry_in[i] + stranded_new[i];
        double dissipated = std::min(stranded, im.cw_slot[i]);
        double out = stranded - dissipated + pushed[i];
        dissipated_total += dissipated;
        carry_out_total += out;
        snap.ps[im.station_ids[i]] = through[i] / kSlotHours;
        snap.pw[im.station_ids[i]] = out;
        carry_out[im.station_ids[i]] = out;
    }
    for (std::size_t j = 0; j < nj; ++j)
        snap.pi[im.section_ids[j]] = section_flow[j] / kSlotHours;

    snap.accounting.attempted = carry_in_total + demand_total;
    snap.accounting.delivered = delivered;
    snap.accounting.dissipated = dissipated_total;
    snap.accounting.carryover_out = carry_out_total;
    snap.accounting.pushed_back = pushed_total;
    return {std::move(snap), std::move(carry_out)};
}

std::pair<FlowSnapshot, std::map<std::string, double>> assign_flows(
    const Network& net, const ODBatch& batch, const std::map<std::string, double>& carryover,
    double transfer_penalty) {
    return FlowAssigner(net, transfer_penalty).assign(batch, carryover);
}

std::vector<FlowSnapshot> run_simulation(const Network& net, const SimulationConfig& config) {
    config.profile.validate();
    if (config.days < 1) throw Error("run_simulation: days must be >= 1");
    FlowAssigner assigner(net, config.transfer_penalty);
    PairTable pairs(net);
    std::vector<FlowSnapshot> out;
    out.reserve(static_cast<std::size_t>(config.days) * kSlotsPerDay);
    std::map<std::string, double> carry;
    for (std::int64_t s = 0; s < static_cast<std::int64_t>(config.days) * kSlotsPerDay; ++s) {
        if (s % kSlotsPerDay == 0) carry.clear();  // the system empties overnight
        ODBatch batch = generate_od_slot(net, pairs, config.profile, s, config.seed);
        auto [snap, next] = assigner.assign(batch, carry);
        carry = std::move(next);
        out.push_back(std::move(snap));
    }
    return out;
}

void write_flows_csv(const std::vector<FlowSnapshot>& flows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write flows CSV: " + path);
    out << "slot,kind,id,flow,stranded\n";
    char buf[64];
    for (const auto& snap : flows) {
        for (const auto& [id, v] : snap.ps) {
            std::snprintf(buf, sizeof buf, "%.6f,%.6f", v, snap.pw.at(id));
            out << snap.slot_index << ",station," << id << ',' << buf << '\n';
        }
        for (const auto& [id, v] : snap.pi) {
            std::snprintf(buf, sizeof buf, "%.6f,0.000000", v);
            out << snap.slot_index << ",section," << id << ',' << buf << '\n';
        }
    }
}

std::vector<FlowSnapshot> read_flows_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open flows CSV: " + path);
    std::string header;
    std::getline(in, header);
    if (header != "slot,kind,id,flow,stranded")
        throw ParseError("flows CSV: unexpected header: " + header);
    std::map<std::int64_t, FlowSnapshot> by_slot;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string slot, kind, id, flow, stranded;
        if (!std::getline(ss, slot, ',') || !std::getline(ss, kind, ',') ||
            !std::getline(ss, id, ',') || !std::getline(ss, flow, ',') ||
            !std::getline(ss, stranded, ','))
            throw ParseError("flows CSV: malformed row: " + line);
        std::int64_t s = std::stoll(slot);
        auto& snap = by_slot[s];
        snap.slot_index = s;
        if (kind == "station") {
            snap.ps[id] = std::stod(flow);
            snap.pw[id] = std::stod(stranded);
        } else if (kind == "section") {
            snap.pi[id] = std::stod(flow);
        } else {
            throw ParseError("flows CSV: unknown kind: " + kind);
        }
    }
    std::vector<FlowSnapshot> out;
    out.reserve(by_slot.size());
    for (auto& [s, snap] : by_slot) out.push_back(std::move(snap));
    return out;
}

}  // namespace tcrisk
