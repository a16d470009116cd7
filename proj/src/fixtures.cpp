#include "tcrisk/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

namespace tcrisk {

namespace {

void add_station(Network& net, const std::string& id, CapacityClass cls) {
    Station st;
    st.id = id;
    st.name = id;
    st.capacity_class = cls;
    st.cs = default_cs(cls);
    st.cw = 0.25 * st.cs;
    net.stations.emplace(id, std::move(st));
}

// Creates both directed sections for an adjacent pair unless they already
// exist (pairs shared between lines are created once).
void add_section_pair(Network& net, const std::string& a, const std::string& b,
                      const std::string& line_id) {
    if (net.section_between(a, b).empty()) {
        Section s;
        s.id = a + "_" + b;
        s.from_station = a;
        s.to_station = b;
        s.line_id = line_id;
        s.ci = 21600.0;
        net.sections.emplace(s.id, std::move(s));
    }
    if (net.section_between(b, a).empty()) {
        Section s;
        s.id = b + "_" + a;
        s.from_station = b;
        s.to_station = a;
        s.line_id = line_id;
        s.ci = 21600.0;
        net.sections.emplace(s.id, std::move(s));
    }
}

void finish_line(Network& net, const std::string& id, const std::string& name,
                 const std::vector<std::string>& seq) {
    Line line;
    line.id = id;
    line.name = name;
    line.station_sequence = seq;
    net.lines.emplace(id, std::move(line));
    for (const auto& sid : seq) net.stations.at(sid).line_ids.insert(id);
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
        add_section_pair(net, seq[i], seq[i + 1], id);
}

}  // namespace

Network make_toy_network() {
    Network net;
    add_station(net, "a1", CapacityClass::Medium);
    add_station(net, "a2", CapacityClass::Small);
    add_station(net, "a3", CapacityClass::Medium);
    add_station(net, "b1", CapacityClass::Small);
    add_station(net, "b2", CapacityClass::Medium);
    add_station(net, "b3", CapacityClass::Small);
    add_station(net, "x1", CapacityClass::Large);
    finish_line(net, "lineA", "Toy Line A", {"a1", "a2", "x1", "a3"});
    finish_line(net, "lineB", "Toy Line B", {"b1", "x1", "b2", "b3"});
    return net;
}

namespace {

struct LineSpec {
    const char* id;
    const char* name;
    int non_transfer;
    int transfers;
};

// Non-transfer and transfer-station counts per line, following the published
// line table of the reference system.
constexpr std::array<LineSpec, 10> kLineSpecs{{
    {"line01", "Line 1", 19, 5},
    {"line02", "Line 2", 20, 5},
    {"line03", "Line 3", 31, 8},
    {"line04", "Line 3 Kong Gang", 6, 1},
    {"line05", "Line 4", 6, 2},
    {"line06", "Line 5", 8, 2},
    {"line07", "Line 6", 20, 8},
    {"line08", "Line 10", 14, 5},
    {"line09", "Loop Line", 18, 8},
    {"line10", "International Expo Line", 4, 2},
}};

}  // namespace

Network make_chongqing_network() {
    Network net;

    // --- transfer-station assignment -------------------------------------
    // Every entry is the set of lines one transfer station belongs to.
    std::vector<std::vector<int>> transfer_lines;
    std::array<int, 10> need{};
    for (int i = 0; i < 10; ++i) need[i] = kLineSpecs[i].transfers;

    // Chain of all ten lines in ascending order of transfer need keeps the
    // network connected and exactly exhausts the smallest lines.
    const std::array<int, 10> chain{3, 4, 5, 9, 0, 1, 7, 2, 6, 8};
    for (int i = 0; i + 1 < 10; ++i) {
        transfer_lines.push_back({chain[i], chain[i + 1]});
        --need[chain[i]];
        --need[chain[i + 1]];
    }

    // Two adjacent stations shared by Line 6 (index 6) and the Loop line
    // (index 8); their connecting section pair belongs to both lines.
    const int shared_a = static_cast<int>(transfer_lines.size());
    transfer_lines.push_back({6, 8});
    transfer_lines.push_back({6, 8});
    need[6] -= 2;
    need[8] -= 2;
    const int shared_b = shared_a + 1;

    // Two three-line stations, then greedy pairing of the remaining need.
    for (int k = 0; k < 2; ++k) {
        transfer_lines.push_back({2, 6, 8});
        --need[2];
        --need[6];
        --need[8];
    }
    while (true) {
        int first = -1, second = -1;
        for (int i = 0; i < 10; ++i) {
            if (need[i] <= 0) continue;
            if (first < 0 || need[i] > need[first]) {
                second = first;
                first = i;
            } else if (second < 0 || need[i] > need[second]) {
                second = i;
            }
        }
        if (first < 0) break;
        if (second < 0) throw Error("fixture: odd transfer need left over");
        if (first > second) std::swap(first, second);
        transfer_lines.push_back({first, second});
        --need[first];
        --need[second];
    }

    std::vector<std::string> transfer_ids;
    for (std::size_t t = 0; t < transfer_lines.size(); ++t) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "t%02u", static_cast<unsigned>(t + 1));
        transfer_ids.emplace_back(buf);
        add_station(net, transfer_ids.back(), CapacityClass::Large);
    }

    // --- per-line sequences ------------------------------------------------
    for (int li = 0; li < 10; ++li) {
        const LineSpec& spec = kLineSpecs[li];
        std::vector<std::string> seq;
        for (int s = 0; s < spec.non_transfer; ++s) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%ss%02d", spec.id, s + 1);
            add_station(net, buf, s % 2 == 0 ? CapacityClass::Medium : CapacityClass::Small);
            seq.emplace_back(buf);
        }
        // Insert this line's transfer stations at evenly spread positions;
        // the shared pair goes in as one block so it stays adjacent on both
        // of its lines.
        std::vector<std::vector<std::string>> blocks;
        for (std::size_t t = 0; t < transfer_lines.size(); ++t) {
            if (static_cast<int>(t) == shared_b) continue;  // merged into shared_a's block
            const auto& lines = transfer_lines[t];
            if (std::find(lines.begin(), lines.end(), li) == lines.end()) continue;
            if (static_cast<int>(t) == shared_a)
                blocks.push_back({transfer_ids[shared_a], transfer_ids[shared_b]});
            else
                blocks.push_back({transfer_ids[t]});
        }
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            std::size_t pos = (b + 1) * seq.size() / (blocks.size() + 1);
            seq.insert(seq.begin() + static_cast<long>(pos), blocks[b].begin(), blocks[b].end());
        }
        finish_line(net, spec.id, spec.name, seq);
    }

    return net;
}

}  // namespace tcrisk
