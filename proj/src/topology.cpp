#include "tcrisk/topology.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace tcrisk {

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

bool valid_id(const std::string& id) {
    if (id.empty()) return false;
    return std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_';
    });
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error("network validation failed:\n  " + join(violations, "\n  ")),
      violations_(std::move(violations)) {}

const char* to_string(CapacityClass c) {
    switch (c) {
        case CapacityClass::Large: return "large";
        case CapacityClass::Medium: return "medium";
        case CapacityClass::Small: return "small";
    }
    return "?";
}

CapacityClass capacity_class_from_string(const std::string& s) {
    if (s == "large") return CapacityClass::Large;
    if (s == "medium") return CapacityClass::Medium;
    if (s == "small") return CapacityClass::Small;
    throw ParseError("unknown capacity class: " + s);
}

double default_cs(CapacityClass c) {
    switch (c) {
        case CapacityClass::Large: return 21600.0;
        case CapacityClass::Medium: return 14400.0;
        case CapacityClass::Small: return 7200.0;
    }
    return 0.0;
}

std::vector<std::string> Network::line_stations(const std::string& line_id) const {
    auto it = lines.find(line_id);
    if (it == lines.end()) throw Error("unknown line: " + line_id);
    return it->second.station_sequence;
}

std::string Network::section_between(const std::string& from, const std::string& to) const {
    for (const auto& [id, sec] : sections) {
        if (sec.from_station == from && sec.to_station == to) return id;
    }
    return {};
}

std::vector<std::string> Network::line_sections(const std::string& line_id) const {
    auto it = lines.find(line_id);
    if (it == lines.end()) throw Error("unknown line: " + line_id);
    std::map<std::pair<std::string, std::string>, std::string> by_endpoints;
    for (const auto& [id, sec] : sections) by_endpoints[{sec.from_station, sec.to_station}] = id;
    const auto& seq = it->second.station_sequence;
    std::vector<std::string> out;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        auto fwd = by_endpoints.find({seq[i], seq[i + 1]});
        auto bwd = by_endpoints.find({seq[i + 1], seq[i]});
        if (fwd != by_endpoints.end()) out.push_back(fwd->second);
        if (bwd != by_endpoints.end()) out.push_back(bwd->second);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::string> validate_network(const Network& net) {
    std::vector<std::string> v;

    for (const auto& [id, st] : net.stations) {
        if (!valid_id(id)) v.push_back("station '" + id + "': id must match [A-Za-z0-9_]+");
        if (!(st.cs > 0)) v.push_back("station '" + id + "': CS must be > 0");
        if (!(st.cw > 0)) v.push_back("station '" + id + "': CW must be > 0");
        if (st.line_ids.empty()) v.push_back("station '" + id + "': belongs to no line");
        for (const auto& lid : st.line_ids) {
            if (!net.lines.count(lid))
                v.push_back("station '" + id + "': references unknown line '" + lid + "'");
        }
    }

    for (const auto& [id, sec] : net.sections) {
        if (!valid_id(id)) v.push_back("section '" + id + "': id must match [A-Za-z0-9_]+");
        if (sec.from_station == sec.to_station)
            v.push_back("section '" + id + "': from and to stations are equal");
        if (!net.stations.count(sec.from_station))
            v.push_back("section '" + id + "': references unknown station '" + sec.from_station + "'");
        if (!net.stations.count(sec.to_station))
            v.push_back("section '" + id + "': references unknown station '" + sec.to_station + "'");
        if (!(sec.ci > 0)) v.push_back("section '" + id + "': CI must be > 0");
        auto lit = net.lines.find(sec.line_id);
        if (lit == net.lines.end()) {
            v.push_back("section '" + id + "': references unknown line '" + sec.line_id + "'");
        } else {
            const auto& seq = lit->second.station_sequence;
            bool adjacent = false;
            for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
                if ((seq[i] == sec.from_station && seq[i + 1] == sec.to_station) ||
                    (seq[i] == sec.to_station && seq[i + 1] == sec.from_station)) {
                    adjacent = true;
                    break;
                }
            }
            if (!adjacent)
                v.push_back("section '" + id + "': endpoints are not adjacent on line '" +
                            sec.line_id + "'");
        }
    }

    for (const auto& [id, line] : net.lines) {
        if (!valid_id(id)) v.push_back("line '" + id + "': id must match [A-Za-z0-9_]+");
        if (line.station_sequence.size() < 2)
            v.push_back("line '" + id + "': needs at least 2 stations");
        for (const auto& sid : line.station_sequence) {
            if (!net.stations.count(sid))
                v.push_back("line '" + id + "': references unknown station '" + sid + "'");
        }
        for (std::size_t i = 0; i + 1 < line.station_sequence.size(); ++i) {
            const auto& a = line.station_sequence[i];
            const auto& b = line.station_sequence[i + 1];
            if (!net.stations.count(a) || !net.stations.count(b)) continue;
            if (net.section_between(a, b).empty())
                v.push_back("line '" + id + "': missing directed section " + a + " -> " + b);
            if (net.section_between(b, a).empty())
                v.push_back("line '" + id + "': missing directed section " + b + " -> " + a);
        }
    }

    // Station/line membership must agree with the line sequences.
    for (const auto& [id, line] : net.lines) {
        for (const auto& sid : line.station_sequence) {
            auto it = net.stations.find(sid);
            if (it != net.stations.end() && !it->second.line_ids.count(id))
                v.push_back("station '" + sid + "': missing line membership '" + id + "'");
        }
    }

    // Connectivity of the undirected view.
    if (!net.stations.empty() && v.empty()) {
        std::map<std::string, std::vector<std::string>> adj;
        for (const auto& [id, sec] : net.sections) {
            adj[sec.from_station].push_back(sec.to_station);
            adj[sec.to_station].push_back(sec.from_station);
        }
        std::set<std::string> seen;
        std::queue<std::string> q;
        q.push(net.stations.begin()->first);
        seen.insert(net.stations.begin()->first);
        while (!q.empty()) {
            auto cur = q.front();
            q.pop();
            for (const auto& n : adj[cur]) {
                if (seen.insert(n).second) q.push(n);
            }
        }
        if (seen.size() != net.stations.size()) {
            for (const auto& [id, st] : net.stations) {
                if (!seen.count(id)) {
                    v.push_back("network is disconnected: station '" + id +
                                "' unreachable from '" + net.stations.begin()->first + "'");
                    break;
                }
            }
        }
    }

    return v;
}

Network parse_network(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("topology parse error: ") + e.what());
    }

    Network net;
    try {
        for (const auto& js : j.at("stations")) {
            Station st;
            st.id = js.at("id").get<std::string>();
            st.name = js.value("name", st.id);
            st.capacity_class = capacity_class_from_string(js.at("class").get<std::string>());
            st.cs = js.value("cs", default_cs(st.capacity_class));
            st.cw = js.value("cw", 0.25 * st.cs);
            for (const auto& lid : js.at("lines")) st.line_ids.insert(lid.get<std::string>());
            if (net.stations.count(st.id)) throw ParseError("duplicate station id: " + st.id);
            net.stations.emplace(st.id, std::move(st));
        }
        for (const auto& js : j.at("sections")) {
            Section sec;
            sec.id = js.at("id").get<std::string>();
            sec.from_station = js.at("from").get<std::string>();
            sec.to_station = js.at("to").get<std::string>();
            sec.line_id = js.at("line").get<std::string>();
            sec.ci = js.value("ci", 21600.0);
            if (net.sections.count(sec.id)) throw ParseError("duplicate section id: " + sec.id);
            net.sections.emplace(sec.id, std::move(sec));
        }
        for (const auto& jl : j.at("lines")) {
            Line line;
            line.id = jl.at("id").get<std::string>();
            line.name = jl.value("name", line.id);
            for (const auto& sid : jl.at("stations"))
                line.station_sequence.push_back(sid.get<std::string>());
            if (net.lines.count(line.id)) throw ParseError("duplicate line id: " + line.id);
            net.lines.emplace(line.id, std::move(line));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("topology parse error: ") + e.what());
    }

    auto violations = validate_network(net);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return net;
}

Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open topology file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_network(ss.str());
}

std::string serialize_network(const Network& net) {
    nlohmann::json j;
    j["stations"] = nlohmann::json::array();
    for (const auto& [id, st] : net.stations) {
        nlohmann::json js;
        js["id"] = id;
        js["name"] = st.name;
        js["class"] = to_string(st.capacity_class);
        js["cs"] = st.cs;
        js["cw"] = st.cw;
        js["lines"] = std::vector<std::string>(st.line_ids.begin(), st.line_ids.end());
        j["stations"].push_back(js);
    }
    j["sections"] = nlohmann::json::array();
    for (const auto& [id, sec] : net.sections) {
        nlohmann::json js;
        js["id"] = id;
        js["from"] = sec.from_station;
        js["to"] = sec.to_station;
        js["line"] = sec.line_id;
        js["ci"] = sec.ci;
        j["sections"].push_back(js);
    }
    j["lines"] = nlohmann::json::array();
    for (const auto& [id, line] : net.lines) {
        nlohmann::json jl;
        jl["id"] = id;
        jl["name"] = line.name;
        jl["stations"] = line.station_sequence;
        j["lines"].push_back(jl);
    }
    return j.dump(2) + "\n";
}

void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write topology file: " + path);
    out << serialize_network(net);
}

std::set<std::string> transfer_stations(const Network& net) {
    std::set<std::string> out;
    for (const auto& [id, st] : net.stations) {
        if (st.is_transfer()) out.insert(id);
    }
    return out;
}

namespace {

// Routing works on (station, line) states so a line change can be costed.
struct RoutingGraph {
    std::vector<std::string> station_ids;                  // sorted
    std::map<std::string, int> station_index;
    std::vector<std::pair<int, std::string>> states;       // (station idx, line id), sorted
    std::map<std::pair<int, std::string>, int> state_index;
    // section edges: state -> (state, section id); transfer edges: state -> state
    std::vector<std::vector<std::pair<int, std::string>>> section_edges;
    std::vector<std::vector<int>> transfer_edges;

    explicit RoutingGraph(const Network& net) {
        for (const auto& [id, st] : net.stations) {
            station_index[id] = static_cast<int>(station_ids.size());
            station_ids.push_back(id);
        }
        for (const auto& [id, st] : net.stations) {
            for (const auto& lid : st.line_ids) {
                state_index[{station_index[id], lid}] = static_cast<int>(states.size());
                states.emplace_back(station_index[id], lid);
            }
        }
        section_edges.resize(states.size());
        transfer_edges.resize(states.size());
        for (const auto& [sid, sec] : net.sections) {
            int u = station_index.at(sec.from_station);
            int v = station_index.at(sec.to_station);
            // A section can serve every line that contains its endpoint pair
            // consecutively.
            for (const auto& [lid, line] : net.lines) {
                const auto& seq = line.station_sequence;
                bool on_line = false;
                for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
                    if ((seq[i] == sec.from_station && seq[i + 1] == sec.to_station) ||
                        (seq[i] == sec.to_station && seq[i + 1] == sec.from_station)) {
                        on_line = true;
                        break;
                    }
                }
                if (!on_line) continue;
                auto su = state_index.find({u, lid});
                auto sv = state_index.find({v, lid});
                if (su != state_index.end() && sv != state_index.end())
                    section_edges[su->second].emplace_back(sv->second, sid);
            }
        }
        for (std::size_t s = 0; s < states.size(); ++s) {
            for (std::size_t t = 0; t < states.size(); ++t) {
                if (s != t && states[s].first == states[t].first)
                    transfer_edges[s].push_back(static_cast<int>(t));
            }
        }
    }
};

constexpr double kInf = std::numeric_limits<double>::infinity();

using Adjacency = std::vector<std::vector<std::pair<int, double>>>;

// Dijkstra over states from a set of start states (distance 0 each).
std::vector<double> dijkstra(const Adjacency& adj, const std::vector<int>& starts) {
    std::vector<double> dist(adj.size(), kInf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (int s : starts) {
        dist[s] = 0.0;
        pq.emplace(0.0, s);
    }
    while (!pq.empty()) {
        auto [d, s] = pq.top();
        pq.pop();
        if (d > dist[s]) continue;
        for (const auto& [t, w] : adj[s]) {
            if (dist[s] + w < dist[t]) {
                dist[t] = dist[s] + w;
                pq.emplace(dist[t], t);
            }
        }
    }
    return dist;
}

}  // namespace

struct Router::Impl {
    RoutingGraph graph;
    double penalty;
    Adjacency fwd_adj, bwd_adj;
    std::vector<std::vector<int>> station_states;   // station idx -> state indices
    std::map<std::string, std::string> section_to;  // section id -> to_station id

    Impl(const Network& net, double transfer_penalty) : graph(net), penalty(transfer_penalty) {
        for (const auto& [id, sec] : net.sections) section_to[id] = sec.to_station;
        fwd_adj.resize(graph.states.size());
        bwd_adj.resize(graph.states.size());
        for (std::size_t s = 0; s < graph.states.size(); ++s) {
            for (const auto& [t, sid] : graph.section_edges[s]) {
                fwd_adj[s].emplace_back(t, 1.0);
                bwd_adj[t].emplace_back(static_cast<int>(s), 1.0);
            }
            for (int t : graph.transfer_edges[s]) {
                fwd_adj[s].emplace_back(t, penalty);
                bwd_adj[t].emplace_back(static_cast<int>(s), penalty);
            }
        }
        station_states.resize(graph.station_ids.size());
        for (std::size_t s = 0; s < graph.states.size(); ++s)
            station_states[graph.states[s].first].push_back(static_cast<int>(s));
    }
};

Router::Router(const Network& net, double transfer_penalty) {
    if (transfer_penalty < 0) throw Error("shortest_route: negative transfer penalty");
    impl_ = std::make_unique<Impl>(net, transfer_penalty);
}

Router::~Router() = default;
Router::Router(Router&&) noexcept = default;
Router& Router::operator=(Router&&) noexcept = default;

std::vector<std::string> Router::route(const std::string& origin, const std::string& dest) const {
    if (origin == dest) throw Error("shortest_route: origin equals destination: " + origin);
    const RoutingGraph& g = impl_->graph;
    const double transfer_penalty = impl_->penalty;
    if (!g.station_index.count(origin)) throw Error("shortest_route: unknown origin: " + origin);
    if (!g.station_index.count(dest)) throw Error("shortest_route: unknown destination: " + dest);

    int oi = g.station_index.at(origin);
    int di = g.station_index.at(dest);
    const std::vector<int>& start_states = impl_->station_states[oi];
    const std::vector<int>& end_states = impl_->station_states[di];

    auto fwd = dijkstra(impl_->fwd_adj, start_states);
    auto bwd = dijkstra(impl_->bwd_adj, end_states);

    double best = kInf;
    for (int s : end_states) best = std::min(best, fwd[s]);
    if (!std::isfinite(best))
        throw Error("shortest_route: no path from " + origin + " to " + dest);

    const double eps = 1e-9;
    // Greedy walk over the tight-edge subgraph: at every step pick the
    // lexicographically smallest next station reachable on some optimal path.
    // Track the full frontier of states consistent with the chosen prefix.
    auto closure = [&](std::vector<int> frontier, std::vector<double> cost) {
        // Expand zero-or-more transfer edges that stay on an optimal path.
        std::vector<std::pair<int, double>> stack;
        std::map<int, double> seen;
        for (std::size_t i = 0; i < frontier.size(); ++i) stack.emplace_back(frontier[i], cost[i]);
        while (!stack.empty()) {
            auto [s, c] = stack.back();
            stack.pop_back();
            auto it = seen.find(s);
            if (it != seen.end() && it->second <= c + eps) continue;
            seen[s] = c;
            for (int t : g.transfer_edges[s]) {
                double nc = c + transfer_penalty;
                if (nc + bwd[t] <= best + eps) stack.emplace_back(t, nc);
            }
        }
        return seen;
    };

    std::vector<int> frontier = start_states;
    std::vector<double> cost(frontier.size(), 0.0);
    std::vector<std::string> route;
    int at = oi;
    while (at != di) {
        auto states = closure(frontier, cost);
        // Candidate next stations, with the lexicographically smallest
        // section id used as a secondary tie-break.
        std::string best_station, best_section;
        for (const auto& [s, c] : states) {
            for (const auto& [t, sid] : g.section_edges[s]) {
                if (c + 1.0 + bwd[t] > best + eps) continue;
                const std::string& stn = g.station_ids[g.states[t].first];
                if (best_station.empty() || stn < best_station ||
                    (stn == best_station && sid < best_section)) {
                    best_station = stn;
                    best_section = sid;
                }
            }
        }
        if (best_station.empty())
            throw Error("shortest_route: internal error walking optimal paths");
        // Advance the frontier through the chosen section.
        std::vector<int> next_frontier;
        std::vector<double> next_cost;
        for (const auto& [s, c] : states) {
            for (const auto& [t, sid] : g.section_edges[s]) {
                if (sid != best_section) continue;
                if (c + 1.0 + bwd[t] > best + eps) continue;
                next_frontier.push_back(t);
                next_cost.push_back(c + 1.0);
            }
        }
        route.push_back(best_section);
        frontier = std::move(next_frontier);
        cost = std::move(next_cost);
        at = g.station_index.at(impl_->section_to.at(best_section));
    }
    return route;
}

std::vector<std::string> shortest_route(const Network& net, const std::string& origin,
                                        const std::string& dest, double transfer_penalty) {
    return Router(net, transfer_penalty).route(origin, dest);
}

}  // namespace tcrisk
