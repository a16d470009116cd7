#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcrisk {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

enum class CapacityClass { Large, Medium, Small };

const char* to_string(CapacityClass c);
CapacityClass capacity_class_from_string(const std::string& s);

/// Default per-class station throughput, persons/hour.
double default_cs(CapacityClass c);

struct Station {
    std::string id;
    std::string name;
    CapacityClass capacity_class = CapacityClass::Medium;
    double cs = 0.0;  ///< station passenger capacity, persons/hour
    double cw = 0.0;  ///< stranded-passenger dissipation speed, persons/hour
    std::set<std::string> line_ids;

    bool is_transfer() const { return line_ids.size() >= 2; }
};

struct Section {
    std::string id;
    std::string from_station;
    std::string to_station;
    std::string line_id;
    double ci = 0.0;  ///< section passenger capacity, persons/hour
};

struct Line {
    std::string id;
    std::string name;
    std::vector<std::string> station_sequence;
};

/// Immutable after construction; all maps are ordered so iteration is
/// reproducible.
struct Network {
    std::map<std::string, Station> stations;
    std::map<std::string, Section> sections;
    std::map<std::string, Line> lines;

    /// Stations of a line plus the sections connecting its consecutive pairs
    /// (both directions). A section shared by several lines is a member of
    /// each of them.
    std::vector<std::string> line_stations(const std::string& line_id) const;
    std::vector<std::string> line_sections(const std::string& line_id) const;

    /// Directed section id for an adjacent ordered pair, empty if absent.
    std::string section_between(const std::string& from, const std::string& to) const;
};

/// Loads a topology JSON file and validates it; throws ParseError or
/// ValidationError.
Network load_network(const std::string& path);
Network parse_network(const std::string& json_text);
std::string serialize_network(const Network& net);
void save_network(const Network& net, const std::string& path);

/// Returns every violated invariant, one human-readable line each, empty if
/// the network is valid.
std::vector<std::string> validate_network(const Network& net);

/// Minimum-cost route (sections traversed + transfer_penalty per line
/// change); among equal-cost routes returns the one whose station sequence is
/// lexicographically smallest.
std::vector<std::string> shortest_route(const Network& net, const std::string& origin,
                                        const std::string& dest, double transfer_penalty);

/// Precomputed routing state graph; answers many shortest_route queries on
/// the same network without rebuilding per call.
class Router {
public:
    Router(const Network& net, double transfer_penalty);
    ~Router();
    Router(Router&&) noexcept;
    Router& operator=(Router&&) noexcept;

    std::vector<std::string> route(const std::string& origin, const std::string& dest) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::set<std::string> transfer_stations(const Network& net);

}  // namespace tcrisk
