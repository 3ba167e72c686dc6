#ifndef GSI_IO_HPP
#define GSI_IO_HPP

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsi/errors.hpp"
#include "gsi/simulate.hpp"

namespace gsi::io {

/// All numeric file output uses 6 significant digits.
inline std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline sim::Role parse_role(const std::string& s) {
    if (s == "BYS") return sim::Role::BYS;
    if (s == "CAS") return sim::Role::CAS;
    throw validation_error("unknown role '" + s + "' (expected BYS or CAS)");
}

inline sim::ModeTag parse_mode(const std::string& s) {
    if (s == "AS") return sim::ModeTag::AutonomousSlow;
    if (s == "AF") return sim::ModeTag::AutonomousFast;
    if (s == "TO") return sim::ModeTag::Teleop;
    throw validation_error("unknown mode '" + s + "' (expected AS, AF, or TO)");
}

/// One line of a trajectory stream.
struct TrajectoryRecord {
    std::string participant_id;
    sim::Role role = sim::Role::CAS;
    sim::ModeTag mode = sim::ModeTag::AutonomousSlow;
    int trial = 1;
    double t = 0.0;
    double d = 0.0;
    double v = 0.0;
    std::optional<double> bearing;
};

/// One questionnaire response line. `value` is the raw Likert integer;
/// `value_norm`, when present, is a continuous rating in [0, 1] that takes
/// precedence at ingestion (used for unquantized synthetic cohorts, where
/// the integer is the nearest scale point).
struct RatingRecord {
    std::string participant_id;
    sim::Role role = sim::Role::CAS;
    sim::ModeTag mode = sim::ModeTag::AutonomousSlow;
    int trial = 1;
    std::string item;
    int value = 1;
    int scale_points = 5;
    std::optional<double> value_norm;

    double normalized() const {
        return value_norm ? *value_norm : normalize_likert(value, scale_points);
    }
};

namespace detail {

using nlohmann::json;

inline void require_keys(const json& j, const std::set<std::string>& required,
                         const std::set<std::string>& optional, std::size_t line) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!required.count(it.key()) && !optional.count(it.key())) {
            throw parse_error(line, "unknown field '" + it.key() + "'");
        }
    }
    for (const auto& k : required) {
        if (!j.contains(k)) throw parse_error(line, "missing field '" + k + "'");
    }
}

inline double get_num(const json& j, const char* key, std::size_t line) {
    if (!j.at(key).is_number()) throw parse_error(line, std::string("field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

inline int get_int(const json& j, const char* key, std::size_t line) {
    if (!j.at(key).is_number_integer()) {
        throw parse_error(line, std::string("field '") + key + "' must be an integer");
    }
    return j.at(key).get<int>();
}

inline std::string get_str(const json& j, const char* key, std::size_t line) {
    if (!j.at(key).is_string()) throw parse_error(line, std::string("field '") + key + "' must be a string");
    return j.at(key).get<std::string>();
}

inline json parse_line(const std::string& line, std::size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw parse_error(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw parse_error(line_no, "expected a JSON object");
    return j;
}

} // namespace detail

inline TrajectoryRecord parse_trajectory_line(const std::string& line, std::size_t line_no) {
    const auto j = detail::parse_line(line, line_no);
    detail::require_keys(j, {"participant_id", "role", "mode", "trial", "t", "d", "v"},
                         {"bearing"}, line_no);
    TrajectoryRecord r;
    r.participant_id = detail::get_str(j, "participant_id", line_no);
    try {
        r.role = parse_role(detail::get_str(j, "role", line_no));
        r.mode = parse_mode(detail::get_str(j, "mode", line_no));
    } catch (const validation_error& e) {
        throw parse_error(line_no, e.what());
    }
    r.trial = detail::get_int(j, "trial", line_no);
    if (r.trial != 1 && r.trial != 2) throw parse_error(line_no, "trial must be 1 or 2");
    r.t = detail::get_num(j, "t", line_no);
    r.d = detail::get_num(j, "d", line_no);
    r.v = detail::get_num(j, "v", line_no);
    if (!(r.d >= 0.0)) throw parse_error(line_no, "d must be >= 0");
    if (j.contains("bearing")) r.bearing = detail::get_num(j, "bearing", line_no);
    return r;
}

inline RatingRecord parse_rating_line(const std::string& line, std::size_t line_no) {
    const auto j = detail::parse_line(line, line_no);
    detail::require_keys(j, {"participant_id", "role", "mode", "trial", "item", "value", "scale_points"},
                         {"value_norm"}, line_no);
    RatingRecord r;
    r.participant_id = detail::get_str(j, "participant_id", line_no);
    try {
        r.role = parse_role(detail::get_str(j, "role", line_no));
        r.mode = parse_mode(detail::get_str(j, "mode", line_no));
    } catch (const validation_error& e) {
        throw parse_error(line_no, e.what());
    }
    r.trial = detail::get_int(j, "trial", line_no);
    if (r.trial != 1 && r.trial != 2) throw parse_error(line_no, "trial must be 1 or 2");
    r.item = detail::get_str(j, "item", line_no);
    r.scale_points = detail::get_int(j, "scale_points", line_no);
    if (r.scale_points != 5 && r.scale_points != 7) {
        throw parse_error(line_no, "scale_points must be 5 or 7");
    }
    r.value = detail::get_int(j, "value", line_no);
    if (r.value < 1 || r.value > r.scale_points) {
        throw parse_error(line_no, "value outside 1.." + std::to_string(r.scale_points));
    }
    if (j.contains("value_norm")) {
        const double vn = detail::get_num(j, "value_norm", line_no);
        if (!(vn >= 0.0 && vn <= 1.0)) throw parse_error(line_no, "value_norm outside [0, 1]");
        r.value_norm = vn;
    }
    return r;
}

inline std::vector<TrajectoryRecord> read_trajectories(std::istream& in) {
    std::vector<TrajectoryRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        out.push_back(parse_trajectory_line(line, line_no));
    }
    return out;
}

inline std::vector<RatingRecord> read_ratings(std::istream& in) {
    std::vector<RatingRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        out.push_back(parse_rating_line(line, line_no));
    }
    return out;
}

inline void write_trajectory_line(std::ostream& os, const TrajectoryRecord& r) {
    os << "{\"participant_id\":\"" << r.participant_id << "\",\"role\":\"" << to_string(r.role)
       << "\",\"mode\":\"" << to_string(r.mode) << "\",\"trial\":" << r.trial
       << ",\"t\":" << fmt6(r.t) << ",\"d\":" << fmt6(r.d) << ",\"v\":" << fmt6(r.v);
    if (r.bearing) os << ",\"bearing\":" << fmt6(*r.bearing);
    os << "}\n";
}

inline void write_rating_line(std::ostream& os, const RatingRecord& r) {
    os << "{\"participant_id\":\"" << r.participant_id << "\",\"role\":\"" << to_string(r.role)
       << "\",\"mode\":\"" << to_string(r.mode) << "\",\"trial\":" << r.trial << ",\"item\":\""
       << r.item << "\",\"value\":" << r.value << ",\"scale_points\":" << r.scale_points;
    if (r.value_norm) os << ",\"value_norm\":" << fmt6(*r.value_norm);
    os << "}\n";
}

/// Group key of a trajectory segment.
struct SegmentKey {
    std::string participant_id;
    sim::ModeTag mode;
    int trial;

    auto operator<=>(const SegmentKey&) const = default;

    std::string str() const {
        return participant_id + "/" + to_string(mode) + "/" + std::to_string(trial);
    }
};

/// Split a record stream into segments, enforcing that groups are contiguous
/// and time-sorted. Throws parse_error naming the offending line.
inline std::map<SegmentKey, std::vector<TrajectoryRecord>> group_segments(
    const std::vector<TrajectoryRecord>& records) {
    std::map<SegmentKey, std::vector<TrajectoryRecord>> groups;
    std::optional<SegmentKey> current;
    std::size_t line_no = 0;
    for (const auto& r : records) {
        ++line_no;
        const SegmentKey key{r.participant_id, r.mode, r.trial};
        if (!current || !(key == *current)) {
            if (groups.count(key)) {
                throw parse_error(line_no, "segment " + key.str() + " is not contiguous");
            }
            current = key;
        } else if (!groups[key].empty() && r.t < groups[key].back().t) {
            throw parse_error(line_no, "non-monotone t within segment " + key.str());
        }
        groups[key].push_back(r);
    }
    return groups;
}

/// Minimal CSV table writer: header row plus fmt6-formatted cells.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void header(const std::vector<std::string>& cols) {
        write_row(cols);
    }

    void row(const std::vector<std::string>& cells) { write_row(cells); }

private:
    void write_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os_ << ",";
            os_ << cells[i];
        }
        os_ << "\n";
    }

    std::ostream& os_;
};

/// Minimal CSV reader for the tables this tool writes (no quoting).
inline std::vector<std::vector<std::string>> read_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        rows.push_back(std::move(cells));
    }
    return rows;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open '" + path + "' for writing");
    return os;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open '" + path + "' for reading");
    return is;
}

} // namespace gsi::io

#endif
