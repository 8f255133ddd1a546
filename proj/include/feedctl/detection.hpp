#pragma once

#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "feedctl/errors.hpp"
#include "feedctl/geometry.hpp"
#include "feedctl/types.hpp"

// Line-delimited detection stream (one JSON object per frame):
//   {"frame":0,"nutriments":[[cx,cy,w,h],...],"ripples":[[cx,cy,w,h],...]}
// and its ground-truth sidecar:
//   {"frame":0,"next":[[x,y],...],"crossings":1}

namespace feedctl {

namespace detail {

using json = nlohmann::json;

inline json parse_json_line(std::string_view line, std::size_t line_no) {
    try {
        json j = json::parse(line.begin(), line.end());
        if (!j.is_object()) throw ParseError(line_no, "record is not an object");
        return j;
    } catch (const json::out_of_range& e) {
        throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const json::exception& e) {
        throw ParseError(line_no, e.what());
    }
}

inline const json& require_field(const json& j, const char* key, std::size_t line_no) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(line_no, std::string("missing field '") + key + "'");
    return *it;
}

inline std::int64_t parse_frame_index(const json& j, std::size_t line_no) {
    const json& f = require_field(j, "frame", line_no);
    if (f.is_number_integer()) {
        const auto v = f.get<std::int64_t>();
        if (v < 0) throw ValidationError("line " + std::to_string(line_no) + ": negative frame index");
        return v;
    }
    if (f.is_number_float()) {
        const double v = f.get<double>();
        if (std::isfinite(v) && v == std::floor(v) && v >= 0.0) return static_cast<std::int64_t>(v);
    }
    throw ParseError(line_no, "'frame' must be a non-negative integer");
}

inline double finite_number(const json& v, std::size_t line_no) {
    if (!v.is_number()) throw ParseError(line_no, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError("line " + std::to_string(line_no) + ": non-finite value");
    return d;
}

inline std::vector<BoundingBox> parse_boxes(const json& arr, const char* key, std::size_t line_no) {
    if (!arr.is_array()) throw ParseError(line_no, std::string("'") + key + "' must be an array");
    std::vector<BoundingBox> boxes;
    boxes.reserve(arr.size());
    for (const json& b : arr) {
        if (!b.is_array() || b.size() != 4) {
            throw ParseError(line_no, std::string("'") + key + "' entries must be [cx,cy,w,h]");
        }
        BoundingBox box{finite_number(b[0], line_no), finite_number(b[1], line_no),
                        finite_number(b[2], line_no), finite_number(b[3], line_no)};
        if (box.w < 0.0 || box.h < 0.0) {
            throw ValidationError("line " + std::to_string(line_no) + ": negative box extent in '" +
                                  key + "'");
        }
        boxes.push_back(box);
    }
    return boxes;
}

inline bool blank(std::string_view line) {
    return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

}  // namespace detail

inline FrameRecord parse_frame_record(std::string_view line, std::size_t line_no = 1) {
    const auto j = detail::parse_json_line(line, line_no);
    FrameRecord rec;
    rec.frame = detail::parse_frame_index(j, line_no);
    rec.nutriments = detail::parse_boxes(detail::require_field(j, "nutriments", line_no), "nutriments", line_no);
    rec.ripples = detail::parse_boxes(detail::require_field(j, "ripples", line_no), "ripples", line_no);
    return rec;
}

inline std::string format_frame_record(const FrameRecord& rec) {
    nlohmann::ordered_json j;
    j["frame"] = rec.frame;
    auto boxes = [](const std::vector<BoundingBox>& v) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& b : v) arr.push_back({b.cx, b.cy, b.w, b.h});
        return arr;
    };
    j["nutriments"] = boxes(rec.nutriments);
    j["ripples"] = boxes(rec.ripples);
    return j.dump();
}

inline TruthRecord parse_truth_record(std::string_view line, std::size_t line_no = 1) {
    const auto j = detail::parse_json_line(line, line_no);
    TruthRecord rec;
    rec.frame = detail::parse_frame_index(j, line_no);
    const auto& next = detail::require_field(j, "next", line_no);
    if (!next.is_array()) throw ParseError(line_no, "'next' must be an array");
    for (const auto& p : next) {
        if (!p.is_array() || p.size() != 2) throw ParseError(line_no, "'next' entries must be [x,y]");
        rec.next.push_back({detail::finite_number(p[0], line_no), detail::finite_number(p[1], line_no)});
    }
    const auto& c = detail::require_field(j, "crossings", line_no);
    if (!c.is_number_integer() || c.get<long long>() < 0) {
        throw ParseError(line_no, "'crossings' must be a non-negative integer");
    }
    rec.crossings = c.get<int>();
    return rec;
}

inline std::string format_truth_record(const TruthRecord& rec) {
    nlohmann::ordered_json j;
    j["frame"] = rec.frame;
    nlohmann::ordered_json next = nlohmann::ordered_json::array();
    for (const auto& p : rec.next) next.push_back({p.x, p.y});
    j["next"] = std::move(next);
    j["crossings"] = rec.crossings;
    return j.dump();
}

namespace detail {

template <typename Record, typename Parse>
std::vector<Record> read_stream(std::istream& in, Parse parse) {
    std::vector<Record> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        Record rec = parse(line, line_no);
        if (!out.empty() && rec.frame <= out.back().frame) {
            throw ValidationError("line " + std::to_string(line_no) + ": frame index " +
                                  std::to_string(rec.frame) + " does not increase");
        }
        out.push_back(std::move(rec));
    }
    if (in.bad()) throw IoError("read error in stream");
    return out;
}

}  // namespace detail

inline std::vector<FrameRecord> read_detection_stream(std::istream& in) {
    return detail::read_stream<FrameRecord>(
        in, [](std::string_view l, std::size_t n) { return parse_frame_record(l, n); });
}

inline std::vector<TruthRecord> read_truth_stream(std::istream& in) {
    return detail::read_stream<TruthRecord>(
        in, [](std::string_view l, std::size_t n) { return parse_truth_record(l, n); });
}

inline void write_detection_stream(std::ostream& out, const std::vector<FrameRecord>& records) {
    for (const auto& r : records) out << format_frame_record(r) << '\n';
}

inline void write_truth_stream(std::ostream& out, const std::vector<TruthRecord>& records) {
    for (const auto& r : records) out << format_truth_record(r) << '\n';
}

// Pair for this frame, or the last valid pair when the detector did not return
// exactly two ripples. nullopt means the frame has no usable geometry yet.
inline std::optional<RipplePair> resolve_ripple_pair(const FrameRecord& record,
                                                     const std::optional<RipplePair>& last_valid) {
    if (record.ripples.size() == 2) return make_ripple_pair(record.ripples[0], record.ripples[1]);
    return last_valid;
}

}  // namespace feedctl
