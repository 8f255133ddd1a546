#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace feedctl {

// Pixel coordinates use the image convention: x right, y down.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Detection box given by its center and extent, in pixels.
struct BoundingBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    Point center() const { return {cx, cy}; }

    bool valid() const {
        return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) && std::isfinite(h) &&
               w >= 0.0 && h >= 0.0;
    }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// All detections of one video frame.
struct FrameRecord {
    std::int64_t frame = 0;
    std::vector<BoundingBox> nutriments;
    std::vector<BoundingBox> ripples;

    friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

// Ground-truth annotation aligned with a FrameRecord: true next-frame center of
// every nutriment (same order) and the number of passed-line crossings.
struct TruthRecord {
    std::int64_t frame = 0;
    std::vector<Point> next;
    int crossings = 0;

    friend bool operator==(const TruthRecord&, const TruthRecord&) = default;
};

}  // namespace feedctl
