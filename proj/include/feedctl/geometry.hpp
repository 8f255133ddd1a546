#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "feedctl/errors.hpp"
#include "feedctl/types.hpp"

namespace feedctl {

// Smallest ripple span z (pixels) for which the normalized frame is defined.
inline constexpr double kZMin = 1e-6;

struct Corners {
    Point tl;
    Point tr;
    Point bl;
    Point br;
};

inline Corners corners_of(const BoundingBox& box) {
    const double x0 = (2.0 * box.cx - box.w) / 2.0;
    const double y0 = (2.0 * box.cy - box.h) / 2.0;
    const double x1 = (2.0 * box.cx + box.w) / 2.0;
    const double y1 = (2.0 * box.cy + box.h) / 2.0;
    return {{x0, y0}, {x1, y0}, {x0, y1}, {x1, y1}};
}

// Angle of the R1 -> R2 center axis in image coordinates, in (-pi, pi].
inline double ripple_angle(const BoundingBox& r1, const BoundingBox& r2) {
    const double dy = r2.cy - r1.cy;
    const double dx = r2.cx - r1.cx;
    if (dx == 0.0 && dy == 0.0) return 0.0;
    return std::atan2(dy, dx);
}

inline Point rotate_point(Point p, double theta, Point pivot) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double dx = p.x - pivot.x;
    const double dy = p.y - pivot.y;
    return {dx * c - dy * s + pivot.x, dx * s + dy * c + pivot.y};
}

// Span between R1's top-left corner and R2's bottom-right corner.
inline double ripple_span(const BoundingBox& r1, const BoundingBox& r2) {
    const Point tl1 = corners_of(r1).tl;
    const Point br2 = corners_of(r2).br;
    return std::hypot(tl1.x - br2.x, tl1.y - br2.y);
}

// The two ripple detections of a frame plus the derived frame geometry.
// R1 is the detection with the smaller center x (ties: smaller center y).
struct RipplePair {
    BoundingBox r1;
    BoundingBox r2;
    double theta = 0.0;
    double z = 0.0;
    Point anchor;  // bottom-left corner of R1, origin of the normalized frame

    bool usable() const { return z > kZMin; }
};

inline RipplePair make_ripple_pair(const BoundingBox& a, const BoundingBox& b) {
    const bool a_first = a.cx < b.cx || (a.cx == b.cx && a.cy <= b.cy);
    RipplePair pair;
    pair.r1 = a_first ? a : b;
    pair.r2 = a_first ? b : a;
    pair.theta = ripple_angle(pair.r1, pair.r2);
    pair.z = ripple_span(pair.r1, pair.r2);
    pair.anchor = corners_of(pair.r1).bl;
    return pair;
}

// Nutriment centers expressed in the ripple-anchored frame: origin at R1's
// bottom-left corner, x along the ripple axis, y up, unit length z.
struct NormalizedFrame {
    std::int64_t frame = 0;
    std::vector<Point> kappa;
    RipplePair pair;
};

namespace detail {

inline void require_usable(const RipplePair& pair) {
    if (!(pair.z > kZMin)) {
        throw DegenerateGeometry("ripple span z = " + std::to_string(pair.z) +
                                 " is not above z_min");
    }
}

}  // namespace detail

inline Point normalize_point(Point center, const RipplePair& pair) {
    detail::require_usable(pair);
    const Point pivot = pair.anchor;
    // De-rotate by the ripple axis angle so the axis lands on +x.
    const Point psi = rotate_point(center, -pair.theta, pivot);
    const Point xi{psi.x - pivot.x, pivot.y - psi.y};
    return {xi.x / pair.z, xi.y / pair.z};
}

inline Point denormalize_point(Point kappa, const RipplePair& pair) {
    detail::require_usable(pair);
    const Point pivot = pair.anchor;
    const Point xi{kappa.x * pair.z, kappa.y * pair.z};
    const Point psi{xi.x + pivot.x, pivot.y - xi.y};
    return rotate_point(psi, pair.theta, pivot);
}

inline NormalizedFrame to_normalized(const FrameRecord& frame, const RipplePair& pair) {
    detail::require_usable(pair);
    NormalizedFrame out;
    out.frame = frame.frame;
    out.pair = pair;
    out.kappa.reserve(frame.nutriments.size());
    for (const auto& box : frame.nutriments) out.kappa.push_back(normalize_point(box.center(), pair));
    return out;
}

inline std::vector<Point> to_pixel(std::span<const Point> kappa, const RipplePair& pair) {
    detail::require_usable(pair);
    std::vector<Point> out;
    out.reserve(kappa.size());
    for (const Point& k : kappa) out.push_back(denormalize_point(k, pair));
    return out;
}

}  // namespace feedctl
