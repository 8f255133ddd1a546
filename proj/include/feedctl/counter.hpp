#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "feedctl/errors.hpp"
#include "feedctl/geometry.hpp"
#include "feedctl/types.hpp"

namespace feedctl {

inline constexpr double kDefaultRho = 3.6;
inline constexpr int kDefaultWindow = 20;
inline constexpr double kSideTolerance = 1e-9;

// y = alpha * x + beta in pixel coordinates, parallel to the ripple axis and
// z / rho above R1's bottom-left corner.
struct PassedLine {
    double alpha = 0.0;
    double beta = 0.0;
    Point p1;
    Point p2;
    double rho = kDefaultRho;

    double y_at(double x) const { return alpha * x + beta; }
};

inline PassedLine passed_line(const RipplePair& pair, double rho = kDefaultRho) {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be a positive finite number");
    if (!pair.usable()) throw DegenerateGeometry("ripple pair is not usable for a passed line");

    const Corners c1 = corners_of(pair.r1);
    PassedLine line;
    line.rho = rho;
    line.p1 = {c1.tl.x, c1.br.y - pair.z / rho};
    line.p2 = {line.p1.x + (pair.r2.cx - pair.r1.cx), line.p1.y - (pair.r1.cy - pair.r2.cy)};
    const double dx = line.p2.x - line.p1.x;
    if (std::abs(dx) <= 1e-9) throw DegenerateLine("passed line has no horizontal extent");
    line.alpha = (line.p2.y - line.p1.y) / dx;
    line.beta = line.p1.y - line.alpha * line.p1.x;
    return line;
}

// +1 below the line (image y larger, ripple side), -1 above, 0 on it.
inline int side_of(const PassedLine& line, Point p) {
    const double d = p.y - line.y_at(p.x);
    if (std::abs(d) <= kSideTolerance) return 0;
    return d > 0.0 ? 1 : -1;
}

enum class CrossingDirection {
    MachineToRipple,  // above -> below, pellets entering the water
    RippleToMachine,
};

// Counts detections whose predicted next position lies on the destination side
// while the current one is strictly on the source side. Landing exactly on the
// line counts as arrival.
inline int count_crossings(std::span<const Point> current, std::span<const Point> predicted,
                           const PassedLine& line,
                           CrossingDirection direction = CrossingDirection::MachineToRipple) {
    if (current.size() != predicted.size()) {
        throw ShapeError("current and predicted point lists differ in length");
    }
    const int from = direction == CrossingDirection::MachineToRipple ? -1 : 1;
    int count = 0;
    for (std::size_t i = 0; i < current.size(); ++i) {
        if (side_of(line, current[i]) == from && side_of(line, predicted[i]) != from) ++count;
    }
    return count;
}

// Trailing-window sum; the first window-1 entries cover the available prefix.
inline std::vector<long long> windowed(std::span<const long long> series, int window = kDefaultWindow) {
    if (window < 1) throw ConfigError("window must be >= 1");
    std::vector<long long> out;
    out.reserve(series.size());
    long long acc = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        acc += series[i];
        if (i >= static_cast<std::size_t>(window)) acc -= series[i - window];
        out.push_back(acc);
    }
    return out;
}

// Streaming form of windowed().
class TrailingSum {
public:
    explicit TrailingSum(int window = kDefaultWindow) : window_(window) {
        if (window < 1) throw ConfigError("window must be >= 1");
    }

    long long push(long long value) {
        values_.push_back(value);
        acc_ += value;
        if (values_.size() > static_cast<std::size_t>(window_)) {
            acc_ -= values_.front();
            values_.pop_front();
        }
        return acc_;
    }

    long long value() const { return acc_; }
    int window() const { return window_; }

private:
    int window_;
    long long acc_ = 0;
    std::deque<long long> values_;
};

}  // namespace feedctl
