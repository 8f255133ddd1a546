#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <deque>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "feedctl/errors.hpp"
#include "feedctl/geometry.hpp"
#include "feedctl/image.hpp"

namespace feedctl {

// Axis-aligned crop spanning R1's top-left and R2's bottom-right corners,
// rounded outward to whole pixels and clamped to the image. An empty
// intersection yields the single pixel nearest to the rectangle.
inline GrayImage crop_region(const GrayImage& image, const RipplePair& pair) {
    if (image.empty()) throw ValidationError("cannot crop an empty image");
    const Point a = corners_of(pair.r1).tl;
    const Point b = corners_of(pair.r2).br;
    const double min_x = std::min(a.x, b.x), max_x = std::max(a.x, b.x);
    const double min_y = std::min(a.y, b.y), max_y = std::max(a.y, b.y);

    auto clamp_edge = [](double v, int hi) {
        if (!(v > 0.0)) return 0;
        if (v >= hi) return hi;
        return static_cast<int>(v);
    };
    int x0 = clamp_edge(std::floor(min_x), image.width);
    int x1 = clamp_edge(std::ceil(max_x), image.width);
    int y0 = clamp_edge(std::floor(min_y), image.height);
    int y1 = clamp_edge(std::ceil(max_y), image.height);
    if (x1 <= x0 || y1 <= y0) {
        x0 = std::clamp(clamp_edge(std::floor(0.5 * (min_x + max_x)), image.width), 0, image.width - 1);
        y0 = std::clamp(clamp_edge(std::floor(0.5 * (min_y + max_y)), image.height), 0, image.height - 1);
        x1 = x0 + 1;
        y1 = y0 + 1;
    }

    GrayImage out(x1 - x0, y1 - y0);
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) out.at(x - x0, y - y0) = image.at(x, y);
    }
    return out;
}

// stages[i][j] is feature map j of stage i; maps within a stage share a size.
struct FeaturePyramid {
    std::vector<std::vector<Eigen::MatrixXd>> stages;
    int requested_stages = 0;
    bool truncated = false;  // the input ran out of resolution before requested_stages

    void validate() const {
        for (const auto& stage : stages) {
            if (stage.empty()) throw ValidationError("feature pyramid stage has no maps");
            for (const auto& m : stage) {
                if (m.rows() != stage.front().rows() || m.cols() != stage.front().cols()) {
                    throw ValidationError("feature maps within a stage differ in size");
                }
                if (m.size() == 0) throw ValidationError("empty feature map");
            }
        }
    }
};

template <typename E>
concept FeatureExtractor = requires(const E& e, const GrayImage& img) {
    { e.extract(img) } -> std::convertible_to<FeaturePyramid>;
};

inline Eigen::MatrixXd to_matrix(const GrayImage& img) {
    Eigen::MatrixXd m(img.height, img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) m(y, x) = img.at(x, y);
    }
    return m;
}

using Kernel3 = std::array<std::array<double, 3>, 3>;

// Fixed 3x3 filter bank of the reference extractor, applied as correlation
// (kernel[row][col] weights the neighbour at dy = row - 1, dx = col - 1).
inline const std::array<Kernel3, 8>& reference_filter_bank() {
    static const std::array<Kernel3, 8> bank = {{
        // 0: box average
        {{{1 / 9.0, 1 / 9.0, 1 / 9.0}, {1 / 9.0, 1 / 9.0, 1 / 9.0}, {1 / 9.0, 1 / 9.0, 1 / 9.0}}},
        // 1: horizontal gradient, forward difference smoothed over rows
        {{{0, -0.25, 0.25}, {0, -0.5, 0.5}, {0, -0.25, 0.25}}},
        // 2: vertical gradient
        {{{0, 0, 0}, {-0.25, -0.5, -0.25}, {0.25, 0.5, 0.25}}},
        // 3: main-diagonal gradient
        {{{0, 0, 0}, {0, -1, 0}, {0, 0, 1}}},
        // 4: anti-diagonal gradient
        {{{0, 0, 0}, {0, -1, 0}, {1, 0, 0}}},
        // 5: Laplacian
        {{{0, 1, 0}, {1, -4, 1}, {0, 1, 0}}},
        // 6: centre-surround ring
        {{{0.125, 0.125, 0.125}, {0.125, -1, 0.125}, {0.125, 0.125, 0.125}}},
        // 7: corners minus edges ring
        {{{0.25, -0.25, 0.25}, {-0.25, 0, -0.25}, {0.25, -0.25, 0.25}}},
    }};
    return bank;
}

// Valid-mode 3x3 correlation; input must be at least 3x3.
inline Eigen::MatrixXd correlate3(const Eigen::MatrixXd& in, const Kernel3& k) {
    const Eigen::Index rows = in.rows() - 2, cols = in.cols() - 2;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
    for (int dy = 0; dy < 3; ++dy) {
        for (int dx = 0; dx < 3; ++dx) {
            if (k[dy][dx] != 0.0) out += k[dy][dx] * in.block(dy, dx, rows, cols);
        }
    }
    return out;
}

// 2x2 mean pooling; a trailing odd row/column is averaged over what exists.
inline Eigen::MatrixXd mean_pool2(const Eigen::MatrixXd& in) {
    const Eigen::Index rows = (in.rows() + 1) / 2, cols = (in.cols() + 1) / 2;
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            const bool down = 2 * r + 1 < in.rows(), right = 2 * c + 1 < in.cols();
            const double a = in(2 * r, 2 * c);
            // Pairwise sums keep a constant input exactly constant.
            const double top = right ? a + in(2 * r, 2 * c + 1) : a;
            if (!down) {
                out(r, c) = right ? top / 2.0 : top;
                continue;
            }
            const double b = in(2 * r + 1, 2 * c);
            const double bottom = right ? b + in(2 * r + 1, 2 * c + 1) : b;
            out(r, c) = (top + bottom) / (right ? 4.0 : 2.0);
        }
    }
    return out;
}

// Deterministic stand-in for a pretrained convolutional backbone. Each stage
// filters its input with the fixed bank (8 maps per stage), then the
// box-averaged map is mean-pooled 2x to form the next stage's input.
struct ReferenceExtractor {
    int stages = 5;

    FeaturePyramid extract(const GrayImage& image) const {
        if (stages < 1) throw ConfigError("extractor needs at least one stage");
        image.validate();
        FeaturePyramid pyr;
        pyr.requested_stages = stages;
        Eigen::MatrixXd input = to_matrix(image);
        const auto& bank = reference_filter_bank();
        for (int s = 0; s < stages; ++s) {
            if (input.rows() < 3 || input.cols() < 3) {
                pyr.truncated = true;
                break;
            }
            std::vector<Eigen::MatrixXd> maps;
            maps.reserve(bank.size());
            for (const auto& k : bank) maps.push_back(correlate3(input, k));
            input = mean_pool2(maps.front());
            pyr.stages.push_back(std::move(maps));
        }
        return pyr;
    }
};

template <FeatureExtractor E>
FeaturePyramid extract_features(const E& extractor, const GrayImage& image) {
    return extractor.extract(image);
}

// Population variance of all entries.
inline double map_variance(const Eigen::MatrixXd& map) {
    if (map.size() == 0) throw EmptyInputError("empty feature map");
    if (map.minCoeff() == map.maxCoeff()) return 0.0;
    const double mean = map.mean();
    return (map.array() - mean).square().sum() / static_cast<double>(map.size());
}

inline double population_std(std::span<const double> values) {
    if (values.empty()) throw EmptyInputError("cannot take the spread of an empty list");
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size()));
}

// Spread of the per-map variances within one stage.
inline double stage_sigma(std::span<const double> map_variances) { return population_std(map_variances); }

// Spread of the stage values: the ripple-activity index of one frame.
inline double global_sigma(std::span<const double> stage_sigmas) { return population_std(stage_sigmas); }

// Activity index of a pyramid; a pyramid with no stages has zero activity.
inline double activity_index(const FeaturePyramid& pyr) {
    if (pyr.stages.empty()) return 0.0;
    std::vector<double> stage_values;
    stage_values.reserve(pyr.stages.size());
    for (const auto& stage : pyr.stages) {
        std::vector<double> vars;
        vars.reserve(stage.size());
        for (const auto& m : stage) vars.push_back(map_variance(m));
        stage_values.push_back(stage_sigma(vars));
    }
    return global_sigma(stage_values);
}

// Trailing-window mean, summed oldest to newest.
class TrailingMean {
public:
    explicit TrailingMean(int window) : window_(window) {
        if (window < 1) throw ConfigError("window must be >= 1");
    }

    double push(double value) {
        values_.push_back(value);
        if (values_.size() > static_cast<std::size_t>(window_)) values_.pop_front();
        return value_now();
    }

    double value_now() const {
        if (values_.empty()) return 0.0;
        double sum = 0.0;
        for (double v : values_) sum += v;
        return sum / static_cast<double>(values_.size());
    }

private:
    int window_;
    std::deque<double> values_;
};

inline std::vector<double> activity_series(std::span<const double> sigmas, int window) {
    TrailingMean acc(window);
    std::vector<double> out;
    out.reserve(sigmas.size());
    for (double s : sigmas) out.push_back(acc.push(s));
    return out;
}

// Externally produced pyramid, whitespace separated:
//   omega
//   phi_1 height_1 width_1  <phi_1 * height_1 * width_1 values, map by map, row-major>
//   ...
inline FeaturePyramid read_pyramid(std::istream& in) {
    long long omega = 0;
    if (!(in >> omega) || omega < 1) throw ParseError(0, "pyramid file: bad stage count");
    FeaturePyramid pyr;
    pyr.requested_stages = static_cast<int>(omega);
    for (long long s = 0; s < omega; ++s) {
        long long phi = 0, h = 0, w = 0;
        if (!(in >> phi >> h >> w) || phi < 1 || h < 1 || w < 1) {
            throw ParseError(0, "pyramid file: bad header for stage " + std::to_string(s));
        }
        std::vector<Eigen::MatrixXd> maps;
        for (long long j = 0; j < phi; ++j) {
            Eigen::MatrixXd m(h, w);
            for (long long r = 0; r < h; ++r) {
                for (long long c = 0; c < w; ++c) {
                    if (!(in >> m(r, c))) throw ParseError(0, "pyramid file: truncated map data");
                    if (!std::isfinite(m(r, c))) throw ValidationError("pyramid file: non-finite value");
                }
            }
            maps.push_back(std::move(m));
        }
        pyr.stages.push_back(std::move(maps));
    }
    return pyr;
}

inline void write_pyramid(std::ostream& out, const FeaturePyramid& pyr) {
    std::ostringstream s;
    s.precision(17);
    s << pyr.stages.size() << '\n';
    for (const auto& stage : pyr.stages) {
        s << stage.size() << ' ' << stage.front().rows() << ' ' << stage.front().cols() << '\n';
        for (const auto& m : stage) {
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                for (Eigen::Index c = 0; c < m.cols(); ++c) s << (c ? " " : "") << m(r, c);
                s << '\n';
            }
        }
    }
    out << s.str();
}

}  // namespace feedctl
