#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "feedctl/detection.hpp"
#include "feedctl/errors.hpp"
#include "feedctl/geometry.hpp"
#include "feedctl/regressor.hpp"
#include "feedctl/types.hpp"

namespace feedctl {

inline constexpr double kDefaultGate = 0.05;

// Training sets for mu_x (input x) and mu_y (inputs x, y).
struct PairDatasets {
    Dataset x{1};
    Dataset y{2};

    std::size_t size() const { return x.size(); }

    void add(Point now, Point next) {
        x.add({now.x}, next.x);
        y.add({now.x, now.y}, next.y);
    }
};

// Normalized frames for every record with usable geometry (carrying the last
// valid ripple pair forward); nullopt where none is available yet.
inline std::vector<std::optional<NormalizedFrame>> normalize_stream(std::span<const FrameRecord> records) {
    std::vector<std::optional<NormalizedFrame>> out;
    out.reserve(records.size());
    std::optional<RipplePair> last;
    for (const auto& rec : records) {
        last = resolve_ripple_pair(rec, last);
        if (last && !last->usable()) last.reset();
        if (last) {
            out.emplace_back(to_normalized(rec, *last));
        } else {
            out.emplace_back(std::nullopt);
        }
    }
    return out;
}

// Pairs (kappa at f, kappa at f + 1) for consecutive frames by mutual nearest
// neighbour in normalized space, accepted within `gate`.
inline PairDatasets harvest_pairs(std::span<const FrameRecord> records, double gate = kDefaultGate) {
    if (!(gate > 0.0)) throw ConfigError("gate must be positive");
    const auto frames = normalize_stream(records);
    PairDatasets out;
    auto nearest = [](Point p, const std::vector<Point>& pts) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double d = distance(p, pts[i]);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return std::pair{best, best_d};
    };
    for (std::size_t f = 0; f + 1 < frames.size(); ++f) {
        if (!frames[f] || !frames[f + 1]) continue;
        if (records[f + 1].frame != records[f].frame + 1) continue;
        const auto& a = frames[f]->kappa;
        const auto& b = frames[f + 1]->kappa;
        if (a.empty() || b.empty()) continue;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto [j, d] = nearest(a[i], b);
            if (d > gate) continue;
            if (nearest(b[j], a).first != i) continue;
            out.add(a[i], b[j]);
        }
    }
    return out;
}

// Pairs from annotated next positions, both ends normalized with frame f's
// geometry (the same geometry used to map predictions back to pixels).
inline PairDatasets harvest_truth_pairs(std::span<const FrameRecord> records, std::span<const TruthRecord> truth) {
    if (records.size() != truth.size()) throw ShapeError("truth stream does not align with detections");
    const auto frames = normalize_stream(records);
    PairDatasets out;
    for (std::size_t f = 0; f < records.size(); ++f) {
        if (truth[f].frame != records[f].frame) throw ShapeError("truth frame indices do not align");
        if (truth[f].next.size() != records[f].nutriments.size()) {
            throw ShapeError("truth count differs from detections in frame " + std::to_string(records[f].frame));
        }
        if (!frames[f]) continue;
        for (std::size_t i = 0; i < truth[f].next.size(); ++i) {
            out.add(frames[f]->kappa[i], normalize_point(truth[f].next[i], frames[f]->pair));
        }
    }
    return out;
}

struct TrainedPair {
    std::string variant;
    TrainResult mx;
    TrainResult my;
};

inline TrainedPair train_pair(const PairDatasets& data, const std::string& variant, const TrainConfig& config) {
    if (data.size() == 0) throw EmptyDatasetError("no training pairs could be harvested");
    TrainedPair out;
    out.variant = variant;
    out.mx = train(new_model(family_spec(variant, 1), config.seed), data.x, config);
    out.my = train(new_model(family_spec(variant, 2), config.seed + 1), data.y, config);
    return out;
}

}  // namespace feedctl
