#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "feedctl/errors.hpp"
#include "feedctl/geometry.hpp"
#include "feedctl/image.hpp"
#include "feedctl/rng.hpp"
#include "feedctl/types.hpp"

namespace feedctl {

// A pellet with a hand-specified constant-acceleration path (world pixels,
// per-frame units). lifetime < 0 keeps it alive while it stays in the image.
struct ScriptedNutriment {
    std::int64_t spawn_frame = 0;
    Point start;
    Point velocity;
    Point acceleration;
    std::int64_t lifetime = -1;
    double w = 11.0;
    double h = 20.0;
};

// Parameters for a synthetic feeding scene. Pellets are thrown from the
// machine toward the water between the two ripple boxes on ballistic paths.
struct SynthConfig {
    double width = 1920.0;
    double height = 1080.0;
    std::int64_t frames = 418;
    double density = 0.35;  // expected pellets thrown per frame
    int initial_nutriments = 0;  // extra pellets already in flight at frame 0
    int max_pellets = -1;  // stop throwing after this many random pellets; < 0 unlimited
    double speed = 1.0;  // time scale; 0 freezes every pellet
    Point machine{620.0, 380.0};
    double machine_jitter = 30.0;
    double gravity = 0.3;  // px / frame^2, image-down
    double flight_min = 20.0;  // frames from machine to water
    double flight_max = 28.0;
    BoundingBox ripple1{750.0, 900.0, 400.0, 140.0};
    BoundingBox ripple2{1170.0, 910.0, 400.0, 140.0};
    Point drift{0.0, 0.0};  // camera translation per frame
    double sway = 0.0;  // camera sway amplitude (px)
    double rho = 3.6;
    std::vector<ScriptedNutriment> scripted;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(width > 0.0) || !(height > 0.0)) throw ConfigError("frame size must be positive");
        if (frames < 1) throw ConfigError("frames must be >= 1");
        if (!(density >= 0.0) || initial_nutriments < 0) throw ConfigError("density must be >= 0");
        if (!(speed >= 0.0)) throw ConfigError("speed must be >= 0");
        if (!(flight_min > 0.0) || flight_max < flight_min) throw ConfigError("bad flight time range");
        if (!ripple1.valid() || !ripple2.valid()) throw ConfigError("invalid ripple box");
        if (!(rho > 0.0)) throw ConfigError("rho must be positive");
    }
};

struct SyntheticScenario {
    SynthConfig config;
    int pellets_thrown = 0;  // random pellets, scripted ones excluded
    std::vector<FrameRecord> records;
    std::vector<TruthRecord> truth;
};

namespace detail {

struct Flight {
    std::int64_t spawn_frame = 0;
    Point start;
    Point velocity;
    Point acceleration;
    double duration = -1.0;  // world time until the pellet reaches the water; < 0 unbounded
    double time_scale = 1.0;
    double w = 0.0;
    double h = 0.0;

    double world_time(std::int64_t frame) const { return time_scale * static_cast<double>(frame - spawn_frame); }

    bool alive(std::int64_t frame) const {
        if (frame < spawn_frame) return false;
        return duration < 0.0 || world_time(frame) < duration;
    }

    Point world_at(std::int64_t frame) const {
        const double t = world_time(frame);
        return {start.x + velocity.x * t + 0.5 * acceleration.x * t * t,
                start.y + velocity.y * t + 0.5 * acceleration.y * t * t};
    }
};

inline Point camera_offset(const SynthConfig& c, std::int64_t frame) {
    const double f = static_cast<double>(frame);
    constexpr double tau = 2.0 * std::numbers::pi;
    return {c.drift.x * f + c.sway * std::sin(tau * f / 97.0),
            c.drift.y * f + c.sway * (std::cos(tau * f / 131.0) - 1.0)};
}

inline BoundingBox shifted(BoundingBox b, Point off) {
    b.cx += off.x;
    b.cy += off.y;
    return b;
}

// Side of p relative to the passed line through `base` along `axis`: the sign
// of the cross product, oriented so that +1 is image-down of the line.
inline int side_by_cross(Point base, Point axis, Point p) {
    const double cross = axis.x * (p.y - base.y) - axis.y * (p.x - base.x);
    const double scaled = axis.x > 0.0 ? cross : -cross;
    if (std::abs(scaled) <= 1e-9 * std::abs(axis.x)) return 0;
    return scaled > 0.0 ? 1 : -1;
}

}  // namespace detail

inline SyntheticScenario synth_scenario(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);
    std::vector<detail::Flight> flights;

    const double water_x0 = std::min(config.ripple1.cx - config.ripple1.w / 2.0,
                                     config.ripple2.cx - config.ripple2.w / 2.0);
    const double water_x1 = std::max(config.ripple1.cx + config.ripple1.w / 2.0,
                                     config.ripple2.cx + config.ripple2.w / 2.0);
    const double water_y = 0.5 * (config.ripple1.cy + config.ripple2.cy);
    const double water_dy = 0.25 * std::min(config.ripple1.h, config.ripple2.h);

    int thrown = 0;
    auto throw_pellet = [&](std::int64_t frame, double age) {
        if (config.max_pellets >= 0 && thrown >= config.max_pellets) return;
        ++thrown;
        detail::Flight fl;
        fl.start = {config.machine.x + rng.uniform(-config.machine_jitter, config.machine_jitter),
                    config.machine.y + rng.uniform(-config.machine_jitter, config.machine_jitter)};
        const Point target{rng.uniform(water_x0, water_x1), water_y + rng.uniform(-water_dy, water_dy)};
        const double duration = rng.uniform(config.flight_min, config.flight_max);
        fl.acceleration = {0.0, config.gravity};
        fl.velocity = {(target.x - fl.start.x) / duration,
                       (target.y - fl.start.y - 0.5 * config.gravity * duration * duration) / duration};
        fl.duration = config.speed > 0.0 ? duration : -1.0;
        fl.time_scale = config.speed;
        fl.w = rng.uniform(9.0, 13.0);
        fl.h = rng.uniform(6.0, 36.0);
        // Pellets already in flight are placed part-way along their path.
        fl.spawn_frame = frame;
        if (age > 0.0 && config.speed > 0.0) {
            const double t0 = age * duration;
            fl.start = {fl.start.x + fl.velocity.x * t0 + 0.5 * fl.acceleration.x * t0 * t0,
                        fl.start.y + fl.velocity.y * t0 + 0.5 * fl.acceleration.y * t0 * t0};
            fl.velocity = {fl.velocity.x + fl.acceleration.x * t0, fl.velocity.y + fl.acceleration.y * t0};
            fl.duration = duration - t0;
        }
        flights.push_back(fl);
    };

    for (int i = 0; i < config.initial_nutriments; ++i) throw_pellet(0, rng.uniform(0.0, 0.9));
    for (const auto& s : config.scripted) {
        detail::Flight fl;
        fl.spawn_frame = s.spawn_frame;
        fl.start = s.start;
        fl.velocity = s.velocity;
        fl.acceleration = s.acceleration;
        fl.duration = s.lifetime < 0 ? -1.0 : static_cast<double>(s.lifetime);
        fl.time_scale = 1.0;
        fl.w = s.w;
        fl.h = s.h;
        flights.push_back(fl);
    }

    SyntheticScenario sc;
    sc.config = config;
    const double whole = std::floor(config.density);
    const double frac = config.density - whole;
    for (std::int64_t f = 0; f < config.frames; ++f) {
        if (f > 0 || config.density > 0.0) {
            int spawns = static_cast<int>(whole) + (rng.bernoulli(frac) ? 1 : 0);
            for (int i = 0; i < spawns; ++i) throw_pellet(f, 0.0);
        }

        const Point off = detail::camera_offset(config, f);
        const Point off_next = detail::camera_offset(config, f + 1);
        const bool swap = config.ripple2.cx < config.ripple1.cx ||
                          (config.ripple2.cx == config.ripple1.cx && config.ripple2.cy < config.ripple1.cy);
        const BoundingBox r1 = detail::shifted(swap ? config.ripple2 : config.ripple1, off);
        const BoundingBox r2 = detail::shifted(swap ? config.ripple1 : config.ripple2, off);

        FrameRecord rec;
        rec.frame = f;
        if (rng.bernoulli(0.5)) {
            rec.ripples = {r1, r2};
        } else {
            rec.ripples = {r2, r1};
        }

        // Passed line of this frame, built directly from the ripple corners.
        const Point tl1{r1.cx - r1.w / 2.0, r1.cy - r1.h / 2.0};
        const Point br1{r1.cx + r1.w / 2.0, r1.cy + r1.h / 2.0};
        const Point br2{r2.cx + r2.w / 2.0, r2.cy + r2.h / 2.0};
        const double z = std::hypot(tl1.x - br2.x, tl1.y - br2.y);
        const Point base{tl1.x, br1.y - z / config.rho};
        const Point axis{r2.cx - r1.cx, r2.cy - r1.cy};

        TruthRecord truth;
        truth.frame = f;
        for (const auto& fl : flights) {
            if (!fl.alive(f)) continue;
            const Point now = fl.world_at(f) + off;
            if (now.x < 0.0 || now.y < 0.0 || now.x >= config.width || now.y >= config.height) continue;
            const Point next = fl.world_at(f + 1) + off_next;
            rec.nutriments.push_back({now.x, now.y, fl.w, fl.h});
            truth.next.push_back(next);
            if (detail::side_by_cross(base, axis, now) == -1 && detail::side_by_cross(base, axis, next) >= 0) {
                ++truth.crossings;
            }
        }
        sc.records.push_back(std::move(rec));
        sc.truth.push_back(std::move(truth));
    }
    sc.pellets_thrown = thrown;
    return sc;
}

// Same scene with every length scaled by s (frame size, geometry, pellet
// sizes, speeds and camera motion); frame timing is unchanged.
inline SynthConfig scaled(SynthConfig c, double s) {
    if (!(s > 0.0)) throw ConfigError("scale must be positive");
    auto box = [s](BoundingBox b) { return BoundingBox{b.cx * s, b.cy * s, b.w * s, b.h * s}; };
    c.width *= s;
    c.height *= s;
    c.machine = c.machine * s;
    c.machine_jitter *= s;
    c.gravity *= s;
    c.ripple1 = box(c.ripple1);
    c.ripple2 = box(c.ripple2);
    c.drift = c.drift * s;
    c.sway *= s;
    for (auto& n : c.scripted) {
        n.start = n.start * s;
        n.velocity = n.velocity * s;
        n.acceleration = n.acceleration * s;
        n.w *= s;
        n.h *= s;
    }
    return c;
}

// Gray rendering of one synthetic frame: flat water, a ripple texture between
// the ripple boxes whose amplitude follows the pellets that reached the line
// over the last 20 frames, and the pellets as bright boxes.
inline GrayImage render_frame(const SyntheticScenario& sc, std::size_t index) {
    const auto& c = sc.config;
    const auto& rec = sc.records.at(index);
    const int w = std::max(1, static_cast<int>(std::lround(c.width)));
    const int h = std::max(1, static_cast<int>(std::lround(c.height)));
    GrayImage img(w, h, 0.35);

    int recent = 0;
    for (std::size_t k = index >= 19 ? index - 19 : 0; k <= index; ++k) recent += sc.truth[k].crossings;
    const double amplitude = 0.25 * std::min(1.0, recent / 8.0);

    if (rec.ripples.size() == 2 && amplitude > 0.0) {
        const RipplePair pair = make_ripple_pair(rec.ripples[0], rec.ripples[1]);
        const Point a = corners_of(pair.r1).tl;
        const Point b = corners_of(pair.r2).br;
        const int x0 = std::clamp(static_cast<int>(std::floor(std::min(a.x, b.x))), 0, w);
        const int x1 = std::clamp(static_cast<int>(std::ceil(std::max(a.x, b.x))), 0, w);
        const int y0 = std::clamp(static_cast<int>(std::floor(std::min(a.y, b.y))), 0, h);
        const int y1 = std::clamp(static_cast<int>(std::ceil(std::max(a.y, b.y))), 0, h);
        const double phase = 0.37 * static_cast<double>(rec.frame);
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
                img.at(x, y) = 0.35 + amplitude * std::sin(0.9 * x + phase) * std::sin(0.7 * y - phase);
            }
        }
    }
    for (const auto& n : rec.nutriments) {
        const Corners k = corners_of(n);
        const int x0 = std::clamp(static_cast<int>(std::floor(k.tl.x)), 0, w);
        const int x1 = std::clamp(static_cast<int>(std::ceil(k.br.x)), 0, w);
        const int y0 = std::clamp(static_cast<int>(std::floor(k.tl.y)), 0, h);
        const int y1 = std::clamp(static_cast<int>(std::ceil(k.br.y)), 0, h);
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) img.at(x, y) = 0.85;
        }
    }
    return img;
}

}  // namespace feedctl
