#pragma once

#include <chrono>
#include <concepts>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "feedctl/control.hpp"
#include "feedctl/counter.hpp"
#include "feedctl/detection.hpp"
#include "feedctl/errors.hpp"
#include "feedctl/geometry.hpp"
#include "feedctl/image.hpp"
#include "feedctl/regressor.hpp"
#include "feedctl/stats.hpp"
#include "feedctl/texture.hpp"

namespace feedctl {

// Maps the normalized positions of a frame to their normalized positions in
// the next frame, one output per input, same order.
template <typename P>
concept NextFramePredictor = requires(const P& p, const NormalizedFrame& nf) {
    { p.predict(nf) } -> std::convertible_to<std::vector<Point>>;
};

class RegressionPredictor {
public:
    RegressionPredictor(const RegressionModel& mx, const RegressionModel& my) : mx_(&mx), my_(&my) {
        if (mx.input_dim() != 1) throw ShapeError("mu_x must take one input");
        if (my.input_dim() != 2) throw ShapeError("mu_y must take two inputs");
    }

    std::vector<Point> predict(const NormalizedFrame& nf) const { return predict_next(*mx_, *my_, nf); }

private:
    const RegressionModel* mx_;
    const RegressionModel* my_;
};

// Next position = current position.
struct PersistencePredictor {
    std::vector<Point> predict(const NormalizedFrame& nf) const { return nf.kappa; }
};

// Replays annotated next-frame pixel positions through the frame's geometry.
class TruthPredictor {
public:
    explicit TruthPredictor(std::span<const TruthRecord> truth) {
        for (const auto& t : truth) next_[t.frame] = t.next;
    }

    std::vector<Point> predict(const NormalizedFrame& nf) const {
        auto it = next_.find(nf.frame);
        if (it == next_.end()) throw ShapeError("no annotation for frame " + std::to_string(nf.frame));
        if (it->second.size() != nf.kappa.size()) {
            throw ShapeError("annotation count differs from detections in frame " + std::to_string(nf.frame));
        }
        std::vector<Point> out;
        out.reserve(it->second.size());
        for (const Point& p : it->second) out.push_back(normalize_point(p, nf.pair));
        return out;
    }

private:
    std::map<std::int64_t, std::vector<Point>> next_;
};

struct PipelineConfig {
    double rho = kDefaultRho;
    int window = kDefaultWindow;
    CrossingDirection direction = CrossingDirection::MachineToRipple;
    ControlConfig control;
    int extractor_stages = 5;
    bool use_activity = false;  // true when a texture source accompanies the stream

    void validate() const {
        if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be a positive finite number");
        if (window < 1) throw ConfigError("window must be >= 1");
        if (extractor_stages < 1) throw ConfigError("extractor needs at least one stage");
        control.validate();
    }
};

struct FrameOutput {
    std::int64_t frame = 0;
    bool geometry_ready = false;
    int raw_count = 0;
    long long windowed_count = 0;
    std::optional<double> sigma;
    std::optional<double> windowed_sigma;
    ControlDecision decision;
    std::vector<Point> predicted;  // pixel positions, aligned with the frame's nutriments
};

// One pass of the per-frame loop: ripple pair, normalization, next-frame
// prediction, inverse mapping, passed-line count, texture activity and the
// feeding decision. Frames must arrive in increasing order.
template <NextFramePredictor P>
class Pipeline {
public:
    Pipeline(P predictor, PipelineConfig config)
        : predictor_(std::move(predictor)),
          config_(std::move(config)),
          counts_(config_.window),
          activity_(config_.window),
          extractor_{config_.extractor_stages} {
        config_.validate();
    }

    FrameOutput process(const FrameRecord& record, const GrayImage* image = nullptr) {
        if (last_frame_ && record.frame <= *last_frame_) {
            throw ValidationError("frame " + std::to_string(record.frame) + " arrived out of order");
        }
        last_frame_ = record.frame;

        FrameOutput out;
        out.frame = record.frame;
        last_pair_ = resolve_ripple_pair(record, last_pair_);
        if (last_pair_ && !last_pair_->usable()) last_pair_.reset();

        if (last_pair_) {
            out.geometry_ready = true;
            const RipplePair& pair = *last_pair_;
            const NormalizedFrame nf = to_normalized(record, pair);
            std::vector<Point> next_kappa = predictor_.predict(nf);
            if (next_kappa.size() != nf.kappa.size()) throw ShapeError("predictor returned the wrong count");
            out.predicted = to_pixel(next_kappa, pair);

            std::vector<Point> current;
            current.reserve(record.nutriments.size());
            for (const auto& b : record.nutriments) current.push_back(b.center());
            const PassedLine line = passed_line(pair, config_.rho);
            out.raw_count = count_crossings(current, out.predicted, line, config_.direction);

            if (config_.use_activity && image != nullptr) {
                last_sigma_ = activity_index(extractor_.extract(crop_region(*image, pair)));
            }
        }

        out.windowed_count = counts_.push(out.raw_count);
        if (config_.use_activity) {
            out.sigma = last_sigma_.value_or(0.0);
            out.windowed_sigma = activity_.push(*out.sigma);
        }
        out.decision = control_decide(control_, out.frame, out.windowed_count, out.windowed_sigma, config_.control);
        return out;
    }

    const PipelineConfig& config() const { return config_; }

private:
    P predictor_;
    PipelineConfig config_;
    TrailingSum counts_;
    TrailingMean activity_;
    ReferenceExtractor extractor_;
    ControlState control_;
    std::optional<RipplePair> last_pair_;
    std::optional<double> last_sigma_;
    std::optional<std::int64_t> last_frame_;
};

struct TimingReport {
    std::vector<double> frame_ms;
    SampleSummary fps;  // statistics of the per-frame rate 1000 / ms
    double mean_ms = 0.0;
    double throughput_fps = 0.0;  // 1000 / mean_ms
};

inline TimingReport timing_report(std::span<const double> frame_ms) {
    if (frame_ms.empty()) throw EmptyInputError("no frame timings");
    TimingReport r;
    r.frame_ms.assign(frame_ms.begin(), frame_ms.end());
    std::vector<double> fps;
    fps.reserve(frame_ms.size());
    double total = 0.0;
    for (double ms : frame_ms) {
        if (!(ms >= 0.0)) throw ValidationError("negative frame duration");
        const double clamped = std::max(ms, 1e-6);  // 1 ns floor keeps the rate finite
        fps.push_back(1000.0 / clamped);
        total += ms;
    }
    r.fps = summarize(fps);
    r.mean_ms = total / static_cast<double>(frame_ms.size());
    r.throughput_fps = 1000.0 / std::max(r.mean_ms, 1e-6);
    return r;
}

inline std::string format_timing_report(const TimingReport& r) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(4);
    s << "N " << r.fps.n << '\n'
      << "mean_fps " << r.fps.mean << '\n'
      << "std_fps " << r.fps.std_dev << '\n'
      << "stderr_fps " << r.fps.std_err << '\n'
      << "ci95_low_fps " << r.fps.ci_low << '\n'
      << "ci95_high_fps " << r.fps.ci_high << '\n'
      << "mean_ms " << r.mean_ms << '\n'
      << "throughput_fps " << r.throughput_fps << '\n';
    return s.str();
}

struct RunResult {
    std::vector<FrameOutput> frames;
    TimingReport timing;
};

// Loads the image for a frame, or returns nullopt when none is available.
using ImageSource = std::function<std::optional<GrayImage>(std::int64_t frame)>;

// Runs the whole stream. Only process() is timed; image loading is not.
template <NextFramePredictor P>
RunResult run_pipeline(std::span<const FrameRecord> records, P predictor, PipelineConfig config,
                       const ImageSource& images = {}) {
    if (records.empty()) throw EmptyInputError("detection stream is empty");
    config.use_activity = static_cast<bool>(images);
    Pipeline<P> pipeline(std::move(predictor), config);
    RunResult result;
    result.frames.reserve(records.size());
    std::vector<double> ms;
    ms.reserve(records.size());
    for (const auto& rec : records) {
        std::optional<GrayImage> img;
        if (images) img = images(rec.frame);
        const auto t0 = std::chrono::steady_clock::now();
        result.frames.push_back(pipeline.process(rec, img ? &*img : nullptr));
        const auto t1 = std::chrono::steady_clock::now();
        ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    result.timing = timing_report(ms);
    return result;
}

inline void write_counts_csv(std::ostream& out, std::span<const FrameOutput> frames) {
    out << "frame,raw_count,windowed_count\n";
    for (const auto& f : frames) out << f.frame << ',' << f.raw_count << ',' << f.windowed_count << '\n';
}

namespace detail {
inline std::string fmt_real(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}
}  // namespace detail

inline void write_activity_csv(std::ostream& out, std::span<const FrameOutput> frames) {
    out << "frame,sigma,windowed_sigma\n";
    for (const auto& f : frames) {
        out << f.frame << ',' << (f.sigma ? detail::fmt_real(*f.sigma) : "") << ','
            << (f.windowed_sigma ? detail::fmt_real(*f.windowed_sigma) : "") << '\n';
    }
}

inline void write_decisions_csv(std::ostream& out, std::span<const FrameOutput> frames) {
    out << "frame,feeding,raw_count,windowed_count,windowed_activity,reason\n";
    for (const auto& f : frames) {
        const auto& d = f.decision;
        out << d.frame << ',' << (d.feeding ? 1 : 0) << ',' << f.raw_count << ',' << d.windowed_count << ','
            << (d.windowed_activity ? detail::fmt_real(*d.windowed_activity) : "") << ',' << to_string(d.reason)
            << '\n';
    }
}

}  // namespace feedctl
