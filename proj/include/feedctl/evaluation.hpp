#pragma once

#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "feedctl/errors.hpp"
#include "feedctl/pipeline.hpp"
#include "feedctl/regressor.hpp"
#include "feedctl/stats.hpp"
#include "feedctl/training.hpp"

namespace feedctl {

struct AlignedPredictions {
    std::vector<Point> predicted;  // pixels
    std::vector<Point> truth;      // pixels
};

// Predicted and annotated next-frame pixel positions for every nutriment in a
// frame with usable geometry.
template <NextFramePredictor P>
AlignedPredictions collect_predictions(std::span<const FrameRecord> records, std::span<const TruthRecord> truth,
                                       const P& predictor) {
    if (records.size() != truth.size()) throw ShapeError("truth stream does not align with detections");
    const auto frames = normalize_stream(records);
    AlignedPredictions out;
    for (std::size_t f = 0; f < records.size(); ++f) {
        if (truth[f].frame != records[f].frame) throw ShapeError("truth frame indices do not align");
        if (truth[f].next.size() != records[f].nutriments.size()) {
            throw ShapeError("truth count differs from detections in frame " + std::to_string(records[f].frame));
        }
        if (!frames[f]) continue;
        const auto next = to_pixel(predictor.predict(*frames[f]), frames[f]->pair);
        out.predicted.insert(out.predicted.end(), next.begin(), next.end());
        out.truth.insert(out.truth.end(), truth[f].next.begin(), truth[f].next.end());
    }
    return out;
}

struct NamedModels {
    std::string name;
    RegressionModel mx;
    RegressionModel my;
};

struct EvalRow {
    std::string name;
    SampleSummary stats;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    std::size_t best = 0;
    EvalFormula formula = EvalFormula::Euclidean;
};

inline EvalReport evaluate_models(std::span<const NamedModels> models, std::span<const FrameRecord> records,
                                  std::span<const TruthRecord> truth, EvalFormula formula = EvalFormula::Euclidean) {
    if (models.empty()) throw EmptyInputError("no models to evaluate");
    EvalReport report;
    report.formula = formula;
    std::vector<SampleSummary> stats;
    for (const auto& m : models) {
        const auto aligned = collect_predictions(records, truth, RegressionPredictor(m.mx, m.my));
        if (aligned.predicted.empty()) throw EmptyInputError("annotated stream has no usable predictions");
        stats.push_back(eval_error(aligned.predicted, aligned.truth, formula));
        report.rows.push_back({m.name, stats.back()});
    }
    report.best = select_best(stats);
    return report;
}

inline std::string format_eval_report(const EvalReport& report) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-12s %6s %10s %10s %10s %10s %10s  %s\n", "model", "N", "mean_px", "std_px",
                  "stderr_px", "ci95_low", "ci95_high", "best");
    out += buf;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& r = report.rows[i];
        std::snprintf(buf, sizeof buf, "%-12s %6zu %10.4f %10.4f %10.4f %10.4f %10.4f  %s\n", r.name.c_str(),
                      r.stats.n, r.stats.mean, r.stats.std_dev, r.stats.std_err, r.stats.ci_low, r.stats.ci_high,
                      i == report.best ? "*" : "");
        out += buf;
    }
    return out;
}

}  // namespace feedctl
