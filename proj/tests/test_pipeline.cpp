#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "feedctl/feedctl.hpp"
#include "feedctl/synth.hpp"

using namespace feedctl;

namespace {

// relu(v) - relu(-v) on the chosen input, plus an output offset.
RegressionModel shifted_identity(int input_dim, int pick, double offset) {
    DenseLayer h{Eigen::MatrixXd::Zero(input_dim, 2), Eigen::VectorXd::Zero(2)};
    h.weights(pick, 0) = 1.0;
    h.weights(pick, 1) = -1.0;
    DenseLayer o{Eigen::MatrixXd(2, 1), Eigen::VectorXd::Constant(1, offset)};
    o.weights << 1.0, -1.0;
    return RegressionModel(LayerSpec{input_dim, {2}, 1}, {h, o});
}

ControlConfig control(double on, double off, long long count_max) {
    ControlConfig c;
    c.act_on = on;
    c.act_off = off;
    c.count_max = count_max;
    return c;
}

SynthConfig busy_scene(std::uint64_t seed, std::int64_t frames) {
    SynthConfig c;
    c.frames = frames;
    c.density = 0.9;
    c.seed = seed;
    c.sway = 5;
    c.drift = {0.2, -0.1};
    return c;
}

}  // namespace

TEST(Control, Examples) {
    const auto cfg = control(0.5, 0.2, 10);
    ControlState s;
    EXPECT_FALSE(s.feeding);
    EXPECT_EQ(s.reason, DecisionReason::Startup);

    auto d = control_decide(s, 0, 3, 0.3, cfg);
    EXPECT_FALSE(d.feeding);
    EXPECT_EQ(d.reason, DecisionReason::Startup);

    d = control_decide(s, 1, 3, 0.7, cfg);
    EXPECT_TRUE(d.feeding);
    EXPECT_EQ(d.reason, DecisionReason::ActivityHigh);

    d = control_decide(s, 2, 3, 0.3, cfg);
    EXPECT_TRUE(d.feeding);

    d = control_decide(s, 3, 10, 0.9, cfg);
    EXPECT_FALSE(d.feeding);
    EXPECT_EQ(d.reason, DecisionReason::Oversupply);

    d = control_decide(s, 4, 2, 0.3, cfg);
    EXPECT_FALSE(d.feeding);

    d = control_decide(s, 5, 2, 0.2, cfg);
    EXPECT_FALSE(d.feeding);
    EXPECT_EQ(d.reason, DecisionReason::ActivityLow);
    EXPECT_EQ(to_string(d.reason), "activity_low");
}

TEST(Control, CountOnlyMode) {
    const auto cfg = control(0, 0, 4);
    ControlState s;
    EXPECT_TRUE(control_decide(s, 0, 0, std::nullopt, cfg).feeding);
    EXPECT_FALSE(control_decide(s, 1, 4, std::nullopt, cfg).feeding);
    EXPECT_TRUE(control_decide(s, 2, 3, std::nullopt, cfg).feeding);
}

TEST(Control, RejectsInvertedThresholds) {
    EXPECT_THROW(control(0.1, 0.2, 3).validate(), ConfigError);
    EXPECT_THROW(control(0.2, 0.1, -1).validate(), ConfigError);
}

TEST(Timing, Examples) {
    const auto flat = timing_report(std::vector<double>{250, 250, 250});
    EXPECT_DOUBLE_EQ(flat.fps.mean, 4.0);
    EXPECT_DOUBLE_EQ(flat.fps.std_dev, 0.0);
    EXPECT_EQ(flat.fps.n, 3u);
    const auto two = timing_report(std::vector<double>{100, 300});
    EXPECT_NEAR(two.fps.mean, (10.0 + 1000.0 / 300.0) / 2.0, 1e-12);
    EXPECT_NEAR(two.fps.mean, 6.667, 5e-4);
    EXPECT_DOUBLE_EQ(two.throughput_fps, 5.0);
    EXPECT_THROW(timing_report(std::vector<double>{}), EmptyInputError);
    EXPECT_NE(format_timing_report(two).find("N 2\n"), std::string::npos);
}

TEST(Pipeline, StaticFlatSceneStaysOff) {
    SynthConfig c;
    c.frames = 30;
    c.density = 0;
    c.scripted.push_back({0, {900, 500}, {0, 0}, {0, 0}});
    const auto sc = synth_scenario(c);
    PipelineConfig pc;
    pc.control = control(0.1, 0.0, 5);
    const GrayImage flat(static_cast<int>(c.width), static_cast<int>(c.height), 0.35);
    const auto run = run_pipeline(std::span<const FrameRecord>(sc.records), PersistencePredictor{}, pc,
                                  [&](std::int64_t) { return std::optional<GrayImage>(flat); });
    ASSERT_EQ(run.frames.size(), 30u);
    for (const auto& f : run.frames) {
        EXPECT_EQ(f.raw_count, 0);
        EXPECT_EQ(*f.sigma, 0.0);
        EXPECT_FALSE(f.decision.feeding);
    }
}

TEST(Pipeline, TruthReplayReproducesGeneratorCounts) {
    const auto sc = synth_scenario(busy_scene(21, 300));
    PipelineConfig pc;
    pc.control = control(0, 0, 6);
    const auto run = run_pipeline(std::span<const FrameRecord>(sc.records), TruthPredictor(sc.truth), pc);
    long long total = 0;
    for (std::size_t f = 0; f < sc.records.size(); ++f) {
        EXPECT_EQ(run.frames[f].raw_count, sc.truth[f].crossings) << "frame " << f;
        total += run.frames[f].raw_count;
    }
    EXPECT_GT(total, 0);
}

TEST(Pipeline, ReferenceStreamTiming) {
    const auto sc = synth_scenario(busy_scene(2, 418));
    PipelineConfig pc;
    pc.control = control(0, 0, 6);
    const auto run = run_pipeline(std::span<const FrameRecord>(sc.records), PersistencePredictor{}, pc);
    EXPECT_EQ(run.timing.fps.n, 418u);
    EXPECT_EQ(run.frames.size(), 418u);
}

TEST(Pipeline, SkippedGeometryAdvancesSeries) {
    std::vector<FrameRecord> recs{
        {0, {{10, 10, 2, 2}}, {}},
        {1, {{95, 60, 2, 2}}, {{100, 100, 20, 20}, {200, 100, 20, 20}}},
        {2, {{95, 60, 2, 2}}, {}},
    };
    std::vector<TruthRecord> truth{{0, {{10, 10}}, 0}, {1, {{95, 90}}, 1}, {2, {{95, 90}}, 1}};
    PipelineConfig pc;
    pc.control = control(0, 0, 100);
    const auto run = run_pipeline(std::span<const FrameRecord>(recs), TruthPredictor(truth), pc);
    EXPECT_FALSE(run.frames[0].geometry_ready);
    EXPECT_EQ(run.frames[0].raw_count, 0);
    EXPECT_EQ(run.frames[1].raw_count, 1);
    EXPECT_TRUE(run.frames[2].geometry_ready);
    EXPECT_EQ(run.frames[2].windowed_count, 2);
}

TEST(Pipeline, RejectsOutOfOrderFrames) {
    Pipeline<PersistencePredictor> p(PersistencePredictor{}, PipelineConfig{});
    p.process({5, {}, {}});
    EXPECT_THROW(p.process({5, {}, {}}), ValidationError);
}

TEST(Pipeline, CsvOutputsAreDeterministic) {
    SynthConfig c = scaled(busy_scene(4, 40), 0.125);
    const auto sc = synth_scenario(c);
    PipelineConfig pc;
    pc.control = control(0.05, 0.01, 6);
    auto images = [&](std::int64_t f) {
        return std::optional<GrayImage>(render_frame(sc, static_cast<std::size_t>(f)));
    };
    auto csv = [&] {
        const auto run = run_pipeline(std::span<const FrameRecord>(sc.records), PersistencePredictor{}, pc, images);
        std::ostringstream s;
        write_counts_csv(s, run.frames);
        write_activity_csv(s, run.frames);
        write_decisions_csv(s, run.frames);
        return s.str();
    };
    const std::string a = csv();
    EXPECT_EQ(a, csv());
    EXPECT_NE(a.find("frame,feeding,raw_count,windowed_count,windowed_activity,reason\n"), std::string::npos);
}

TEST(Training, SingleFrameHasNoPairs) {
    const auto sc = synth_scenario(busy_scene(1, 1));
    const auto pairs = harvest_pairs(sc.records);
    EXPECT_EQ(pairs.size(), 0u);
    EXPECT_THROW(train_pair(pairs, "R1", TrainConfig{10, 1e-3, 8, 0, 0}), EmptyDatasetError);
}

TEST(Training, StaticSceneLearnsIdentity) {
    SynthConfig c;
    c.frames = 12;
    c.density = 0;
    for (int i = 0; i < 16; ++i) c.scripted.push_back({0, {600.0 + 30 * i, 450.0 + 20 * i}, {0, 0}, {0, 0}});
    const auto sc = synth_scenario(c);
    const auto pairs = harvest_pairs(sc.records);
    EXPECT_EQ(pairs.size(), 176u);
    const auto trained = train_pair(pairs, "R5", TrainConfig{10000, 2e-3, 16, 0, 0});
    const auto frames = normalize_stream(sc.records);
    const auto next = predict_next(trained.mx.model, trained.my.model, *frames[0]);
    for (std::size_t i = 0; i < next.size(); ++i) {
        EXPECT_NEAR(next[i].x, frames[0]->kappa[i].x, 0.01);
        EXPECT_NEAR(next[i].y, frames[0]->kappa[i].y, 0.01);
    }
}

TEST(Training, HarvestedPairsFollowTracks) {
    const auto sc = synth_scenario(busy_scene(8, 120));
    const auto assoc = harvest_pairs(sc.records);
    const auto truth = harvest_truth_pairs(sc.records, sc.truth);
    EXPECT_GT(assoc.size(), 100u);
    EXPECT_GT(truth.size(), assoc.size() / 2);
}

TEST(Evaluation, PerfectModelWins) {
    SynthConfig c;
    c.frames = 40;
    c.density = 0;
    for (int i = 0; i < 5; ++i) c.scripted.push_back({0, {700.0 + 50 * i, 450.0}, {3, 4}, {0, 0}});
    const auto sc = synth_scenario(c);
    const auto frames = normalize_stream(sc.records);
    const Point d = normalize_point(sc.truth[0].next[0], frames[0]->pair) - frames[0]->kappa[0];

    std::vector<NamedModels> models;
    models.push_back({"offset", shifted_identity(1, 0, d.x + 0.01), shifted_identity(2, 1, d.y)});
    models.push_back({"perfect", shifted_identity(1, 0, d.x), shifted_identity(2, 1, d.y)});
    models.push_back({"still", shifted_identity(1, 0, 0), shifted_identity(2, 1, 0)});
    const auto report = evaluate_models(models, sc.records, sc.truth);
    EXPECT_EQ(report.best, 1u);
    EXPECT_LT(report.rows[1].stats.mean, 1e-9);
    EXPECT_EQ(report.rows[1].stats.n, 200u);
    const std::string table = format_eval_report(report);
    EXPECT_NE(table.find("ci95_low"), std::string::npos);
    EXPECT_NE(table.find("perfect"), std::string::npos);
}
