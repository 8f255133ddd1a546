// feedctl: feeding-control pipeline over detection streams.
//
//   feedctl synth    --frames 418 --seed 1 --out scene/
//   feedctl train    --detections scene/detections.jsonl --spec R1 --out models/R1
//   feedctl eval     --detections d.jsonl --truth t.jsonl --model R1=models/R1 --model R5=models/R5
//   feedctl run      --detections d.jsonl --mx m/mx.model --my m/my.model --count-max 40 --out run/
//   feedctl activity --images frames/ --detections d.jsonl --out act/

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "feedctl/feedctl.hpp"

namespace fs = std::filesystem;
using namespace feedctl;

namespace {

std::vector<FrameRecord> load_detections(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open detection stream " + path.string());
    return read_detection_stream(in);
}

std::vector<TruthRecord> load_truth(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open annotation sidecar " + path.string());
    return read_truth_stream(in);
}

RegressionModel load_model(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model " + path.string());
    return read_model(in);
}

void save_model(const fs::path& path, const RegressionModel& model) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot create " + path.string());
    write_model(out, model);
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw IoError("cannot create " + (dir / name).string());
    return out;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

// Frame images are looked up as <frame>.pgm or zero-padded %06d, .pgm or .ppm.
std::optional<fs::path> find_frame_image(const fs::path& dir, std::int64_t frame) {
    char padded[32];
    std::snprintf(padded, sizeof padded, "%06lld", static_cast<long long>(frame));
    for (const std::string& stem : {std::to_string(frame), std::string(padded)}) {
        for (const char* ext : {".pgm", ".ppm"}) {
            fs::path p = dir / (stem + ext);
            if (fs::exists(p)) return p;
        }
    }
    return std::nullopt;
}

ImageSource image_source(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("image directory " + dir.string() + " does not exist");
    return [dir](std::int64_t frame) -> std::optional<GrayImage> {
        auto p = find_frame_image(dir, frame);
        if (!p) throw IoError("no image for frame " + std::to_string(frame) + " in " + dir.string());
        return read_pnm(*p);
    };
}

// Files in dir with a numeric stem and one of the given extensions, by frame.
std::vector<std::pair<std::int64_t, fs::path>> numbered_files(const fs::path& dir,
                                                              std::initializer_list<const char*> exts) {
    if (!fs::is_directory(dir)) throw IoError("directory " + dir.string() + " does not exist");
    std::vector<std::pair<std::int64_t, fs::path>> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto ext = e.path().extension().string();
        if (std::find_if(exts.begin(), exts.end(), [&](const char* x) { return ext == x; }) == exts.end()) continue;
        const auto stem = e.path().stem().string();
        std::int64_t frame = 0;
        auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), frame);
        if (ec != std::errc() || ptr != stem.data() + stem.size()) continue;
        out.emplace_back(frame, e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

EvalFormula parse_formula(const std::string& s) {
    if (s == "euclidean") return EvalFormula::Euclidean;
    if (s == "literal") return EvalFormula::Literal;
    throw ConfigError("--eval-formula must be 'literal' or 'euclidean'");
}

struct SynthArgs {
    SynthConfig config;
    double scale = 1.0;
    bool images = false;
    std::string out;
};

int cmd_synth(const SynthArgs& a) {
    const SynthConfig cfg = scaled(a.config, a.scale);
    const auto sc = synth_scenario(cfg);
    const fs::path dir(a.out);
    ensure_dir(dir);
    {
        auto out = open_out(dir, "detections.jsonl");
        write_detection_stream(out, sc.records);
    }
    {
        auto out = open_out(dir, "truth.jsonl");
        write_truth_stream(out, sc.truth);
    }
    if (a.images) {
        ensure_dir(dir / "images");
        for (std::size_t i = 0; i < sc.records.size(); ++i) {
            write_pgm(dir / "images" / (std::to_string(sc.records[i].frame) + ".pgm"), render_frame(sc, i));
        }
    }
    int crossings = 0;
    std::size_t boxes = 0;
    for (const auto& t : sc.truth) crossings += t.crossings;
    for (const auto& r : sc.records) boxes += r.nutriments.size();
    std::cout << "frames " << sc.records.size() << " nutriment_boxes " << boxes << " crossings " << crossings
              << '\n';
    return 0;
}

struct TrainArgs {
    std::string detections;
    std::string truth;
    std::string spec = "R1";
    TrainConfig config{20'000, 5e-4, 64, 0, 0, 19.0};
    bool paper_defaults = false;
    double gate = kDefaultGate;
    std::string out;
};

int cmd_train(TrainArgs a) {
    if (a.paper_defaults) {
        const auto p = TrainConfig::paper_defaults();
        a.config.iterations = p.iterations;
        a.config.learning_rate = p.learning_rate;
        a.config.lr_decay = p.lr_decay;
    }
    if (!model_family(a.spec)) throw ConfigError("--spec must be one of R1..R6");
    std::cout << "spec " << a.spec << " iterations " << a.config.iterations << " learning_rate "
              << a.config.learning_rate << " lr_decay " << a.config.lr_decay << " batch_size "
              << a.config.batch_size << " seed " << a.config.seed << '\n';

    const auto records = load_detections(a.detections);
    const PairDatasets data = a.truth.empty() ? harvest_pairs(records, a.gate)
                                              : harvest_truth_pairs(records, load_truth(a.truth));
    if (data.size() == 0) throw EmptyDatasetError("no training pairs could be harvested from the stream");
    std::cout << "training_pairs " << data.size() << '\n';

    const auto trained = train_pair(data, a.spec, a.config);
    const fs::path dir(a.out);
    ensure_dir(dir);
    save_model(dir / "mx.model", trained.mx.model);
    save_model(dir / "my.model", trained.my.model);
    auto log = open_out(dir, "loss.csv");
    log.precision(17);
    log << "model,iteration,loss\n";
    for (const auto& p : trained.mx.curve) log << "mx," << p.iteration << ',' << p.loss << '\n';
    for (const auto& p : trained.my.curve) log << "my," << p.iteration << ',' << p.loss << '\n';
    std::cout << "mx_mse " << trained.mx.initial_loss << " -> " << trained.mx.final_loss << '\n'
              << "my_mse " << trained.my.initial_loss << " -> " << trained.my.final_loss << '\n';
    return 0;
}

struct EvalArgs {
    std::string detections;
    std::string truth;
    std::vector<std::string> models;  // NAME=DIR or DIR
    std::string mx, my;
    std::string formula = "euclidean";
    std::string out;
};

int cmd_eval(const EvalArgs& a) {
    if (a.truth.empty()) throw IoError("eval needs an annotation sidecar (--truth)");
    const auto records = load_detections(a.detections);
    const auto truth = load_truth(a.truth);
    std::vector<NamedModels> models;
    for (const auto& m : a.models) {
        const auto eq = m.find('=');
        const fs::path dir = eq == std::string::npos ? fs::path(m) : fs::path(m.substr(eq + 1));
        const std::string name = eq == std::string::npos ? dir.filename().string() : m.substr(0, eq);
        models.push_back({name, load_model(dir / "mx.model"), load_model(dir / "my.model")});
    }
    if (!a.mx.empty() || !a.my.empty()) {
        if (a.mx.empty() || a.my.empty()) throw ConfigError("--mx and --my go together");
        models.push_back({"model", load_model(a.mx), load_model(a.my)});
    }
    const auto report = evaluate_models(models, records, truth, parse_formula(a.formula));
    std::cout << format_eval_report(report);
    if (!a.out.empty()) {
        ensure_dir(a.out);
        auto out = open_out(a.out, "eval.csv");
        out.precision(17);
        out << "model,n,mean,std,stderr,ci95_low,ci95_high,best\n";
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            const auto& r = report.rows[i];
            out << r.name << ',' << r.stats.n << ',' << r.stats.mean << ',' << r.stats.std_dev << ','
                << r.stats.std_err << ',' << r.stats.ci_low << ',' << r.stats.ci_high << ','
                << (i == report.best ? 1 : 0) << '\n';
        }
    }
    return 0;
}

struct RunArgs {
    std::string detections;
    std::string mx, my;
    std::string truth_predictor;
    std::string images;
    PipelineConfig config;
    std::optional<double> act_on, act_off;
    std::optional<long long> count_max;
    std::string out;
};

template <NextFramePredictor P>
RunResult run_with(const std::vector<FrameRecord>& records, P predictor, const RunArgs& a) {
    return run_pipeline(std::span<const FrameRecord>(records), std::move(predictor), a.config,
                        a.images.empty() ? ImageSource{} : image_source(a.images));
}

int cmd_run(RunArgs a) {
    if (!a.count_max) throw ConfigError("--count-max is required");
    if (!a.images.empty() && (!a.act_on || !a.act_off)) {
        throw ConfigError("--act-on and --act-off are required with --images");
    }
    a.config.control.count_max = *a.count_max;
    a.config.control.act_on = a.act_on.value_or(0.0);
    a.config.control.act_off = a.act_off.value_or(0.0);
    a.config.control.window = a.config.window;
    a.config.validate();

    const auto records = load_detections(a.detections);
    RunResult result;
    if (!a.truth_predictor.empty()) {
        const auto truth = load_truth(a.truth_predictor);
        result = run_with(records, TruthPredictor(truth), a);
    } else {
        if (a.mx.empty() || a.my.empty()) throw ConfigError("run needs --mx and --my (or --truth-predictor)");
        const auto mx = load_model(a.mx);
        const auto my = load_model(a.my);
        result = run_with(records, RegressionPredictor(mx, my), a);
    }

    const fs::path dir(a.out);
    ensure_dir(dir);
    {
        auto out = open_out(dir, "counts.csv");
        write_counts_csv(out, result.frames);
    }
    if (!a.images.empty()) {
        auto out = open_out(dir, "activity.csv");
        write_activity_csv(out, result.frames);
    }
    {
        auto out = open_out(dir, "decisions.csv");
        write_decisions_csv(out, result.frames);
    }
    {
        auto out = open_out(dir, "timing.txt");
        out << format_timing_report(result.timing);
    }
    long long total = 0;
    for (const auto& f : result.frames) total += f.raw_count;
    std::cout << "frames " << result.frames.size() << " crossings " << total << '\n'
              << format_timing_report(result.timing);
    return 0;
}

struct ActivityArgs {
    std::string images;
    std::string pyramids;
    std::string detections;
    int window = kDefaultWindow;
    int stages = 5;
    std::string out;
};

int cmd_activity(const ActivityArgs& a) {
    if (a.images.empty() == a.pyramids.empty()) throw ConfigError("give exactly one of --images or --pyramids");
    std::vector<std::pair<std::int64_t, double>> sigmas;
    if (!a.pyramids.empty()) {
        for (const auto& [frame, path] : numbered_files(a.pyramids, {".pyr", ".txt"})) {
            std::ifstream in(path);
            if (!in) throw IoError("cannot open " + path.string());
            const auto pyr = read_pyramid(in);
            pyr.validate();
            sigmas.emplace_back(frame, activity_index(pyr));
        }
    } else {
        const ReferenceExtractor extractor{a.stages};
        if (!a.detections.empty()) {
            const auto records = load_detections(a.detections);
            const auto source = image_source(a.images);
            std::optional<RipplePair> pair;
            double last = 0.0;
            for (const auto& rec : records) {
                pair = resolve_ripple_pair(rec, pair);
                if (pair && pair->usable()) last = activity_index(extractor.extract(crop_region(*source(rec.frame), *pair)));
                sigmas.emplace_back(rec.frame, last);
            }
        } else {
            for (const auto& [frame, path] : numbered_files(a.images, {".pgm", ".ppm"})) {
                sigmas.emplace_back(frame, activity_index(extractor.extract(read_pnm(path))));
            }
        }
    }
    if (sigmas.empty()) throw EmptyInputError("no frames found");

    std::vector<double> values;
    for (const auto& s : sigmas) values.push_back(s.second);
    const auto windowed_values = activity_series(values, a.window);
    ensure_dir(a.out);
    auto out = open_out(a.out, "activity.csv");
    out.precision(17);
    out << "frame,sigma,windowed_sigma\n";
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        out << sigmas[i].first << ',' << sigmas[i].second << ',' << windowed_values[i] << '\n';
    }
    std::cout << "frames " << sigmas.size() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feeding-control pipeline over nutriment/ripple detection streams"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Generate a synthetic detection stream with ground truth");
    s->add_option("--frames", synth.config.frames, "Number of frames")->capture_default_str();
    s->add_option("--density", synth.config.density, "Pellets thrown per frame")->capture_default_str();
    s->add_option("--initial", synth.config.initial_nutriments, "Pellets already in flight at frame 0");
    s->add_option("--speed", synth.config.speed, "Time scale of pellet motion")->capture_default_str();
    s->add_option("--drift-x", synth.config.drift.x, "Camera drift per frame (x)");
    s->add_option("--drift-y", synth.config.drift.y, "Camera drift per frame (y)");
    s->add_option("--sway", synth.config.sway, "Camera sway amplitude");
    s->add_option("--rho", synth.config.rho, "Passed-line offset divisor")->capture_default_str();
    s->add_option("--scale", synth.scale, "Scale every length of the scene")->capture_default_str();
    s->add_option("--seed", synth.config.seed, "Random seed")->required();
    s->add_flag("--images", synth.images, "Also render gray PGM frames");
    s->add_option("--out", synth.out, "Output directory")->required();

    TrainArgs train_args;
    auto* t = app.add_subcommand("train", "Train the mu_x / mu_y regressors");
    t->add_option("--detections", train_args.detections, "Detection stream")->required();
    t->add_option("--truth", train_args.truth, "Use annotated next positions instead of association");
    t->add_option("--spec", train_args.spec, "Model variant R1..R6")->capture_default_str();
    t->add_option("--iterations", train_args.config.iterations, "Batch steps")->capture_default_str();
    t->add_option("--lr", train_args.config.learning_rate, "Learning rate")->capture_default_str();
    t->add_option("--lr-decay", train_args.config.lr_decay, "Step size decays as lr / (1 + d * t / T)")
        ->capture_default_str();
    t->add_option("--batch", train_args.config.batch_size, "Batch size")->capture_default_str();
    t->add_option("--seed", train_args.config.seed, "Initialization and shuffling seed");
    t->add_option("--gate", train_args.gate, "Association gate (normalized units)")->capture_default_str();
    t->add_flag("--paper-defaults", train_args.paper_defaults, "1e6 iterations at learning rate 1e-7");
    t->add_option("--out", train_args.out, "Output directory for mx.model / my.model")->required();

    EvalArgs eval;
    auto* e = app.add_subcommand("eval", "Next-frame error statistics per model");
    e->add_option("--detections", eval.detections, "Detection stream")->required();
    e->add_option("--truth", eval.truth, "Annotation sidecar");
    e->add_option("--model", eval.models, "NAME=DIR holding mx.model and my.model (repeatable)");
    e->add_option("--mx", eval.mx, "mu_x model file");
    e->add_option("--my", eval.my, "mu_y model file");
    e->add_option("--eval-formula", eval.formula, "literal|euclidean")->capture_default_str();
    e->add_option("--out", eval.out, "Write eval.csv here");

    RunArgs run;
    auto* r = app.add_subcommand("run", "Run the per-frame pipeline");
    r->add_option("--detections", run.detections, "Detection stream")->required();
    r->add_option("--mx", run.mx, "mu_x model file");
    r->add_option("--my", run.my, "mu_y model file");
    r->add_option("--truth-predictor", run.truth_predictor, "Replay annotated next positions instead of models");
    r->add_option("--images", run.images, "Directory of frame images named by frame index");
    r->add_option("--rho", run.config.rho, "Passed-line offset divisor")->capture_default_str();
    r->add_option("--window", run.config.window, "Trailing window (frames)")->capture_default_str();
    r->add_option("--act-on", run.act_on, "Activity level that enables feeding");
    r->add_option("--act-off", run.act_off, "Activity level that disables feeding");
    r->add_option("--count-max", run.count_max, "Windowed count that forces feeding off");
    bool reverse = false;
    r->add_flag("--count-upward", reverse, "Count ripple-side to machine-side crossings instead");
    r->add_option("--out", run.out, "Output directory")->required();

    ActivityArgs act;
    auto* a = app.add_subcommand("activity", "Ripple activity index per frame");
    a->add_option("--images", act.images, "Directory of frame images");
    a->add_option("--pyramids", act.pyramids, "Directory of external feature pyramids (<frame>.pyr)");
    a->add_option("--detections", act.detections, "Detection stream used to crop the ripple region");
    a->add_option("--window", act.window, "Trailing window (frames)")->capture_default_str();
    a->add_option("--stages", act.stages, "Reference extractor stages")->capture_default_str();
    a->add_option("--out", act.out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (s->parsed()) return cmd_synth(synth);
        if (t->parsed()) return cmd_train(train_args);
        if (e->parsed()) return cmd_eval(eval);
        if (r->parsed()) {
            if (reverse) run.config.direction = CrossingDirection::RippleToMachine;
            return cmd_run(run);
        }
        if (a->parsed()) return cmd_activity(act);
    } catch (const feedctl::Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 3;
    }
    return 1;
}
