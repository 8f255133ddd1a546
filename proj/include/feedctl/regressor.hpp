#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "feedctl/errors.hpp"
#include "feedctl/geometry.hpp"
#include "feedctl/rng.hpp"
#include "feedctl/stats.hpp"
#include "feedctl/types.hpp"

namespace feedctl {

// Fully connected stack: input_dim -> hidden_sizes... -> output_dim, ReLU on
// hidden layers and identity on the output.
struct LayerSpec {
    int input_dim = 1;
    std::vector<int> hidden_sizes;
    int output_dim = 1;

    void validate() const {
        if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
        if (output_dim != 1) throw ConfigError("output_dim must be 1");
        if (hidden_sizes.empty()) throw ConfigError("hidden_sizes must not be empty");
        for (int h : hidden_sizes) {
            if (h < 1) throw ConfigError("hidden layer sizes must be >= 1");
        }
    }

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Hidden layer widths of the six evaluated model variants R1..R6.
inline std::optional<std::vector<int>> model_family(std::string_view name) {
    if (name == "R1") return std::vector<int>{100, 80, 60, 40, 40, 20};
    if (name == "R2") return std::vector<int>{200, 160, 120, 80, 80, 40};
    if (name == "R3") return std::vector<int>{100, 90, 80, 70, 60, 50, 40, 30, 20, 10};
    if (name == "R4") return std::vector<int>{200, 180, 160, 140, 120, 100, 80, 60, 40, 20};
    if (name == "R5") return std::vector<int>{100, 40};
    if (name == "R6") return std::vector<int>{200, 80};
    return std::nullopt;
}

inline LayerSpec family_spec(std::string_view name, int input_dim) {
    auto sizes = model_family(name);
    if (!sizes) throw ConfigError("unknown model variant '" + std::string(name) + "'");
    return LayerSpec{input_dim, std::move(*sizes), 1};
}

// weights is fan_in x fan_out; a layer computes weights^T * a + bias.
struct DenseLayer {
    Eigen::MatrixXd weights;
    Eigen::VectorXd bias;
};

class RegressionModel {
public:
    RegressionModel() = default;

    RegressionModel(LayerSpec spec, std::vector<DenseLayer> layers)
        : spec_(std::move(spec)), layers_(std::move(layers)) {
        spec_.validate();
        check_shapes();
    }

    const LayerSpec& spec() const { return spec_; }
    int input_dim() const { return spec_.input_dim; }
    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }

    double forward(std::span<const double> input) const {
        if (static_cast<int>(input.size()) != spec_.input_dim) {
            throw ShapeError("model expects " + std::to_string(spec_.input_dim) + " inputs, got " +
                             std::to_string(input.size()));
        }
        Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(input.data(), input.size());
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            Eigen::VectorXd z = layers_[l].weights.transpose() * a + layers_[l].bias;
            a = (l + 1 < layers_.size()) ? z.cwiseMax(0.0) : z;
        }
        return a(0);
    }

    double forward(std::initializer_list<double> input) const {
        return forward(std::span<const double>(input.begin(), input.size()));
    }

    // Column-per-sample batch forward.
    Eigen::RowVectorXd forward_batch(const Eigen::MatrixXd& inputs) const {
        if (inputs.rows() != spec_.input_dim) throw ShapeError("batch input has wrong row count");
        Eigen::MatrixXd a = inputs;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            Eigen::MatrixXd z = (layers_[l].weights.transpose() * a).colwise() + layers_[l].bias;
            a = (l + 1 < layers_.size()) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
        }
        return a.row(0);
    }

    bool all_finite() const {
        for (const auto& layer : layers_) {
            if (!layer.weights.allFinite() || !layer.bias.allFinite()) return false;
        }
        return true;
    }

private:
    void check_shapes() const {
        if (layers_.size() != spec_.hidden_sizes.size() + 1) throw ShapeError("layer count mismatch");
        int fan_in = spec_.input_dim;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const int fan_out = l < spec_.hidden_sizes.size() ? spec_.hidden_sizes[l] : spec_.output_dim;
            if (layers_[l].weights.rows() != fan_in || layers_[l].weights.cols() != fan_out ||
                layers_[l].bias.size() != fan_out) {
                throw ShapeError("layer " + std::to_string(l) + " has inconsistent shape");
            }
            fan_in = fan_out;
        }
    }

    LayerSpec spec_;
    std::vector<DenseLayer> layers_;
};

// Uniform(+-sqrt(6 / fan_in)) weights, zero biases.
inline RegressionModel new_model(const LayerSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    std::vector<DenseLayer> layers;
    int fan_in = spec.input_dim;
    const std::size_t count = spec.hidden_sizes.size() + 1;
    for (std::size_t l = 0; l < count; ++l) {
        const int fan_out = l < spec.hidden_sizes.size() ? spec.hidden_sizes[l] : spec.output_dim;
        const double limit = std::sqrt(6.0 / fan_in);
        DenseLayer layer{Eigen::MatrixXd(fan_in, fan_out), Eigen::VectorXd::Zero(fan_out)};
        for (int r = 0; r < fan_in; ++r) {
            for (int c = 0; c < fan_out; ++c) layer.weights(r, c) = rng.uniform(-limit, limit);
        }
        layers.push_back(std::move(layer));
        fan_in = fan_out;
    }
    return RegressionModel(spec, std::move(layers));
}

// Inputs stored column-per-sample.
struct Dataset {
    Eigen::MatrixXd inputs;
    Eigen::RowVectorXd targets;

    Dataset() = default;
    explicit Dataset(int input_dim) : inputs(input_dim, 0), targets(0) {}

    int input_dim() const { return static_cast<int>(inputs.rows()); }
    std::size_t size() const { return static_cast<std::size_t>(targets.size()); }
    bool empty() const { return size() == 0; }

    void add(std::span<const double> input, double target) {
        if (static_cast<Eigen::Index>(input.size()) != inputs.rows()) {
            throw ShapeError("sample has wrong input dimension");
        }
        const Eigen::Index n = inputs.cols();
        inputs.conservativeResize(Eigen::NoChange, n + 1);
        targets.conservativeResize(n + 1);
        for (Eigen::Index r = 0; r < inputs.rows(); ++r) inputs(r, n) = input[r];
        targets(n) = target;
    }

    void add(std::initializer_list<double> input, double target) {
        add(std::span<const double>(input.begin(), input.size()), target);
    }
};

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> bias;
};

inline double mse(const RegressionModel& model, const Eigen::MatrixXd& inputs,
                  const Eigen::RowVectorXd& targets) {
    if (targets.size() == 0) throw EmptyInputError("empty batch");
    const Eigen::RowVectorXd err = model.forward_batch(inputs) - targets;
    return err.squaredNorm() / static_cast<double>(targets.size());
}

inline double mse(const RegressionModel& model, const Dataset& data) {
    return mse(model, data.inputs, data.targets);
}

// Mean squared error over the batch and its gradient by backpropagation.
inline double loss_and_gradient(const RegressionModel& model, const Eigen::MatrixXd& inputs,
                                const Eigen::RowVectorXd& targets, Gradients& grad) {
    const auto& layers = model.layers();
    const std::size_t L = layers.size();
    const double batch = static_cast<double>(targets.size());
    if (inputs.rows() != model.input_dim()) throw ShapeError("batch input has wrong row count");
    if (inputs.cols() != targets.size() || targets.size() == 0) throw ShapeError("batch size mismatch");

    std::vector<Eigen::MatrixXd> acts;  // acts[l] is the input to layer l
    std::vector<Eigen::MatrixXd> pre;
    acts.reserve(L + 1);
    pre.reserve(L);
    acts.push_back(inputs);
    for (std::size_t l = 0; l < L; ++l) {
        pre.push_back((layers[l].weights.transpose() * acts.back()).colwise() + layers[l].bias);
        acts.push_back(l + 1 < L ? Eigen::MatrixXd(pre.back().cwiseMax(0.0)) : pre.back());
    }
    const Eigen::RowVectorXd err = acts.back().row(0) - targets;
    const double loss = err.squaredNorm() / batch;

    grad.weights.resize(L);
    grad.bias.resize(L);
    Eigen::MatrixXd delta = (2.0 / batch) * err;
    for (std::size_t l = L; l-- > 0;) {
        if (l + 1 < L) delta = delta.cwiseProduct((pre[l].array() > 0.0).cast<double>().matrix());
        grad.weights[l] = acts[l] * delta.transpose();
        grad.bias[l] = delta.rowwise().sum();
        if (l > 0) delta = layers[l].weights * delta;
    }
    return loss;
}

// Long-run budget: 1e6 iterations at learning rate 1e-7.
struct TrainConfig {
    long long iterations = 1'000'000;
    double learning_rate = 1e-7;
    int batch_size = 32;
    std::uint64_t seed = 0;
    long long log_every = 0;  // 0: iterations / 100
    // Step size at iteration t is learning_rate / (1 + lr_decay * t / iterations).
    double lr_decay = 0.0;

    static TrainConfig paper_defaults() { return TrainConfig{}; }

    void validate() const {
        if (iterations < 1) throw ConfigError("iterations must be >= 1");
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
            throw ConfigError("learning_rate must be finite and > 0");
        }
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
        if (log_every < 0) throw ConfigError("log_every must be >= 0");
        if (!(lr_decay >= 0.0) || !std::isfinite(lr_decay)) throw ConfigError("lr_decay must be finite and >= 0");
    }
};

struct LossPoint {
    long long iteration = 0;
    double loss = 0.0;  // full-dataset MSE after this iteration
};

struct TrainResult {
    RegressionModel model;
    std::vector<LossPoint> curve;
    double initial_loss = 0.0;  // full-dataset MSE before training
    double final_loss = 0.0;    // full-dataset MSE after training
};

// Mini-batch gradient descent on MSE. One iteration is one batch step; the
// sample order is reshuffled at every epoch from config.seed.
inline TrainResult train(RegressionModel model, const Dataset& data, const TrainConfig& config) {
    config.validate();
    if (data.empty()) throw EmptyDatasetError("training set is empty");
    if (data.input_dim() != model.input_dim()) throw ShapeError("dataset input dimension mismatch");

    const auto n = static_cast<Eigen::Index>(data.size());
    const Eigen::Index batch = std::min<Eigen::Index>(config.batch_size, n);
    const long long log_every = config.log_every > 0 ? config.log_every
                                                     : std::max<long long>(1, config.iterations / 100);

    TrainResult result;
    result.initial_loss = mse(model, data);

    Rng rng(config.seed);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Eigen::Index cursor = n;

    Eigen::MatrixXd x(data.input_dim(), batch);
    Eigen::RowVectorXd t(batch);
    Gradients grad;
    auto& layers = model.layers();

    for (long long it = 1; it <= config.iterations; ++it) {
        if (cursor + batch > n) {
            rng.shuffle(order);
            cursor = 0;
        }
        for (Eigen::Index b = 0; b < batch; ++b) {
            const Eigen::Index idx = order[static_cast<std::size_t>(cursor + b)];
            x.col(b) = data.inputs.col(idx);
            t(b) = data.targets(idx);
        }
        cursor += batch;

        const double loss = loss_and_gradient(model, x, t, grad);
        if (!std::isfinite(loss)) throw DivergenceError(it, "training loss is not finite");

        const double step = config.learning_rate /
                            (1.0 + config.lr_decay * static_cast<double>(it) / static_cast<double>(config.iterations));
        for (std::size_t l = 0; l < layers.size(); ++l) {
            layers[l].weights -= step * grad.weights[l];
            layers[l].bias -= step * grad.bias[l];
        }

        if (it % log_every == 0 || it == config.iterations) {
            const double full = mse(model, data);
            if (!std::isfinite(full)) throw DivergenceError(it, "training loss is not finite");
            result.curve.push_back({it, full});
        }
    }
    if (!model.all_finite()) throw DivergenceError(config.iterations, "parameters are not finite");
    result.final_loss = mse(model, data);
    if (!std::isfinite(result.final_loss)) throw DivergenceError(config.iterations, "final loss is not finite");
    result.model = std::move(model);
    return result;
}

// Next-frame normalized positions: x' = mu_x(x), y' = mu_y(x, y).
inline std::vector<Point> predict_next(const RegressionModel& mx, const RegressionModel& my,
                                       std::span<const Point> kappa) {
    if (mx.input_dim() != 1) throw ShapeError("mu_x must take one input");
    if (my.input_dim() != 2) throw ShapeError("mu_y must take two inputs");
    std::vector<Point> out;
    out.reserve(kappa.size());
    for (const Point& k : kappa) {
        const double xs[1] = {k.x};
        const double xys[2] = {k.x, k.y};
        out.push_back({mx.forward(xs), my.forward(xys)});
    }
    return out;
}

inline std::vector<Point> predict_next(const RegressionModel& mx, const RegressionModel& my,
                                       const NormalizedFrame& nf) {
    return predict_next(mx, my, std::span<const Point>(nf.kappa));
}

enum class EvalFormula {
    Euclidean,  // |predicted - truth|
    Literal,    // | |t.x - t.y| - |p.x - p.y| |, the coordinate-difference form
};

inline std::vector<double> error_distances(std::span<const Point> predicted, std::span<const Point> truth,
                                           EvalFormula formula = EvalFormula::Euclidean) {
    if (predicted.size() != truth.size()) throw ShapeError("prediction and truth lists differ in length");
    std::vector<double> d;
    d.reserve(predicted.size());
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (formula == EvalFormula::Euclidean) {
            d.push_back(distance(predicted[i], truth[i]));
        } else {
            d.push_back(std::abs(std::abs(truth[i].x - truth[i].y) - std::abs(predicted[i].x - predicted[i].y)));
        }
    }
    return d;
}

inline SampleSummary eval_error(std::span<const Point> predicted, std::span<const Point> truth,
                                EvalFormula formula = EvalFormula::Euclidean) {
    if (predicted.empty() && truth.empty()) throw EmptyInputError("no annotated predictions");
    const auto d = error_distances(predicted, truth, formula);
    return summarize(d);
}

// Index of the smallest mean error; the earliest index wins ties.
inline std::size_t select_best(std::span<const SampleSummary> results) {
    if (results.empty()) throw EmptyInputError("no models to select from");
    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i) {
        if (results[i].mean < results[best].mean) best = i;
    }
    return best;
}

// Model file: a textual header followed by each layer's row-major weights and
// its biases, all with 17 significant digits.
//
//   feedctl-mlp 1
//   input_dim 1
//   hidden_sizes 6 100 80 60 40 40 20
//   output_dim 1
//   activation relu identity
//   layer 0 1 100
//   <fan_in lines of fan_out weights>
//   <one line of fan_out biases>
//   ...
inline constexpr int kModelFormatVersion = 1;

inline void write_model(std::ostream& out, const RegressionModel& model) {
    const auto& spec = model.spec();
    std::ostringstream s;
    s.precision(17);
    s << "feedctl-mlp " << kModelFormatVersion << '\n';
    s << "input_dim " << spec.input_dim << '\n';
    s << "hidden_sizes " << spec.hidden_sizes.size();
    for (int h : spec.hidden_sizes) s << ' ' << h;
    s << '\n' << "output_dim " << spec.output_dim << '\n';
    s << "activation relu identity\n";
    for (std::size_t l = 0; l < model.layers().size(); ++l) {
        const auto& layer = model.layers()[l];
        s << "layer " << l << ' ' << layer.weights.rows() << ' ' << layer.weights.cols() << '\n';
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) s << (c ? " " : "") << layer.weights(r, c);
            s << '\n';
        }
        for (Eigen::Index c = 0; c < layer.bias.size(); ++c) s << (c ? " " : "") << layer.bias(c);
        s << '\n';
    }
    out << s.str();
    if (!out) throw IoError("failed to write model");
}

inline RegressionModel read_model(std::istream& in) {
    auto expect = [&](const char* key) {
        std::string word;
        if (!(in >> word) || word != key) throw ParseError(0, std::string("model file: expected '") + key + "'");
    };
    auto read_int = [&]() {
        long long v = 0;
        if (!(in >> v)) throw ParseError(0, "model file: expected an integer");
        return v;
    };
    expect("feedctl-mlp");
    if (read_int() != kModelFormatVersion) throw ParseError(0, "model file: unsupported format version");
    LayerSpec spec;
    expect("input_dim");
    spec.input_dim = static_cast<int>(read_int());
    expect("hidden_sizes");
    const auto count = read_int();
    if (count < 1 || count > 1024) throw ParseError(0, "model file: bad hidden layer count");
    for (long long i = 0; i < count; ++i) spec.hidden_sizes.push_back(static_cast<int>(read_int()));
    expect("output_dim");
    spec.output_dim = static_cast<int>(read_int());
    expect("activation");
    expect("relu");
    expect("identity");
    spec.validate();

    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l <= spec.hidden_sizes.size(); ++l) {
        expect("layer");
        if (read_int() != static_cast<long long>(l)) throw ParseError(0, "model file: layers out of order");
        const auto rows = read_int();
        const auto cols = read_int();
        if (rows < 1 || cols < 1) throw ShapeError("model file: bad layer shape");
        DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(cols)};
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                if (!(in >> layer.weights(r, c))) throw ParseError(0, "model file: truncated weights");
            }
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!(in >> layer.bias(c))) throw ParseError(0, "model file: truncated biases");
        }
        layers.push_back(std::move(layer));
    }
    RegressionModel model(spec, std::move(layers));
    if (!model.all_finite()) throw ValidationError("model file: non-finite parameter");
    return model;
}

}  // namespace feedctl
