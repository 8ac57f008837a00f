#include "adlearn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace adl::nn {

LayerSpec LayerSpec::dense(int in, int out, Activation act) {
    LayerSpec s;
    s.kind = LayerKind::Dense;
    s.activation = act;
    s.in_dim = in;
    s.out_dim = out;
    s.validate();
    return s;
}

LayerSpec LayerSpec::conv1d(int channels, int steps, int filters, int kernel, Activation act) {
    LayerSpec s;
    s.kind = LayerKind::Conv1d;
    s.activation = act;
    s.channels = channels;
    s.steps = steps;
    s.filters = filters;
    s.kernel = kernel;
    s.validate();
    return s;
}

int LayerSpec::input_dim() const {
    return kind == LayerKind::Dense ? in_dim : channels * steps;
}

int LayerSpec::output_dim() const {
    return kind == LayerKind::Dense ? out_dim : filters * (steps - kernel + 1);
}

size_t LayerSpec::weight_count() const {
    return kind == LayerKind::Dense ? size_t(in_dim) * size_t(out_dim)
                                    : size_t(filters) * size_t(kernel) * size_t(channels);
}

size_t LayerSpec::bias_count() const {
    return kind == LayerKind::Dense ? size_t(out_dim) : size_t(filters);
}

void LayerSpec::validate() const {
    if (kind == LayerKind::Dense) {
        if (in_dim < 1 || out_dim < 1)
            throw Error(ErrorCode::InvalidArgument, "dense layer dims must be >= 1");
    } else {
        if (channels < 1 || steps < 1 || filters < 1)
            throw Error(ErrorCode::InvalidArgument, "conv1d counts must be >= 1");
        if (kernel < 1 || kernel > steps)
            throw Error(ErrorCode::InvalidArgument, "conv1d kernel must be in [1, steps]");
    }
}

std::span<double> ParameterSet::weights(size_t layer) {
    const ParamLayout& l = layout[layer];
    return {values.data() + l.w_off, l.w_len};
}

std::span<const double> ParameterSet::weights(size_t layer) const {
    const ParamLayout& l = layout[layer];
    return {values.data() + l.w_off, l.w_len};
}

std::span<double> ParameterSet::biases(size_t layer) {
    const ParamLayout& l = layout[layer];
    return {values.data() + l.b_off, l.b_len};
}

std::span<const double> ParameterSet::biases(size_t layer) const {
    const ParamLayout& l = layout[layer];
    return {values.data() + l.b_off, l.b_len};
}

bool ParameterSet::all_finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

ParameterSet make_params(std::span<const LayerSpec> specs) {
    ParameterSet p;
    size_t total = 0;
    for (const LayerSpec& s : specs) {
        s.validate();
        ParamLayout l;
        l.w_off = total;
        l.w_len = s.weight_count();
        total += l.w_len;
        l.b_off = total;
        l.b_len = s.bias_count();
        total += l.b_len;
        p.layout.push_back(l);
    }
    p.values.assign(total, 0.0);
    return p;
}

void init_params(ParameterSet& params, std::span<const LayerSpec> specs, Rng& rng) {
    for (size_t i = 0; i < specs.size(); ++i) {
        const LayerSpec& s = specs[i];
        double fan_in, fan_out;
        if (s.kind == LayerKind::Dense) {
            fan_in = s.in_dim;
            fan_out = s.out_dim;
        } else {
            fan_in = double(s.kernel) * s.channels;
            fan_out = double(s.kernel) * s.filters;
        }
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& w : params.weights(i)) w = rng.uniform(-bound, bound);
        for (double& b : params.biases(i)) b = 0.0;
    }
}

double mse_loss(std::span<const double> y_hat, std::span<const double> y) {
    if (y_hat.size() != y.size())
        throw Error(ErrorCode::InvalidArgument, "mse_loss: length mismatch ("
                    + std::to_string(y_hat.size()) + " vs " + std::to_string(y.size()) + ")");
    if (y.empty())
        throw Error(ErrorCode::InvalidArgument, "mse_loss: empty vectors");
    double acc = 0.0;
    for (size_t k = 0; k < y.size(); ++k) {
        const double d = y_hat[k] - y[k];
        acc += d * d;
    }
    return acc / double(y.size());
}

void layer_forward(const LayerSpec& spec, std::span<const double> w, std::span<const double> b,
                   std::span<const double> x, std::span<double> y) {
    if (x.size() != size_t(spec.input_dim()))
        throw Error(ErrorCode::InvalidArgument, "layer_forward: input length "
                    + std::to_string(x.size()) + " does not match layer input dim "
                    + std::to_string(spec.input_dim()));
    if (spec.kind == LayerKind::Dense) {
        const int I = spec.in_dim, O = spec.out_dim;
        for (int o = 0; o < O; ++o) {
            double acc = b[o];
            const double* wr = w.data() + size_t(o) * I;
            for (int i = 0; i < I; ++i) acc += wr[i] * x[i];
            y[o] = acc;
        }
    } else {
        const int C = spec.channels, T = spec.steps, F = spec.filters, K = spec.kernel;
        const int S = T - K + 1;
        for (int f = 0; f < F; ++f) {
            for (int s = 0; s < S; ++s) {
                double acc = b[f];
                for (int k = 0; k < K; ++k)
                    for (int c = 0; c < C; ++c)
                        acc += w[(size_t(f) * K + k) * C + c] * x[size_t(c) * T + s + k];
                y[size_t(f) * S + s] = acc;
            }
        }
    }
    if (spec.activation == Activation::Relu)
        for (double& v : y)
            if (v < 0.0) v = 0.0;
}

void layer_backward(const LayerSpec& spec, std::span<const double> w,
                    std::span<const double> x, std::span<const double> y,
                    std::span<double> dy, std::span<double> dw, std::span<double> db,
                    std::span<double> dx) {
    // relu: y > 0 iff the pre-activation was > 0
    if (spec.activation == Activation::Relu)
        for (size_t i = 0; i < dy.size(); ++i)
            if (y[i] <= 0.0) dy[i] = 0.0;

    if (spec.kind == LayerKind::Dense) {
        const int I = spec.in_dim, O = spec.out_dim;
        std::fill(dx.begin(), dx.end(), 0.0);
        for (int o = 0; o < O; ++o) {
            const double g = dy[o];
            db[o] += g;
            double* dwr = dw.data() + size_t(o) * I;
            const double* wr = w.data() + size_t(o) * I;
            for (int i = 0; i < I; ++i) {
                dwr[i] += g * x[i];
                dx[i] += wr[i] * g;
            }
        }
    } else {
        const int C = spec.channels, T = spec.steps, F = spec.filters, K = spec.kernel;
        const int S = T - K + 1;
        std::fill(dx.begin(), dx.end(), 0.0);
        for (int f = 0; f < F; ++f) {
            for (int s = 0; s < S; ++s) {
                const double g = dy[size_t(f) * S + s];
                db[f] += g;
                for (int k = 0; k < K; ++k) {
                    for (int c = 0; c < C; ++c) {
                        dw[(size_t(f) * K + k) * C + c] += g * x[size_t(c) * T + s + k];
                        dx[size_t(c) * T + s + k] += w[(size_t(f) * K + k) * C + c] * g;
                    }
                }
            }
        }
    }
}

namespace {

void check_stack(std::span<const LayerSpec> specs) {
    if (specs.empty())
        throw Error(ErrorCode::InvalidArgument, "empty layer stack");
    for (size_t i = 0; i + 1 < specs.size(); ++i)
        if (specs[i].output_dim() != specs[i + 1].input_dim())
            throw Error(ErrorCode::InvalidArgument, "layer " + std::to_string(i)
                        + " output dim does not feed layer " + std::to_string(i + 1));
}

// Forward pass that keeps every activation; acts[0] is the input copy.
std::vector<std::vector<double>> forward_trace(std::span<const LayerSpec> specs,
                                               const ParameterSet& params,
                                               std::span<const double> x) {
    std::vector<std::vector<double>> acts(specs.size() + 1);
    acts[0].assign(x.begin(), x.end());
    for (size_t i = 0; i < specs.size(); ++i) {
        acts[i + 1].resize(specs[i].output_dim());
        layer_forward(specs[i], params.weights(i), params.biases(i), acts[i], acts[i + 1]);
    }
    return acts;
}

// Backprop one sample's output gradient through the stack, accumulating
// parameter gradients into grad (flat, aligned with params.layout).
void backward_trace(std::span<const LayerSpec> specs, const ParameterSet& params,
                    const std::vector<std::vector<double>>& acts,
                    std::vector<double> dy, std::span<double> grad) {
    for (size_t i = specs.size(); i-- > 0;) {
        const ParamLayout& l = params.layout[i];
        std::vector<double> dx(specs[i].input_dim());
        layer_backward(specs[i], params.weights(i), acts[i], acts[i + 1], dy,
                       std::span<double>(grad.data() + l.w_off, l.w_len),
                       std::span<double>(grad.data() + l.b_off, l.b_len), dx);
        dy = std::move(dx);
    }
}

} // namespace

std::vector<double> forward(std::span<const LayerSpec> specs, const ParameterSet& params,
                            std::span<const double> x) {
    check_stack(specs);
    std::vector<double> cur(x.begin(), x.end());
    for (size_t i = 0; i < specs.size(); ++i) {
        std::vector<double> next(specs[i].output_dim());
        layer_forward(specs[i], params.weights(i), params.biases(i), cur, next);
        cur = std::move(next);
    }
    return cur;
}

double dataset_loss(const Model& model, std::span<const Sample> points) {
    if (points.empty())
        throw Error(ErrorCode::InvalidArgument, "dataset_loss: empty dataset");
    double acc = 0.0;
    for (const Sample& p : points)
        acc += mse_loss(model.predict(p.x), p.y);
    return acc / double(points.size());
}

Network::Network(std::vector<LayerSpec> specs, uint64_t seed) : specs_(std::move(specs)) {
    check_stack(specs_);
    params_ = make_params(specs_);
    Rng rng(seed);
    init_params(params_, specs_, rng);
}

std::vector<double> Network::predict(std::span<const double> x) const {
    return forward(specs_, params_, x);
}

double Network::gradient(std::span<const Sample> minibatch, std::span<double> grad) const {
    if (minibatch.empty())
        throw Error(ErrorCode::InvalidArgument, "gradient: empty minibatch");
    std::fill(grad.begin(), grad.end(), 0.0);
    const size_t out_dim = size_t(specs_.back().output_dim());
    double loss = 0.0;
    for (const Sample& sm : minibatch) {
        auto acts = forward_trace(specs_, params_, sm.x);
        const std::vector<double>& y_hat = acts.back();
        loss += mse_loss(y_hat, sm.y);
        std::vector<double> dy(out_dim);
        for (size_t k = 0; k < out_dim; ++k)
            dy[k] = 2.0 * (y_hat[k] - sm.y[k]) / double(out_dim);
        backward_trace(specs_, params_, acts, std::move(dy), grad);
    }
    const double scale = 1.0 / double(minibatch.size());
    for (double& g : grad) {
        g *= scale;
        if (!std::isfinite(g))
            throw Error(ErrorCode::Numeric, "gradient: non-finite value");
    }
    return loss * scale;
}

std::vector<double> backward(std::span<const LayerSpec> specs, const ParameterSet& params,
                             std::span<const Sample> minibatch) {
    Network net(std::vector<LayerSpec>(specs.begin(), specs.end()), 0);
    net.params() = params;
    std::vector<double> grad(params.total_count());
    net.gradient(minibatch, grad);
    return grad;
}

void TrainConfig::validate() const {
    if (max_epochs < 1)
        throw Error(ErrorCode::InvalidArgument, "max_epochs must be >= 1");
    if (patience < 1 || patience > max_epochs)
        throw Error(ErrorCode::InvalidArgument, "patience must be in [1, max_epochs]");
    if (!(learning_rate > 0.0))
        throw Error(ErrorCode::InvalidArgument, "learning_rate must be positive");
    if (minibatch_size < 1)
        throw Error(ErrorCode::InvalidArgument, "minibatch_size must be >= 1");
}

LossCurve train(Model& model, std::span<const Sample> train_set, std::span<const Sample> val_set,
                const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.empty())
        throw Error(ErrorCode::InvalidArgument, "train: empty training set");
    if (val_set.empty())
        throw Error(ErrorCode::InvalidArgument, "train: empty validation set");

    Rng rng(derive_seed(cfg.seed, 0x7261696eULL)); // shuffles
    std::span<double> params = model.param_values();
    std::vector<double> grad(params.size());
    std::vector<size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), size_t(0));
    std::vector<Sample> minibatch;

    LossCurve curve;
    std::vector<double> best_params(params.begin(), params.end());
    double best_val = std::numeric_limits<double>::infinity();
    int epochs_since_best = 0;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        for (size_t start = 0; start < order.size(); start += size_t(cfg.minibatch_size)) {
            const size_t end = std::min(order.size(), start + size_t(cfg.minibatch_size));
            minibatch.clear();
            for (size_t i = start; i < end; ++i) minibatch.push_back(train_set[order[i]]);
            model.gradient(minibatch, grad);
            for (size_t i = 0; i < params.size(); ++i)
                params[i] -= cfg.learning_rate * grad[i];
        }
        const double train_loss = dataset_loss(model, train_set);
        const double val_loss = dataset_loss(model, val_set);
        if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
            throw Error(ErrorCode::Numeric,
                        "train: loss diverged at epoch " + std::to_string(epoch + 1));
        curve.train.push_back(train_loss);
        curve.val.push_back(val_loss);

        if (val_loss < best_val) {
            best_val = val_loss;
            std::copy(params.begin(), params.end(), best_params.begin());
            epochs_since_best = 0;
        } else {
            if (++epochs_since_best >= cfg.patience) break;
        }
    }

    std::copy(best_params.begin(), best_params.end(), params.begin());
    return curve;
}

} // namespace adl::nn
