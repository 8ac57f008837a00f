#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adlearn/error.hpp"
#include "adlearn/rng.hpp"

namespace adl::nn {

enum class Activation { Relu, Linear };
enum class LayerKind { Dense, Conv1d };

// Shape of one layer. Conv1d input is channel-major (x[c * steps + t]),
// stride 1, no padding; its output is filter-major (y[f * out_steps + s]).
struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    Activation activation = Activation::Linear;

    // dense
    int in_dim = 0;
    int out_dim = 0;

    // conv1d
    int channels = 0;
    int steps = 0;
    int filters = 0;
    int kernel = 0;

    static LayerSpec dense(int in, int out, Activation act);
    static LayerSpec conv1d(int channels, int steps, int filters, int kernel, Activation act);

    int input_dim() const;
    int output_dim() const;
    size_t weight_count() const;
    size_t bias_count() const;
    void validate() const;
};

struct ParamLayout {
    size_t w_off = 0, w_len = 0;
    size_t b_off = 0, b_len = 0;
};

// Every trainable scalar of a network in one flat array, with per-layer views.
struct ParameterSet {
    std::vector<double> values;
    std::vector<ParamLayout> layout;

    size_t total_count() const { return values.size(); }
    std::span<double> weights(size_t layer);
    std::span<const double> weights(size_t layer) const;
    std::span<double> biases(size_t layer);
    std::span<const double> biases(size_t layer) const;
    bool all_finite() const;
};

ParameterSet make_params(std::span<const LayerSpec> specs);

// Symmetric uniform init in +-sqrt(6 / (fan_in + fan_out)).
void init_params(ParameterSet& params, std::span<const LayerSpec> specs, Rng& rng);

// One labelled point: non-owning views into dataset storage.
struct Sample {
    std::span<const double> x;
    std::span<const double> y;
};

double mse_loss(std::span<const double> y_hat, std::span<const double> y);

void layer_forward(const LayerSpec& spec, std::span<const double> w, std::span<const double> b,
                   std::span<const double> x, std::span<double> y);

// Backprop through one layer. `y` is the stored post-activation output and
// `dy` the loss gradient w.r.t. it (clobbered). Parameter gradients are
// accumulated into dw/db; dx receives the gradient w.r.t. the layer input.
void layer_backward(const LayerSpec& spec, std::span<const double> w,
                    std::span<const double> x, std::span<const double> y,
                    std::span<double> dy, std::span<double> dw, std::span<double> db,
                    std::span<double> dx);

// Forward pass through a sequential stack.
std::vector<double> forward(std::span<const LayerSpec> specs, const ParameterSet& params,
                            std::span<const double> x);

// Anything train() can optimize: flat parameters + prediction + gradient of
// the mean minibatch MSE loss.
class Model {
public:
    virtual ~Model() = default;
    virtual std::span<double> param_values() = 0;
    virtual std::span<const double> param_values() const = 0;
    virtual std::vector<double> predict(std::span<const double> x) const = 0;
    // Writes d(mean loss)/d(param) into grad (same length as param_values)
    // and returns the mean minibatch loss.
    virtual double gradient(std::span<const Sample> minibatch, std::span<double> grad) const = 0;
};

double dataset_loss(const Model& model, std::span<const Sample> points);

// Plain sequential network.
class Network final : public Model {
public:
    Network(std::vector<LayerSpec> specs, uint64_t seed);

    const std::vector<LayerSpec>& specs() const { return specs_; }
    ParameterSet& params() { return params_; }
    const ParameterSet& params() const { return params_; }

    std::span<double> param_values() override { return params_.values; }
    std::span<const double> param_values() const override { return params_.values; }
    std::vector<double> predict(std::span<const double> x) const override;
    double gradient(std::span<const Sample> minibatch, std::span<double> grad) const override;

private:
    std::vector<LayerSpec> specs_;
    ParameterSet params_;
};

// Gradient of the mean minibatch loss for a sequential stack.
std::vector<double> backward(std::span<const LayerSpec> specs, const ParameterSet& params,
                             std::span<const Sample> minibatch);

struct TrainConfig {
    int max_epochs = 30;
    int patience = 10;
    double learning_rate = 1e-3;
    int minibatch_size = 16;
    uint64_t seed = 0;
    void validate() const;
};

struct LossCurve {
    std::vector<double> train;
    std::vector<double> val;
};

// Minibatch SGD with early stopping. Stops after max_epochs or when the
// validation loss has not improved for `patience` epochs, and restores the
// weights of the best-validation epoch.
LossCurve train(Model& model, std::span<const Sample> train_set, std::span<const Sample> val_set,
                const TrainConfig& cfg);

} // namespace adl::nn
