#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adlearn/nn.hpp"

namespace adl::net {

// Multi-encoder prediction model: one encoder per feature group (time stamp,
// building histogram, meteorological window), a joint encoder over their
// concatenated embeddings, and a dense prediction head.
struct EmbeddingNetConfig {
    int time_dim = 4;           // D_t
    int space_dim = 300;        // D_s
    int st_channels = 9;        // meteorological channels
    int st_steps = 24;          // hourly window length
    int hidden_width = 1000;
    int embedding_dim = 100;    // N_e, width of every embedding layer
    int conv_filters = 16;
    int conv_kernel = 3;
    int output_dim = 96;        // D_y

    int space_time_dim() const { return st_channels * st_steps; }   // D_st
    int feature_dim() const { return time_dim + space_dim + space_time_dim(); } // D_x
    void validate() const;
};

enum class EncoderId { Time, Space, SpaceTime, Joint, PredictedLabel, TrueLabel };

const char* encoder_id_name(EncoderId id);

class EmbeddingNetwork final : public nn::Model {
public:
    EmbeddingNetwork(const EmbeddingNetConfig& cfg, uint64_t seed);

    const EmbeddingNetConfig& config() const { return cfg_; }
    size_t param_count() const { return params_.total_count(); }

    std::span<double> param_values() override { return params_.values; }
    std::span<const double> param_values() const override { return params_.values; }

    // Full forward pass x -> predicted label (length D_y).
    std::vector<double> predict(std::span<const double> x) const override;

    double gradient(std::span<const nn::Sample> minibatch, std::span<double> grad) const override;

    // Embeds one point under the chosen encoder. PredictedLabel runs the full
    // model; TrueLabel returns the stored label and requires oracle_mode (and
    // a label) so label access is always an explicit decision of the caller.
    std::vector<double> encode(EncoderId id, std::span<const double> x,
                               std::span<const double> label = {},
                               bool oracle_mode = false) const;

    // Output length of encode() for the given encoder.
    int encode_dim(EncoderId id) const;

    void save(const std::string& path) const;
    static EmbeddingNetwork load(const std::string& path);

    const std::vector<nn::LayerSpec>& layer_specs() const { return specs_; }
    nn::ParameterSet& params() { return params_; }

private:
    // stage boundaries in specs_: [0,2) time, [2,4) space, [4,6) space-time,
    // [6,8) joint, [8,10) head
    static constexpr size_t kTime0 = 0, kSpace0 = 2, kSt0 = 4, kJoint0 = 6, kHead0 = 8;

    std::vector<double> run_stage(size_t first, std::span<const double> x) const;
    void split_input(std::span<const double> x, std::span<const double>& xt,
                     std::span<const double>& xs, std::span<const double>& xst) const;

    EmbeddingNetConfig cfg_;
    std::vector<nn::LayerSpec> specs_;
    nn::ParameterSet params_;
};

} // namespace adl::net
