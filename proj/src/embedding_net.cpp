#include "adlearn/embedding_net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "adlearn/binio.hpp"

namespace adl::net {

namespace {
constexpr char kMagic[4] = {'A', 'D', 'L', 'W'};
constexpr uint32_t kVersion = 1;
} // namespace

void EmbeddingNetConfig::validate() const {
    if (time_dim < 1 || space_dim < 1 || st_channels < 1 || st_steps < 1)
        throw Error(ErrorCode::InvalidArgument, "embedding net: input dims must be >= 1");
    if (hidden_width < 1 || embedding_dim < 1 || output_dim < 1)
        throw Error(ErrorCode::InvalidArgument, "embedding net: layer widths must be >= 1");
    if (conv_filters < 1)
        throw Error(ErrorCode::InvalidArgument, "embedding net: conv_filters must be >= 1");
    if (conv_kernel < 1 || conv_kernel > st_steps)
        throw Error(ErrorCode::InvalidArgument, "embedding net: conv_kernel must be in [1, st_steps]");
}

const char* encoder_id_name(EncoderId id) {
    switch (id) {
        case EncoderId::Time: return "time";
        case EncoderId::Space: return "space";
        case EncoderId::SpaceTime: return "space_time";
        case EncoderId::Joint: return "joint";
        case EncoderId::PredictedLabel: return "predicted_label";
        case EncoderId::TrueLabel: return "true_label";
    }
    return "unknown";
}

EmbeddingNetwork::EmbeddingNetwork(const EmbeddingNetConfig& cfg, uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    using nn::Activation;
    using nn::LayerSpec;
    const int H = cfg_.hidden_width, E = cfg_.embedding_dim;
    const int conv_out = cfg_.conv_filters * (cfg_.st_steps - cfg_.conv_kernel + 1);

    specs_ = {
        // time encoder
        LayerSpec::dense(cfg_.time_dim, H, Activation::Relu),
        LayerSpec::dense(H, E, Activation::Linear),
        // space encoder
        LayerSpec::dense(cfg_.space_dim, H, Activation::Relu),
        LayerSpec::dense(H, E, Activation::Linear),
        // space-time encoder
        LayerSpec::conv1d(cfg_.st_channels, cfg_.st_steps, cfg_.conv_filters, cfg_.conv_kernel,
                          Activation::Relu),
        LayerSpec::dense(conv_out, E, Activation::Linear),
        // joint encoder over the concatenated embeddings
        LayerSpec::dense(3 * E, H, Activation::Relu),
        LayerSpec::dense(H, E, Activation::Linear),
        // prediction head
        LayerSpec::dense(E, H, Activation::Relu),
        LayerSpec::dense(H, cfg_.output_dim, Activation::Linear),
    };
    params_ = nn::make_params(specs_);
    Rng rng(seed);
    nn::init_params(params_, specs_, rng);
}

void EmbeddingNetwork::split_input(std::span<const double> x, std::span<const double>& xt,
                                   std::span<const double>& xs, std::span<const double>& xst) const {
    if (x.size() != size_t(cfg_.feature_dim()))
        throw Error(ErrorCode::InvalidArgument, "embedding net: feature vector length "
                    + std::to_string(x.size()) + " does not match D_x "
                    + std::to_string(cfg_.feature_dim()));
    xt = x.subspan(0, cfg_.time_dim);
    xs = x.subspan(cfg_.time_dim, cfg_.space_dim);
    xst = x.subspan(size_t(cfg_.time_dim) + cfg_.space_dim, cfg_.space_time_dim());
}

std::vector<double> EmbeddingNetwork::run_stage(size_t first, std::span<const double> x) const {
    std::vector<double> cur(x.begin(), x.end());
    for (size_t i = first; i < first + 2; ++i) {
        std::vector<double> next(specs_[i].output_dim());
        nn::layer_forward(specs_[i], params_.weights(i), params_.biases(i), cur, next);
        cur = std::move(next);
    }
    return cur;
}

std::vector<double> EmbeddingNetwork::predict(std::span<const double> x) const {
    std::span<const double> xt, xs, xst;
    split_input(x, xt, xs, xst);
    std::vector<double> et = run_stage(kTime0, xt);
    std::vector<double> es = run_stage(kSpace0, xs);
    std::vector<double> est = run_stage(kSt0, xst);

    std::vector<double> concat;
    concat.reserve(et.size() + es.size() + est.size());
    concat.insert(concat.end(), et.begin(), et.end());
    concat.insert(concat.end(), es.begin(), es.end());
    concat.insert(concat.end(), est.begin(), est.end());

    std::vector<double> ej = run_stage(kJoint0, concat);
    return run_stage(kHead0, ej);
}

std::vector<double> EmbeddingNetwork::encode(EncoderId id, std::span<const double> x,
                                             std::span<const double> label,
                                             bool oracle_mode) const {
    switch (id) {
        case EncoderId::Time: {
            std::span<const double> xt, xs, xst;
            split_input(x, xt, xs, xst);
            return run_stage(kTime0, xt);
        }
        case EncoderId::Space: {
            std::span<const double> xt, xs, xst;
            split_input(x, xt, xs, xst);
            return run_stage(kSpace0, xs);
        }
        case EncoderId::SpaceTime: {
            std::span<const double> xt, xs, xst;
            split_input(x, xt, xs, xst);
            return run_stage(kSt0, xst);
        }
        case EncoderId::Joint: {
            std::span<const double> xt, xs, xst;
            split_input(x, xt, xs, xst);
            std::vector<double> et = run_stage(kTime0, xt);
            std::vector<double> es = run_stage(kSpace0, xs);
            std::vector<double> est = run_stage(kSt0, xst);
            std::vector<double> concat;
            concat.reserve(et.size() + es.size() + est.size());
            concat.insert(concat.end(), et.begin(), et.end());
            concat.insert(concat.end(), es.begin(), es.end());
            concat.insert(concat.end(), est.begin(), est.end());
            return run_stage(kJoint0, concat);
        }
        case EncoderId::PredictedLabel:
            return predict(x);
        case EncoderId::TrueLabel:
            if (!oracle_mode)
                throw Error(ErrorCode::InvalidArgument,
                            "true_label encoding requires oracle mode");
            if (label.size() != size_t(cfg_.output_dim))
                throw Error(ErrorCode::InvalidArgument,
                            "true_label encoding requires a label of length D_y");
            return std::vector<double>(label.begin(), label.end());
    }
    throw Error(ErrorCode::Internal, "unknown encoder id");
}

int EmbeddingNetwork::encode_dim(EncoderId id) const {
    switch (id) {
        case EncoderId::Time:
        case EncoderId::Space:
        case EncoderId::SpaceTime:
        case EncoderId::Joint:
            return cfg_.embedding_dim;
        case EncoderId::PredictedLabel:
        case EncoderId::TrueLabel:
            return cfg_.output_dim;
    }
    throw Error(ErrorCode::Internal, "unknown encoder id");
}

double EmbeddingNetwork::gradient(std::span<const nn::Sample> minibatch,
                                  std::span<double> grad) const {
    if (minibatch.empty())
        throw Error(ErrorCode::InvalidArgument, "gradient: empty minibatch");
    std::fill(grad.begin(), grad.end(), 0.0);
    const int E = cfg_.embedding_dim;
    const size_t out_dim = size_t(cfg_.output_dim);
    double loss = 0.0;

    // per-stage activation traces: acts[stage][0..2], acts[stage][0] = input
    auto run_stage_trace = [&](size_t first, std::span<const double> x,
                               std::array<std::vector<double>, 3>& acts) {
        acts[0].assign(x.begin(), x.end());
        for (size_t i = 0; i < 2; ++i) {
            acts[i + 1].resize(specs_[first + i].output_dim());
            nn::layer_forward(specs_[first + i], params_.weights(first + i),
                              params_.biases(first + i), acts[i], acts[i + 1]);
        }
    };
    auto back_stage = [&](size_t first, const std::array<std::vector<double>, 3>& acts,
                          std::vector<double> dy) -> std::vector<double> {
        for (size_t i = 2; i-- > 0;) {
            const size_t li = first + i;
            const nn::ParamLayout& l = params_.layout[li];
            std::vector<double> dx(specs_[li].input_dim());
            nn::layer_backward(specs_[li], params_.weights(li), acts[i], acts[i + 1], dy,
                               std::span<double>(grad.data() + l.w_off, l.w_len),
                               std::span<double>(grad.data() + l.b_off, l.b_len), dx);
            dy = std::move(dx);
        }
        return dy;
    };

    for (const nn::Sample& sm : minibatch) {
        std::span<const double> xt, xs, xst;
        split_input(sm.x, xt, xs, xst);
        std::array<std::vector<double>, 3> a_t, a_s, a_st, a_j, a_h;
        run_stage_trace(kTime0, xt, a_t);
        run_stage_trace(kSpace0, xs, a_s);
        run_stage_trace(kSt0, xst, a_st);

        std::vector<double> concat;
        concat.reserve(3 * size_t(E));
        concat.insert(concat.end(), a_t[2].begin(), a_t[2].end());
        concat.insert(concat.end(), a_s[2].begin(), a_s[2].end());
        concat.insert(concat.end(), a_st[2].begin(), a_st[2].end());
        run_stage_trace(kJoint0, concat, a_j);
        run_stage_trace(kHead0, a_j[2], a_h);

        const std::vector<double>& y_hat = a_h[2];
        loss += nn::mse_loss(y_hat, sm.y);
        std::vector<double> dy(out_dim);
        for (size_t k = 0; k < out_dim; ++k)
            dy[k] = 2.0 * (y_hat[k] - sm.y[k]) / double(out_dim);

        std::vector<double> d_joint_emb = back_stage(kHead0, a_h, std::move(dy));
        std::vector<double> d_concat = back_stage(kJoint0, a_j, std::move(d_joint_emb));
        back_stage(kTime0, a_t, std::vector<double>(d_concat.begin(), d_concat.begin() + E));
        back_stage(kSpace0, a_s,
                   std::vector<double>(d_concat.begin() + E, d_concat.begin() + 2 * E));
        back_stage(kSt0, a_st,
                   std::vector<double>(d_concat.begin() + 2 * E, d_concat.end()));
    }

    const double scale = 1.0 / double(minibatch.size());
    for (double& g : grad) {
        g *= scale;
        if (!std::isfinite(g))
            throw Error(ErrorCode::Numeric, "gradient: non-finite value");
    }
    return loss * scale;
}

void EmbeddingNetwork::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
    binio::write_magic(os, kMagic);
    binio::write_u32(os, kVersion);
    binio::write_u32(os, uint32_t(cfg_.time_dim));
    binio::write_u32(os, uint32_t(cfg_.space_dim));
    binio::write_u32(os, uint32_t(cfg_.st_channels));
    binio::write_u32(os, uint32_t(cfg_.st_steps));
    binio::write_u32(os, uint32_t(cfg_.hidden_width));
    binio::write_u32(os, uint32_t(cfg_.embedding_dim));
    binio::write_u32(os, uint32_t(cfg_.conv_filters));
    binio::write_u32(os, uint32_t(cfg_.conv_kernel));
    binio::write_u32(os, uint32_t(cfg_.output_dim));
    binio::write_u64(os, params_.total_count());
    binio::write_f64_array(os, params_.values);
    if (!os)
        throw Error(ErrorCode::Io, "write failed for " + path);
}

EmbeddingNetwork EmbeddingNetwork::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error(ErrorCode::Io, "cannot open " + path);
    binio::expect_magic(is, kMagic, "network weights file");
    const uint32_t version = binio::read_u32(is, "version");
    if (version != kVersion)
        throw Error(ErrorCode::Format, "network weights file: unsupported version "
                    + std::to_string(version));
    EmbeddingNetConfig cfg;
    cfg.time_dim = int(binio::read_u32(is, "time_dim"));
    cfg.space_dim = int(binio::read_u32(is, "space_dim"));
    cfg.st_channels = int(binio::read_u32(is, "st_channels"));
    cfg.st_steps = int(binio::read_u32(is, "st_steps"));
    cfg.hidden_width = int(binio::read_u32(is, "hidden_width"));
    cfg.embedding_dim = int(binio::read_u32(is, "embedding_dim"));
    cfg.conv_filters = int(binio::read_u32(is, "conv_filters"));
    cfg.conv_kernel = int(binio::read_u32(is, "conv_kernel"));
    cfg.output_dim = int(binio::read_u32(is, "output_dim"));
    const uint64_t count = binio::read_u64(is, "parameter count");

    EmbeddingNetwork net(cfg, 0);
    if (count != net.params_.total_count())
        throw Error(ErrorCode::Format, "network weights file: parameter count mismatch");
    binio::read_f64_array(is, net.params_.values, "weights");
    return net;
}

} // namespace adl::net
