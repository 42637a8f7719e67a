#include "gsig/model.hpp"

#include <cmath>

namespace gsig {

HeadKind parse_head(const std::string& text) {
    if (text == "node-regression") return HeadKind::NodeRegression;
    if (text == "pairwise-regression") return HeadKind::PairwiseRegression;
    if (text == "classification") return HeadKind::Classification;
    throw ValidationError("unknown head '" + text + "'");
}

std::string to_string(HeadKind head) {
    switch (head) {
    case HeadKind::NodeRegression: return "node-regression";
    case HeadKind::PairwiseRegression: return "pairwise-regression";
    case HeadKind::Classification: return "classification";
    }
    return "?";
}

Index ModelConfig::output_rows() const {
    switch (head) {
    case HeadKind::NodeRegression: return out_rows;
    case HeadKind::PairwiseRegression: return nodes;
    case HeadKind::Classification: return classes;
    }
    return 0;
}

Index ModelConfig::output_cols() const { return head == HeadKind::Classification ? 1 : nodes; }

void ModelConfig::validate() const {
    if (input_rows < 1 || nodes < 1) throw ValidationError("model: input shape must be non-empty");
    if (h1 < 1 || h2 < 1 || k < 1 || heads < 1) throw ValidationError("model: h1, h2, k, p must be >= 1");
    if (layers < 1) throw ValidationError("model: need at least one signature layer");
    if (head == HeadKind::NodeRegression && out_rows < 1) throw ValidationError("model: out_rows must be >= 1");
    if (head == HeadKind::Classification && classes < 2) throw ValidationError("model: need at least 2 classes");
}

namespace {

Matrix uniform_fan_in(Rng& rng, Index rows, Index cols, Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    return sample_uniform(rng, rows, cols, -bound, bound);
}

template <typename T, typename Model, typename LayerT>
std::vector<BasicTensorView<T>> collect(Model& m, std::vector<LayerT>& layers) {
    std::vector<BasicTensorView<T>> out;
    out.push_back(make_view<T>("enc_node", m.enc_node, true));
    out.push_back(make_view<T>("enc_node_bias", m.enc_node_bias, true));
    out.push_back(make_view<T>("enc_feat", m.enc_feat, true));
    out.push_back(make_view<T>("enc_feat_bias", m.enc_feat_bias, true));
    for (std::size_t l = 0; l < layers.size(); ++l) {
        for (auto& v : layers[l].tensors()) {
            out.push_back(BasicTensorView<T>{"layer" + std::to_string(l) + "." + v.name, v.values, v.rows, v.cols,
                                             v.trainable});
        }
    }
    out.push_back(make_view<T>("dec_a", m.dec_a, true));
    out.push_back(make_view<T>("dec_a_bias", m.dec_a_bias, true));
    if (m.dec_b.size() > 0) {
        out.push_back(make_view<T>("dec_b", m.dec_b, true));
        out.push_back(make_view<T>("dec_b_bias", m.dec_b_bias, true));
    }
    return out;
}

Vector flatten_row_major(const Matrix& x) {
    Vector out(x.size());
    Index pos = 0;
    for (Index i = 0; i < x.rows(); ++i)
        for (Index j = 0; j < x.cols(); ++j) out(pos++) = x(i, j);
    return out;
}

Matrix unflatten_row_major(const Vector& v, Index rows, Index cols) {
    Matrix out(rows, cols);
    Index pos = 0;
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) out(i, j) = v(pos++);
    return out;
}

void require_input(const GSignatureModel& model, const Matrix& stacked) {
    if (stacked.rows() != model.config.input_rows || stacked.cols() != model.config.nodes)
        throw ValidationError("model input is " + std::to_string(stacked.rows()) + "x" +
                              std::to_string(stacked.cols()) + ", model expects " +
                              std::to_string(model.config.input_rows) + "x" + std::to_string(model.config.nodes));
}

} // namespace

std::vector<TensorView> GSignatureModel::tensors() { return collect<double>(*this, layers); }

std::vector<ConstTensorView> GSignatureModel::tensors() const {
    auto& self = const_cast<GSignatureModel&>(*this);
    std::vector<ConstTensorView> out;
    for (auto& v : collect<double>(self, self.layers))
        out.push_back(ConstTensorView{v.name, v.values, v.rows, v.cols, v.trainable});
    return out;
}

GradientRecord GradientRecord::zeros_like(const GSignatureModel& model) {
    GradientRecord g;
    g.enc_node = Matrix::Zero(model.enc_node.rows(), model.enc_node.cols());
    g.enc_node_bias = Vector::Zero(model.enc_node_bias.size());
    g.enc_feat = Matrix::Zero(model.enc_feat.rows(), model.enc_feat.cols());
    g.enc_feat_bias = Vector::Zero(model.enc_feat_bias.size());
    for (const auto& l : model.layers) g.layers.push_back(LayerGrads::zeros_like(l));
    g.dec_a = Matrix::Zero(model.dec_a.rows(), model.dec_a.cols());
    g.dec_a_bias = Vector::Zero(model.dec_a_bias.size());
    g.dec_b = Matrix::Zero(model.dec_b.rows(), model.dec_b.cols());
    g.dec_b_bias = Vector::Zero(model.dec_b_bias.size());
    return g;
}

std::vector<TensorView> GradientRecord::tensors() { return collect<double>(*this, layers); }

std::vector<ConstTensorView> GradientRecord::tensors() const {
    auto& self = const_cast<GradientRecord&>(*this);
    std::vector<ConstTensorView> out;
    for (auto& v : collect<double>(self, self.layers))
        out.push_back(ConstTensorView{v.name, v.values, v.rows, v.cols, v.trainable});
    return out;
}

GradientRecord& GradientRecord::operator+=(const GradientRecord& other) {
    enc_node += other.enc_node;
    enc_node_bias += other.enc_node_bias;
    enc_feat += other.enc_feat;
    enc_feat_bias += other.enc_feat_bias;
    for (std::size_t l = 0; l < layers.size(); ++l) layers[l] += other.layers[l];
    dec_a += other.dec_a;
    dec_a_bias += other.dec_a_bias;
    dec_b += other.dec_b;
    dec_b_bias += other.dec_b_bias;
    return *this;
}

GradientRecord& GradientRecord::operator*=(double factor) {
    for (auto& v : tensors())
        for (double& x : v.values) x *= factor;
    return *this;
}

GSignatureModel make_model(const ModelConfig& config, Rng& rng) {
    config.validate();
    GSignatureModel m;
    m.config = config;
    const Index n = config.nodes;
    const Index r = config.input_rows;
    m.enc_node = uniform_fan_in(rng, config.h2, n, n);
    m.enc_node_bias = uniform_fan_in(rng, config.h2, 1, n);
    m.enc_feat = uniform_fan_in(rng, config.h1, r, r);
    m.enc_feat_bias = uniform_fan_in(rng, config.h1, 1, r);
    for (Index l = 0; l < config.layers; ++l)
        m.layers.push_back(init_layer(config.h2, config.k, config.heads, rng, config.layer));
    if (config.head == HeadKind::Classification) {
        const Index fan = config.h1 * config.h2;
        m.dec_a = uniform_fan_in(rng, config.classes, fan, fan);
        m.dec_a_bias = uniform_fan_in(rng, config.classes, 1, fan);
    } else {
        m.dec_a = uniform_fan_in(rng, config.output_rows(), config.h1, config.h1);
        m.dec_a_bias = uniform_fan_in(rng, config.output_rows(), 1, config.h1);
        m.dec_b = uniform_fan_in(rng, config.output_cols(), config.h2, config.h2);
        m.dec_b_bias = uniform_fan_in(rng, config.output_cols(), 1, config.h2);
    }
    return m;
}

Matrix encode(const GSignatureModel& model, const Matrix& stacked) {
    require_input(model, stacked);
    Matrix mid = stacked * model.enc_node.transpose();
    mid.rowwise() += model.enc_node_bias.transpose();
    Matrix x = model.enc_feat * mid;
    x.colwise() += model.enc_feat_bias;
    return x;
}

Matrix process(const GSignatureModel& model, const Matrix& latent, std::vector<LayerCache>& caches) {
    caches.assign(model.layers.size(), LayerCache{});
    Matrix x = latent;
    for (std::size_t l = 0; l < model.layers.size(); ++l) x = layer_forward(model.layers[l], x, caches[l]);
    return x;
}

Matrix decode(const GSignatureModel& model, const Matrix& processed) {
    const auto& c = model.config;
    if (processed.rows() != c.h1 || processed.cols() != c.h2) throw ValidationError("decode: latent shape mismatch");
    if (c.head == HeadKind::Classification) {
        Vector logits = model.dec_a * flatten_row_major(processed) + model.dec_a_bias;
        return logits;
    }
    Matrix mid = model.dec_a * processed;
    mid.colwise() += model.dec_a_bias;
    Matrix y = mid * model.dec_b.transpose();
    y.rowwise() += model.dec_b_bias.transpose();
    return y;
}

Matrix model_forward(const GSignatureModel& model, const Matrix& input, ForwardCache& cache) {
    cache.valid = false;
    require_input(model, input);
    const auto& c = model.config;
    cache.stacked = input;
    cache.enc_mid = input * model.enc_node.transpose();
    cache.enc_mid.rowwise() += model.enc_node_bias.transpose();
    cache.latent = model.enc_feat * cache.enc_mid;
    cache.latent.colwise() += model.enc_feat_bias;
    cache.processed = process(model, cache.latent, cache.layers);

    Matrix y;
    if (c.head == HeadKind::Classification) {
        cache.dec_mid.resize(0, 0);
        y = decode(model, cache.processed);
    } else {
        cache.dec_mid = model.dec_a * cache.processed;
        cache.dec_mid.colwise() += model.dec_a_bias;
        y = cache.dec_mid * model.dec_b.transpose();
        y.rowwise() += model.dec_b_bias.transpose();
    }
    cache.owner = &model;
    cache.valid = true;
    return y;
}

Matrix model_forward(const GSignatureModel& model, const Matrix& input) {
    ForwardCache cache;
    return model_forward(model, input, cache);
}

GradientRecord model_backward(const GSignatureModel& model, const ForwardCache& cache, const Matrix& d_prediction) {
    if (!cache.valid || cache.owner != &model) throw ValidationError("model_backward: missing or stale cache");
    const auto& c = model.config;
    if (d_prediction.rows() != c.output_rows() || d_prediction.cols() != c.output_cols())
        throw ValidationError("model_backward: gradient shape does not match prediction");

    GradientRecord g = GradientRecord::zeros_like(model);
    Matrix d_x;
    if (c.head == HeadKind::Classification) {
        const Vector flat = flatten_row_major(cache.processed);
        g.dec_a = d_prediction * flat.transpose();
        g.dec_a_bias = d_prediction.col(0);
        d_x = unflatten_row_major(model.dec_a.transpose() * d_prediction.col(0), c.h1, c.h2);
    } else {
        g.dec_b = d_prediction.transpose() * cache.dec_mid;
        g.dec_b_bias = d_prediction.colwise().sum().transpose();
        const Matrix d_mid = d_prediction * model.dec_b;
        g.dec_a = d_mid * cache.processed.transpose();
        g.dec_a_bias = d_mid.rowwise().sum();
        d_x = model.dec_a.transpose() * d_mid;
    }

    for (std::size_t l = model.layers.size(); l-- > 0;) {
        LayerBackward back = layer_backward(model.layers[l], cache.layers[l], d_x);
        g.layers[l] = std::move(back.grads);
        d_x = std::move(back.d_x);
    }

    g.enc_feat = d_x * cache.enc_mid.transpose();
    g.enc_feat_bias = d_x.rowwise().sum();
    const Matrix d_mid = model.enc_feat.transpose() * d_x;
    g.enc_node = d_mid.transpose() * cache.stacked;
    g.enc_node_bias = d_mid.colwise().sum().transpose();
    return g;
}

Index count_parameters(const GSignatureModel& model) {
    Index n = 0;
    for (const auto& v : model.tensors())
        if (v.trainable) n += static_cast<Index>(v.values.size());
    return n;
}

} // namespace gsig
