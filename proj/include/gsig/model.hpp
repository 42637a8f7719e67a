#pragma once

#include "gsig/lspm.hpp"
#include "gsig/tensor_view.hpp"

#include <string>
#include <vector>

namespace gsig {

enum class HeadKind { NodeRegression, PairwiseRegression, Classification };

HeadKind parse_head(const std::string& text);
std::string to_string(HeadKind head);

struct ModelConfig {
    Index input_rows = 0;  // d + m
    Index nodes = 0;       // n
    Index h1 = 0;
    Index h2 = 0;
    Index k = 0;
    Index heads = 1;       // p
    Index layers = 1;      // L
    HeadKind head = HeadKind::NodeRegression;
    Index out_rows = 0;    // node regression: output rows (e.g. 10 future steps)
    Index classes = 0;     // classification
    LayerOptions layer;

    /// Output shape for one sample; classification gives classes x 1.
    Index output_rows() const;
    Index output_cols() const;
    void validate() const;
};

/// Encode-process-decode model.
///
/// encode:  X = enc_feat (stacked enc_node^T + 1 enc_node_bias^T) + enc_feat_bias 1^T
/// process: L randomized-signature layers with residual connections
/// decode:  Y = (dec_a X + dec_a_bias 1^T) dec_b^T + 1 dec_b_bias^T
///          classification: logits = dec_a vec(X) + dec_a_bias, vec row-major
struct GSignatureModel {
    ModelConfig config;
    Matrix enc_node;        // h2 x n
    Vector enc_node_bias;   // h2
    Matrix enc_feat;        // h1 x (d + m)
    Vector enc_feat_bias;   // h1
    std::vector<LayerParams> layers;
    Matrix dec_a;           // out_rows x h1, or classes x (h1 h2)
    Vector dec_a_bias;
    Matrix dec_b;           // out_cols x h2 (empty for classification)
    Vector dec_b_bias;

    std::vector<TensorView> tensors();
    std::vector<ConstTensorView> tensors() const;
};

/// Gradient buffers, tensor-for-tensor aligned with GSignatureModel::tensors().
struct GradientRecord {
    Matrix enc_node;
    Vector enc_node_bias;
    Matrix enc_feat;
    Vector enc_feat_bias;
    std::vector<LayerGrads> layers;
    Matrix dec_a;
    Vector dec_a_bias;
    Matrix dec_b;
    Vector dec_b_bias;

    static GradientRecord zeros_like(const GSignatureModel& model);
    std::vector<TensorView> tensors();
    std::vector<ConstTensorView> tensors() const;
    GradientRecord& operator+=(const GradientRecord& other);
    GradientRecord& operator*=(double factor);
};

struct ForwardCache {
    const GSignatureModel* owner = nullptr;
    Matrix stacked;
    Matrix enc_mid;   // (d + m) x h2
    Matrix latent;    // h1 x h2, encoder output
    std::vector<LayerCache> layers;
    Matrix processed; // h1 x h2, LSPM output
    Matrix dec_mid;   // out_rows x h2
    bool valid = false;
};

/// Encoder/decoder weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
/// Draw order: enc_node, enc_node_bias, enc_feat, enc_feat_bias, layers, decoder.
GSignatureModel make_model(const ModelConfig& config, Rng& rng);

Matrix encode(const GSignatureModel& model, const Matrix& stacked);
Matrix process(const GSignatureModel& model, const Matrix& latent, std::vector<LayerCache>& caches);
Matrix decode(const GSignatureModel& model, const Matrix& processed);

Matrix model_forward(const GSignatureModel& model, const Matrix& input, ForwardCache& cache);
Matrix model_forward(const GSignatureModel& model, const Matrix& input);
GradientRecord model_backward(const GSignatureModel& model, const ForwardCache& cache, const Matrix& d_prediction);

/// Trainable scalars, honouring sparsity patterns and frozen A_i / b_i.
Index count_parameters(const GSignatureModel& model);

} // namespace gsig
