#pragma once

#include "gsig/datagen.hpp"
#include "gsig/model.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gsig {

struct LossResult {
    double loss = 0;
    Matrix grad;  // d loss / d prediction, same shape as the prediction
};

/// Mean squared error over all entries; gradient 2 (pred - target) / count.
LossResult mse_loss(const Matrix& pred, const Matrix& target);

/// -log softmax(logits)[label] for a column of logits.
LossResult cross_entropy_loss(const Matrix& logits, Index label);

// ---------------------------------------------------------- optimizers

enum class OptimizerKind { Adam, Lamb };

OptimizerKind parse_optimizer(const std::string& text);
std::string to_string(OptimizerKind kind);

struct OptimizerSettings {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    bool unit_trust_ratio = false;  // LAMB only: force the trust ratio to 1
};

/// First and second moments per tensor, aligned with the parameter list.
struct OptimizerState {
    std::vector<Vector> m;
    std::vector<Vector> v;
    long step = 0;
};

/// Adam with bias correction and decoupled weight decay:
///   p -= lr (m_hat / (sqrt(v_hat) + eps) + wd p).
/// Tensors with trainable == false are not touched.
void adam_step(const std::vector<TensorView>& params, const std::vector<ConstTensorView>& grads,
               OptimizerState& state, const OptimizerSettings& s);

/// Per-tensor Adam direction u rescaled by clip(|p| / |u|, 0, 10); the ratio
/// is 1 when either norm is zero.
void lamb_step(const std::vector<TensorView>& params, const std::vector<ConstTensorView>& grads,
               OptimizerState& state, const OptimizerSettings& s);

/// lr_min + (lr_max - lr_min) (1 + cos(pi step / total)) / 2.
double cosine_lr(long step, long total_steps, double lr_max, double lr_min);

// ------------------------------------------------------------ training

struct Sample {
    Matrix input;   // (d + m) x n
    Matrix target;  // regression target, empty for classification
    int label = -1;
};

/// Relabel the nodes of a sample: input columns, and target columns (node
/// regression) or rows and columns (pairwise), follow new j = old perm[j].
Sample permute_sample(const Sample& sample, const std::vector<Index>& perm, HeadKind head);

/// Per-entry affine preprocessing fitted on training samples. Inputs are
/// standardized; targets are only centered so that mse is unchanged.
struct Normalizer {
    Matrix input_mean;   // empty when inputs are left alone
    Matrix input_scale;
    Matrix target_mean;  // empty when targets are left alone

    static Normalizer fit(const std::vector<Sample>& train, bool inputs, bool targets);
    Sample apply(const Sample& s) const;
    Matrix apply_input(const Matrix& input) const;
    /// Maps a prediction on normalized data back to target units.
    Matrix restore(const Matrix& prediction) const;
    DatasetSplit<Sample> apply(const DatasetSplit<Sample>& split) const;
};

struct TrainConfig {
    int max_epochs = 1000;
    int patience = 50;
    int batch_size = 16;
    double lr = 1e-3;
    double lr_min = 0.0;
    double weight_decay = 0.0;
    OptimizerKind optimizer = OptimizerKind::Adam;
    bool cosine_schedule = false;
    std::uint64_t seed = 0;
    bool augmentation = false;  // fresh node permutation per sample and epoch

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0;
    double val_loss = 0;
    double val_metric = 0;  // mse, or accuracy for classification
    double lr = 0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    int best_epoch = -1;
    double best_val_loss = 0;

    /// epoch,train_loss,val_metric,lr
    std::string to_csv() const;
};

struct TrainResult {
    GSignatureModel model;  // parameters of the best validation epoch
    TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch training with per-epoch validation and early stopping: stops
/// once the best epoch is more than `patience` epochs old and restores it.
/// Throws NumericError (step = epoch) on a non-finite training loss.
TrainResult train(GSignatureModel model, const DatasetSplit<Sample>& split, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Loss and its gradient for one sample under the model's head.
LossResult sample_loss(const GSignatureModel& model, const Matrix& prediction, const Sample& sample);

enum class Metric { Mse, Accuracy };

/// Mean per-sample metric.
double evaluate(const GSignatureModel& model, const std::vector<Sample>& samples, Metric metric);

/// Mean loss under the model's head (mse or cross-entropy).
double mean_loss(const GSignatureModel& model, const std::vector<Sample>& samples);

enum class BaselineKind { TargetMean, Persistence };

BaselineKind parse_baseline(const std::string& text);
std::string to_string(BaselineKind kind);

/// MSE of a reference predictor on `samples`. target-mean predicts the mean
/// of every training target entry; persistence repeats the last input row
/// for every target row.
double baseline_predict(BaselineKind kind, const std::vector<Sample>& train, const std::vector<Sample>& samples);

} // namespace gsig
