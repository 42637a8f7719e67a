#include "gsig/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace gsig {

LossResult mse_loss(const Matrix& pred, const Matrix& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw ValidationError("mse_loss: prediction is " + std::to_string(pred.rows()) + "x" +
                              std::to_string(pred.cols()) + ", target is " + std::to_string(target.rows()) + "x" +
                              std::to_string(target.cols()));
    if (pred.size() == 0) throw ValidationError("mse_loss: empty tensors");
    const Matrix diff = pred - target;
    const double count = static_cast<double>(diff.size());
    return LossResult{diff.squaredNorm() / count, (2.0 / count) * diff};
}

LossResult cross_entropy_loss(const Matrix& logits, Index label) {
    if (logits.cols() != 1 || logits.rows() < 1) throw ValidationError("cross_entropy_loss: logits must be a column");
    if (label < 0 || label >= logits.rows())
        throw ValidationError("cross_entropy_loss: label " + std::to_string(label) + " outside [0, " +
                              std::to_string(logits.rows()) + ")");
    const double peak = logits.maxCoeff();
    const Vector shifted = logits.col(0).array() - peak;
    const Vector expd = shifted.array().exp();
    const double total = expd.sum();
    LossResult out;
    out.loss = std::log(total) - shifted(label);
    out.grad = expd / total;
    out.grad(label, 0) -= 1.0;
    return out;
}

OptimizerKind parse_optimizer(const std::string& text) {
    if (text == "adam") return OptimizerKind::Adam;
    if (text == "lamb") return OptimizerKind::Lamb;
    throw ValidationError("unknown optimizer '" + text + "'");
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::Adam ? "adam" : "lamb"; }

namespace {

void prepare_state(const std::vector<TensorView>& params, const std::vector<ConstTensorView>& grads,
                   OptimizerState& state) {
    if (params.size() != grads.size()) throw ValidationError("optimizer: parameter/gradient count mismatch");
    if (state.m.empty()) {
        for (const auto& p : params) {
            state.m.push_back(Vector::Zero(static_cast<Index>(p.values.size())));
            state.v.push_back(Vector::Zero(static_cast<Index>(p.values.size())));
        }
    }
    if (state.m.size() != params.size()) throw ValidationError("optimizer: state does not match parameters");
    for (std::size_t t = 0; t < params.size(); ++t)
        if (params[t].values.size() != grads[t].values.size() ||
            static_cast<std::size_t>(state.m[t].size()) != params[t].values.size())
            throw ValidationError("optimizer: shape mismatch for tensor '" + params[t].name + "'");
    ++state.step;
}

// Updates the moments of tensor t and returns the Adam direction including weight decay.
Vector adam_direction(const TensorView& p, const ConstTensorView& g, Vector& m, Vector& v, long step,
                      const OptimizerSettings& s) {
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(step));
    Vector u(m.size());
    for (Index i = 0; i < m.size(); ++i) {
        const double gi = g.values[static_cast<std::size_t>(i)];
        m(i) = s.beta1 * m(i) + (1.0 - s.beta1) * gi;
        v(i) = s.beta2 * v(i) + (1.0 - s.beta2) * gi * gi;
        u(i) = (m(i) / c1) / (std::sqrt(v(i) / c2) + s.eps) + s.weight_decay * p.values[static_cast<std::size_t>(i)];
    }
    return u;
}

} // namespace

void adam_step(const std::vector<TensorView>& params, const std::vector<ConstTensorView>& grads,
               OptimizerState& state, const OptimizerSettings& s) {
    prepare_state(params, grads, state);
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (!params[t].trainable) continue;
        const Vector u = adam_direction(params[t], grads[t], state.m[t], state.v[t], state.step, s);
        for (Index i = 0; i < u.size(); ++i) params[t].values[static_cast<std::size_t>(i)] -= s.lr * u(i);
    }
}

void lamb_step(const std::vector<TensorView>& params, const std::vector<ConstTensorView>& grads,
               OptimizerState& state, const OptimizerSettings& s) {
    prepare_state(params, grads, state);
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (!params[t].trainable) continue;
        const Vector u = adam_direction(params[t], grads[t], state.m[t], state.v[t], state.step, s);
        double trust = 1.0;
        if (!s.unit_trust_ratio) {
            double p_norm = 0;
            for (double x : params[t].values) p_norm += x * x;
            p_norm = std::sqrt(p_norm);
            const double u_norm = u.norm();
            if (p_norm > 0 && u_norm > 0) trust = std::clamp(p_norm / u_norm, 0.0, 10.0);
        }
        for (Index i = 0; i < u.size(); ++i) params[t].values[static_cast<std::size_t>(i)] -= s.lr * trust * u(i);
    }
}

double cosine_lr(long step, long total_steps, double lr_max, double lr_min) {
    if (total_steps <= 0 || step < 0 || step > total_steps)
        throw ValidationError("cosine_lr: need 0 <= step <= total_steps, total_steps > 0");
    const double phase = std::numbers::pi * static_cast<double>(step) / static_cast<double>(total_steps);
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(phase));
}

Sample permute_sample(const Sample& sample, const std::vector<Index>& perm, HeadKind head) {
    const Index n = sample.input.cols();
    if (static_cast<Index>(perm.size()) != n) throw ValidationError("permute_sample: permutation size mismatch");
    invert_permutation(perm);
    Sample out;
    out.label = sample.label;
    out.input.resize(sample.input.rows(), n);
    for (Index j = 0; j < n; ++j) out.input.col(j) = sample.input.col(perm[static_cast<std::size_t>(j)]);
    if (head == HeadKind::NodeRegression) {
        out.target.resize(sample.target.rows(), n);
        for (Index j = 0; j < n; ++j) out.target.col(j) = sample.target.col(perm[static_cast<std::size_t>(j)]);
    } else if (head == HeadKind::PairwiseRegression) {
        out.target.resize(n, n);
        for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < n; ++i)
                out.target(i, j) = sample.target(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    } else {
        out.target = sample.target;
    }
    return out;
}

Normalizer Normalizer::fit(const std::vector<Sample>& train, bool inputs, bool targets) {
    Normalizer out;
    if (train.empty() || !(inputs || targets)) return out;
    const double count = static_cast<double>(train.size());
    if (inputs) {
        const Matrix& first = train.front().input;
        out.input_mean = Matrix::Zero(first.rows(), first.cols());
        Matrix sq = Matrix::Zero(first.rows(), first.cols());
        for (const auto& s : train) {
            if (s.input.rows() != first.rows() || s.input.cols() != first.cols())
                throw ValidationError("Normalizer: inputs differ in shape");
            out.input_mean += s.input;
            sq += s.input.cwiseAbs2();
        }
        out.input_mean /= count;
        out.input_scale = (sq / count - out.input_mean.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
        for (Index i = 0; i < out.input_scale.size(); ++i)
            if (!(out.input_scale.data()[i] > 1e-12)) out.input_scale.data()[i] = 1.0;
    }
    if (targets) {
        const Matrix& first = train.front().target;
        if (first.size() == 0) throw ValidationError("Normalizer: samples have no regression target");
        out.target_mean = Matrix::Zero(first.rows(), first.cols());
        for (const auto& s : train) {
            if (s.target.rows() != first.rows() || s.target.cols() != first.cols())
                throw ValidationError("Normalizer: targets differ in shape");
            out.target_mean += s.target;
        }
        out.target_mean /= count;
    }
    return out;
}

Matrix Normalizer::apply_input(const Matrix& input) const {
    if (input_mean.size() == 0) return input;
    if (input.rows() != input_mean.rows() || input.cols() != input_mean.cols())
        throw ValidationError("Normalizer: input shape mismatch");
    return (input - input_mean).cwiseQuotient(input_scale);
}

Sample Normalizer::apply(const Sample& s) const {
    Sample out = s;
    out.input = apply_input(s.input);
    if (target_mean.size() > 0) {
        if (s.target.rows() != target_mean.rows() || s.target.cols() != target_mean.cols())
            throw ValidationError("Normalizer: target shape mismatch");
        out.target = s.target - target_mean;
    }
    return out;
}

Matrix Normalizer::restore(const Matrix& prediction) const {
    if (target_mean.size() == 0) return prediction;
    return prediction + target_mean;
}

DatasetSplit<Sample> Normalizer::apply(const DatasetSplit<Sample>& split) const {
    DatasetSplit<Sample> out;
    out.seed = split.seed;
    for (const auto& s : split.train) out.train.push_back(apply(s));
    for (const auto& s : split.val) out.val.push_back(apply(s));
    for (const auto& s : split.test) out.test.push_back(apply(s));
    return out;
}

void TrainConfig::validate() const {
    if (max_epochs < 1) throw ValidationError("train: max_epochs must be >= 1");
    if (patience < 0) throw ValidationError("train: patience must be >= 0");
    if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
    if (!(lr > 0) || !std::isfinite(lr)) throw ValidationError("train: lr must be positive");
    if (!(lr_min >= 0) || lr_min > lr) throw ValidationError("train: need 0 <= lr_min <= lr");
    if (!(weight_decay >= 0)) throw ValidationError("train: weight_decay must be >= 0");
}

std::string TrainHistory::to_csv() const {
    std::ostringstream out;
    out << "epoch,train_loss,val_metric,lr\n";
    char buf[128];
    for (const auto& e : epochs) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", e.epoch, e.train_loss, e.val_metric, e.lr);
        out << buf;
    }
    return out.str();
}

LossResult sample_loss(const GSignatureModel& model, const Matrix& prediction, const Sample& sample) {
    if (model.config.head == HeadKind::Classification) return cross_entropy_loss(prediction, sample.label);
    return mse_loss(prediction, sample.target);
}

double mean_loss(const GSignatureModel& model, const std::vector<Sample>& samples) {
    if (samples.empty()) throw ValidationError("mean_loss: no samples");
    double total = 0;
    for (const auto& s : samples) total += sample_loss(model, model_forward(model, s.input), s).loss;
    return total / static_cast<double>(samples.size());
}

double evaluate(const GSignatureModel& model, const std::vector<Sample>& samples, Metric metric) {
    if (samples.empty()) throw ValidationError("evaluate: no samples");
    const bool classify = model.config.head == HeadKind::Classification;
    if (metric == Metric::Accuracy && !classify) throw ValidationError("evaluate: accuracy needs a classification head");
    if (metric == Metric::Mse && classify) throw ValidationError("evaluate: mse needs a regression head");
    double total = 0;
    for (const auto& s : samples) {
        const Matrix pred = model_forward(model, s.input);
        if (metric == Metric::Mse) {
            total += mse_loss(pred, s.target).loss;
        } else {
            Index arg = 0;
            pred.col(0).maxCoeff(&arg);
            total += arg == s.label ? 1.0 : 0.0;
        }
    }
    return total / static_cast<double>(samples.size());
}

BaselineKind parse_baseline(const std::string& text) {
    if (text == "target-mean") return BaselineKind::TargetMean;
    if (text == "persistence") return BaselineKind::Persistence;
    throw ValidationError("unknown baseline '" + text + "'");
}

std::string to_string(BaselineKind kind) { return kind == BaselineKind::TargetMean ? "target-mean" : "persistence"; }

double baseline_predict(BaselineKind kind, const std::vector<Sample>& train, const std::vector<Sample>& samples) {
    if (samples.empty()) throw ValidationError("baseline_predict: no samples");
    double total = 0;
    if (kind == BaselineKind::TargetMean) {
        if (train.empty()) throw ValidationError("baseline_predict: target-mean needs training samples");
        double sum = 0;
        double count = 0;
        for (const auto& s : train) {
            sum += s.target.sum();
            count += static_cast<double>(s.target.size());
        }
        if (count == 0) throw ValidationError("baseline_predict: training targets are empty");
        const double mean = sum / count;
        for (const auto& s : samples)
            total += mse_loss(Matrix::Constant(s.target.rows(), s.target.cols(), mean), s.target).loss;
    } else {
        for (const auto& s : samples) {
            if (s.input.cols() != s.target.cols() || s.input.rows() < 1)
                throw ValidationError("baseline_predict: persistence needs inputs and targets over the same nodes");
            const Matrix pred = s.input.row(s.input.rows() - 1).replicate(s.target.rows(), 1);
            total += mse_loss(pred, s.target).loss;
        }
    }
    return total / static_cast<double>(samples.size());
}

TrainResult train(GSignatureModel model, const DatasetSplit<Sample>& split, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
    cfg.validate();
    if (split.train.empty() || split.val.empty()) throw ValidationError("train: need training and validation samples");

    const auto n_train = static_cast<Index>(split.train.size());
    const long batches = (n_train + cfg.batch_size - 1) / cfg.batch_size;
    const long total_steps = static_cast<long>(cfg.max_epochs) * batches;
    Rng shuffle_rng = Rng::derive(cfg.seed, fnv1a("shuffle"));
    Rng augment_rng = Rng::derive(cfg.seed, fnv1a("augment"));

    OptimizerSettings opt;
    opt.weight_decay = cfg.weight_decay;
    OptimizerState state;

    TrainResult result{model, {}};
    long step = 0;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const std::vector<Index> order = random_permutation(shuffle_rng, n_train);
        double epoch_loss = 0;
        for (long b = 0; b < batches; ++b) {
            const Index begin = b * cfg.batch_size;
            const Index end = std::min<Index>(begin + cfg.batch_size, n_train);
            GradientRecord grad = GradientRecord::zeros_like(model);
            for (Index pos = begin; pos < end; ++pos) {
                const Sample& raw = split.train[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])];
                Sample augmented;
                if (cfg.augmentation)
                    augmented = permute_sample(raw, random_permutation(augment_rng, raw.input.cols()), model.config.head);
                const Sample& s = cfg.augmentation ? augmented : raw;
                ForwardCache cache;
                const Matrix pred = model_forward(model, s.input, cache);
                const LossResult loss = sample_loss(model, pred, s);
                if (!std::isfinite(loss.loss))
                    throw NumericError("non-finite training loss in epoch " + std::to_string(epoch) + ", batch " +
                                           std::to_string(b),
                                       epoch);
                epoch_loss += loss.loss;
                grad += model_backward(model, cache, loss.grad);
            }
            grad *= 1.0 / static_cast<double>(end - begin);
            opt.lr = cfg.cosine_schedule ? cosine_lr(step, total_steps, cfg.lr, cfg.lr_min) : cfg.lr;
            const auto params = model.tensors();
            const auto grads = std::as_const(grad).tensors();
            if (cfg.optimizer == OptimizerKind::Adam)
                adam_step(params, grads, state, opt);
            else
                lamb_step(params, grads, state, opt);
            ++step;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = epoch_loss / static_cast<double>(n_train);
        rec.val_loss = mean_loss(model, split.val);
        rec.val_metric = model.config.head == HeadKind::Classification ? evaluate(model, split.val, Metric::Accuracy)
                                                                       : rec.val_loss;
        rec.lr = opt.lr;
        if (!std::isfinite(rec.val_loss))
            throw NumericError("non-finite validation loss in epoch " + std::to_string(epoch), epoch);
        result.history.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);

        if (result.history.best_epoch < 0 || rec.val_loss < result.history.best_val_loss) {
            result.history.best_epoch = epoch;
            result.history.best_val_loss = rec.val_loss;
            result.model = model;
        }
        if (epoch - result.history.best_epoch > cfg.patience) break;
    }
    return result;
}

} // namespace gsig
