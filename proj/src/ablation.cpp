#include "gsig/ablation.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace gsig {

ActivationOverride parse_activation_override(const std::string& text) {
    if (text == "none") return ActivationOverride::None;
    if (text == "sigmoid") return ActivationOverride::Sigmoid;
    if (text == "tanh") return ActivationOverride::Tanh;
    throw ValidationError("unknown activation override '" + text + "'");
}

std::string to_string(ActivationOverride a) {
    switch (a) {
    case ActivationOverride::None: return "none";
    case ActivationOverride::Sigmoid: return "sigmoid";
    case ActivationOverride::Tanh: return "tanh";
    }
    return "?";
}

LayerOptions AblationConfig::layer_options() const {
    LayerOptions o;
    o.sparse = !omit_sparsity;
    o.scaled_init = !omit_init;
    o.trainable = !freeze_weights;
    switch (activation_override) {
    case ActivationOverride::Sigmoid: o.activation = Activation::Sigmoid; break;
    case ActivationOverride::Tanh: o.activation = Activation::Tanh; break;
    case ActivationOverride::None:
        o.activation = omit_activation ? Activation::Identity : Activation::ScaledIdentity;
        break;
    }
    return o;
}

LayerParams build_ablated_layer(Index n_coords, Index k, Index heads, const AblationConfig& cfg, Rng& rng) {
    return init_layer(n_coords, k, heads, rng, cfg.layer_options());
}

std::vector<AblationConfig> standard_combos() {
    auto make = [](std::string name, bool s, bool i, bool a, bool f = false,
                   ActivationOverride o = ActivationOverride::None) {
        AblationConfig c;
        c.name = std::move(name);
        c.omit_sparsity = s;
        c.omit_init = i;
        c.omit_activation = a;
        c.freeze_weights = f;
        c.activation_override = o;
        return c;
    };
    return {
        make("none", false, false, false),
        make("trainability", false, false, false, true),
        make("all", true, true, true),
        make("sparsity", true, false, false),
        make("initialization", false, true, false),
        make("activation", false, false, true),
        make("sparsity+initialization", true, true, false),
        make("sparsity+activation", true, false, true),
        make("initialization+activation", false, true, true),
        make("sigmoid", false, false, true, false, ActivationOverride::Sigmoid),
        make("tanh", false, false, true, false, ActivationOverride::Tanh),
    };
}

AblationConfig combo_by_name(const std::string& name) {
    for (const auto& c : standard_combos())
        if (c.name == name) return c;
    throw ValidationError("unknown ablation combo '" + name + "'");
}

bool MavAnalysis::blew_up(Index k) const {
    for (const auto& r : rows)
        if (r.k == k && r.blowup) return true;
    return false;
}

double MavAnalysis::peak(Index k) const {
    double best = 0;
    for (const auto& r : rows)
        if (r.k == k && !r.blowup) best = std::max(best, r.max);
    return best;
}

MavAnalysis run_mav_analysis(const AblationConfig& cfg, Index h2, const std::vector<Index>& k_list, Index n_steps,
                             Index n_samples, std::uint64_t seed) {
    if (k_list.empty()) throw ValidationError("run_mav_analysis: k_list is empty");
    if (h2 < 1 || n_steps < 1 || n_samples < 1) throw ValidationError("run_mav_analysis: sizes must be >= 1");
    MavAnalysis out;
    for (Index k : k_list) {
        Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(k));
        const LayerParams layer = build_ablated_layer(h2, k, 1, cfg, rng);
        Matrix sum_abs = Matrix::Zero(n_steps, k);
        std::vector<bool> bad(static_cast<std::size_t>(n_steps), false);
        for (Index s = 0; s < n_samples; ++s) {
            const Matrix path = sample_gaussian(rng, n_steps, h2, 0.0, 1.0);
            const MavTrace trace = mav_trace(layer, path);
            sum_abs += trace.per_k;
            for (Index j = 0; j < n_steps; ++j) {
                const double row_max = trace.per_k.row(j).maxCoeff();
                if (!trace.per_k.row(j).allFinite() || !(row_max <= kBlowupThreshold))
                    bad[static_cast<std::size_t>(j)] = true;
            }
        }
        const Matrix avg = sum_abs / static_cast<double>(n_samples);
        bool flagged = false;
        for (Index j = 0; j < n_steps; ++j) {
            flagged = flagged || bad[static_cast<std::size_t>(j)];
            MavRow row;
            row.k = k;
            row.step = j + 1;
            row.mean = avg.row(j).mean();
            row.min = avg.row(j).minCoeff();
            row.max = avg.row(j).maxCoeff();
            row.blowup = flagged;
            out.rows.push_back(row);
        }
    }
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string mav_csv(const MavAnalysis& analysis) {
    std::ostringstream out;
    out << "k,step,mean,min,max,blowup\n";
    for (const auto& r : analysis.rows)
        out << r.k << ',' << r.step << ',' << fmt(r.mean) << ',' << fmt(r.min) << ',' << fmt(r.max) << ','
            << (r.blowup ? 1 : 0) << '\n';
    return out.str();
}

std::vector<GridRow> ablation_grid(const GridTask& task, const std::vector<AblationConfig>& combos,
                                   const DatasetSplit<Sample>& split) {
    if (combos.empty()) throw ValidationError("ablation_grid: no combos");
    std::vector<GridRow> rows;
    for (const auto& combo : combos) {
        GridRow row;
        row.combo = combo;
        ModelConfig mc = task.model;
        mc.layer = combo.layer_options();
        Rng rng(task.model_seed);
        const GSignatureModel model = make_model(mc, rng);
        row.params = count_parameters(model);
        try {
            const TrainResult result = train(model, split, task.train);
            row.val_mse = result.history.best_val_loss;
            row.blowup = !std::isfinite(row.val_mse) || row.val_mse > kBlowupThreshold;
        } catch (const NumericError& e) {
            row.val_mse = std::numeric_limits<double>::infinity();
            row.blowup = true;
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string grid_csv(const std::vector<GridRow>& rows) {
    std::ostringstream out;
    out << "combo,omit_sparsity,omit_init,omit_activation,freeze_weights,activation_override,val_mse,params,blowup\n";
    for (const auto& r : rows) {
        const auto& c = r.combo;
        out << c.name << ',' << c.omit_sparsity << ',' << c.omit_init << ',' << c.omit_activation << ','
            << c.freeze_weights << ',' << to_string(c.activation_override) << ',' << fmt(r.val_mse) << ',' << r.params
            << ',' << (r.blowup ? 1 : 0) << '\n';
    }
    return out.str();
}

} // namespace gsig
