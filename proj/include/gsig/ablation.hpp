#pragma once

#include "gsig/trainer.hpp"

#include <string>
#include <vector>

namespace gsig {

enum class ActivationOverride { None, Sigmoid, Tanh };

ActivationOverride parse_activation_override(const std::string& text);
std::string to_string(ActivationOverride a);

/// Which layer adjustments to drop. All flags off is the full method.
struct AblationConfig {
    std::string name = "none";
    bool omit_sparsity = false;
    bool omit_init = false;
    bool omit_activation = false;
    bool freeze_weights = false;
    ActivationOverride activation_override = ActivationOverride::None;

    LayerOptions layer_options() const;
};

LayerParams build_ablated_layer(Index n_coords, Index k, Index heads, const AblationConfig& cfg, Rng& rng);

/// none, trainability, all, the three single omissions, the three pairs,
/// sigmoid and tanh.
std::vector<AblationConfig> standard_combos();

/// Looks up a combo from standard_combos() by name.
AblationConfig combo_by_name(const std::string& name);

// -------------------------------------------------------- MAV analysis

/// |z| above this (or non-finite) marks a step as blown up.
inline constexpr double kBlowupThreshold = 1e12;

struct MavRow {
    Index k = 0;
    Index step = 0;  // 1-based
    double mean = 0; // mean over state entries of the sample-averaged |z|
    double min = 0;  // over state entries
    double max = 0;
    bool blowup = false;
};

struct MavAnalysis {
    std::vector<MavRow> rows;  // k-major, then step

    bool blew_up(Index k) const;
    /// Largest `max` over non-flagged rows of k (0 if none).
    double peak(Index k) const;
};

/// Runs the forward recurrence of a fresh ablated layer (one head) on
/// n_samples standard-normal paths of n_steps x h2 for each k. Each k uses
/// its own sub-stream of `seed`. Once a step blows up, every later step of
/// that k is flagged too.
MavAnalysis run_mav_analysis(const AblationConfig& cfg, Index h2, const std::vector<Index>& k_list, Index n_steps,
                             Index n_samples, std::uint64_t seed);

std::string mav_csv(const MavAnalysis& analysis);

// --------------------------------------------------------------- grid

struct GridTask {
    ModelConfig model;
    TrainConfig train;
    std::uint64_t model_seed = 0;
};

struct GridRow {
    AblationConfig combo;
    double val_mse = 0;  // best validation loss; +inf when training failed
    Index params = 0;
    bool blowup = false;
    std::string error;
};

/// Trains every combo with the same seeds and budget. Numeric failures
/// become rows with blowup = true.
std::vector<GridRow> ablation_grid(const GridTask& task, const std::vector<AblationConfig>& combos,
                                   const DatasetSplit<Sample>& split);

std::string grid_csv(const std::vector<GridRow>& rows);

} // namespace gsig
