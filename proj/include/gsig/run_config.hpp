#pragma once

#include "gsig/ablation.hpp"
#include "gsig/datagen.hpp"
#include "gsig/graphconv.hpp"
#include "gsig/trainer.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gsig {

enum class TaskKind { Eta, Kpz, PointCloud };

TaskKind parse_task(const std::string& text);
std::string to_string(TaskKind task);

struct EtaDataConfig {
    Index nodes = 50;
    Index edges = 120;
    bool shared_topology = true;  // one topology per dataset, weights redrawn per graph
    double cap_factor = 1.0;      // non-edges embed as cap_factor * n * max weight
    Index m = 3;
    SplitSizes split{256, 64, 64};
};

struct KpzDataConfig {
    KpzParams params;
    Index in_steps = 10;
    Index out_steps = 10;
    SplitSizes split{32, 8, 8};  // trajectories
};

struct PointCloudDataConfig {
    Index points = 32;
    int classes = 4;
    Index per_class = 48;
    double jitter = 0.02;
    Index m = 3;
    SplitSizes split{128, 32, 32};
};

struct ModelSection {
    Index h1 = 32;
    Index h2 = 32;
    Index k = 16;
    Index heads = 2;
    Index layers = 1;
    LayerOptions layer;
    std::optional<InputMode> input_mode;  // task default when unset
};

struct TrainSection {
    TrainConfig cfg;
    bool normalize_inputs = true;
    bool center_targets = true;
};

struct AblateSection {
    bool mav = true;
    bool grid = false;
    Index h2 = 64;
    std::vector<Index> k_list{16, 64};
    Index steps = 100;
    Index samples = 4;
    std::vector<std::string> combos;  // empty = the standard eleven
    int grid_epochs = 100;
};

struct GradcheckSection {
    double eps = 1e-3;
    double tolerance = 1e-5;
};

/// Parsed run configuration. Unknown keys anywhere are rejected.
struct RunConfig {
    TaskKind task = TaskKind::Eta;
    std::uint64_t seed = 0;
    std::string out = "run";
    std::optional<std::string> data_dir;  // default <out>/data

    EtaDataConfig eta;
    KpzDataConfig kpz;
    PointCloudDataConfig pointcloud;
    ModelSection model;
    TrainSection train;
    AblateSection ablate;
    GradcheckSection gradcheck;

    static RunConfig from_json(const nlohmann::json& doc);
    static RunConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    std::filesystem::path data_path() const;
    InputMode input_mode() const;

    /// Independent seeds per purpose, derived from `seed`.
    std::uint64_t derived_seed(const std::string& purpose) const;
};

} // namespace gsig
