#pragma once

#include "gsig/run_config.hpp"
#include "gsig/tensor_io.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gsig {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitIo = 1,
    kExitValidation = 2,
    kExitNumeric = 3,
    kExitGradcheck = 4,
    kExitSigcheck = 5,
};

struct CommandOptions {
    std::optional<std::filesystem::path> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool corrupt_gradient = false;  // gradcheck negative control
};

/// Loads the config (if any) and applies --seed / --out overrides.
RunConfig resolve_config(const CommandOptions& opts, bool config_required);

// --------------------------------------------------------------- data

struct GeneratedDataset {
    nlohmann::json meta;
    std::vector<std::pair<std::string, Tensor>> files;  // file name -> tensor
};

inline constexpr int kGeneratorVersion = 1;

GeneratedDataset generate_dataset(const RunConfig& cfg);

/// Reads the files written by `gen` and turns them into model samples.
DatasetSplit<Sample> load_samples(const RunConfig& cfg);

/// Builds samples straight from a generated dataset (no disk round trip
/// of the container beyond float32 rounding).
DatasetSplit<Sample> samples_from_dataset(const RunConfig& cfg, const GeneratedDataset& data);

ModelConfig model_config_for(const RunConfig& cfg, const DatasetSplit<Sample>& data);

// --------------------------------------------------------- checkpoints

struct Checkpoint {
    GSignatureModel model;
    Normalizer normalizer;
};

void add_checkpoint_files(AtomicBatch& batch, const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

// ------------------------------------------------------------ commands

int cmd_gen(const RunConfig& cfg, std::ostream& out);
int cmd_train(const RunConfig& cfg, std::ostream& out);
int cmd_eval(const RunConfig& cfg, std::ostream& out);
int cmd_gradcheck(const RunConfig& cfg, bool corrupt, std::ostream& out);
int cmd_sigcheck(const RunConfig& cfg, std::ostream& out);
int cmd_ablate(const RunConfig& cfg, std::ostream& out);

/// Runs a subcommand by name and maps exceptions to exit codes, printing
/// diagnostics to `err`.
int run_command(const std::string& name, const CommandOptions& opts, std::ostream& out, std::ostream& err);

} // namespace gsig
