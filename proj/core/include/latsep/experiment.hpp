#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latsep/datagen.hpp"
#include "latsep/refine.hpp"
#include "latsep/separator.hpp"
#include "latsep/types.hpp"

namespace latsep {

// End-to-end benchmark description. Models are either trained in-run from a
// generated training split or loaded from files; the test split is either
// generated or read from a paired dataset file.
struct ExperimentConfig {
    std::uint64_t seed = 0;

    // generated data (used unless pairs_path is set)
    SourceSpec spec1;
    SourceSpec spec2;
    int train_pairs = 0;
    int test_pairs = 0;
    int length = 0;
    std::optional<std::string> pairs_path;  // pre-built test pairs

    // in-run training parameters
    int codebook_k = 64;
    int patch_len = 4;
    std::uint64_t codec_seed = 0;
    int prior_order = 3;
    double prior_delta = 0.1;

    // pre-built models override in-run training when all four are set
    std::optional<std::string> codec_path;
    std::optional<std::string> likelihood_path;
    std::optional<std::string> prior1_path;
    std::optional<std::string> prior2_path;

    SeparationConfig separation;
    std::optional<RefinementConfig> refinement;
    int threads = 0;  // 0 = hardware concurrency
};

ExperimentConfig parse_experiment_config(const std::string& json_text);

// Config for emitting a standalone paired dataset file:
// {"spec1": {...}, "spec2": {...}, "count": int, "length": int, "seed": int}.
struct DatasetGenConfig {
    SourceSpec spec1;
    SourceSpec spec2;
    int count = 0;
    int length = 0;
    std::uint64_t seed = 0;
};

DatasetGenConfig parse_dataset_gen_config(const std::string& json_text);

struct MixtureResult {
    int index = 0;
    double psnr1 = 0.0;
    double psnr2 = 0.0;
    double baseline1 = 0.0;
    double baseline2 = 0.0;
    double logscore = 0.0;
    double residual = 0.0;
    double wall_seconds = 0.0;  // not serialized; reports stay reproducible
};

struct ExperimentReport {
    std::string config_echo;  // canonical JSON of the parsed config
    int k = 0;
    double likelihood_density = 0.0;
    std::vector<MixtureResult> mixtures;
    double mean_psnr = 0.0;
    double stddev_psnr = 0.0;
    double baseline_mean_psnr = 0.0;
    double mean_wall_seconds = 0.0;
};

// Builds the models, separates every test mixture (in parallel; mixture i
// always uses seed derive_seed(separation.seed, i), so results do not depend
// on the thread count) and scores PSNR under the better of the two
// source-to-estimate assignments.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Deterministic JSON serialization of the report. Wall-clock fields are
// deliberately excluded; timing goes to the human-readable table only.
std::string report_json(const ExperimentReport& report);

std::string report_table(const ExperimentReport& report);

// Self-validation of the inference engine against exhaustive enumeration.
struct OracleCheck {
    std::string test;
    bool pass = false;
    double max_error = 0.0;
};

std::vector<OracleCheck> run_oracle_checks();
std::string oracle_checks_json(const std::vector<OracleCheck>& checks);

}  // namespace latsep
