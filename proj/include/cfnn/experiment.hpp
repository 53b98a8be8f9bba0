#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfnn/datagen.hpp"
#include "cfnn/models.hpp"
#include "cfnn/optim.hpp"

namespace cfnn {

struct ParetoPoint {
    long param_count = 0;
    double test_mse = 0.0;
    std::string tag;
    uint64_t seed = 0;
};

// Non-dominated subset under (param_count <=, test_mse <=) with at least one
// strict inequality; exact ties are kept. Sorted by param_count.
std::vector<ParetoPoint> pareto_front(std::vector<ParetoPoint> points);

// Smallest frontier param_count with test_mse < threshold; nullopt when the
// threshold is never reached (rendered as "unreached" in summaries).
std::optional<long> threshold_params(std::span<const ParetoPoint> frontier,
                                     double mse_threshold);

struct ExperimentConfig {
    std::string protocol;
    std::string output_dir;
    std::vector<uint64_t> seeds;
    nlohmann::json raw;  // full config, snapshotted into the artifact dir
};

ExperimentConfig parse_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_json(const nlohmann::json& j);

// Executes the named protocol and writes the artifact directory
// (config snapshot, metrics/telemetry CSVs, models, summary.json).
// dry_run only validates and enumerates the planned runs.
int run_protocol(const ExperimentConfig& cfg, bool dry_run = false);

// Config-fragment helpers, shared with tests.
ModelConfig model_config_from_json(const nlohmann::json& j);
std::string model_tag(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
Dataset dataset_from_json(const nlohmann::json& j, uint64_t seed);

}  // namespace cfnn
