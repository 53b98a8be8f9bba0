#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfnn/common.hpp"
#include "cfnn/funcs.hpp"

namespace cfnn {

enum class FeatureRole : uint8_t { Signal, Redundant, Deceptive, Noise, External };

std::string role_name(FeatureRole r);

struct Split {
    std::vector<size_t> train;
    std::vector<size_t> val;
    std::vector<size_t> test;
};

// Seeded shuffle then contiguous cut. Rounding goes toward train: val and
// test take the floor of their proportions.
Split make_split(size_t n, double p_train, double p_val, double p_test,
                 uint64_t seed);

struct Dataset {
    Matrix X;
    std::vector<double> y;
    std::vector<FeatureRole> feature_roles;
    Split split;
    std::string provenance;  // JSON: generator id + seed + parameters

    size_t n() const { return X.rows; }
    size_t d() const { return X.cols; }
};

// Uniform sampling over the target's domain with singularity exclusions;
// y is the exact oracle value.
Dataset sample_function(const TargetFunction& target, size_t n, uint64_t seed);

struct NoiseBenchmarkConfig {
    size_t n = 5000;
    double obs_sigma = 0.05;
    int redundant = 2;
    int deceptive = 1;
    // Either an explicit noise-column count or a target uninformative ratio.
    std::optional<int> noise_columns;
    double noise_ratio = 0.0;
    double deceptive_corr = 0.8;
    uint64_t seed = 42;
};

// y = sin(x1) + cos(x2) + x3*x4 + eps over 4 standard-normal signal columns,
// plus redundant / deceptive / pure-noise columns. The deceptive column is
// y-aligned on the train split and redrawn independently elsewhere.
Dataset gen_noise_benchmark(const NoiseBenchmarkConfig& cfg);

struct CsvOptions {
    bool has_header = true;
    bool standardize = false;  // z-score per column from train-split stats
    uint64_t split_seed = 42;
};

Dataset load_csv(const std::string& path, const std::string& target_column,
                 const CsvOptions& opts);

// Replays a dataset from its provenance record (bitwise).
Dataset regenerate(const std::string& provenance_json);

void write_csv(const Dataset& ds, const std::string& path);
void write_provenance(const Dataset& ds, const std::string& path);

double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace cfnn
