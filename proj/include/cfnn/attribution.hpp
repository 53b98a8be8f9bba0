#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cfnn/datagen.hpp"
#include "cfnn/models.hpp"

namespace cfnn {

struct ImportanceEstimate {
    std::vector<double> mean;  // per-feature, non-negative for permutation
    std::vector<double> std;   // across repeats (permutation) or MC std (shapley)
    std::string method;
    long sample_budget = 0;
    uint64_t seed = 0;
};

// importance_j = mean over repeats of [MSE(column j shuffled) - MSE(baseline)],
// clamped at zero.
ImportanceEstimate permutation_importance(const Model& model, const Matrix& X,
                                          std::span<const double> y,
                                          std::span<const size_t> idx,
                                          int repeats, uint64_t seed);

// Monte-Carlo permutation-sampling Shapley with background-mean imputation.
// Global importance = mean |per-sample Shapley| over the explain rows.
ImportanceEstimate sampled_shapley(const Model& model, const Matrix& X,
                                   std::span<const size_t> background_idx,
                                   std::span<const size_t> explain_idx,
                                   int samples_per_feature, uint64_t seed);

// Per-sample Shapley values for one input row.
std::vector<double> sampled_shapley_row(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, std::span<const double> background,
    int samples_per_feature, uint64_t seed);

// Exact coalition enumeration, 2^d coalitions; throws TooManyFeatures for d > 10.
std::vector<double> exact_shapley_smalld(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, std::span<const double> background);

// Column means of the selected rows (the single-reference background vector).
std::vector<double> background_mean(const Matrix& X, std::span<const size_t> idx);

void write_importance_csv(const std::string& path, const ImportanceEstimate& est);

}  // namespace cfnn
