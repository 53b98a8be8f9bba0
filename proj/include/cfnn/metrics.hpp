#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "cfnn/common.hpp"
#include "cfnn/datagen.hpp"

namespace cfnn {

struct AccuracyMetrics {
    double mse = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
    double r2 = 0.0;
    bool r2_defined = true;  // false when the target is constant
};

AccuracyMetrics accuracy_metrics(std::span<const double> pred,
                                 std::span<const double> truth);

// (metric_mlp - metric_cfnn) / metric_mlp * 100; positive means the CFNN
// side wins. Undefined when the baseline metric is zero.
std::optional<double> lead_percent(double metric_mlp, double metric_cfnn);

// Radix-2 iterative FFT; length must be a power of two (callers zero-pad).
std::vector<std::complex<double>> fft(std::span<const double> series);

struct SpectralReport {
    std::vector<double> frequencies;   // cycles/sample, one-sided
    std::vector<double> relative_psd;  // residual PSD / target PSD (floored)
    std::vector<bool> floored;         // bins where the target PSD hit the floor
    std::vector<double> cumulative;    // running prefix sum of relative_psd
    double low_band_mean = 0.0;        // f < band_split_fraction * f_max
    double high_band_mean = 0.0;
    double band_split_fraction = 0.25;
};

SpectralReport spectral_report(std::span<const double> residual,
                               std::span<const double> target,
                               double band_split_fraction = 0.25);

struct AttributionReport {
    std::vector<double> importance;
    std::vector<int> ranking;  // descending importance, ties by column index
    double nsr = 0.0;
    bool nsr_defined = true;  // false when signal attribution is zero
    double mir = 0.0;
    double topk_accuracy = 0.0;
    double suppression = 0.0;  // nsr / reference_nsr (0 when no reference given)
    double spearman_rho = 0.0;
    double ranking_consistency = 0.0;
    double top3_accuracy = 0.0;
};

// Synthetic-benchmark mode: roles mark which features are signal.
AttributionReport interpretability_scores(std::span<const double> importance,
                                          std::span<const FeatureRole> roles,
                                          int k = 5,
                                          double reference_nsr = 0.0);

// Domain-knowledge mode: a ground-truth importance ordering (best first) and
// key pairs (a should outrank b).
AttributionReport domain_alignment_scores(
    std::span<const double> importance, std::span<const int> truth_ranking,
    std::span<const std::pair<int, int>> key_pairs, int top_k = 3);

std::vector<int> importance_ranking(std::span<const double> importance);

double spearman_rho(std::span<const int> ranking_a, std::span<const int> ranking_b);

}  // namespace cfnn
