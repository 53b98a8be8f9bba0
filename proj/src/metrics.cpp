#include "cfnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cfnn {

AccuracyMetrics accuracy_metrics(std::span<const double> pred,
                                 std::span<const double> truth) {
    if (pred.size() != truth.size() || pred.size() < 2)
        throw InvalidConfig("accuracy_metrics needs equal lengths >= 2");
    AccuracyMetrics m;
    size_t n = pred.size();
    double mean = std::accumulate(truth.begin(), truth.end(), 0.0) /
                  static_cast<double>(n);
    double ss_res = 0.0, ss_tot = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double e = pred[i] - truth[i];
        m.mse += e * e;
        m.mae += std::fabs(e);
        ss_res += e * e;
        ss_tot += (truth[i] - mean) * (truth[i] - mean);
    }
    m.mse /= static_cast<double>(n);
    m.mae /= static_cast<double>(n);
    m.rmse = std::sqrt(m.mse);
    if (ss_tot == 0.0) {
        m.r2_defined = false;
        m.r2 = std::numeric_limits<double>::quiet_NaN();
    } else {
        m.r2 = 1.0 - ss_res / ss_tot;
    }
    return m;
}

std::optional<double> lead_percent(double metric_mlp, double metric_cfnn) {
    if (metric_mlp == 0.0) return std::nullopt;
    return (metric_mlp - metric_cfnn) / metric_mlp * 100.0;
}

std::vector<std::complex<double>> fft(std::span<const double> series) {
    size_t n = series.size();
    if (n < 2 || (n & (n - 1)) != 0)
        throw DomainError("fft length must be a power of two >= 2");

    std::vector<std::complex<double>> a(n);
    // bit-reversal permutation
    size_t log2n = 0;
    while ((1ULL << log2n) < n) ++log2n;
    for (size_t i = 0; i < n; ++i) {
        size_t rev = 0;
        for (size_t b = 0; b < log2n; ++b)
            if (i & (1ULL << b)) rev |= 1ULL << (log2n - 1 - b);
        a[rev] = series[i];
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double angle = -2.0 * M_PI / static_cast<double>(len);
        std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t j = 0; j < len / 2; ++j) {
                std::complex<double> u = a[i + j];
                std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    return a;
}

static std::vector<double> one_sided_psd(std::span<const double> series) {
    size_t n = series.size();
    size_t padded = 1;
    while (padded < n) padded <<= 1;
    if (padded < 2) padded = 2;
    std::vector<double> buf(series.begin(), series.end());
    buf.resize(padded, 0.0);
    auto spec = fft(buf);
    std::vector<double> psd(padded / 2 + 1);
    for (size_t i = 0; i < psd.size(); ++i)
        psd[i] = std::norm(spec[i]) / static_cast<double>(padded);
    return psd;
}

SpectralReport spectral_report(std::span<const double> residual,
                               std::span<const double> target,
                               double band_split_fraction) {
    if (residual.size() != target.size())
        throw InvalidConfig("spectral_report needs equal lengths");
    constexpr double kFloor = 1e-12;

    SpectralReport rep;
    rep.band_split_fraction = band_split_fraction;
    std::vector<double> psd_res = one_sided_psd(residual);
    std::vector<double> psd_tgt = one_sided_psd(target);
    size_t bins = psd_res.size();
    size_t padded = (bins - 1) * 2;

    rep.frequencies.resize(bins);
    rep.relative_psd.resize(bins);
    rep.floored.resize(bins);
    rep.cumulative.resize(bins);
    double running = 0.0;
    for (size_t i = 0; i < bins; ++i) {
        rep.frequencies[i] = static_cast<double>(i) / static_cast<double>(padded);
        bool floored = psd_tgt[i] < kFloor;
        rep.floored[i] = floored;
        rep.relative_psd[i] = psd_res[i] / (floored ? kFloor : psd_tgt[i]);
        running += rep.relative_psd[i];
        rep.cumulative[i] = running;
    }

    // band split at band_split_fraction * f_max; DC sits in the low band
    double f_split = band_split_fraction * rep.frequencies.back();
    double low_sum = 0.0, high_sum = 0.0;
    size_t low_n = 0, high_n = 0;
    for (size_t i = 0; i < bins; ++i) {
        if (rep.frequencies[i] < f_split) {
            low_sum += rep.relative_psd[i];
            ++low_n;
        } else {
            high_sum += rep.relative_psd[i];
            ++high_n;
        }
    }
    rep.low_band_mean = low_n ? low_sum / static_cast<double>(low_n) : 0.0;
    rep.high_band_mean = high_n ? high_sum / static_cast<double>(high_n) : 0.0;
    return rep;
}

std::vector<int> importance_ranking(std::span<const double> importance) {
    std::vector<int> order(importance.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (importance[static_cast<size_t>(a)] != importance[static_cast<size_t>(b)])
            return importance[static_cast<size_t>(a)] >
                   importance[static_cast<size_t>(b)];
        return a < b;
    });
    return order;
}

double spearman_rho(std::span<const int> ranking_a, std::span<const int> ranking_b) {
    size_t n = ranking_a.size();
    if (n != ranking_b.size() || n < 2)
        throw InvalidConfig("spearman needs two equal rankings of length >= 2");
    std::vector<int> pos_a(n), pos_b(n);
    for (size_t r = 0; r < n; ++r) {
        pos_a[static_cast<size_t>(ranking_a[r])] = static_cast<int>(r);
        pos_b[static_cast<size_t>(ranking_b[r])] = static_cast<int>(r);
    }
    double d2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double d = pos_a[i] - pos_b[i];
        d2 += d * d;
    }
    double nn = static_cast<double>(n);
    return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

AttributionReport interpretability_scores(std::span<const double> importance,
                                          std::span<const FeatureRole> roles,
                                          int k, double reference_nsr) {
    if (importance.size() != roles.size())
        throw InvalidConfig("importance/roles length mismatch");
    AttributionReport rep;
    rep.importance.assign(importance.begin(), importance.end());
    rep.ranking = importance_ranking(importance);

    double signal_mass = 0.0, nuisance_mass = 0.0;
    for (size_t i = 0; i < roles.size(); ++i) {
        if (roles[i] == FeatureRole::Signal)
            signal_mass += std::fabs(importance[i]);
        else
            nuisance_mass += std::fabs(importance[i]);
    }
    if (signal_mass == 0.0) {
        rep.nsr_defined = false;
        rep.nsr = std::numeric_limits<double>::infinity();
    } else {
        rep.nsr = nuisance_mass / signal_mass;
    }
    rep.suppression = reference_nsr > 0.0 ? rep.nsr / reference_nsr : 0.0;

    int n_signal = 0;
    double rank_sum = 0.0;
    int in_topk = 0;
    for (size_t r = 0; r < rep.ranking.size(); ++r) {
        size_t f = static_cast<size_t>(rep.ranking[r]);
        if (roles[f] == FeatureRole::Signal) {
            ++n_signal;
            rank_sum += static_cast<double>(r + 1);  // 1-based rank
            if (static_cast<int>(r) < k) ++in_topk;
        }
    }
    if (n_signal > 0) {
        rep.mir = rank_sum / n_signal;
        rep.topk_accuracy = static_cast<double>(in_topk) / n_signal;
    }
    return rep;
}

AttributionReport domain_alignment_scores(
    std::span<const double> importance, std::span<const int> truth_ranking,
    std::span<const std::pair<int, int>> key_pairs, int top_k) {
    AttributionReport rep;
    rep.importance.assign(importance.begin(), importance.end());
    rep.ranking = importance_ranking(importance);
    rep.spearman_rho = spearman_rho(rep.ranking, truth_ranking);

    size_t n = importance.size();
    std::vector<int> pos(n);
    for (size_t r = 0; r < n; ++r)
        pos[static_cast<size_t>(rep.ranking[r])] = static_cast<int>(r);
    if (!key_pairs.empty()) {
        int ok = 0;
        for (auto [a, b] : key_pairs)
            if (pos[static_cast<size_t>(a)] < pos[static_cast<size_t>(b)]) ++ok;
        rep.ranking_consistency =
            static_cast<double>(ok) / static_cast<double>(key_pairs.size());
    }
    int hits = 0;
    for (int r = 0; r < top_k; ++r)
        for (int s = 0; s < top_k; ++s)
            if (rep.ranking[static_cast<size_t>(r)] ==
                truth_ranking[static_cast<size_t>(s)])
                ++hits;
    rep.top3_accuracy = static_cast<double>(hits) / static_cast<double>(top_k);
    return rep;
}

}  // namespace cfnn
