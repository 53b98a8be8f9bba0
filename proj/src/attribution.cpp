#include "cfnn/attribution.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

namespace cfnn {

static double mse_rows(const Model& model, const Matrix& X,
                       std::span<const double> y, std::span<const size_t> idx) {
    double acc = 0.0;
    for (size_t i : idx) {
        double e = predict(model, X.row(i)) - y[i];
        acc += e * e;
    }
    return acc / static_cast<double>(idx.size());
}

ImportanceEstimate permutation_importance(const Model& model, const Matrix& X,
                                          std::span<const double> y,
                                          std::span<const size_t> idx,
                                          int repeats, uint64_t seed) {
    if (idx.empty()) throw InvalidConfig("permutation importance needs a non-empty split");
    if (repeats < 2) throw InvalidConfig("permutation importance needs repeats >= 2");

    size_t d = X.cols;
    size_t n = idx.size();
    double base = mse_rows(model, X, y, idx);

    ImportanceEstimate est;
    est.method = "permutation";
    est.seed = seed;
    est.sample_budget = static_cast<long>(repeats) * static_cast<long>(n);
    est.mean.assign(d, 0.0);
    est.std.assign(d, 0.0);

    std::vector<double> row(d);
    std::vector<size_t> perm(n);
    for (size_t j = 0; j < d; ++j) {
        Rng rng = Rng::substream(seed, static_cast<uint64_t>(j));
        std::vector<double> deltas;
        deltas.reserve(static_cast<size_t>(repeats));
        for (int r = 0; r < repeats; ++r) {
            for (size_t i = 0; i < n; ++i) perm[i] = idx[i];
            rng.shuffle(perm);
            double acc = 0.0;
            for (size_t i = 0; i < n; ++i) {
                auto src = X.row(idx[i]);
                std::copy(src.begin(), src.end(), row.begin());
                row[j] = X(perm[i], j);
                double e = predict(model, row) - y[idx[i]];
                acc += e * e;
            }
            deltas.push_back(acc / static_cast<double>(n) - base);
        }
        double m = 0.0;
        for (double v : deltas) m += v;
        m /= static_cast<double>(repeats);
        double var = 0.0;
        for (double v : deltas) var += (v - m) * (v - m);
        est.mean[j] = std::max(0.0, m);
        est.std[j] = std::sqrt(var / static_cast<double>(repeats));
    }
    return est;
}

std::vector<double> background_mean(const Matrix& X, std::span<const size_t> idx) {
    std::vector<double> mu(X.cols, 0.0);
    for (size_t i : idx)
        for (size_t j = 0; j < X.cols; ++j) mu[j] += X(i, j);
    for (double& v : mu) v /= static_cast<double>(idx.size());
    return mu;
}

std::vector<double> sampled_shapley_row(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, std::span<const double> background,
    int samples_per_feature, uint64_t seed) {
    size_t d = x.size();
    if (d > 32) throw TooManyFeatures("sampled shapley supports at most 32 features");
    if (samples_per_feature < 16)
        throw InvalidConfig("sampled shapley needs samples_per_feature >= 16");

    Rng rng(seed);
    std::vector<int> order(d);
    std::vector<double> point(background.begin(), background.end());
    std::vector<double> phi(d, 0.0);
    for (int s = 0; s < samples_per_feature; ++s) {
        for (size_t i = 0; i < d; ++i) order[i] = static_cast<int>(i);
        rng.shuffle(order);
        std::copy(background.begin(), background.end(), point.begin());
        double prev = f(point);
        for (size_t k = 0; k < d; ++k) {
            size_t j = static_cast<size_t>(order[k]);
            point[j] = x[j];
            double cur = f(point);
            phi[j] += cur - prev;
            prev = cur;
        }
    }
    for (double& v : phi) v /= static_cast<double>(samples_per_feature);
    return phi;
}

ImportanceEstimate sampled_shapley(const Model& model, const Matrix& X,
                                   std::span<const size_t> background_idx,
                                   std::span<const size_t> explain_idx,
                                   int samples_per_feature, uint64_t seed) {
    if (background_idx.empty() || explain_idx.empty())
        throw InvalidConfig("sampled shapley needs non-empty splits");
    size_t d = X.cols;
    std::vector<double> bg = background_mean(X, background_idx);

    auto f = [&](std::span<const double> p) { return predict(model, p); };

    ImportanceEstimate est;
    est.method = "sampled_shapley";
    est.seed = seed;
    est.sample_budget =
        static_cast<long>(samples_per_feature) * static_cast<long>(explain_idx.size());
    est.mean.assign(d, 0.0);
    est.std.assign(d, 0.0);

    std::vector<double> sumsq(d, 0.0);
    for (size_t r = 0; r < explain_idx.size(); ++r) {
        auto phi = sampled_shapley_row(f, X.row(explain_idx[r]), bg,
                                       samples_per_feature,
                                       Rng::substream(seed, r).next_u64());
        for (size_t j = 0; j < d; ++j) {
            double a = std::fabs(phi[j]);
            est.mean[j] += a;
            sumsq[j] += a * a;
        }
    }
    double n = static_cast<double>(explain_idx.size());
    for (size_t j = 0; j < d; ++j) {
        est.mean[j] /= n;
        est.std[j] = std::sqrt(std::max(0.0, sumsq[j] / n - est.mean[j] * est.mean[j]));
    }
    return est;
}

std::vector<double> exact_shapley_smalld(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, std::span<const double> background) {
    size_t d = x.size();
    if (d > 10) throw TooManyFeatures("exact shapley enumeration limited to d <= 10");

    size_t n_coal = 1ULL << d;
    std::vector<double> value(n_coal);
    std::vector<double> point(d);
    for (size_t mask = 0; mask < n_coal; ++mask) {
        for (size_t j = 0; j < d; ++j)
            point[j] = (mask >> j) & 1U ? x[j] : background[j];
        value[mask] = f(point);
    }

    // |S|! (d-|S|-1)! / d!
    std::vector<double> fact(d + 1, 1.0);
    for (size_t i = 1; i <= d; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
    std::vector<double> weight(d);
    for (size_t s = 0; s < d; ++s) weight[s] = fact[s] * fact[d - s - 1] / fact[d];

    std::vector<double> phi(d, 0.0);
    for (size_t mask = 0; mask < n_coal; ++mask) {
        size_t sz = static_cast<size_t>(std::popcount(mask));
        for (size_t j = 0; j < d; ++j) {
            if ((mask >> j) & 1U) continue;
            phi[j] += weight[sz] * (value[mask | (1ULL << j)] - value[mask]);
        }
    }
    return phi;
}

void write_importance_csv(const std::string& path, const ImportanceEstimate& est) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "feature,mean,std,method,seed\n";
    out.precision(17);
    for (size_t j = 0; j < est.mean.size(); ++j)
        out << j << ',' << est.mean[j] << ',' << est.std[j] << ',' << est.method
            << ',' << est.seed << '\n';
}

}  // namespace cfnn
