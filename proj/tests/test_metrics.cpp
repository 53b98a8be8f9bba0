#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numeric>

#include "cfnn/metrics.hpp"

using namespace cfnn;

TEST_CASE("accuracy metrics: hand values and degenerate targets") {
    std::vector<double> truth{1.0, 2.0, 4.0};
    std::vector<double> exact{1.0, 2.0, 4.0};
    AccuracyMetrics m = accuracy_metrics(exact, truth);
    CHECK(m.mse == 0.0);
    CHECK(m.rmse == 0.0);
    CHECK(m.mae == 0.0);
    CHECK(m.r2 == doctest::Approx(1.0));
    CHECK(m.r2_defined);

    std::vector<double> pred{1.0, 2.0, 3.0};
    m = accuracy_metrics(pred, truth);
    CHECK(m.mse == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(m.mae == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(m.rmse == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-15));
    CHECK(m.r2 == doctest::Approx(11.0 / 14.0).epsilon(1e-14));

    std::vector<double> flat{5.0, 5.0, 5.0};
    m = accuracy_metrics(pred, flat);
    CHECK(!m.r2_defined);
    CHECK(std::isnan(m.r2));

    std::vector<double> shorter{1.0};
    CHECK_THROWS_AS(accuracy_metrics(shorter, truth), InvalidConfig);
}

TEST_CASE("lead percent") {
    CHECK(lead_percent(2.0, 1.0).value() == doctest::Approx(50.0));
    CHECK(lead_percent(1.0, 1.0).value() == 0.0);
    CHECK(lead_percent(1.0, 2.0).value() == doctest::Approx(-100.0));
    CHECK(!lead_percent(0.0, 1.0).has_value());
}

TEST_CASE("fft: impulse, DC, pure tone, bad lengths") {
    std::vector<double> impulse{1.0, 0.0, 0.0, 0.0};
    auto spec = fft(impulse);
    for (const auto& c : spec) {
        CHECK(c.real() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(c.imag() == doctest::Approx(0.0).epsilon(1e-14));
    }

    std::vector<double> dc{1.0, 1.0, 1.0, 1.0};
    spec = fft(dc);
    CHECK(spec[0].real() == doctest::Approx(4.0).epsilon(1e-14));
    for (size_t k = 1; k < 4; ++k)
        CHECK(std::abs(spec[k]) == doctest::Approx(0.0).epsilon(1e-13));

    // a pure tone concentrates n/2 of magnitude in its bin
    size_t n = 64;
    std::vector<double> tone(n);
    for (size_t i = 0; i < n; ++i)
        tone[i] = std::sin(2.0 * M_PI * 8.0 * static_cast<double>(i) /
                           static_cast<double>(n));
    spec = fft(tone);
    CHECK(std::abs(spec[8]) == doctest::Approx(32.0).epsilon(1e-10));
    CHECK(std::abs(spec[7]) < 1e-10);

    std::vector<double> odd{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(fft(odd), DomainError);
    std::vector<double> single{1.0};
    CHECK_THROWS_AS(fft(single), DomainError);
}

TEST_CASE("fft matches the naive DFT at n=256") {
    size_t n = 256;
    Rng rng(12);
    std::vector<double> x(n);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    auto spec = fft(x);
    double worst = 0.0;
    for (size_t k = 0; k < n; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (size_t j = 0; j < n; ++j) {
            double ang = -2.0 * M_PI * static_cast<double>(k * j) /
                         static_cast<double>(n);
            acc += x[j] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        worst = std::max(worst, std::abs(spec[k] - acc));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("fft satisfies parseval's identity") {
    size_t n = 128;
    Rng rng(13);
    std::vector<double> x(n);
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    auto spec = fft(x);
    double time_energy = 0.0;
    for (double v : x) time_energy += v * v;
    double freq_energy = 0.0;
    for (const auto& c : spec) freq_energy += std::norm(c);
    freq_energy /= static_cast<double>(n);
    CHECK(freq_energy == doctest::Approx(time_energy).epsilon(1e-12));
}

TEST_CASE("spectral report: zero residual, identical residual, band placement") {
    size_t n = 512;
    std::vector<double> target(n), zero(n, 0.0);
    for (size_t i = 0; i < n; ++i)
        target[i] = std::sin(2.0 * M_PI * 10.0 * static_cast<double>(i) /
                             static_cast<double>(n));

    SpectralReport rep = spectral_report(zero, target);
    for (double v : rep.relative_psd) CHECK(v == 0.0);
    CHECK(rep.low_band_mean == 0.0);
    CHECK(rep.high_band_mean == 0.0);
    CHECK(rep.cumulative.back() == 0.0);
    CHECK(rep.frequencies.front() == 0.0);
    CHECK(rep.frequencies.back() == doctest::Approx(0.5));

    rep = spectral_report(target, target);
    for (size_t i = 0; i < rep.relative_psd.size(); ++i)
        if (!rep.floored[i])
            CHECK(rep.relative_psd[i] == doctest::Approx(1.0).epsilon(1e-12));
    double total = std::accumulate(rep.relative_psd.begin(),
                                   rep.relative_psd.end(), 0.0);
    CHECK(rep.cumulative.back() == doctest::Approx(total).epsilon(1e-12));

    // a residual tone far above the split lands in the high band
    std::vector<double> high(n);
    for (size_t i = 0; i < n; ++i)
        high[i] = 0.1 * std::sin(2.0 * M_PI * 200.0 * static_cast<double>(i) /
                                 static_cast<double>(n));
    rep = spectral_report(high, target);
    CHECK(rep.high_band_mean > rep.low_band_mean);

    // and one well below the split lands in the low band
    std::vector<double> low(n);
    for (size_t i = 0; i < n; ++i)
        low[i] = 0.1 * std::sin(2.0 * M_PI * 10.0 * static_cast<double>(i) /
                                static_cast<double>(n));
    rep = spectral_report(low, target);
    CHECK(rep.low_band_mean > rep.high_band_mean);

    std::vector<double> mismatched(100, 0.0);
    CHECK_THROWS_AS(spectral_report(mismatched, target), InvalidConfig);
}

TEST_CASE("importance ranking: descending, ties break by column index") {
    std::vector<double> imp{0.5, 2.0, 1.0};
    std::vector<int> expect{1, 2, 0};
    CHECK(importance_ranking(imp) == expect);

    std::vector<double> tied{1.0, 1.0, 0.0};
    std::vector<int> expect2{0, 1, 2};
    CHECK(importance_ranking(tied) == expect2);
}

TEST_CASE("spearman rho: identical, reversed, half-way") {
    std::vector<int> a{0, 1, 2, 3, 4, 5, 6, 7};
    CHECK(spearman_rho(a, a) == doctest::Approx(1.0));
    std::vector<int> rev(a.rbegin(), a.rend());
    CHECK(spearman_rho(a, rev) == doctest::Approx(-1.0));

    std::vector<int> swapped{1, 0, 2, 3};
    std::vector<int> ident{0, 1, 2, 3};
    // d^2 = 1 + 1 -> rho = 1 - 12/(4*15)
    CHECK(spearman_rho(ident, swapped) == doctest::Approx(1.0 - 12.0 / 60.0));

    std::vector<int> tooshort{0};
    CHECK_THROWS_AS(spearman_rho(tooshort, tooshort), InvalidConfig);
}

TEST_CASE("interpretability scores on labelled roles") {
    std::vector<FeatureRole> roles{FeatureRole::Signal, FeatureRole::Signal,
                                   FeatureRole::Noise, FeatureRole::Redundant};
    std::vector<double> imp{3.0, 2.0, 1.0, 0.0};
    AttributionReport rep = interpretability_scores(imp, roles, 5);
    CHECK(rep.nsr == doctest::Approx(1.0 / 5.0).epsilon(1e-15));
    CHECK(rep.nsr_defined);
    CHECK(rep.mir == doctest::Approx(1.5));
    CHECK(rep.topk_accuracy == 1.0);

    // top-1 window admits only the strongest signal feature
    rep = interpretability_scores(imp, roles, 1);
    CHECK(rep.topk_accuracy == 0.5);

    std::vector<double> dead{0.0, 0.0, 1.0, 1.0};
    rep = interpretability_scores(dead, roles, 5);
    CHECK(!rep.nsr_defined);
    CHECK(std::isinf(rep.nsr));

    rep = interpretability_scores(imp, roles, 5, 0.4);
    CHECK(rep.suppression == doctest::Approx(0.5).epsilon(1e-12));

    std::vector<double> wrong{1.0};
    CHECK_THROWS_AS(interpretability_scores(wrong, roles, 5), InvalidConfig);
}

TEST_CASE("domain alignment scores") {
    // importance ranks features 2 > 0 > 1 > 3
    std::vector<double> imp{0.5, 0.2, 0.9, 0.1};
    std::vector<int> truth{2, 0, 1, 3};
    std::vector<std::pair<int, int>> pairs{{2, 1}, {0, 3}, {3, 2}};
    AttributionReport rep = domain_alignment_scores(imp, truth, pairs, 3);
    CHECK(rep.spearman_rho == doctest::Approx(1.0));
    CHECK(rep.ranking_consistency == doctest::Approx(2.0 / 3.0));
    CHECK(rep.top3_accuracy == doctest::Approx(1.0));

    std::vector<int> reversed{3, 1, 0, 2};
    rep = domain_alignment_scores(imp, reversed, {}, 3);
    CHECK(rep.spearman_rho == doctest::Approx(-1.0));
    CHECK(rep.ranking_consistency == 0.0);
    CHECK(rep.top3_accuracy == doctest::Approx(2.0 / 3.0));
}
