#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfnn {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteValue : Error { using Error::Error; };
struct UnknownOperand : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct ConvergenceFailure : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct ChecksumError : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };
struct InfeasibleRatio : Error { using Error::Error; };
struct TooManyFeatures : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// Deterministic RNG. mt19937_64 is bit-exact per the standard; the
// distributions are hand-rolled because libstdc++/libc++ disagree on
// std::normal_distribution, and dataset provenance must replay bitwise.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    // integer in [0, n)
    size_t index(size_t n) { return static_cast<size_t>(gen_() % n); }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

    // Substream derivation so parallel cells do not share state.
    static Rng substream(uint64_t seed, uint64_t cell) {
        return Rng(seed * 0x9e3779b97f4a7c15ULL + cell * 0xd1b54a32d192ed03ULL + 1ULL);
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Row-major dense matrix, just enough for datasets.
struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(size_t i, size_t j) { return data[i * cols + j]; }
    double operator()(size_t i, size_t j) const { return data[i * cols + j]; }

    std::span<const double> row(size_t i) const {
        return std::span<const double>(data.data() + i * cols, cols);
    }
    std::span<double> row(size_t i) {
        return std::span<double>(data.data() + i * cols, cols);
    }
};

inline double stable_softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace cfnn
