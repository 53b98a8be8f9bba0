#pragma once

#include <span>
#include <vector>

#include "cfnn/datagen.hpp"
#include "cfnn/models.hpp"

namespace cfnn {

struct TrainConfig {
    double learning_rate = 0.001;
    int epochs = 500;
    int batch_size = 0;  // 0 = full batch
    double clip_threshold = 1.0;
    int patience = 15;  // early-stopping patience on validation loss; 0 disables
    uint64_t seed = 42;
    double divergence_limit = 1e10;
    bool abort_on_divergence = false;  // when set, DivergenceAbort is thrown
    bool parallel = false;             // OpenMP batch kernel (see set_default_parallel)
};

struct TrainHistory {
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_loss;    // per epoch (NaN when no val split)
    std::vector<double> grad_norms;  // per step, pre-clip
    long anomalies = 0;              // non-finite gradient steps (skipped)
    bool diverged = false;
    bool early_stopped = false;
    int epochs_run = 0;
    double best_val = 0.0;
    double wall_seconds = 0.0;
};

struct DivergenceAbort : Error {
    using Error::Error;
};

struct GradientStats {
    double mean = 0.0;
    double stddev = 0.0;  // population
    double max = 0.0;
    long anomalies = 0;
};

GradientStats gradient_stats(const TrainHistory& history);

// Global-norm clipping; never increases the norm.
void clip_gradients(std::span<double> grads, double threshold);

// Standard Adam with bias correction (beta1 0.9, beta2 0.999, eps 1e-8).
class Adam {
public:
    void step(std::span<double> params, std::span<const double> grads, double lr);
    void resize(size_t n) {
        m_.resize(n, 0.0);
        v_.resize(n, 0.0);
    }
    size_t size() const { return m_.size(); }
    // growth support: snapshot/restore of the full optimizer state
    struct State {
        std::vector<double> m, v;
        long t;
    };
    State snapshot() const { return {m_, v_, t_}; }
    void restore(const State& s) {
        m_ = s.m;
        v_ = s.v;
        t_ = s.t;
    }

private:
    std::vector<double> m_, v_;
    long t_ = 0;
};

// ---------------------------------------------------------------------------
// Batch loss/gradient kernel. The parallel (OpenMP) and serial paths both
// accumulate per-chunk partials and reduce them in chunk order, so they are
// bitwise identical; the serial path is the test reference.
// ---------------------------------------------------------------------------

struct BatchResult {
    double loss = 0.0;  // mean squared error over the batch
    std::vector<double> grad;
    bool finite = true;
};

BatchResult batch_loss_grad(const ModelConfig& cfg,
                            const std::vector<double>& params, const Matrix& X,
                            std::span<const double> y,
                            std::span<const size_t> idx, bool parallel);

// Plain forward MSE over an index set (no tape).
double mse_over(const ModelConfig& cfg, const std::vector<double>& params,
                const Matrix& X, std::span<const double> y,
                std::span<const size_t> idx);
double model_mse(const Model& model, const Matrix& X, std::span<const double> y,
                 std::span<const size_t> idx);

// Trains model.params in place against (X, y) on the given split.
// Non-finite gradient steps leave parameters untouched and count as
// anomalies. Restores the best-validation checkpoint at the end when a
// validation split exists.
TrainHistory train(Model& model, const Matrix& X, std::span<const double> y,
                   const Split& split, const TrainConfig& cfg);

inline TrainHistory train(Model& model, const Dataset& data, const TrainConfig& cfg) {
    return train(model, data.X, data.y, data.split, cfg);
}

// ---------------------------------------------------------------------------
// Family fitters
// ---------------------------------------------------------------------------

struct BoostFitConfig {
    int epochs_per_stage = 20;
    // a stage is kept only if it reduces train residual MSE
};

Model fit_boost(const ModelConfig& cfg, const Dataset& data,
                const TrainConfig& tcfg, const BoostFitConfig& bcfg,
                TrainHistory* history_out = nullptr);

struct MoeFitConfig {
    int grow_epochs = 60;              // joint budget for a grown candidate
    double rollback_threshold = 1e-3;  // required relative val improvement
};

struct MoeGrowthLog {
    int experts_final = 0;
    int rollbacks = 0;
    bool topology_locked = false;
};

// Greedy growth: starts from one expert, adds experts at the loss-weighted
// centroid of the worst-decile samples when training plateaus, rolls back
// (exact restore) when validation fails to improve.
Model fit_moe(const ModelConfig& cfg, const Dataset& data, const TrainConfig& tcfg,
              const MoeFitConfig& mcfg, TrainHistory* history_out = nullptr,
              MoeGrowthLog* growth_log = nullptr);

// Loss-weighted centroid of the worst-decile training samples.
std::vector<double> error_centroid(const Matrix& X,
                                   std::span<const double> per_sample_loss,
                                   std::span<const size_t> idx);

// Dispatch: init + fit for any family.
Model fit_model(const ModelConfig& cfg, const Dataset& data,
                const TrainConfig& tcfg, TrainHistory* history_out = nullptr);

// Default for TrainConfig::parallel, from CFNN_THREADS (>1 enables OpenMP).
bool default_parallel();

}  // namespace cfnn
