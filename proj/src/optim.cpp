#include "cfnn/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cfnn {

bool default_parallel() {
    const char* env = std::getenv("CFNN_THREADS");
    if (!env) return false;
    return std::atoi(env) > 1;
}

GradientStats gradient_stats(const TrainHistory& history) {
    GradientStats s;
    s.anomalies = history.anomalies;
    double sum = 0.0;
    long n = 0;
    for (double g : history.grad_norms) {
        if (!std::isfinite(g)) continue;
        sum += g;
        s.max = std::max(s.max, g);
        ++n;
    }
    if (n == 0) return s;
    s.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double g : history.grad_norms) {
        if (!std::isfinite(g)) continue;
        ss += (g - s.mean) * (g - s.mean);
    }
    s.stddev = std::sqrt(ss / static_cast<double>(n));  // population std
    return s;
}

void clip_gradients(std::span<double> grads, double threshold) {
    if (threshold <= 0.0) throw InvalidConfig("clip threshold must be positive");
    double norm2 = 0.0;
    for (double g : grads) norm2 += g * g;
    double norm = std::sqrt(norm2);
    if (norm > threshold) {
        double scale = threshold / norm;
        for (double& g : grads) g *= scale;
    }
}

void Adam::step(std::span<double> params, std::span<const double> grads, double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    if (m_.size() < params.size()) resize(params.size());
    ++t_;
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1 * m_[i] + (1.0 - beta1) * grads[i];
        v_[i] = beta2 * v_[i] + (1.0 - beta2) * grads[i] * grads[i];
        double mhat = m_[i] / bc1;
        double vhat = v_[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

// ---------------------------------------------------------------------------
// Batch kernel
// ---------------------------------------------------------------------------

namespace {

constexpr size_t kChunk = 32;

struct ChunkScratch {
    Tape tape;
    std::vector<Val> lifted;
    std::vector<double> adj;
    std::vector<double> grad;
    double loss_sum = 0.0;
    bool finite = true;
};

void run_chunk(const ModelConfig& cfg, const std::vector<double>& params,
               const Matrix& X, std::span<const double> y,
               std::span<const size_t> idx, size_t begin, size_t end,
               ChunkScratch& sc) {
    sc.grad.assign(params.size(), 0.0);
    sc.loss_sum = 0.0;
    sc.finite = true;
    for (size_t s = begin; s < end; ++s) {
        size_t row = idx[s];
        sc.tape.clear();
        sc.lifted.clear();
        TapeBackend bk{&sc.tape};
        try {
            for (size_t p = 0; p < params.size(); ++p)
                sc.lifted.push_back(sc.tape.parameter(static_cast<int>(p), params[p]));
            Val pred = model_eval<Val>(cfg, std::span<const Val>(sc.lifted),
                                       X.row(row), bk);
            Val res = pred - bk.c(y[row]);
            Val loss = res * res;
            sc.loss_sum += loss.value();
            sc.tape.backward_into(loss, sc.grad, sc.adj, sc.finite);
        } catch (const NonFiniteValue&) {
            sc.finite = false;
        }
    }
}

}  // namespace

BatchResult batch_loss_grad(const ModelConfig& cfg,
                            const std::vector<double>& params, const Matrix& X,
                            std::span<const double> y,
                            std::span<const size_t> idx, bool parallel) {
    size_t n = idx.size();
    size_t n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<ChunkScratch> partials(n_chunks);

    if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long c = 0; c < static_cast<long>(n_chunks); ++c) {
            size_t begin = static_cast<size_t>(c) * kChunk;
            run_chunk(cfg, params, X, y, idx, begin, std::min(begin + kChunk, n),
                      partials[static_cast<size_t>(c)]);
        }
    } else {
        for (size_t c = 0; c < n_chunks; ++c) {
            size_t begin = c * kChunk;
            run_chunk(cfg, params, X, y, idx, begin, std::min(begin + kChunk, n),
                      partials[c]);
        }
    }

    // reduce in chunk order so the result is independent of thread count
    BatchResult out;
    out.grad.assign(params.size(), 0.0);
    double loss_sum = 0.0;
    for (const ChunkScratch& sc : partials) {
        if (!sc.finite) out.finite = false;
        loss_sum += sc.loss_sum;
        for (size_t p = 0; p < params.size(); ++p) out.grad[p] += sc.grad[p];
    }
    double inv = 1.0 / static_cast<double>(n);
    out.loss = loss_sum * inv;
    for (double& g : out.grad) {
        g *= inv;
        if (!std::isfinite(g)) out.finite = false;
    }
    if (!std::isfinite(out.loss)) out.finite = false;
    return out;
}

double mse_over(const ModelConfig& cfg, const std::vector<double>& params,
                const Matrix& X, std::span<const double> y,
                std::span<const size_t> idx) {
    DoubleBackend bk;
    double sum = 0.0;
    std::span<const double> pspan(params);
    for (size_t i : idx) {
        double pred = model_eval<double>(cfg, pspan, X.row(i), bk);
        sum += (pred - y[i]) * (pred - y[i]);
    }
    return sum / static_cast<double>(idx.size());
}

double model_mse(const Model& model, const Matrix& X, std::span<const double> y,
                 std::span<const size_t> idx) {
    double sum = 0.0;
    for (size_t i : idx) {
        double pred = predict(model, X.row(i));
        sum += (pred - y[i]) * (pred - y[i]);
    }
    return sum / static_cast<double>(idx.size());
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

TrainHistory train(Model& model, const Matrix& X, std::span<const double> y,
                   const Split& split, const TrainConfig& cfg) {
    auto start = std::chrono::steady_clock::now();
    TrainHistory h;
    std::vector<double>& params = model.params.values;
    Adam adam;
    adam.resize(params.size());
    Rng shuffle_rng(cfg.seed);

    std::vector<size_t> order(split.train);
    bool has_val = !split.val.empty();
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> best_params;
    int stall = 0;
    int diverging = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.batch_size > 0) shuffle_rng.shuffle(order);
        size_t bs = cfg.batch_size > 0 ? static_cast<size_t>(cfg.batch_size)
                                       : order.size();
        double loss_sum = 0.0;
        size_t loss_count = 0;
        for (size_t off = 0; off < order.size(); off += bs) {
            size_t len = std::min(bs, order.size() - off);
            std::span<const size_t> batch(order.data() + off, len);
            BatchResult r = batch_loss_grad(model.config, params, X, y, batch,
                                            cfg.parallel);
            double norm2 = 0.0;
            for (double g : r.grad) norm2 += g * g;
            double norm = std::sqrt(norm2);
            h.grad_norms.push_back(r.finite ? norm
                                            : std::numeric_limits<double>::quiet_NaN());
            if (!r.finite) {
                ++h.anomalies;  // skipped step: parameters untouched
                continue;
            }
            loss_sum += r.loss * static_cast<double>(len);
            loss_count += len;
            clip_gradients(r.grad, cfg.clip_threshold);
            adam.step(params, r.grad, cfg.learning_rate);
        }

        double train_loss = loss_count > 0
                                ? loss_sum / static_cast<double>(loss_count)
                                : std::numeric_limits<double>::quiet_NaN();
        h.train_loss.push_back(train_loss);
        h.epochs_run = epoch + 1;

        double val_loss = std::numeric_limits<double>::quiet_NaN();
        if (has_val) {
            val_loss = mse_over(model.config, params, X, y, split.val);
            if (std::isfinite(val_loss) && val_loss < best_val) {
                best_val = val_loss;
                best_params = params;
                stall = 0;
            } else {
                ++stall;
            }
        }
        h.val_loss.push_back(val_loss);

        if (std::isfinite(train_loss) && train_loss > cfg.divergence_limit) {
            if (++diverging >= 10) {
                h.diverged = true;
                break;
            }
        } else {
            diverging = 0;
        }
        if (has_val && cfg.patience > 0 && stall >= cfg.patience) {
            h.early_stopped = true;
            break;
        }
    }

    if (has_val && !best_params.empty()) {
        params = best_params;
        h.best_val = best_val;
    } else if (!h.train_loss.empty()) {
        h.best_val = h.train_loss.back();
    }
    h.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (h.diverged && cfg.abort_on_divergence)
        throw DivergenceAbort("train loss exceeded divergence limit for 10 epochs");
    return h;
}

// ---------------------------------------------------------------------------
// Boost
// ---------------------------------------------------------------------------

Model fit_boost(const ModelConfig& cfg, const Dataset& data,
                const TrainConfig& tcfg, const BoostFitConfig& bcfg,
                TrainHistory* history_out) {
    Model model;
    model.config = cfg;
    double mean = 0.0;
    for (size_t i : data.split.train) mean += data.y[i];
    model.boost_f0 = mean / static_cast<double>(data.split.train.size());

    std::vector<double> residual(data.y.begin(), data.y.end());
    for (double& r : residual) r -= model.boost_f0;

    TrainHistory combined;
    ModelConfig stage_cfg = cfg;
    stage_cfg.family = Family::Cfnn;

    auto train_residual_mse = [&]() {
        double s = 0.0;
        for (size_t i : data.split.train) s += residual[i] * residual[i];
        return s / static_cast<double>(data.split.train.size());
    };

    double current_mse = train_residual_mse();
    for (int t = 0; t < cfg.unit_count; ++t) {
        Model stage;
        stage.config = stage_cfg;
        stage.params = build_params(stage_cfg);
        Rng init_rng = Rng::substream(tcfg.seed, static_cast<uint64_t>(t) + 1);
        init_params(stage.params, stage_cfg, init_rng);

        TrainConfig stage_tcfg = tcfg;
        stage_tcfg.epochs = bcfg.epochs_per_stage;
        stage_tcfg.seed = tcfg.seed + static_cast<uint64_t>(t) * 7919;
        TrainHistory sh = train(stage, data.X, residual, data.split, stage_tcfg);
        combined.train_loss.insert(combined.train_loss.end(), sh.train_loss.begin(),
                                   sh.train_loss.end());
        combined.val_loss.insert(combined.val_loss.end(), sh.val_loss.begin(),
                                 sh.val_loss.end());
        combined.grad_norms.insert(combined.grad_norms.end(), sh.grad_norms.begin(),
                                   sh.grad_norms.end());
        combined.anomalies += sh.anomalies;
        combined.epochs_run += sh.epochs_run;

        // acceptance: keep the stage only if it reduces train residual MSE
        std::vector<double> next(residual);
        for (size_t i : data.split.train) {
            double f = predict(stage, data.X.row(i));
            next[i] = residual[i] - cfg.shrinkage * f;
        }
        double s = 0.0;
        for (size_t i : data.split.train) s += next[i] * next[i];
        double new_mse = s / static_cast<double>(data.split.train.size());
        if (new_mse >= current_mse) break;  // dropped; boosting stops

        for (size_t i = 0; i < residual.size(); ++i) {
            double f = predict(stage, data.X.row(i));
            residual[i] -= cfg.shrinkage * f;
        }
        model.boost_stages.push_back(std::move(stage.params));
        current_mse = new_mse;
    }

    if (history_out) *history_out = std::move(combined);
    return model;
}

// ---------------------------------------------------------------------------
// MoE growth
// ---------------------------------------------------------------------------

std::vector<double> error_centroid(const Matrix& X,
                                   std::span<const double> per_sample_loss,
                                   std::span<const size_t> idx) {
    std::vector<size_t> order(idx.begin(), idx.end());
    std::vector<double> loss(per_sample_loss.begin(), per_sample_loss.end());
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (loss[a] != loss[b]) return loss[a] > loss[b];
        return a < b;
    });
    size_t take = std::max<size_t>(1, (order.size() + 9) / 10);  // worst decile
    std::vector<double> centroid(X.cols, 0.0);
    double wsum = 0.0;
    for (size_t t = 0; t < take; ++t) {
        size_t i = order[t];
        for (size_t c = 0; c < X.cols; ++c) centroid[c] += loss[i] * X(i, c);
        wsum += loss[i];
    }
    if (wsum > 0.0) {
        for (double& v : centroid) v /= wsum;
    } else {
        for (size_t t = 0; t < take; ++t)
            for (size_t c = 0; c < X.cols; ++c)
                centroid[c] += X(order[t], c) / static_cast<double>(take);
    }
    return centroid;
}

Model fit_moe(const ModelConfig& cfg, const Dataset& data, const TrainConfig& tcfg,
              const MoeFitConfig& mcfg, TrainHistory* history_out,
              MoeGrowthLog* growth_log) {
    const int k_max = cfg.unit_count;
    Model model;
    model.config = cfg;
    model.config.unit_count = 1;
    model.params = build_params(model.config);
    Rng init_rng = Rng::substream(tcfg.seed, 0);
    init_params(model.params, model.config, init_rng);
    init_moe_gates_from_data(model.params, model.config, data.X, data.split.train,
                             init_rng);

    TrainHistory combined;
    auto absorb = [&](const TrainHistory& sh) {
        combined.train_loss.insert(combined.train_loss.end(), sh.train_loss.begin(),
                                   sh.train_loss.end());
        combined.val_loss.insert(combined.val_loss.end(), sh.val_loss.begin(),
                                 sh.val_loss.end());
        combined.grad_norms.insert(combined.grad_norms.end(), sh.grad_norms.begin(),
                                   sh.grad_norms.end());
        combined.anomalies += sh.anomalies;
        combined.epochs_run += sh.epochs_run;
    };

    absorb(train(model, data.X, data.y, data.split, tcfg));
    bool has_val = !data.split.val.empty();
    MoeGrowthLog log;
    log.experts_final = 1;

    while (has_val && !log.topology_locked &&
           model.config.unit_count < k_max) {
        // checkpoint for exact rollback
        Model checkpoint = model;
        double val_before = model_mse(model, data.X, data.y, data.split.val);

        std::vector<double> losses(data.n(), 0.0);
        for (size_t i : data.split.train) {
            double pred = predict(model, data.X.row(i));
            losses[i] = (pred - data.y[i]) * (pred - data.y[i]);
        }
        std::vector<double> mu = error_centroid(data.X, losses, data.split.train);

        // grow: extend the flat store with a freshly initialized expert
        ModelConfig grown_cfg = model.config;
        grown_cfg.unit_count += 1;
        ParamStore grown = build_params(grown_cfg);
        std::copy(model.params.values.begin(), model.params.values.end(),
                  grown.values.begin());
        ModelConfig one = cfg;
        one.unit_count = 1;
        ParamStore fresh = build_params(one);
        Rng grow_rng =
            Rng::substream(tcfg.seed, 1000 + static_cast<uint64_t>(grown_cfg.unit_count));
        init_params(fresh, one, grow_rng);
        std::copy(fresh.values.begin(), fresh.values.end(),
                  grown.values.begin() + static_cast<long>(model.params.size()));
        std::string tag = std::to_string(grown_cfg.unit_count - 1);
        auto mu_range = grown.range("gate_mu[" + tag + "]");
        std::copy(mu.begin(), mu.end(), mu_range.begin());
        grown.range("gate_sigma[" + tag + "]")[0] =
            checkpoint.params.range("gate_sigma[0]")[0];

        model.config = grown_cfg;
        model.params = std::move(grown);

        TrainConfig gcfg = tcfg;
        gcfg.epochs = mcfg.grow_epochs;
        gcfg.seed = tcfg.seed + 31337 * static_cast<uint64_t>(grown_cfg.unit_count);
        absorb(train(model, data.X, data.y, data.split, gcfg));

        double val_after = model_mse(model, data.X, data.y, data.split.val);
        double rel_improvement =
            val_before > 0.0 ? (val_before - val_after) / val_before : 0.0;
        if (rel_improvement < mcfg.rollback_threshold) {
            model = std::move(checkpoint);  // exact restore
            ++log.rollbacks;
            log.topology_locked = true;
        } else {
            log.experts_final = model.config.unit_count;
        }
    }

    if (history_out) *history_out = std::move(combined);
    if (growth_log) *growth_log = log;
    return model;
}

Model fit_model(const ModelConfig& cfg, const Dataset& data,
                const TrainConfig& tcfg, TrainHistory* history_out) {
    switch (cfg.family) {
        case Family::Boost: {
            BoostFitConfig bcfg;
            bcfg.epochs_per_stage = tcfg.epochs;
            return fit_boost(cfg, data, tcfg, bcfg, history_out);
        }
        case Family::Moe: {
            MoeFitConfig mcfg;
            return fit_moe(cfg, data, tcfg, mcfg, history_out);
        }
        default: {
            Model model;
            model.config = cfg;
            model.params = build_params(cfg);
            Rng init_rng = Rng::substream(tcfg.seed, 0);
            init_params(model.params, cfg, init_rng);
            TrainHistory h = train(model, data.X, data.y, data.split, tcfg);
            if (history_out) *history_out = std::move(h);
            return model;
        }
    }
}

}  // namespace cfnn
