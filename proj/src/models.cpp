#include "cfnn/models.hpp"

#include <algorithm>
#include <cmath>

namespace cfnn {

std::string family_name(Family f) {
    switch (f) {
        case Family::Cfnn: return "cfnn";
        case Family::Boost: return "boost";
        case Family::Moe: return "moe";
        case Family::Hybrid: return "hybrid";
        case Family::Mlp: return "mlp";
    }
    return "?";
}

Family family_from_name(std::string_view s) {
    if (s == "cfnn") return Family::Cfnn;
    if (s == "boost") return Family::Boost;
    if (s == "moe") return Family::Moe;
    if (s == "hybrid") return Family::Hybrid;
    if (s == "mlp") return Family::Mlp;
    throw InvalidConfig("unknown family name: " + std::string(s));
}

const NamedRange& ParamStore::find(std::string_view name) const {
    for (const auto& r : names)
        if (r.name == name) return r;
    throw InvalidConfig("no parameter range named " + std::string(name));
}

std::span<double> ParamStore::range(std::string_view name) {
    const NamedRange& r = find(name);
    return std::span<double>(values.data() + r.offset, r.len);
}

std::span<const double> ParamStore::range(std::string_view name) const {
    const NamedRange& r = find(name);
    return std::span<const double>(values.data() + r.offset, r.len);
}

static void validate(const ModelConfig& cfg) {
    if (cfg.input_dim <= 0 || cfg.poly_degree <= 0 || cfg.depth < 0)
        throw InvalidConfig("model config has non-positive dimensions");
    if (cfg.family == Family::Hybrid && cfg.gamma < 0.0)
        throw InvalidConfig("gamma must be non-negative");
    if (cfg.family == Family::Moe && (cfg.depth < 1 || cfg.unit_count < 1))
        throw InvalidConfig("moe needs depth >= 1 and at least one expert");
    if (cfg.family == Family::Mlp && cfg.hidden_widths.empty())
        throw InvalidConfig("mlp needs hidden widths");
}

ParamStore build_params(const ModelConfig& cfg) {
    validate(cfg);
    ParamStore s;
    const int d = cfg.input_dim, p = cfg.poly_degree;
    switch (cfg.family) {
        case Family::Cfnn:
        case Family::Boost: {
            // b_L is never used by the terminating level and is not allocated.
            for (int i = 0; i <= cfg.depth; ++i) {
                s.add("a_proj[" + std::to_string(i) + "]", static_cast<size_t>(d + 1));
                s.add("a_coef[" + std::to_string(i) + "]", static_cast<size_t>(p + 1));
            }
            for (int i = 0; i < cfg.depth; ++i) {
                s.add("b_proj[" + std::to_string(i) + "]", static_cast<size_t>(d + 1));
                s.add("b_coef[" + std::to_string(i) + "]", static_cast<size_t>(p + 1));
            }
            break;
        }
        case Family::Hybrid: {
            s.add("skip_w", static_cast<size_t>(d));
            s.add("skip_b", 1);
            for (int i = 0; i < cfg.unit_count; ++i) {
                std::string t = std::to_string(i);
                s.add("unit_proj[" + t + "]", static_cast<size_t>(d + 1));
                s.add("unit_p[" + t + "]", static_cast<size_t>(p + 1));
                s.add("unit_q[" + t + "]", static_cast<size_t>(p + 1));
            }
            break;
        }
        case Family::Mlp: {
            int in = d;
            int l = 0;
            for (int w : cfg.hidden_widths) {
                s.add("w[" + std::to_string(l) + "]", static_cast<size_t>(in * w));
                s.add("b[" + std::to_string(l) + "]", static_cast<size_t>(w));
                in = w;
                ++l;
            }
            s.add("w[" + std::to_string(l) + "]", static_cast<size_t>(in));
            s.add("b[" + std::to_string(l) + "]", 1);
            break;
        }
        case Family::Moe: {
            const int h = cfg.latent_dim, D = cfg.depth;
            for (int k = 0; k < cfg.unit_count; ++k) {
                std::string t = std::to_string(k);
                s.add("expert_W[" + t + "]", static_cast<size_t>(h * d));
                s.add("expert_b[" + t + "]", static_cast<size_t>(h));
                s.add("expert_coef[" + t + "]", static_cast<size_t>(D * (p + 1)));
                s.add("expert_beta[" + t + "]", static_cast<size_t>(D - 1));
                s.add("gate_mu[" + t + "]", static_cast<size_t>(d));
                s.add("gate_sigma[" + t + "]", 1);
                s.add("gate_lambda[" + t + "]", static_cast<size_t>(d));
            }
            break;
        }
    }
    return s;
}

void init_params(ParamStore& store, const ModelConfig& cfg, Rng& rng) {
    const double proj_sigma = 1.0 / std::sqrt(static_cast<double>(cfg.input_dim));
    for (const auto& r : store.names) {
        std::span<double> v(store.values.data() + r.offset, r.len);
        bool is_proj = r.name.starts_with("a_proj") || r.name.starts_with("b_proj") ||
                       r.name.starts_with("unit_proj") || r.name.starts_with("skip_w") ||
                       r.name.starts_with("expert_W") || r.name.starts_with("w[");
        if (is_proj) {
            for (double& x : v) x = rng.normal(0.0, proj_sigma);
        } else if (r.name.starts_with("gate_mu")) {
            for (double& x : v) x = rng.normal();
        } else if (r.name.starts_with("gate_sigma")) {
            v[0] = 1.0;
        } else if (r.name.starts_with("gate_lambda")) {
            for (double& x : v) x = softplus_inverse_one();
        } else if (r.name.starts_with("skip_b") || r.name.starts_with("b[") ||
                   r.name.starts_with("expert_b") || r.name.starts_with("expert_beta")) {
            for (double& x : v) x = 0.0;
        } else {
            // polynomial coefficients
            for (double& x : v) x = rng.normal(0.0, 0.1);
        }
    }
    // Keep initial continued-fraction denominators near 1: constant term of
    // a_i for i >= 1 starts at 1.
    if (cfg.family == Family::Cfnn || cfg.family == Family::Boost) {
        for (int i = 1; i <= cfg.depth; ++i)
            store.range("a_coef[" + std::to_string(i) + "]")[0] = 1.0;
    }
}

void init_moe_gates_from_data(ParamStore& store, const ModelConfig& cfg,
                              const Matrix& X, std::span<const size_t> train_idx,
                              Rng& rng) {
    // median pairwise distance over a bounded subsample
    size_t m = std::min<size_t>(train_idx.size(), 200);
    std::vector<double> dists;
    for (size_t i = 0; i + 1 < m; ++i) {
        for (size_t j = i + 1; j < m; ++j) {
            auto a = X.row(train_idx[i]);
            auto b = X.row(train_idx[j]);
            double s = 0.0;
            for (size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
            dists.push_back(std::sqrt(s));
        }
    }
    double med = 1.0;
    if (!dists.empty()) {
        std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
        med = dists[dists.size() / 2];
        if (med <= 0.0) med = 1.0;
    }
    for (int k = 0; k < cfg.unit_count; ++k) {
        std::string t = std::to_string(k);
        auto row = X.row(train_idx[rng.index(train_idx.size())]);
        auto mu = store.range("gate_mu[" + t + "]");
        std::copy(row.begin(), row.end(), mu.begin());
        store.range("gate_sigma[" + t + "]")[0] = med;
    }
}

long param_count(const ModelConfig& cfg) {
    validate(cfg);
    const long d = cfg.input_dim, p = cfg.poly_degree;
    switch (cfg.family) {
        case Family::Cfnn:
            return (cfg.depth + 1L) * ((d + 1) + (p + 1)) +
                   static_cast<long>(cfg.depth) * ((d + 1) + (p + 1));
        case Family::Boost: {
            ModelConfig stage = cfg;
            stage.family = Family::Cfnn;
            return static_cast<long>(cfg.unit_count) * param_count(stage);
        }
        case Family::Hybrid:
            return (d + 1) + static_cast<long>(cfg.unit_count) * ((d + 1) + 2 * (p + 1));
        case Family::Mlp: {
            long total = 0;
            long in = d;
            for (int w : cfg.hidden_widths) {
                total += (in + 1) * w;
                in = w;
            }
            total += in + 1;
            return total;
        }
        case Family::Moe:
            return static_cast<long>(cfg.unit_count) *
                   static_cast<long>(moe_expert_stride(cfg));
    }
    throw InvalidConfig("unknown family");
}

double predict(const Model& model, std::span<const double> x) {
    DoubleBackend bk;
    if (model.config.family == Family::Boost) {
        double y = model.boost_f0;
        ModelConfig stage = model.config;
        stage.family = Family::Cfnn;
        double sum = 0.0;
        for (const auto& ps : model.boost_stages)
            sum += cfnn_eval<double>(stage, std::span<const double>(ps.values), x, bk);
        return y + model.config.shrinkage * sum;
    }
    return model_eval<double>(model.config,
                              std::span<const double>(model.params.values), x, bk);
}

void predict_batch(const Model& model, const Matrix& X,
                   std::span<const size_t> idx, std::vector<double>& out) {
    out.resize(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) out[i] = predict(model, X.row(idx[i]));
}

long model_param_count(const Model& model) {
    if (model.config.family == Family::Boost) {
        ModelConfig stage = model.config;
        stage.family = Family::Cfnn;
        return static_cast<long>(model.boost_stages.size()) * param_count(stage);
    }
    return static_cast<long>(model.params.size());
}

}  // namespace cfnn
