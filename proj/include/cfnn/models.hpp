#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfnn/autodiff.hpp"
#include "cfnn/common.hpp"

namespace cfnn {

enum class Family : uint8_t { Cfnn, Boost, Moe, Hybrid, Mlp };

std::string family_name(Family f);
Family family_from_name(std::string_view s);

struct ModelConfig {
    Family family = Family::Cfnn;
    int input_dim = 1;
    int depth = 1;        // continued-fraction depth L (cfnn/boost stage/moe expert)
    int poly_degree = 3;  // p
    int unit_count = 1;   // hybrid parallel units / boost stages / moe experts
    int latent_dim = 4;   // moe expert latent width
    double gamma = 1.0;   // hybrid denominator regularizer
    double shrinkage = 0.5;       // boost eta
    double epsilon_den = 1e-6;    // foundational denominator clamp
    double epsilon_gate = 1e-6;   // moe gate stabilizer
    std::vector<int> hidden_widths;  // mlp
};

struct NamedRange {
    std::string name;
    size_t offset = 0;
    size_t len = 0;
};

// Flat learnable-parameter storage with named addressing. Ranges are
// disjoint, ordered, and cover the vector exactly.
struct ParamStore {
    std::vector<NamedRange> names;
    std::vector<double> values;

    size_t size() const { return values.size(); }

    size_t add(std::string name, size_t len) {
        size_t off = values.size();
        names.push_back({std::move(name), off, len});
        values.resize(off + len, 0.0);
        return off;
    }

    const NamedRange& find(std::string_view name) const;
    std::span<double> range(std::string_view name);
    std::span<const double> range(std::string_view name) const;
};

ParamStore build_params(const ModelConfig& cfg);
void init_params(ParamStore& store, const ModelConfig& cfg, Rng& rng);

// MoE extras: centers snap to random training rows, widths to the median
// pairwise input distance.
void init_moe_gates_from_data(ParamStore& store, const ModelConfig& cfg,
                              const Matrix& X, std::span<const size_t> train_idx,
                              Rng& rng);

long param_count(const ModelConfig& cfg);

// Raw softplus argument whose effective value is 1 (gate scale init).
inline double softplus_inverse_one() { return std::log(std::expm1(1.0)); }

// ---------------------------------------------------------------------------
// Generic evaluators. S is double (inference) or Val (training on a tape).
// ---------------------------------------------------------------------------

struct DoubleBackend {
    double c(double v) const { return v; }
};
struct TapeBackend {
    Tape* tape;
    Val c(double v) const { return tape->constant(v); }
};

namespace detail {

template <class S, class B>
S dot_affine(std::span<const S> w, S bias, std::span<const double> x, B& bk) {
    S acc = bias;
    for (size_t j = 0; j < x.size(); ++j) acc = acc + w[j] * bk.c(x[j]);
    return acc;
}

// Horner over coefficients c0..cp.
template <class S, class B>
S horner(std::span<const S> coef, S z, B&) {
    S acc = coef[coef.size() - 1];
    for (size_t k = coef.size() - 1; k-- > 0;) acc = acc * z + coef[k];
    return acc;
}

// Sign-preserving denominator clamp: |v| is floored at eps. The branch is
// picked from the forward value (define-by-run), so the clamped branch
// carries the clamp's subgradient (zero).
template <class S, class B>
S clamp_den(S v, double eps, B& bk) {
    if (scalar_value(v) >= 0.0) return vmax(v, bk.c(eps));
    return bk.c(0.0) - vmax(bk.c(0.0) - v, bk.c(eps));
}

}  // namespace detail

// Foundational CFNN: f = a_0 + b_0 / (a_1 + b_1 / (... + b_{L-1} / a_L)).
// Each a_i, b_i is a degree-p polynomial of a private scalar projection.
template <class S, class B>
S cfnn_eval(const ModelConfig& cfg, std::span<const S> params,
            std::span<const double> x, B& bk) {
    const int d = cfg.input_dim;
    const int p = cfg.poly_degree;
    const int L = cfg.depth;
    const size_t block = static_cast<size_t>(d + 1 + p + 1);
    const size_t b_base = static_cast<size_t>(L + 1) * block;

    auto term = [&](size_t base) {
        std::span<const S> w = params.subspan(base, static_cast<size_t>(d));
        S z = detail::dot_affine(w, params[base + d], x, bk);
        std::span<const S> coef =
            params.subspan(base + d + 1, static_cast<size_t>(p + 1));
        return detail::horner(coef, z, bk);
    };

    S cur = term(static_cast<size_t>(L) * block);  // a_L
    for (int i = L - 1; i >= 0; --i) {
        S a_i = term(static_cast<size_t>(i) * block);
        S b_i = term(b_base + static_cast<size_t>(i) * block);
        cur = a_i + b_i / detail::clamp_den(cur, cfg.epsilon_den, bk);
    }
    return cur;
}

// CFNN-Hybrid: affine skip plus n parallel units P_i(z_i) / (Q_i(z_i)^2 + g).
template <class S, class B>
S hybrid_eval(const ModelConfig& cfg, std::span<const S> params,
              std::span<const double> x, B& bk) {
    const int d = cfg.input_dim;
    const int p = cfg.poly_degree;
    const size_t unit = static_cast<size_t>(d + 1 + 2 * (p + 1));

    std::span<const S> skip_w = params.subspan(0, static_cast<size_t>(d));
    S y = detail::dot_affine(skip_w, params[static_cast<size_t>(d)], x, bk);

    for (int i = 0; i < cfg.unit_count; ++i) {
        size_t base = static_cast<size_t>(d + 1) + static_cast<size_t>(i) * unit;
        std::span<const S> w = params.subspan(base, static_cast<size_t>(d));
        S z = detail::dot_affine(w, params[base + d], x, bk);
        std::span<const S> pc =
            params.subspan(base + d + 1, static_cast<size_t>(p + 1));
        std::span<const S> qc =
            params.subspan(base + d + 1 + p + 1, static_cast<size_t>(p + 1));
        S num = detail::horner(pc, z, bk);
        S q = detail::horner(qc, z, bk);
        y = y + num / (q * q + bk.c(cfg.gamma));
    }
    return y;
}

// MLP baseline: affine-relu stack with a scalar head.
template <class S, class B>
S mlp_eval(const ModelConfig& cfg, std::span<const S> params,
           std::span<const double> x, B& bk) {
    std::vector<S> h;
    h.reserve(x.size());
    for (double v : x) h.push_back(bk.c(v));

    size_t off = 0;
    std::vector<int> dims;
    dims.push_back(cfg.input_dim);
    for (int w : cfg.hidden_widths) dims.push_back(w);
    dims.push_back(1);

    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        int in = dims[l], out = dims[l + 1];
        std::vector<S> next;
        next.reserve(static_cast<size_t>(out));
        for (int j = 0; j < out; ++j) {
            S acc = params[off + static_cast<size_t>(in * out) + j];  // bias
            for (int i = 0; i < in; ++i)
                acc = acc + params[off + static_cast<size_t>(i * out + j)] * h[i];
            if (l + 2 < dims.size()) acc = vrelu(acc);
            next.push_back(acc);
        }
        off += static_cast<size_t>(in * out + out);
        h = std::move(next);
    }
    return h[0];
}

// MoE expert: latent z = tanh(Wx+b); level polynomials act on the mean of
// elementwise powers of z; levels couple through a backward recursion with a
// softplus-positive numerator and eps-guarded denominator.
template <class S, class B>
S moe_expert_eval(const ModelConfig& cfg, std::span<const S> expert_params,
                  std::span<const double> x, B& bk) {
    const int d = cfg.input_dim;
    const int h = cfg.latent_dim;
    const int p = cfg.poly_degree;
    const int D = cfg.depth;

    std::vector<S> z;
    z.reserve(static_cast<size_t>(h));
    for (int i = 0; i < h; ++i) {
        std::span<const S> w =
            expert_params.subspan(static_cast<size_t>(i * d), static_cast<size_t>(d));
        S pre = detail::dot_affine(w, expert_params[static_cast<size_t>(h * d + i)], x, bk);
        z.push_back(vtanh(pre));
    }

    // mean of elementwise powers, j = 0..p
    std::vector<S> moments;
    moments.reserve(static_cast<size_t>(p + 1));
    moments.push_back(bk.c(1.0));
    std::vector<S> pw = z;
    for (int j = 1; j <= p; ++j) {
        if (j > 1)
            for (int i = 0; i < h; ++i) pw[i] = pw[i] * z[i];
        S s = pw[0];
        for (int i = 1; i < h; ++i) s = s + pw[i];
        moments.push_back(s * bk.c(1.0 / h));
    }

    size_t coef_base = static_cast<size_t>(h * d + h);
    auto level_poly = [&](int i) {  // i is 1-based level
        S acc = bk.c(0.0);
        size_t base = coef_base + static_cast<size_t>((i - 1) * (p + 1));
        for (int j = 0; j <= p; ++j)
            acc = acc + expert_params[base + j] * moments[static_cast<size_t>(j)];
        return acc;
    };

    size_t beta_base = coef_base + static_cast<size_t>(D * (p + 1));
    S out = vsoftplus(level_poly(D)) + bk.c(1.0);  // O_D
    for (int i = D - 1; i >= 1; --i) {
        S beta = expert_params[beta_base + static_cast<size_t>(i - 1)];
        out = level_poly(i) + vsoftplus(beta) / (out + bk.c(cfg.epsilon_gate));
    }
    return out;
}

inline size_t moe_expert_stride(const ModelConfig& cfg) {
    return static_cast<size_t>(cfg.latent_dim * cfg.input_dim + cfg.latent_dim +
                               cfg.depth * (cfg.poly_degree + 1) + (cfg.depth - 1) +
                               2 * cfg.input_dim + 1);
}

// Anisotropic RBF gate plus probabilistic mixture of expert outputs.
// If every gate underflows to zero the mixture falls back to uniform
// weights; the counter (when given) records how often that happened.
template <class S, class B>
S moe_eval(const ModelConfig& cfg, std::span<const S> params,
           std::span<const double> x, B& bk, long* gate_fallbacks = nullptr) {
    const int d = cfg.input_dim;
    const int K = cfg.unit_count;
    const size_t stride = moe_expert_stride(cfg);
    const size_t gate_base = stride - static_cast<size_t>(2 * d + 1);

    std::vector<S> experts, gates;
    experts.reserve(static_cast<size_t>(K));
    gates.reserve(static_cast<size_t>(K));
    double gate_sum_value = 0.0;

    for (int k = 0; k < K; ++k) {
        std::span<const S> ep = params.subspan(static_cast<size_t>(k) * stride, stride);
        experts.push_back(moe_expert_eval(cfg, ep, x, bk));

        std::span<const S> mu = ep.subspan(gate_base, static_cast<size_t>(d));
        S sigma = ep[gate_base + d];
        std::span<const S> lambda_raw =
            ep.subspan(gate_base + d + 1, static_cast<size_t>(d));
        S dist = bk.c(0.0);
        for (int j = 0; j < d; ++j) {
            S diff = bk.c(x[static_cast<size_t>(j)]) - mu[static_cast<size_t>(j)];
            dist = dist + vsoftplus(lambda_raw[static_cast<size_t>(j)]) * diff * diff;
        }
        S g = vexp(bk.c(0.0) - dist /
                             (bk.c(2.0) * sigma * sigma + bk.c(cfg.epsilon_gate)));
        gate_sum_value += scalar_value(g);
        gates.push_back(g);
    }

    if (gate_sum_value < 1e-300) {
        if (gate_fallbacks) ++(*gate_fallbacks);
        S out = experts[0];
        for (int k = 1; k < K; ++k) out = out + experts[static_cast<size_t>(k)];
        return out * bk.c(1.0 / K);
    }

    S gsum = gates[0];
    for (int k = 1; k < K; ++k) gsum = gsum + gates[static_cast<size_t>(k)];
    S out = gates[0] * experts[0];
    for (int k = 1; k < K; ++k)
        out = out + gates[static_cast<size_t>(k)] * experts[static_cast<size_t>(k)];
    return out / gsum;
}

template <class S, class B>
S model_eval(const ModelConfig& cfg, std::span<const S> params,
             std::span<const double> x, B& bk) {
    switch (cfg.family) {
        case Family::Cfnn:
        case Family::Boost:  // a single boost stage is a shallow cfnn
            return cfnn_eval(cfg, params, x, bk);
        case Family::Hybrid:
            return hybrid_eval(cfg, params, x, bk);
        case Family::Mlp:
            return mlp_eval(cfg, params, x, bk);
        case Family::Moe:
            return moe_eval(cfg, params, x, bk);
    }
    throw InvalidConfig("unknown model family");
}

// ---------------------------------------------------------------------------
// Trained-model value type. For boost the stages are frozen shallow CFNNs on
// top of a constant initial predictor.
// ---------------------------------------------------------------------------

struct Model {
    ModelConfig config;
    ParamStore params;                     // unused for boost ensembles
    double boost_f0 = 0.0;
    std::vector<ParamStore> boost_stages;  // boost only
};

double predict(const Model& model, std::span<const double> x);
void predict_batch(const Model& model, const Matrix& X,
                   std::span<const size_t> idx, std::vector<double>& out);
long model_param_count(const Model& model);

}  // namespace cfnn
