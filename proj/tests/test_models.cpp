#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cfnn/models.hpp"

using namespace cfnn;

namespace {

double eval_double(const ModelConfig& cfg, const ParamStore& store,
                   std::span<const double> x) {
    DoubleBackend bk;
    return model_eval<double>(cfg, std::span<const double>(store.values), x, bk);
}

}  // namespace

TEST_CASE("continued fraction hand evaluation: x + 1/x") {
    ModelConfig cfg;
    cfg.family = Family::Cfnn;
    cfg.input_dim = 1;
    cfg.depth = 1;
    cfg.poly_degree = 1;

    ParamStore s = build_params(cfg);
    // a_0(z) = z with identity projection
    s.range("a_proj[0]")[0] = 1.0;
    auto a0 = s.range("a_coef[0]");
    a0[0] = 0.0;
    a0[1] = 1.0;
    // b_0 = 1
    s.range("b_coef[0]")[0] = 1.0;
    // a_1(z) = z
    s.range("a_proj[1]")[0] = 1.0;
    auto a1 = s.range("a_coef[1]");
    a1[0] = 0.0;
    a1[1] = 1.0;

    double x = 2.0;
    CHECK(eval_double(cfg, s, std::span<const double>(&x, 1)) ==
          doctest::Approx(2.5));
    x = 0.5;
    CHECK(eval_double(cfg, s, std::span<const double>(&x, 1)) ==
          doctest::Approx(2.5));
}

TEST_CASE("degenerate depths") {
    ModelConfig cfg;
    cfg.family = Family::Cfnn;
    cfg.input_dim = 1;
    cfg.depth = 0;
    cfg.poly_degree = 2;
    ParamStore s = build_params(cfg);
    s.range("a_coef[0]")[0] = 1.0;  // constant polynomial 1, zero projection
    for (double x : {-1.5, 0.0, 0.7}) {
        CHECK(eval_double(cfg, s, std::span<const double>(&x, 1)) == 1.0);
    }

    // zero numerators truncate the fraction to a_0
    ModelConfig deep = cfg;
    deep.depth = 3;
    ParamStore sd = build_params(deep);
    Rng rng(3);
    init_params(sd, deep, rng);
    for (int i = 0; i < 3; ++i)
        for (double& v : sd.range("b_coef[" + std::to_string(i) + "]")) v = 0.0;

    ModelConfig flat = cfg;
    ParamStore sf = build_params(flat);
    std::copy(sd.range("a_proj[0]").begin(), sd.range("a_proj[0]").end(),
              sf.range("a_proj[0]").begin());
    std::copy(sd.range("a_coef[0]").begin(), sd.range("a_coef[0]").end(),
              sf.range("a_coef[0]").begin());
    for (double x : {-1.2, 0.4, 1.9}) {
        CHECK(eval_double(deep, sd, std::span<const double>(&x, 1)) ==
              eval_double(flat, sf, std::span<const double>(&x, 1)));
    }
}

TEST_CASE("zeroed upper levels reproduce the shallower model bitwise") {
    ModelConfig deep;
    deep.family = Family::Cfnn;
    deep.input_dim = 2;
    deep.depth = 3;
    deep.poly_degree = 2;
    ParamStore sd = build_params(deep);
    Rng rng(17);
    init_params(sd, deep, rng);
    // kill levels >= 1: the fraction terminates after b_0 / a_1
    for (int i = 1; i < deep.depth; ++i)
        for (double& v : sd.range("b_coef[" + std::to_string(i) + "]")) v = 0.0;

    ModelConfig shallow = deep;
    shallow.depth = 1;
    ParamStore ss = build_params(shallow);
    for (const char* name : {"a_proj[0]", "a_coef[0]", "a_proj[1]", "a_coef[1]",
                             "b_proj[0]", "b_coef[0]"}) {
        auto src = sd.range(name);
        std::copy(src.begin(), src.end(), ss.range(name).begin());
    }

    Rng xr(5);
    for (int t = 0; t < 50; ++t) {
        double x[2] = {xr.uniform(-2.0, 2.0), xr.uniform(-2.0, 2.0)};
        double yd = eval_double(deep, sd, std::span<const double>(x, 2));
        double ys = eval_double(shallow, ss, std::span<const double>(x, 2));
        CHECK(yd == ys);  // bitwise
    }
}

TEST_CASE("boost forward composition") {
    Model model;
    model.config.family = Family::Boost;
    model.config.input_dim = 1;
    model.config.depth = 0;
    model.config.poly_degree = 1;
    model.config.shrinkage = 0.5;
    model.boost_f0 = 3.25;

    double x = 0.3;
    CHECK(predict(model, std::span<const double>(&x, 1)) == 3.25);

    // two identical constant-2 stages at eta = 0.5 add exactly 2
    ModelConfig stage = model.config;
    stage.family = Family::Cfnn;
    for (int t = 0; t < 2; ++t) {
        ParamStore s = build_params(stage);
        s.range("a_coef[0]")[0] = 2.0;
        model.boost_stages.push_back(std::move(s));
    }
    CHECK(predict(model, std::span<const double>(&x, 1)) ==
          doctest::Approx(5.25));
}

TEST_CASE("moe expert hand evaluation at zero parameters") {
    ModelConfig cfg;
    cfg.family = Family::Moe;
    cfg.input_dim = 1;
    cfg.latent_dim = 1;
    cfg.poly_degree = 2;
    cfg.unit_count = 1;

    SUBCASE("depth 1 output is softplus(P_1)+1 >= 1") {
        cfg.depth = 1;
        ParamStore s = build_params(cfg);  // all zeros
        double x = 0.8;
        double out = eval_double(cfg, s, std::span<const double>(&x, 1));
        CHECK(out == doctest::Approx(std::log(2.0) + 1.0));
        CHECK(out >= 1.0);
    }

    SUBCASE("depth 2 backward recursion") {
        cfg.depth = 2;
        ParamStore s = build_params(cfg);
        double x = -0.4;
        // P_1 = P_2 = 0, beta_1 = 0:
        // O_2 = softplus(0)+1 = ln2+1; O_1 = softplus(0)/(O_2 + 1e-6)
        double o2 = std::log(2.0) + 1.0;
        double expected = std::log(2.0) / (o2 + 1e-6);
        double out = eval_double(cfg, s, std::span<const double>(&x, 1));
        CHECK(out == doctest::Approx(expected).epsilon(1e-12));
        CHECK(out == doctest::Approx(0.409384).epsilon(1e-4));
    }
}

TEST_CASE("moe gating: normalization, locality, underflow fallback") {
    ModelConfig cfg;
    cfg.family = Family::Moe;
    cfg.input_dim = 1;
    cfg.latent_dim = 2;
    cfg.poly_degree = 2;
    cfg.depth = 1;
    cfg.unit_count = 3;

    // identical experts: if the mixture weights sum to 1 the gate choice
    // cannot change the output
    ParamStore s = build_params(cfg);
    Rng rng(9);
    init_params(s, cfg, rng);
    std::span<double> first(s.values.data(), moe_expert_stride(cfg));
    for (int k = 1; k < 3; ++k) {
        std::span<double> ek(s.values.data() + k * moe_expert_stride(cfg),
                             moe_expert_stride(cfg));
        std::copy(first.begin(), first.end(), ek.begin());
        // spread the gate centers so the weights differ
        s.range("gate_mu[" + std::to_string(k) + "]")[0] = 2.0 * k;
    }

    ModelConfig solo = cfg;
    solo.unit_count = 1;
    ParamStore ss = build_params(solo);
    std::copy(first.begin(), first.end(), ss.values.begin());

    DoubleBackend bk;
    for (double x : {-1.0, 0.0, 0.5, 3.0}) {
        double mix = model_eval<double>(
            cfg, std::span<const double>(s.values), std::span<const double>(&x, 1), bk);
        double one = model_eval<double>(
            solo, std::span<const double>(ss.values), std::span<const double>(&x, 1), bk);
        CHECK(mix == doctest::Approx(one).epsilon(1e-12));
    }

    // far input: every gate underflows, uniform fallback still averages to
    // the common expert value and the event is counted
    long fallbacks = 0;
    double far = 1e6;
    for (int k = 0; k < 3; ++k)
        s.range("gate_sigma[" + std::to_string(k) + "]")[0] = 0.05;
    double out = moe_eval<double>(cfg, std::span<const double>(s.values),
                                  std::span<const double>(&far, 1), bk, &fallbacks);
    double one = model_eval<double>(solo, std::span<const double>(ss.values),
                                    std::span<const double>(&far, 1), bk);
    CHECK(fallbacks == 1);
    CHECK(out == doctest::Approx(one).epsilon(1e-12));
}

TEST_CASE("moe gate locality picks the near expert") {
    ModelConfig cfg;
    cfg.family = Family::Moe;
    cfg.input_dim = 1;
    cfg.latent_dim = 1;
    cfg.poly_degree = 1;
    cfg.depth = 1;
    cfg.unit_count = 2;
    ParamStore s = build_params(cfg);
    // expert outputs differ through the level-1 constant coefficient
    s.range("expert_coef[0]")[0] = 0.0;   // -> ln2 + 1
    s.range("expert_coef[1]")[0] = 10.0;  // -> softplus(10) + 1
    s.range("gate_mu[0]")[0] = 0.0;
    s.range("gate_mu[1]")[0] = 100.0;
    s.range("gate_sigma[0]")[0] = 0.5;
    s.range("gate_sigma[1]")[0] = 0.5;
    s.range("gate_lambda[0]")[0] = softplus_inverse_one();
    s.range("gate_lambda[1]")[0] = softplus_inverse_one();

    double x = 0.0;
    double out = eval_double(cfg, s, std::span<const double>(&x, 1));
    CHECK(out == doctest::Approx(std::log(2.0) + 1.0).epsilon(1e-12));
}

TEST_CASE("hybrid structure") {
    ModelConfig cfg;
    cfg.family = Family::Hybrid;
    cfg.input_dim = 2;
    cfg.poly_degree = 3;
    cfg.unit_count = 0;
    ParamStore s = build_params(cfg);
    s.range("skip_w")[0] = 2.0;
    s.range("skip_w")[1] = -1.0;
    s.range("skip_b")[0] = 0.25;
    double x[2] = {1.0, 3.0};
    CHECK(eval_double(cfg, s, std::span<const double>(x, 2)) ==
          doctest::Approx(2.0 - 3.0 + 0.25));

    // one unit with Q == 0, P == 2 contributes exactly 2/(0+gamma)
    cfg.unit_count = 1;
    ParamStore s1 = build_params(cfg);
    s1.range("unit_p[0]")[0] = 2.0;
    CHECK(eval_double(cfg, s1, std::span<const double>(x, 2)) ==
          doctest::Approx(2.0));
}

TEST_CASE("hybrid denominator never drops below gamma = 1") {
    // Q(z)^2 + 1 >= 1 for any coefficients; spot-check the evaluator path
    ModelConfig cfg;
    cfg.family = Family::Hybrid;
    cfg.input_dim = 1;
    cfg.poly_degree = 4;
    cfg.unit_count = 5;
    ParamStore s = build_params(cfg);
    Rng rng(21);
    init_params(s, cfg, rng);
    for (int t = 0; t < 2000; ++t) {
        double z = rng.uniform(-1000.0, 1000.0);
        for (int i = 0; i < cfg.unit_count; ++i) {
            auto q = s.range("unit_q[" + std::to_string(i) + "]");
            double acc = q[q.size() - 1];
            for (size_t k = q.size() - 1; k-- > 0;) acc = acc * z + q[k];
            CHECK(acc * acc + cfg.gamma >= 1.0);
        }
    }
}

TEST_CASE("mlp basics") {
    ModelConfig cfg;
    cfg.family = Family::Mlp;
    cfg.input_dim = 1;
    cfg.hidden_widths = {4, 4};
    ParamStore s = build_params(cfg);  // zeros
    s.range("b[2]")[0] = -0.75;
    double x = 5.0;
    CHECK(eval_double(cfg, s, std::span<const double>(&x, 1)) == -0.75);
    CHECK(param_count(cfg) == 33);
}

TEST_CASE("parameter counting") {
    ModelConfig hybrid;
    hybrid.family = Family::Hybrid;
    hybrid.input_dim = 3;
    hybrid.unit_count = 0;
    CHECK(param_count(hybrid) == 4);

    ModelConfig cfnn;
    cfnn.family = Family::Cfnn;
    cfnn.input_dim = 3;
    cfnn.depth = 4;
    cfnn.poly_degree = 4;
    CHECK(param_count(cfnn) == 81);  // frozen regression value

    // every family: the name table covers exactly param_count slots
    ModelConfig moe;
    moe.family = Family::Moe;
    moe.input_dim = 3;
    moe.depth = 2;
    moe.poly_degree = 2;
    moe.latent_dim = 4;
    moe.unit_count = 3;
    ModelConfig mlp;
    mlp.family = Family::Mlp;
    mlp.input_dim = 5;
    mlp.hidden_widths = {7, 3};
    hybrid.unit_count = 6;
    for (const ModelConfig& c : {cfnn, hybrid, moe, mlp})
        CHECK(static_cast<long>(build_params(c).size()) == param_count(c));

    ModelConfig bad;
    bad.input_dim = -1;
    CHECK_THROWS_AS(param_count(bad), InvalidConfig);
}

TEST_CASE("initialization contract") {
    ModelConfig cfg;
    cfg.family = Family::Cfnn;
    cfg.input_dim = 2;
    cfg.depth = 3;
    cfg.poly_degree = 3;
    ParamStore s = build_params(cfg);
    Rng rng(42);
    init_params(s, cfg, rng);
    for (int i = 1; i <= 3; ++i)
        CHECK(s.range("a_coef[" + std::to_string(i) + "]")[0] == 1.0);

    ModelConfig moe;
    moe.family = Family::Moe;
    moe.input_dim = 2;
    moe.depth = 2;
    moe.poly_degree = 2;
    moe.unit_count = 2;
    ParamStore ms = build_params(moe);
    init_params(ms, moe, rng);
    CHECK(stable_softplus(ms.range("gate_lambda[0]")[0]) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ms.range("gate_sigma[0]")[0] == 1.0);
}

TEST_CASE("tape and double backends agree on the forward pass") {
    Rng rng(33);
    auto both_match = [&](const ModelConfig& cfg) {
        ParamStore s = build_params(cfg);
        Rng ir(4);
        init_params(s, cfg, ir);
        std::vector<double> x(static_cast<size_t>(cfg.input_dim));
        for (double& v : x) v = rng.uniform(-2.0, 2.0);

        DoubleBackend db;
        double plain = model_eval<double>(
            cfg, std::span<const double>(s.values), x, db);

        Tape tape;
        TapeBackend tb{&tape};
        std::vector<Val> lifted;
        lifted.reserve(s.values.size());
        for (size_t i = 0; i < s.values.size(); ++i)
            lifted.push_back(tape.parameter(static_cast<int>(i), s.values[i]));
        Val traced = model_eval<Val>(cfg, std::span<const Val>(lifted), x, tb);
        CHECK(plain == traced.value());  // identical operation order => bitwise
    };

    ModelConfig cfnn;
    cfnn.family = Family::Cfnn;
    cfnn.input_dim = 2;
    cfnn.depth = 2;
    cfnn.poly_degree = 3;
    both_match(cfnn);

    ModelConfig hybrid;
    hybrid.family = Family::Hybrid;
    hybrid.input_dim = 3;
    hybrid.poly_degree = 4;
    hybrid.unit_count = 4;
    both_match(hybrid);

    ModelConfig mlp;
    mlp.family = Family::Mlp;
    mlp.input_dim = 2;
    mlp.hidden_widths = {6, 6};
    both_match(mlp);

    ModelConfig moe;
    moe.family = Family::Moe;
    moe.input_dim = 2;
    moe.depth = 2;
    moe.poly_degree = 2;
    moe.unit_count = 2;
    both_match(moe);
}
