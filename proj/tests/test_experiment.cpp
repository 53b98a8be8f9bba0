#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cfnn/experiment.hpp"

using namespace cfnn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// quadratic-time reference: p survives unless some q dominates it strictly
std::vector<ParetoPoint> brute_front(const std::vector<ParetoPoint>& pts) {
    std::vector<ParetoPoint> keep;
    for (const auto& p : pts) {
        bool dominated = false;
        for (const auto& q : pts) {
            if (q.param_count <= p.param_count && q.test_mse <= p.test_mse &&
                (q.param_count < p.param_count || q.test_mse < p.test_mse))
                dominated = true;
        }
        if (!dominated) keep.push_back(p);
    }
    return keep;
}

std::multiset<std::pair<long, double>> as_set(const std::vector<ParetoPoint>& v) {
    std::multiset<std::pair<long, double>> s;
    for (const auto& p : v) s.insert({p.param_count, p.test_mse});
    return s;
}

}  // namespace

TEST_CASE("pareto front: hand cases") {
    std::vector<ParetoPoint> pts{{10, 0.5, "a", 1},
                                 {20, 0.3, "b", 1},
                                 {30, 0.4, "c", 1}};
    auto front = pareto_front(pts);
    REQUIRE(front.size() == 2);
    CHECK(front[0].param_count == 10);
    CHECK(front[1].param_count == 20);
    CHECK(front[1].tag == "b");

    // a single point is always on the front
    auto solo = pareto_front({{50, 1.0, "x", 2}});
    REQUIRE(solo.size() == 1);
    CHECK(solo[0].tag == "x");

    // exact ties survive; a worse point at the same size does not
    pts = {{10, 0.5, "a", 1}, {10, 0.5, "b", 2}, {10, 0.6, "c", 3}};
    front = pareto_front(pts);
    REQUIRE(front.size() == 2);
    CHECK(front[0].test_mse == 0.5);
    CHECK(front[1].test_mse == 0.5);

    CHECK_THROWS_AS(pareto_front({}), InvalidConfig);
}

TEST_CASE("pareto front matches brute force on random inputs") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ParetoPoint> pts;
        for (int i = 0; i < 100; ++i) {
            ParetoPoint p;
            p.param_count = static_cast<long>(rng.uniform(1.0, 50.0));
            p.test_mse = rng.uniform(0.0, 1.0);
            pts.push_back(p);
        }
        CHECK(as_set(pareto_front(pts)) == as_set(brute_front(pts)));
    }
}

TEST_CASE("threshold params scans the frontier") {
    std::vector<ParetoPoint> front{{10, 0.5, "a", 1}, {20, 0.3, "b", 1}};
    CHECK(threshold_params(front, 0.4).value() == 20);
    CHECK(threshold_params(front, 0.6).value() == 10);
    CHECK(!threshold_params(front, 0.2).has_value());
    CHECK(!threshold_params({}, 1.0).has_value());
}

TEST_CASE("config parsing: fragments, defaults, rejection") {
    json mj = {{"family", "hybrid"}, {"input_dim", 3}, {"unit_count", 7},
               {"gamma", 2.0}};
    ModelConfig mc = model_config_from_json(mj);
    CHECK(mc.family == Family::Hybrid);
    CHECK(mc.input_dim == 3);
    CHECK(mc.unit_count == 7);
    CHECK(mc.gamma == 2.0);
    CHECK(model_tag(mj) == "hybrid");
    mj["tag"] = "wide";
    CHECK(model_tag(mj) == "wide");

    json tj = {{"epochs", 7}, {"learning_rate", 0.5}};
    TrainConfig tc = train_config_from_json(tj);
    CHECK(tc.epochs == 7);
    CHECK(tc.learning_rate == 0.5);
    CHECK(tc.patience == 15);  // untouched default

    json good = {{"protocol", "stability"},
                 {"seeds", {1, 2}},
                 {"output_dir", "somewhere"}};
    ExperimentConfig ec = parse_experiment_json(good);
    CHECK(ec.protocol == "stability");
    CHECK(ec.output_dir == "somewhere");
    CHECK(ec.seeds == std::vector<uint64_t>{1, 2});

    json bad = good;
    bad["protocol"] = "nope";
    CHECK_THROWS_AS(parse_experiment_json(bad), InvalidConfig);
    bad = good;
    bad["seeds"] = json::array();
    CHECK_THROWS_AS(parse_experiment_json(bad), InvalidConfig);
    bad.erase("seeds");
    CHECK_THROWS_AS(parse_experiment_json(bad), InvalidConfig);
}

TEST_CASE("dataset fragments route to the right generator") {
    json dj = {{"generator", "runge"}, {"samples", 80}};
    Dataset ds = dataset_from_json(dj, 5);
    CHECK(ds.n() == 80);
    CHECK(ds.d() == 1);

    json nj = {{"generator", "noise_benchmark"}, {"samples", 200},
               {"noise_columns", 2}};
    Dataset nb = dataset_from_json(nj, 5);
    CHECK(nb.d() == 9);  // 4 signal + 2 redundant + 1 deceptive + 2 noise
}

TEST_CASE("dry run only plans") {
    fs::path dir = fs::temp_directory_path() / "cfnn_test_dry";
    fs::remove_all(dir);
    json j = {{"protocol", "pareto"},
              {"seeds", {1, 2, 3}},
              {"output_dir", dir.string()},
              {"models", {{{"family", "cfnn"}}, {{"family", "mlp"}}}},
              {"dataset", {{"generator", "runge"}, {"samples", 60}}}};
    ExperimentConfig cfg = parse_experiment_json(j);
    CHECK(run_protocol(cfg, true) == 0);
    json summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary["dry_run"] == true);
    CHECK(summary["planned_cells"] == 6);
    CHECK(!fs::exists(dir / "pareto_points.csv"));
    fs::remove_all(dir);
}

TEST_CASE("pareto protocol produces artifacts and reruns identically") {
    json j = {{"protocol", "pareto"},
              {"seeds", {1}},
              {"mse_threshold", 1e-12},  // unreachable on purpose
              {"train", {{"epochs", 4}}},
              {"models",
               {{{"family", "cfnn"}, {"depth", 1}, {"tag", "small"}},
                {{"family", "cfnn"}, {"depth", 2}, {"tag", "big"}}}},
              {"dataset", {{"generator", "runge"}, {"samples", 60}}}};

    auto run_into = [&](const fs::path& dir) {
        fs::remove_all(dir);
        ExperimentConfig cfg = parse_experiment_json(j);
        cfg.output_dir = dir.string();
        CHECK(run_protocol(cfg) == 0);
    };
    fs::path d1 = fs::temp_directory_path() / "cfnn_test_pareto1";
    fs::path d2 = fs::temp_directory_path() / "cfnn_test_pareto2";
    run_into(d1);
    run_into(d2);

    for (const char* name :
         {"config.json", "summary.json", "pareto_points.csv", "pareto_front.csv"}) {
        CHECK(fs::exists(d1 / name));
        CHECK(slurp(d1 / name) == slurp(d2 / name));  // bitwise repeatable
    }
    json summary = json::parse(slurp(d1 / "summary.json"));
    CHECK(summary["threshold_params"] == "unreached");
    CHECK(summary["frontier_size"].get<size_t>() >= 1);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("stability protocol writes telemetry for every cell") {
    fs::path dir = fs::temp_directory_path() / "cfnn_test_stab";
    fs::remove_all(dir);
    json j = {{"protocol", "stability"},
              {"seeds", {1, 2}},
              {"output_dir", dir.string()},
              {"train", {{"epochs", 3}}},
              {"models",
               {{{"family", "cfnn"}, {"depth", 1}},
                {{"family", "hybrid"}, {"unit_count", 2}}}},
              {"datasets", {{{"generator", "runge"}, {"samples", 60}}}}};
    ExperimentConfig cfg = parse_experiment_json(j);
    CHECK(run_protocol(cfg) == 0);

    std::ifstream tel(dir / "telemetry.csv");
    std::string line;
    std::getline(tel, line);
    CHECK(line ==
          "model,seed,dataset,grad_mean,grad_std,grad_max,anomalies,epochs_run,"
          "early_stopped,diverged");
    int rows = 0;
    while (std::getline(tel, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);  // 2 models x 2 seeds x 1 dataset

    CHECK(fs::exists(dir / "metrics.csv"));
    CHECK(fs::exists(dir / "loss_curves.csv"));
    json summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary["gradient_stats"].size() == 4);
    fs::remove_all(dir);
}
