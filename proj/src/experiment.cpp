#include "cfnn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "cfnn/attribution.hpp"
#include "cfnn/metrics.hpp"
#include "cfnn/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cfnn {

// ---------------------------------------------------------------------------
// Pareto utilities
// ---------------------------------------------------------------------------

std::vector<ParetoPoint> pareto_front(std::vector<ParetoPoint> points) {
    if (points.empty()) throw InvalidConfig("pareto_front needs at least one point");
    std::stable_sort(points.begin(), points.end(),
                     [](const ParetoPoint& a, const ParetoPoint& b) {
                         if (a.param_count != b.param_count)
                             return a.param_count < b.param_count;
                         return a.test_mse < b.test_mse;
                     });
    std::vector<ParetoPoint> front;
    for (const auto& p : points) {
        bool dominated = false;
        for (const auto& q : points) {
            bool no_worse = q.param_count <= p.param_count && q.test_mse <= p.test_mse;
            bool strict = q.param_count < p.param_count || q.test_mse < p.test_mse;
            if (no_worse && strict) {
                dominated = true;
                break;
            }
        }
        if (!dominated) front.push_back(p);
    }
    return front;
}

std::optional<long> threshold_params(std::span<const ParetoPoint> frontier,
                                     double mse_threshold) {
    for (const auto& p : frontier)
        if (p.test_mse < mse_threshold) return p.param_count;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

ModelConfig model_config_from_json(const json& j) {
    ModelConfig cfg;
    cfg.family = family_from_name(j.at("family").get<std::string>());
    cfg.input_dim = j.value("input_dim", 1);
    cfg.depth = j.value("depth", cfg.depth);
    cfg.poly_degree = j.value("poly_degree", cfg.poly_degree);
    cfg.unit_count = j.value("unit_count", cfg.unit_count);
    cfg.latent_dim = j.value("latent_dim", cfg.latent_dim);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.shrinkage = j.value("shrinkage", cfg.shrinkage);
    cfg.epsilon_den = j.value("epsilon_den", cfg.epsilon_den);
    cfg.epsilon_gate = j.value("epsilon_gate", cfg.epsilon_gate);
    if (j.contains("hidden_widths"))
        cfg.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
    return cfg;
}

std::string model_tag(const json& j) {
    if (j.contains("tag")) return j.at("tag").get<std::string>();
    return j.at("family").get<std::string>();
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig cfg;
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.clip_threshold = j.value("clip_threshold", cfg.clip_threshold);
    cfg.patience = j.value("patience", cfg.patience);
    cfg.divergence_limit = j.value("divergence_limit", cfg.divergence_limit);
    cfg.abort_on_divergence = j.value("abort_on_divergence", cfg.abort_on_divergence);
    cfg.parallel = j.value("parallel", default_parallel());
    return cfg;
}

Dataset dataset_from_json(const json& j, uint64_t seed) {
    if (j.contains("csv")) {
        CsvOptions opts;
        opts.has_header = j.value("has_header", true);
        opts.standardize = j.value("standardize", false);
        opts.split_seed = seed;
        return load_csv(j.at("csv").get<std::string>(),
                        j.at("target_column").get<std::string>(), opts);
    }
    std::string gen = j.at("generator").get<std::string>();
    if (gen == "noise_benchmark") {
        NoiseBenchmarkConfig cfg;
        cfg.n = j.value("samples", cfg.n);
        cfg.obs_sigma = j.value("obs_sigma", cfg.obs_sigma);
        cfg.redundant = j.value("redundant", cfg.redundant);
        cfg.deceptive = j.value("deceptive", cfg.deceptive);
        if (j.contains("noise_columns"))
            cfg.noise_columns = j.at("noise_columns").get<int>();
        cfg.noise_ratio = j.value("noise_ratio", cfg.noise_ratio);
        cfg.deceptive_corr = j.value("deceptive_corr", cfg.deceptive_corr);
        cfg.seed = seed;
        return gen_noise_benchmark(cfg);
    }
    size_t n = j.value("samples", size_t(2000));
    return sample_function(get_target(gen), n, seed);
}

ExperimentConfig parse_experiment_json(const json& j) {
    ExperimentConfig cfg;
    cfg.protocol = j.at("protocol").get<std::string>();
    cfg.output_dir = j.value("output_dir", std::string("artifacts/") + cfg.protocol);
    if (!j.contains("seeds") || j.at("seeds").empty())
        throw InvalidConfig("experiment config needs a non-empty seeds list");
    cfg.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    static const char* known[] = {"stability", "depth-scaling", "lead-grid",
                                  "pareto",    "spectral",      "noise",
                                  "attribution"};
    if (std::find(std::begin(known), std::end(known), cfg.protocol) ==
        std::end(known))
        throw InvalidConfig("unknown protocol: " + cfg.protocol);
    cfg.raw = j;
    return cfg;
}

ExperimentConfig parse_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(std::string("config parse failure: ") + e.what());
    }
    return parse_experiment_json(j);
}

// ---------------------------------------------------------------------------
// Artifact collector: all CSV/JSON writes funnel through one place so files
// stay append-consistent regardless of cell execution order.
// ---------------------------------------------------------------------------

namespace {

struct Collector {
    fs::path dir;
    json summary;

    explicit Collector(const std::string& out_dir) : dir(out_dir) {
        fs::create_directories(dir);
        fs::create_directories(dir / "models");
    }

    std::ofstream open_csv(const std::string& name, const std::string& header) {
        std::ofstream out(dir / name);
        if (!out) throw IoError("cannot open " + (dir / name).string());
        out.precision(17);
        out << header << '\n';
        return out;
    }

    void finish() {
        std::ofstream out(dir / "summary.json");
        if (!out) throw IoError("cannot write summary.json");
        out << summary.dump(2) << '\n';
    }
};

struct CellResult {
    Model model;
    TrainHistory history;
    AccuracyMetrics test;
    double train_mse = 0.0;
    double val_mse = 0.0;
};

CellResult run_cell(const ModelConfig& mcfg, const Dataset& data,
                    TrainConfig tcfg, uint64_t seed) {
    tcfg.seed = seed;
    CellResult cell;
    cell.model = fit_model(mcfg, data, tcfg, &cell.history);
    cell.train_mse = model_mse(cell.model, data.X, data.y, data.split.train);
    cell.val_mse = data.split.val.empty()
                       ? std::numeric_limits<double>::quiet_NaN()
                       : model_mse(cell.model, data.X, data.y, data.split.val);
    std::vector<double> pred, truth;
    predict_batch(cell.model, data.X, data.split.test, pred);
    truth.reserve(data.split.test.size());
    for (size_t i : data.split.test) truth.push_back(data.y[i]);
    cell.test = accuracy_metrics(pred, truth);
    return cell;
}

void append_metrics_row(std::ofstream& out, const std::string& tag,
                        uint64_t seed, const std::string& dataset,
                        const CellResult& cell) {
    out << tag << ',' << seed << ',' << dataset << ','
        << model_param_count(cell.model) << ',' << cell.train_mse << ','
        << cell.val_mse << ',' << cell.test.mse << ',' << cell.test.rmse << ','
        << cell.test.mae << ',' << (cell.test.r2_defined ? cell.test.r2 : 0.0)
        << '\n';
}

void append_telemetry_row(std::ofstream& out, const std::string& tag,
                          uint64_t seed, const std::string& dataset,
                          const CellResult& cell) {
    GradientStats gs = gradient_stats(cell.history);
    out << tag << ',' << seed << ',' << dataset << ',' << gs.mean << ','
        << gs.stddev << ',' << gs.max << ',' << gs.anomalies << ','
        << cell.history.epochs_run << ',' << cell.history.early_stopped << ','
        << cell.history.diverged << '\n';
}

void append_loss_curve(std::ofstream& out, const std::string& tag,
                       uint64_t seed, const TrainHistory& h) {
    for (size_t e = 0; e < h.train_loss.size(); ++e)
        out << (e + 1) << ',' << tag << ',' << seed << ',' << h.train_loss[e]
            << ',' << h.val_loss[e] << '\n';
}

std::string model_file(const std::string& tag, uint64_t seed) {
    return "models/" + tag + "_s" + std::to_string(seed) + ".cfnn";
}

json dataset_list(const json& raw) {
    if (raw.contains("datasets")) return raw.at("datasets");
    return json::array({raw.at("dataset")});
}

std::string dataset_name(const json& dj) {
    if (dj.contains("csv")) return fs::path(dj.at("csv").get<std::string>()).stem();
    return dj.at("generator").get<std::string>();
}

// -- protocols --------------------------------------------------------------

void proto_stability(const ExperimentConfig& cfg, Collector& col) {
    TrainConfig tcfg = train_config_from_json(cfg.raw.value("train", json::object()));
    auto metrics = col.open_csv(
        "metrics.csv",
        "model,seed,dataset,param_count,train_mse,val_mse,test_mse,test_rmse,test_mae,r2");
    auto telem = col.open_csv(
        "telemetry.csv",
        "model,seed,dataset,grad_mean,grad_std,grad_max,anomalies,epochs_run,early_stopped,diverged");
    auto curves = col.open_csv("loss_curves.csv", "epoch,model,seed,train_loss,val_loss");

    json rows = json::array();
    for (const auto& dj : dataset_list(cfg.raw)) {
        std::string dname = dataset_name(dj);
        for (const auto& mj : cfg.raw.at("models")) {
            ModelConfig mcfg = model_config_from_json(mj);
            std::string tag = model_tag(mj);
            for (uint64_t seed : cfg.seeds) {
                Dataset data = dataset_from_json(dj, seed);
                CellResult cell = run_cell(mcfg, data, tcfg, seed);
                append_metrics_row(metrics, tag, seed, dname, cell);
                append_telemetry_row(telem, tag, seed, dname, cell);
                append_loss_curve(curves, tag, seed, cell.history);
                save_model(cell.model, (col.dir / model_file(tag, seed)).string());
                GradientStats gs = gradient_stats(cell.history);
                rows.push_back({{"model", tag},
                                {"seed", seed},
                                {"dataset", dname},
                                {"grad_std", gs.stddev},
                                {"anomalies", gs.anomalies}});
            }
        }
    }
    col.summary["gradient_stats"] = rows;
}

void proto_depth_scaling(const ExperimentConfig& cfg, Collector& col) {
    TrainConfig base = train_config_from_json(cfg.raw.value("train", json::object()));
    const json& dj = cfg.raw.at("dataset");
    auto out = col.open_csv("depth_scaling.csv",
                            "model,seed,depth,capacity,param_count,test_rmse");
    std::vector<int> depths =
        cfg.raw.value("depths", std::vector<int>{1, 2, 3, 4});
    int epochs_per_level = cfg.raw.value("epochs_per_level", 0);

    json rows = json::array();
    for (const auto& mj : cfg.raw.at("models")) {
        std::string tag = model_tag(mj);
        for (int L : depths) {
            json mj_depth = mj;
            mj_depth["depth"] = L;
            ModelConfig mcfg = model_config_from_json(mj_depth);
            TrainConfig tcfg = base;
            if (epochs_per_level > 0) tcfg.epochs = epochs_per_level * L;
            for (uint64_t seed : cfg.seeds) {
                Dataset data = dataset_from_json(dj, seed);
                CellResult cell = run_cell(mcfg, data, tcfg, seed);
                long capacity = static_cast<long>(L) * mcfg.poly_degree;
                out << tag << ',' << seed << ',' << L << ',' << capacity << ','
                    << model_param_count(cell.model) << ',' << cell.test.rmse
                    << '\n';
                rows.push_back({{"model", tag},
                                {"seed", seed},
                                {"depth", L},
                                {"test_rmse", cell.test.rmse}});
            }
        }
    }
    col.summary["depth_scaling"] = rows;
}

void proto_lead_grid(const ExperimentConfig& cfg, Collector& col) {
    TrainConfig tcfg = train_config_from_json(cfg.raw.value("train", json::object()));
    ModelConfig base_cfg = model_config_from_json(cfg.raw.at("baseline"));
    std::string base_tag = model_tag(cfg.raw.at("baseline"));
    auto out = col.open_csv(
        "lead_grid.csv",
        "model,dataset,seed,model_mse,baseline_mse,lead_percent");

    json rows = json::array();
    for (const auto& dj : dataset_list(cfg.raw)) {
        std::string dname = dataset_name(dj);
        for (uint64_t seed : cfg.seeds) {
            Dataset data = dataset_from_json(dj, seed);
            ModelConfig bcfg = base_cfg;
            bcfg.input_dim = static_cast<int>(data.d());
            CellResult base = run_cell(bcfg, data, tcfg, seed);
            for (const auto& mj : cfg.raw.at("models")) {
                ModelConfig mcfg = model_config_from_json(mj);
                mcfg.input_dim = static_cast<int>(data.d());
                std::string tag = model_tag(mj);
                CellResult cell = run_cell(mcfg, data, tcfg, seed);
                auto lead = lead_percent(base.test.mse, cell.test.mse);
                out << tag << ',' << dname << ',' << seed << ','
                    << cell.test.mse << ',' << base.test.mse << ',';
                if (lead)
                    out << *lead;
                else
                    out << "undefined";
                out << '\n';
                rows.push_back(
                    {{"model", tag},
                     {"dataset", dname},
                     {"seed", seed},
                     {"lead_percent", lead ? json(*lead) : json("undefined")}});
            }
        }
    }
    col.summary["lead_grid"] = rows;
    col.summary["baseline"] = base_tag;
}

void proto_pareto(const ExperimentConfig& cfg, Collector& col) {
    TrainConfig tcfg = train_config_from_json(cfg.raw.value("train", json::object()));
    const json& dj = cfg.raw.at("dataset");
    double threshold = cfg.raw.value("mse_threshold", 0.01);

    auto points_csv = col.open_csv("pareto_points.csv",
                                   "model,seed,param_count,test_mse");
    std::vector<ParetoPoint> points;
    for (const auto& mj : cfg.raw.at("models")) {
        ModelConfig mcfg = model_config_from_json(mj);
        std::string tag = model_tag(mj);
        for (uint64_t seed : cfg.seeds) {
            Dataset data = dataset_from_json(dj, seed);
            CellResult cell = run_cell(mcfg, data, tcfg, seed);
            ParetoPoint p{model_param_count(cell.model), cell.test.mse, tag, seed};
            points.push_back(p);
            points_csv << p.tag << ',' << p.seed << ',' << p.param_count << ','
                       << p.test_mse << '\n';
        }
    }
    auto front = pareto_front(points);
    auto front_csv =
        col.open_csv("pareto_front.csv", "model,seed,param_count,test_mse");
    for (const auto& p : front)
        front_csv << p.tag << ',' << p.seed << ',' << p.param_count << ','
                  << p.test_mse << '\n';

    auto min_params = threshold_params(front, threshold);
    col.summary["mse_threshold"] = threshold;
    col.summary["threshold_params"] =
        min_params ? json(*min_params) : json("unreached");
    col.summary["frontier_size"] = front.size();
}

void proto_spectral(const ExperimentConfig& cfg, Collector& col) {
    TrainConfig tcfg = train_config_from_json(cfg.raw.value("train", json::object()));
    const json& dj = cfg.raw.at("dataset");
    const TargetFunction& target = get_target(dj.at("generator").get<std::string>());
    int sweep_axis = cfg.raw.value("sweep_axis", 0);
    size_t slice_points = cfg.raw.value("slice_points", size_t(512));
    uint64_t seed = cfg.seeds.front();

    // slice anchors fix the non-swept coordinates; the sweep-axis entry of
    // each anchor is ignored. Default: the domain midpoint.
    std::vector<std::vector<double>> anchors;
    if (cfg.raw.contains("slice_anchors")) {
        anchors = cfg.raw.at("slice_anchors")
                      .get<std::vector<std::vector<double>>>();
    } else {
        std::vector<double> mid(static_cast<size_t>(target.arity));
        for (int j = 0; j < target.arity; ++j)
            mid[static_cast<size_t>(j)] =
                0.5 * (target.domain[static_cast<size_t>(j)].first +
                       target.domain[static_cast<size_t>(j)].second);
        anchors.push_back(mid);
    }

    auto [lo, hi] = target.domain[static_cast<size_t>(sweep_axis)];
    std::vector<Matrix> slices;
    std::vector<std::vector<double>> truths;
    for (const auto& anchor : anchors) {
        Matrix slice(slice_points, static_cast<size_t>(target.arity));
        std::vector<double> truth(slice_points);
        for (size_t i = 0; i < slice_points; ++i) {
            std::vector<double> x = anchor;
            x[static_cast<size_t>(sweep_axis)] =
                lo + (hi - lo) * static_cast<double>(i) /
                         static_cast<double>(slice_points - 1);
            for (int j = 0; j < target.arity; ++j)
                slice(i, static_cast<size_t>(j)) = x[static_cast<size_t>(j)];
            truth[i] = target.eval(x);
        }
        slices.push_back(std::move(slice));
        truths.push_back(std::move(truth));
    }

    auto psd_csv =
        col.open_csv("relative_psd.csv", "frequency,model,relative_psd");
    auto cum_csv = col.open_csv("cumulative_spectrum.csv",
                                "frequency,model,cumulative");
    auto band_csv = col.open_csv("band_errors.csv", "model,band,mean_relative_psd");

    json rows = json::array();
    for (const auto& mj : cfg.raw.at("models")) {
        ModelConfig mcfg = model_config_from_json(mj);
        mcfg.input_dim = target.arity;
        std::string tag = model_tag(mj);
        Dataset data = dataset_from_json(dj, seed);
        CellResult cell = run_cell(mcfg, data, tcfg, seed);
        save_model(cell.model, (col.dir / model_file(tag, seed)).string());

        // per-slice reports, averaged across anchors
        std::vector<double> avg_psd, freqs;
        double low = 0.0, high = 0.0;
        for (size_t s = 0; s < slices.size(); ++s) {
            std::vector<double> residual(slice_points);
            for (size_t i = 0; i < slice_points; ++i)
                residual[i] = predict(cell.model, slices[s].row(i)) - truths[s][i];
            SpectralReport rep = spectral_report(residual, truths[s]);
            if (avg_psd.empty()) {
                avg_psd.assign(rep.relative_psd.size(), 0.0);
                freqs = rep.frequencies;
            }
            for (size_t i = 0; i < avg_psd.size(); ++i)
                avg_psd[i] += rep.relative_psd[i];
            low += rep.low_band_mean;
            high += rep.high_band_mean;
        }
        double ns = static_cast<double>(slices.size());
        for (double& v : avg_psd) v /= ns;
        low /= ns;
        high /= ns;

        double running = 0.0;
        for (size_t i = 0; i < avg_psd.size(); ++i) {
            psd_csv << freqs[i] << ',' << tag << ',' << avg_psd[i] << '\n';
            running += avg_psd[i];
            cum_csv << freqs[i] << ',' << tag << ',' << running << '\n';
        }
        band_csv << tag << ",low," << low << '\n';
        band_csv << tag << ",high," << high << '\n';
        rows.push_back({{"model", tag},
                        {"low_band_mean", low},
                        {"high_band_mean", high},
                        {"ratio", high / low}});
    }
    col.summary["bands"] = rows;
    col.summary["sweep_axis"] = sweep_axis;
    col.summary["slice_count"] = anchors.size();
}

void proto_noise(const ExperimentConfig& cfg, Collector& col) {
    TrainConfig tcfg = train_config_from_json(cfg.raw.value("train", json::object()));
    const json& dj = cfg.raw.at("dataset");
    int repeats = cfg.raw.value("importance_repeats", 5);
    uint64_t seed = cfg.seeds.front();
    Dataset data = dataset_from_json(dj, seed);

    auto metrics = col.open_csv(
        "metrics.csv",
        "model,seed,dataset,param_count,train_mse,val_mse,test_mse,test_rmse,test_mae,r2");

    json rows = json::array();
    double reference_nsr = 0.0;
    for (const auto& mj : cfg.raw.at("models")) {
        ModelConfig mcfg = model_config_from_json(mj);
        mcfg.input_dim = static_cast<int>(data.d());
        std::string tag = model_tag(mj);
        CellResult cell = run_cell(mcfg, data, tcfg, seed);
        append_metrics_row(metrics, tag, seed, "noise_benchmark", cell);
        save_model(cell.model, (col.dir / model_file(tag, seed)).string());

        ImportanceEstimate imp = permutation_importance(
            cell.model, data.X, data.y, data.split.test, repeats, seed);
        write_importance_csv((col.dir / ("importance_" + tag + ".csv")).string(),
                             imp);
        AttributionReport rep = interpretability_scores(
            imp.mean, data.feature_roles, 5, reference_nsr);
        if (reference_nsr == 0.0 && rep.nsr_defined) reference_nsr = rep.nsr;
        rows.push_back({{"model", tag},
                        {"test_mse", cell.test.mse},
                        {"nsr", rep.nsr_defined ? json(rep.nsr) : json("inf")},
                        {"top5_accuracy", rep.topk_accuracy},
                        {"mir", rep.mir},
                        {"suppression", rep.suppression}});
    }
    col.summary["noise"] = rows;
}

void proto_attribution(const ExperimentConfig& cfg, Collector& col) {
    TrainConfig tcfg = train_config_from_json(cfg.raw.value("train", json::object()));
    const json& dj = cfg.raw.at("dataset");
    int repeats = cfg.raw.value("importance_repeats", 5);
    int shapley_samples = cfg.raw.value("shapley_samples", 32);
    size_t explain_count = cfg.raw.value("explain_count", size_t(50));
    uint64_t seed = cfg.seeds.front();
    Dataset data = dataset_from_json(dj, seed);

    json rows = json::array();
    for (const auto& mj : cfg.raw.at("models")) {
        ModelConfig mcfg = model_config_from_json(mj);
        mcfg.input_dim = static_cast<int>(data.d());
        std::string tag = model_tag(mj);
        CellResult cell = run_cell(mcfg, data, tcfg, seed);
        save_model(cell.model, (col.dir / model_file(tag, seed)).string());

        ImportanceEstimate perm = permutation_importance(
            cell.model, data.X, data.y, data.split.test, repeats, seed);
        write_importance_csv(
            (col.dir / ("importance_perm_" + tag + ".csv")).string(), perm);

        std::span<const size_t> test = data.split.test;
        std::vector<size_t> explain(
            test.begin(),
            test.begin() + static_cast<long>(std::min(explain_count, test.size())));
        ImportanceEstimate shap =
            sampled_shapley(cell.model, data.X, data.split.train, explain,
                            shapley_samples, seed);
        write_importance_csv(
            (col.dir / ("importance_shapley_" + tag + ".csv")).string(), shap);

        rows.push_back({{"model", tag},
                        {"permutation_ranking", importance_ranking(perm.mean)},
                        {"shapley_ranking", importance_ranking(shap.mean)}});
    }
    col.summary["attribution"] = rows;
}

}  // namespace

int run_protocol(const ExperimentConfig& cfg, bool dry_run) {
    if (dry_run) {
        size_t cells = cfg.raw.contains("models") ? cfg.raw.at("models").size() : 1;
        cells *= cfg.seeds.size();
        if (cfg.raw.contains("datasets")) cells *= cfg.raw.at("datasets").size();
        Collector col(cfg.output_dir);
        col.summary["protocol"] = cfg.protocol;
        col.summary["dry_run"] = true;
        col.summary["planned_cells"] = cells;
        col.finish();
        return 0;
    }

    Collector col(cfg.output_dir);
    {
        std::ofstream snap(fs::path(cfg.output_dir) / "config.json");
        if (!snap) throw IoError("cannot write config snapshot");
        snap << cfg.raw.dump(2) << '\n';
    }
    col.summary["protocol"] = cfg.protocol;
    col.summary["seeds"] = cfg.seeds;

    if (cfg.protocol == "stability")
        proto_stability(cfg, col);
    else if (cfg.protocol == "depth-scaling")
        proto_depth_scaling(cfg, col);
    else if (cfg.protocol == "lead-grid")
        proto_lead_grid(cfg, col);
    else if (cfg.protocol == "pareto")
        proto_pareto(cfg, col);
    else if (cfg.protocol == "spectral")
        proto_spectral(cfg, col);
    else if (cfg.protocol == "noise")
        proto_noise(cfg, col);
    else if (cfg.protocol == "attribution")
        proto_attribution(cfg, col);
    else
        throw InvalidConfig("unknown protocol: " + cfg.protocol);

    col.finish();
    return 0;
}

}  // namespace cfnn
