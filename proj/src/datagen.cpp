#include "cfnn/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace cfnn {

using nlohmann::json;

std::string role_name(FeatureRole r) {
    switch (r) {
        case FeatureRole::Signal: return "signal";
        case FeatureRole::Redundant: return "redundant";
        case FeatureRole::Deceptive: return "deceptive";
        case FeatureRole::Noise: return "noise";
        case FeatureRole::External: return "external";
    }
    return "?";
}

Split make_split(size_t n, double p_train, double p_val, double p_test,
                 uint64_t seed) {
    if (std::fabs(p_train + p_val + p_test - 1.0) > 1e-9)
        throw InvalidConfig("split proportions must sum to 1");
    size_t n_val = static_cast<size_t>(std::floor(p_val * static_cast<double>(n)));
    size_t n_test = static_cast<size_t>(std::floor(p_test * static_cast<double>(n)));
    size_t n_train = n - n_val - n_test;

    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);

    Split s;
    s.train.assign(idx.begin(), idx.begin() + static_cast<long>(n_train));
    s.val.assign(idx.begin() + static_cast<long>(n_train),
                 idx.begin() + static_cast<long>(n_train + n_val));
    s.test.assign(idx.begin() + static_cast<long>(n_train + n_val), idx.end());
    return s;
}

Dataset sample_function(const TargetFunction& target, size_t n, uint64_t seed) {
    if (n < 10) throw InvalidConfig("sample_function: n must be >= 10");
    Dataset ds;
    ds.X = Matrix(n, static_cast<size_t>(target.arity));
    ds.y.resize(n);
    ds.feature_roles.assign(static_cast<size_t>(target.arity), FeatureRole::Signal);

    Rng rng(seed);
    std::vector<double> x(static_cast<size_t>(target.arity));
    for (size_t i = 0; i < n; ++i) {
        int guard = 0;
        do {
            for (int j = 0; j < target.arity; ++j) {
                auto [lo, hi] = target.domain[static_cast<size_t>(j)];
                x[static_cast<size_t>(j)] = rng.uniform(lo, hi);
            }
            if (++guard > 100000)
                throw DomainError(target.name + ": sampler cannot satisfy exclusions");
        } while (!target.admissible(x));
        std::copy(x.begin(), x.end(), ds.X.row(i).begin());
        try {
            ds.y[i] = target.eval(x);
        } catch (const Error& e) {
            throw DomainError(target.name + ": oracle failed at sample " +
                              std::to_string(i) + ": " + e.what());
        }
    }
    ds.split = make_split(n, 0.65, 0.05, 0.30, seed);

    json prov;
    prov["generator"] = "sample_function";
    prov["target"] = target.name;
    prov["n"] = n;
    prov["seed"] = seed;
    ds.provenance = prov.dump();
    return ds;
}

Dataset gen_noise_benchmark(const NoiseBenchmarkConfig& cfg) {
    if (cfg.n < 100) throw InvalidConfig("noise benchmark needs n >= 100");
    if (!cfg.noise_columns && (cfg.noise_ratio < 0.0 || cfg.noise_ratio > 0.95))
        throw InfeasibleRatio("noise ratio outside [0, 0.95]");

    const int n_signal = 4;
    int uninformative_fixed = cfg.redundant + cfg.deceptive;
    int k;
    if (cfg.noise_columns) {
        k = *cfg.noise_columns;
        if (k < 0) throw InfeasibleRatio("negative noise column count");
    } else {
        // smallest k with (uninformative + k) / (total + k) >= ratio
        double a = cfg.noise_ratio;
        double need =
            (a * (n_signal + uninformative_fixed) - uninformative_fixed) / (1.0 - a);
        k = std::max(0, static_cast<int>(std::ceil(need - 1e-12)));
    }

    const size_t n = cfg.n;
    const size_t d =
        static_cast<size_t>(n_signal + cfg.redundant + cfg.deceptive + k);
    Dataset ds;
    ds.X = Matrix(n, d);
    ds.y.resize(n);
    ds.feature_roles.clear();
    for (int j = 0; j < n_signal; ++j) ds.feature_roles.push_back(FeatureRole::Signal);
    for (int j = 0; j < cfg.redundant; ++j)
        ds.feature_roles.push_back(FeatureRole::Redundant);
    for (int j = 0; j < cfg.deceptive; ++j)
        ds.feature_roles.push_back(FeatureRole::Deceptive);
    for (int j = 0; j < k; ++j) ds.feature_roles.push_back(FeatureRole::Noise);

    Rng rng(cfg.seed);

    for (size_t i = 0; i < n; ++i)
        for (int j = 0; j < n_signal; ++j) ds.X(i, static_cast<size_t>(j)) = rng.normal();

    for (size_t i = 0; i < n; ++i) {
        double x1 = ds.X(i, 0), x2 = ds.X(i, 1), x3 = ds.X(i, 2), x4 = ds.X(i, 3);
        ds.y[i] = std::sin(x1) + std::cos(x2) + x3 * x4 +
                  rng.normal(0.0, cfg.obs_sigma);
    }

    // redundant columns: random linear combinations of the signal features
    // plus a small perturbation
    for (int r = 0; r < cfg.redundant; ++r) {
        size_t col = static_cast<size_t>(n_signal + r);
        double w[4];
        for (double& v : w) v = rng.normal();
        for (size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < 4; ++j) s += w[j] * ds.X(i, static_cast<size_t>(j));
            ds.X(i, col) = s + rng.normal(0.0, 0.05);
        }
    }

    ds.split = make_split(n, 0.65, 0.05, 0.30, cfg.seed);

    // deceptive columns: y-aligned mixture with exact sample correlation on
    // the train split, the same spurious relationship continued on the val
    // split, and an independent redraw on the test split only — so the trap
    // survives early stopping and vanishes exactly where generalization is
    // measured
    for (int dc = 0; dc < cfg.deceptive; ++dc) {
        size_t col = static_cast<size_t>(n_signal + cfg.redundant + dc);
        const auto& tr = ds.split.train;
        size_t m = tr.size();
        double mean = 0.0;
        for (size_t i : tr) mean += ds.y[i];
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (size_t i : tr) var += (ds.y[i] - mean) * (ds.y[i] - mean);
        double sd = std::sqrt(var / static_cast<double>(m));

        std::vector<double> ys(m), u(m);
        for (size_t t = 0; t < m; ++t) ys[t] = (ds.y[tr[t]] - mean) / sd;
        for (size_t t = 0; t < m; ++t) u[t] = rng.normal();
        double umean = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(m);
        for (double& v : u) v -= umean;
        double proj = 0.0, ynorm = 0.0;
        for (size_t t = 0; t < m; ++t) {
            proj += u[t] * ys[t];
            ynorm += ys[t] * ys[t];
        }
        for (size_t t = 0; t < m; ++t) u[t] -= proj / ynorm * ys[t];
        double uvar = 0.0;
        for (double v : u) uvar += v * v;
        double usd = std::sqrt(uvar / static_cast<double>(m));

        double c = cfg.deceptive_corr;
        double mix = std::sqrt(1.0 - c * c);
        for (size_t t = 0; t < m; ++t)
            ds.X(tr[t], col) = c * ys[t] + mix * u[t] / usd;
        for (size_t i : ds.split.val)
            ds.X(i, col) = c * (ds.y[i] - mean) / sd + mix * rng.normal();
        for (size_t i : ds.split.test) ds.X(i, col) = rng.normal();
    }

    for (int nc = 0; nc < k; ++nc) {
        size_t col = static_cast<size_t>(n_signal + cfg.redundant + cfg.deceptive + nc);
        for (size_t i = 0; i < n; ++i) ds.X(i, col) = rng.normal();
    }

    json prov;
    prov["generator"] = "noise_benchmark";
    prov["n"] = cfg.n;
    prov["obs_sigma"] = cfg.obs_sigma;
    prov["redundant"] = cfg.redundant;
    prov["deceptive"] = cfg.deceptive;
    if (cfg.noise_columns) prov["noise_columns"] = *cfg.noise_columns;
    prov["noise_ratio"] = cfg.noise_ratio;
    prov["deceptive_corr"] = cfg.deceptive_corr;
    prov["seed"] = cfg.seed;
    ds.provenance = prov.dump();
    return ds;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

static std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

Dataset load_csv(const std::string& path, const std::string& target_column,
                 const CsvOptions& opts) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::vector<std::string> header;
    std::string line;
    size_t lineno = 0;
    size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto cells = split_line(line);
        if (lineno == 1 && opts.has_header) {
            header = cells;
            width = cells.size();
            continue;
        }
        if (width == 0) width = cells.size();
        if (cells.size() != width)
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": ragged row (expected " + std::to_string(width) +
                             " cells, got " + std::to_string(cells.size()) + ")");
        std::vector<double> row;
        row.reserve(cells.size());
        for (size_t c = 0; c < cells.size(); ++c) {
            try {
                size_t used = 0;
                double v = std::stod(cells[c], &used);
                if (used != cells[c].size()) throw std::invalid_argument("trailing");
                row.push_back(v);
            } catch (const std::exception&) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": column " +
                                 std::to_string(c + 1) + ": non-numeric cell '" +
                                 cells[c] + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path + ": no data rows");

    size_t target_idx = width;
    if (opts.has_header) {
        for (size_t c = 0; c < header.size(); ++c)
            if (header[c] == target_column) target_idx = c;
    } else {
        try {
            target_idx = static_cast<size_t>(std::stoul(target_column));
        } catch (const std::exception&) {
            target_idx = width;
        }
    }
    if (target_idx >= width)
        throw ParseError(path + ": target column '" + target_column + "' not found");

    Dataset ds;
    size_t n = rows.size();
    size_t d = width - 1;
    ds.X = Matrix(n, d);
    ds.y.resize(n);
    ds.feature_roles.assign(d, FeatureRole::External);
    for (size_t i = 0; i < n; ++i) {
        size_t jj = 0;
        for (size_t c = 0; c < width; ++c) {
            if (c == target_idx)
                ds.y[i] = rows[i][c];
            else
                ds.X(i, jj++) = rows[i][c];
        }
    }
    ds.split = make_split(n, 0.65, 0.05, 0.30, opts.split_seed);

    if (opts.standardize) {
        for (size_t c = 0; c < d; ++c) {
            double mean = 0.0;
            for (size_t i : ds.split.train) mean += ds.X(i, c);
            mean /= static_cast<double>(ds.split.train.size());
            double var = 0.0;
            for (size_t i : ds.split.train)
                var += (ds.X(i, c) - mean) * (ds.X(i, c) - mean);
            double sd = std::sqrt(var / static_cast<double>(ds.split.train.size()));
            if (sd == 0.0) sd = 1.0;
            for (size_t i = 0; i < n; ++i) ds.X(i, c) = (ds.X(i, c) - mean) / sd;
        }
    }

    json prov;
    prov["generator"] = "csv";
    prov["path"] = path;
    prov["target_column"] = target_column;
    prov["has_header"] = opts.has_header;
    prov["standardize"] = opts.standardize;
    prov["split_seed"] = opts.split_seed;
    ds.provenance = prov.dump();
    return ds;
}

Dataset regenerate(const std::string& provenance_json) {
    json prov = json::parse(provenance_json);
    std::string gen = prov.at("generator");
    if (gen == "sample_function") {
        return sample_function(get_target(prov.at("target").get<std::string>()),
                               prov.at("n").get<size_t>(),
                               prov.at("seed").get<uint64_t>());
    }
    if (gen == "noise_benchmark") {
        NoiseBenchmarkConfig cfg;
        cfg.n = prov.at("n").get<size_t>();
        cfg.obs_sigma = prov.at("obs_sigma").get<double>();
        cfg.redundant = prov.at("redundant").get<int>();
        cfg.deceptive = prov.at("deceptive").get<int>();
        if (prov.contains("noise_columns"))
            cfg.noise_columns = prov.at("noise_columns").get<int>();
        cfg.noise_ratio = prov.at("noise_ratio").get<double>();
        cfg.deceptive_corr = prov.at("deceptive_corr").get<double>();
        cfg.seed = prov.at("seed").get<uint64_t>();
        return gen_noise_benchmark(cfg);
    }
    if (gen == "csv") {
        CsvOptions opts;
        opts.has_header = prov.at("has_header").get<bool>();
        opts.standardize = prov.at("standardize").get<bool>();
        opts.split_seed = prov.at("split_seed").get<uint64_t>();
        return load_csv(prov.at("path").get<std::string>(),
                        prov.at("target_column").get<std::string>(), opts);
    }
    throw ParseError("unknown generator in provenance: " + gen);
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (size_t c = 0; c < ds.d(); ++c)
        out << role_name(ds.feature_roles[c]) << "_" << c << ",";
    out << "y\n";
    out.precision(17);
    for (size_t i = 0; i < ds.n(); ++i) {
        for (size_t c = 0; c < ds.d(); ++c) out << ds.X(i, c) << ",";
        out << ds.y[i] << "\n";
    }
}

void write_provenance(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << ds.provenance << "\n";
}

}  // namespace cfnn
