#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "cfnn/experiment.hpp"

namespace {

void write_error_record(const std::string& out_dir, const std::string& kind,
                        const std::string& message) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::ofstream out(std::filesystem::path(out_dir) / "error.json");
    if (!out) return;
    nlohmann::json rec{{"error", kind}, {"message", message}};
    out << rec.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cfnn experiment runner"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "execute an experiment config");
    std::string config_path, out_override, seeds_override, protocol_override;
    bool dry_run = false;
    run->add_option("config", config_path, "experiment config (JSON)")->required();
    run->add_option("--out", out_override, "output directory override");
    run->add_option("--seeds", seeds_override, "comma-separated seed override");
    run->add_option("--protocol", protocol_override, "protocol override");
    run->add_flag("--dry-run", dry_run, "validate and enumerate runs only");

    CLI11_PARSE(app, argc, argv);

    std::string out_dir = "artifacts";
    try {
        nlohmann::json j;
        {
            std::ifstream in(config_path);
            if (!in) throw cfnn::IoError("cannot open config " + config_path);
            in >> j;
        }
        if (!protocol_override.empty()) j["protocol"] = protocol_override;
        if (!out_override.empty()) j["output_dir"] = out_override;
        if (!seeds_override.empty()) {
            std::vector<uint64_t> seeds;
            std::stringstream ss(seeds_override);
            std::string tok;
            while (std::getline(ss, tok, ',')) seeds.push_back(std::stoull(tok));
            j["seeds"] = seeds;
        }
        cfnn::ExperimentConfig cfg = cfnn::parse_experiment_json(j);
        out_dir = cfg.output_dir;
        int rc = cfnn::run_protocol(cfg, dry_run);
        if (rc == 0)
            std::cout << "artifacts written to " << cfg.output_dir << '\n';
        return rc;
    } catch (const cfnn::Error& e) {
        write_error_record(out_dir, "cfnn_error", e.what());
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        write_error_record(out_dir, "exception", e.what());
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
