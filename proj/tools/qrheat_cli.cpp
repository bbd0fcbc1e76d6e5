// qrheat_cli.cpp — Command-line front end: `qrheat sweep ...`

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qrheat/error.hpp"
#include "qrheat/sweep.hpp"

namespace {

enum Exit { kOk = 0, kConfigError = 1, kPartialFailure = 2, kFatal = 3 };

bool is_config_error(qrheat::ErrorCode c) {
    using qrheat::ErrorCode;
    return c == ErrorCode::ParseError || c == ErrorCode::ValidationError || c == ErrorCode::UnknownPreset ||
           c == ErrorCode::CouplingOutOfRange || c == ErrorCode::NonPositiveFrequency || c == ErrorCode::InvalidBath;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw qrheat::Error(qrheat::ErrorCode::ParseError, "cannot read config '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string overlap_dump_path(const std::string& csv_path) {
    std::string side = qrheat::sidecar_path(csv_path);
    return side.substr(0, side.size() - 5) + ".overlaps.csv";
}

int run(const std::string& config_path, const std::string& out, const std::string& preset, int workers,
        bool dump) {
    qrheat::SweepConfig cfg;
    try {
        if (config_path.empty() && preset.empty())
            throw qrheat::Error(qrheat::ErrorCode::ValidationError, "give --config, --preset, or both");
        const qrheat::SweepConfig base = preset.empty() ? qrheat::SweepConfig{} : qrheat::figure_preset(preset);
        cfg = config_path.empty() ? base : qrheat::parse_config(read_file(config_path), base);
        if (workers > 0) cfg.workers = workers;
        qrheat::validate_config(cfg);
    } catch (const qrheat::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    for (const auto& w : qrheat::config_warnings(cfg)) std::cerr << "warning: " << w << '\n';

    const auto t0 = std::chrono::steady_clock::now();
    const auto records = qrheat::run_sweep(cfg);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    qrheat::emit_csv(records, cfg, out, ms);

    std::size_t failed = 0;
    int max_N = cfg.truncation.initial_N;
    for (const auto& r : records) {
        if (!r.ok()) {
            ++failed;
            std::cerr << "point failed: " << r.message << '\n';
        }
        max_N = std::max(max_N, r.converged_N);
    }
    if (dump) {
        const std::string path = overlap_dump_path(out);
        std::ofstream f(path, std::ios::binary);
        if (!f) throw qrheat::Error(qrheat::ErrorCode::IoError, "cannot open '" + path + "'");
        qrheat::dump_overlaps(f, cfg, max_N);
    }
    std::cerr << records.size() << " points (" << failed << " failed) in " << ms / 1000.0 << " s -> " << out << '\n';
    return failed ? kPartialFailure : kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heat transport statistics and squeezing for a quadratically coupled qubit-resonator"};
    app.require_subcommand(1);

    auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write CSV + JSON sidecar");
    std::string config_path, out, preset;
    int workers = 0;
    bool dump = false;
    sweep->add_option("--config", config_path, "Config file (key = value lines)");
    sweep->add_option("--out", out, "Output CSV path; the sidecar goes next to it")->required();
    sweep->add_option("--preset", preset, "Figure preset used as the base config");
    sweep->add_option("--workers", workers, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
    sweep->add_flag("--dump-overlaps", dump, "Also write the overlap tables for each coupling");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        return run(config_path, out, preset, workers, dump);
    } catch (const qrheat::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_config_error(e.code()) ? kConfigError : kFatal;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << '\n';
        return kFatal;
    }
}
