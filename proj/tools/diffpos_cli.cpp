// diffpos: Monte-Carlo simulator for outdoor-to-indoor positioning with a
// window-edge diffraction path model.
//
//   diffpos scan-pathdiff --config scenario.json --spacing 0.05 --out results/
//   diffpos bias-table    --config scenario.json --bias-mode floorwise --out results/
//   diffpos run           --config scenario.json --trials 10000 --sigma 0.1 --out results/
//   diffpos solve         --config scenario.json --ranges ranges.csv
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diffpos/bias.hpp"
#include "diffpos/diffraction.hpp"
#include "diffpos/errors.hpp"
#include "diffpos/estimators.hpp"
#include "diffpos/harness.hpp"

namespace fs = std::filesystem;
using namespace diffpos;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<double> sigma;
    std::optional<double> edge_prob;
    std::optional<std::string> bias_mode;
    std::optional<std::string> estimators;
    std::optional<std::string> out;
    std::optional<std::size_t> bias_samples;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "Scenario JSON file (defaults to the reference building)");
    cmd->add_option("--seed", o.seed, "Master random seed");
    cmd->add_option("--bias-mode", o.bias_mode, "floorwise|composite");
    cmd->add_option("--bias-samples", o.bias_samples, "Bias samples per (anchor, floor)");
    cmd->add_option("--out", o.out, "Output directory");
}

ExperimentConfig resolve(const CommonOptions& o) {
    ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
    if (o.seed) cfg.seed = *o.seed;
    if (o.trials) cfg.n_trials = *o.trials;
    if (o.sigma) cfg.noise.sigma = *o.sigma;
    if (o.edge_prob) cfg.edge_prob = *o.edge_prob;
    if (o.bias_mode) cfg.bias_mode = parse_bias_mode(*o.bias_mode);
    if (o.estimators) cfg.estimators = parse_estimator_list(*o.estimators);
    if (o.out) cfg.output_dir = *o.out;
    if (o.bias_samples) cfg.bias_samples = *o.bias_samples;
    cfg.validate();
    return cfg;
}

std::ofstream open_output(const fs::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    os << std::setprecision(17);
    return os;
}

int cmd_scan(const CommonOptions& o, double spacing, double bin_width, bool rows) {
    const ExperimentConfig cfg = resolve(o);
    std::optional<std::ofstream> row_file;
    std::function<void(const PathDifferenceRow&)> sink;
    if (rows) {
        row_file.emplace(open_output(cfg.output_dir / "pathdiff_rows.csv"));
        *row_file << "floor,x_n,y_n,anchor_index,upper_len_m,lower_len_m,diff_m\n";
        sink = [&](const PathDifferenceRow& r) {
            *row_file << r.floor << ',' << r.x << ',' << r.y << ',' << r.anchor_index << ',' << r.upper_length << ','
                      << r.lower_length << ',' << r.difference << '\n';
        };
    }
    const PathDifferenceScan scan = path_difference_scan(cfg.building, cfg.anchors, spacing, bin_width, sink);

    auto hist = open_output(cfg.output_dir / "pathdiff_hist.csv");
    hist << "bin_lower_m,bin_upper_m,count,cumulative_fraction\n";
    for (std::size_t k = 0; k < scan.counts.size(); ++k)
        hist << static_cast<double>(k) * bin_width << ',' << static_cast<double>(k + 1) * bin_width << ','
             << scan.counts[k] << ',' << scan.cdf[k] << '\n';

    std::cout << "evaluated=" << scan.evaluated << " skipped=" << scan.skipped
              << " max_difference_m=" << scan.max_difference << '\n';
    return 0;
}

int cmd_bias(const CommonOptions& o, bool histogram) {
    const ExperimentConfig cfg = resolve(o);
    const BiasTable table =
        build_bias_table(cfg.building, cfg.anchors, cfg.bias_mode, cfg.bias_samples, cfg.seed);
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    const fs::path path = cfg.output_dir / "bias_table.csv";
    table.save_csv(path, histogram);
    std::cout << "wrote " << path.string() << " (" << table.size() << " entries)\n";
    return 0;
}

std::optional<BiasTable> maybe_load_table(const std::string& path) {
    if (path.empty()) return std::nullopt;
    try {
        return BiasTable::load_csv(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
}

int cmd_run(const CommonOptions& o, const std::string& table_path, bool dump_trials) {
    ExperimentConfig cfg = resolve(o);
    cfg.keep_trial_details = dump_trials;
    const auto table = maybe_load_table(table_path);
    const RmseReport report = run_experiment(cfg, table ? &*table : nullptr);
    export_report(report, cfg, cfg.output_dir);

    std::cout << std::fixed << std::setprecision(4);
    std::cout << "estimator      rmse_3d   rmse_z    median_3d median_z  floor_acc failures\n";
    for (const auto& r : report.estimators)
        std::cout << std::left << std::setw(14) << to_string(r.kind) << std::right << std::setw(9) << r.rmse_3d
                  << std::setw(9) << r.rmse_z << std::setw(10) << r.median_3d() << std::setw(9) << r.median_z()
                  << std::setw(10) << r.floor_accuracy << std::setw(9) << r.failures << '\n';
    std::cout << "results in " << cfg.output_dir.string() << '\n';
    return 0;
}

// ranges CSV: header "anchor_index,range_m", one row per anchor.
std::vector<double> read_ranges(const fs::path& path, std::size_t anchors) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read ranges file " + path.string());
    std::string line;
    std::getline(is, line);
    std::vector<std::optional<double>> ranges(anchors);
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("ranges file: expected 'anchor_index,range_m'");
        std::size_t idx = 0;
        double r = 0.0;
        try {
            idx = std::stoul(line.substr(0, comma));
            r = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw ConfigError("ranges file: malformed row '" + line + "'");
        }
        if (idx >= anchors) throw ConfigError("ranges file: anchor index out of range");
        ranges[idx] = r;
    }
    std::vector<double> out;
    for (std::size_t j = 0; j < anchors; ++j) {
        if (!ranges[j]) throw ConfigError("ranges file: missing range for anchor " + std::to_string(j));
        out.push_back(*ranges[j]);
    }
    return out;
}

int cmd_solve(const CommonOptions& o, const std::string& ranges_path, const std::string& table_path) {
    const ExperimentConfig cfg = resolve(o);
    const std::vector<double> ranges = read_ranges(ranges_path, cfg.anchors.size());
    std::optional<BiasTable> table = maybe_load_table(table_path);
    if (!table && cfg.needs_bias_table())
        table = build_bias_table(cfg.building, cfg.anchors, cfg.bias_mode, cfg.bias_samples, cfg.seed);

    std::cout << std::setprecision(10);
    std::cout << "estimator,x_m,y_m,z_m,floor,residual,iterations,converged,clamped,status\n";
    int status = 0;
    for (EstimatorKind kind : cfg.estimators) {
        std::cout << to_string(kind) << ',';
        try {
            PositionEstimate e;
            switch (kind) {
                case EstimatorKind::LLS:
                    e = lls_estimate(ranges, cfg.anchors, cfg.building);
                    break;
                case EstimatorKind::NLS:
                    e = nls_estimate(ranges, cfg.anchors, cfg.building, cfg.solver);
                    break;
                default: {
                    const IppaVariant v = kind == EstimatorKind::IppaID      ? IppaVariant::ID
                                          : kind == EstimatorKind::IppaIDMin ? IppaVariant::IDMin
                                                                             : IppaVariant::IDMean;
                    const BiasTable zeros(BiasMode::Composite, cfg.building.num_floors(), cfg.anchors.size());
                    e = ippa_estimate(ranges, cfg.anchors, cfg.building, table ? *table : zeros, v, cfg.solver,
                                      cfg.ippa);
                }
            }
            std::cout << e.x << ',' << e.y << ',' << e.z << ',' << e.floor << ',' << e.residual << ','
                      << e.iterations << ',' << e.converged << ',' << e.clamped << ",ok\n";
        } catch (const std::runtime_error& ex) {
            std::cout << ",,,,,,,,failed: " << ex.what() << '\n';
            status = kExitRuntime;
        }
    }
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diffraction-path NLOS positioning simulator"};
    app.require_subcommand(1);

    CommonOptions scan_opts, bias_opts, run_opts, solve_opts;

    double spacing = 0.05, bin_width = 0.01;
    bool rows = false;
    auto* scan = app.add_subcommand("scan-pathdiff", "Upper/lower edge path-length difference over a node grid");
    add_common(scan, scan_opts);
    scan->add_option("--spacing", spacing, "Grid spacing in meters")->check(CLI::PositiveNumber);
    scan->add_option("--bin-width", bin_width, "Histogram bin width in meters")->check(CLI::PositiveNumber);
    scan->add_flag("--rows", rows, "Also write every grid row to pathdiff_rows.csv");

    bool histogram = false;
    auto* bias = app.add_subcommand("bias-table", "Build and serialize the NLOS bias table");
    add_common(bias, bias_opts);
    bias->add_flag("--histogram", histogram, "Append histogram rows");

    std::string table_path;
    bool dump_trials = false;
    auto* run = app.add_subcommand("run", "Monte-Carlo comparison of all estimators");
    add_common(run, run_opts);
    run->add_option("--trials", run_opts.trials, "Number of trials");
    run->add_option("--sigma", run_opts.sigma, "Range noise standard deviation in meters");
    run->add_option("--edge-prob", run_opts.edge_prob, "Probability of the upper-edge path");
    run->add_option("--estimators", run_opts.estimators, "Comma-separated estimator list");
    run->add_option("--bias-table", table_path, "Pre-built bias table CSV");
    run->add_flag("--dump-trials", dump_trials, "Write trials.csv and diagnostics.csv");

    std::string ranges_path, solve_table;
    auto* solve = app.add_subcommand("solve", "Estimate a position from a ranges file");
    add_common(solve, solve_opts);
    solve->add_option("--ranges", ranges_path, "CSV with anchor_index,range_m rows")->required();
    solve->add_option("--estimators", solve_opts.estimators, "Comma-separated estimator list");
    solve->add_option("--bias-table", solve_table, "Pre-built bias table CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*scan) return cmd_scan(scan_opts, spacing, bin_width, rows);
        if (*bias) return cmd_bias(bias_opts, histogram);
        if (*run) return cmd_run(run_opts, table_path, dump_trials);
        if (*solve) return cmd_solve(solve_opts, ranges_path, solve_table);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::logic_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitConfig;
}
