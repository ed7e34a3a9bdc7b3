#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "diffpos/bias.hpp"
#include "diffpos/estimators.hpp"
#include "diffpos/geometry.hpp"
#include "diffpos/measurement.hpp"

namespace diffpos {

enum class EstimatorKind { LLS, IppaID, IppaIDMin, IppaIDMean, NLS };

const char* to_string(EstimatorKind kind);
EstimatorKind parse_estimator(std::string_view name);
// Comma-separated names, e.g. "nls,ippa-idmean,lls".
std::vector<EstimatorKind> parse_estimator_list(std::string_view csv);
std::vector<EstimatorKind> all_estimators();

struct ExperimentConfig {
    BuildingModel building = BuildingModel::reference();
    AnchorConfig anchors = AnchorConfig::reference();
    // Only sigma is used; per-trial noise seeds derive from `seed`.
    NoiseModel noise;
    std::size_t n_trials = 10000;
    double edge_prob = 0.5;
    BiasMode bias_mode = BiasMode::Floorwise;
    std::size_t bias_samples = kDefaultBiasSamples;
    std::vector<EstimatorKind> estimators = all_estimators();
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "out";
    SolverSettings solver;
    IppaOptions ippa;
    // Keep node, ranges and per-floor diagnostics of every trial for CSV dumps.
    bool keep_trial_details = false;

    // Throws ConfigError.
    void validate() const;
    bool needs_bias_table() const;
};

// JSON scenario file. Every key is optional and falls back to the defaults above:
//   num_floors, floor_height_m, length_m, breadth_m, window_height_m,
//   window_x_min_m, window_x_max_m, anchors: [[x, y, z], ...], sigma_m,
//   edge_prob, n_trials, bias_mode, bias_samples, estimators: [names],
//   seed, output_dir, delta_m, max_iterations, damping,
//   ippa_residual ("absolute"|"product"), ippa_distance ("3d"|"2d"), ippa_init ("far-wall"|"centroid").
// Throws ConfigError.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

struct EstimatorOutcome {
    bool ok = false;
    PositionEstimate estimate;
    double error_3d = 0.0;
    double error_z = 0.0;
    bool floor_hit = false;
    std::string failure;
};

struct TrialResult {
    std::size_t trial_id = 0;
    NodePosition truth;
    std::vector<double> ranges;
    std::vector<EdgeKind> edge_choices;
    // Parallel to ExperimentConfig::estimators.
    std::vector<EstimatorOutcome> outcomes;
};

// Node, edge choices and noise depend only on (config.seed, trial_id), and
// every estimator sees the same ranges.
TrialResult run_trial(const ExperimentConfig& config, const BiasTable* bias_table, std::size_t trial_id);

struct EmpiricalCdf {
    std::vector<double> abscissae;
    std::vector<double> fractions;
};

// Sorted samples with failures appended at +inf.
EmpiricalCdf empirical_cdf(std::span<const double> samples, std::size_t failures);
// Median over samples plus failures at +inf.
double median_with_failures(std::span<const double> samples, std::size_t failures);
double rmse(std::span<const double> samples);

struct EstimatorReport {
    EstimatorKind kind = EstimatorKind::NLS;
    double rmse_3d = 0.0;
    double rmse_z = 0.0;
    // Successful trials only, in trial order.
    std::vector<double> errors_3d;
    std::vector<double> errors_z;
    std::size_t failures = 0;
    std::size_t floor_hits = 0;
    double floor_accuracy = 0.0;
    EmpiricalCdf cdf_3d;
    EmpiricalCdf cdf_z;

    double median_3d() const { return median_with_failures(errors_3d, failures); }
    double median_z() const { return median_with_failures(errors_z, failures); }
};

struct RmseReport {
    std::size_t n_trials = 0;
    std::vector<EstimatorReport> estimators;
    // Filled only with ExperimentConfig::keep_trial_details.
    std::vector<TrialResult> trials;

    const EstimatorReport& at(EstimatorKind kind) const;
};

// Builds the bias table when an IPPA bias variant is enabled unless one is supplied.
RmseReport run_experiment(const ExperimentConfig& config, const BiasTable* bias_table = nullptr);

// Writes summary.csv, cdf_3d_<estimator>.csv, cdf_z_<estimator>.csv and
// config.json (plus trials.csv and diagnostics.csv when trial details were
// kept). Files are staged and renamed at the end; on failure nothing new is
// left behind and IoError is thrown.
std::vector<std::filesystem::path> export_report(const RmseReport& report, const ExperimentConfig& config,
                                                 const std::filesystem::path& output_dir);

}  // namespace diffpos
