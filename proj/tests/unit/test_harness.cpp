#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "diffpos/errors.hpp"
#include "diffpos/harness.hpp"

using namespace diffpos;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.n_trials = 200;
    c.bias_samples = 2000;
    c.seed = 77;
    return c;
}

fs::path scratch_dir(const char* name) {
    const fs::path p = fs::temp_directory_path() / ("diffpos_test_" + std::string(name));
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(Harness, EstimatorNames) {
    EXPECT_EQ(parse_estimator("ippa-idmean"), EstimatorKind::IppaIDMean);
    EXPECT_EQ(parse_estimator_list("nls, lls"), (std::vector<EstimatorKind>{EstimatorKind::NLS, EstimatorKind::LLS}));
    EXPECT_THROW(parse_estimator("kalman"), ConfigError);
    for (EstimatorKind k : all_estimators()) EXPECT_EQ(parse_estimator(to_string(k)), k);
}

TEST(Harness, RunIsDeterministic) {
    const ExperimentConfig c = small_config();
    const RmseReport a = run_experiment(c);
    const RmseReport b = run_experiment(c);
    ASSERT_EQ(a.estimators.size(), b.estimators.size());
    for (std::size_t k = 0; k < a.estimators.size(); ++k) {
        EXPECT_EQ(a.estimators[k].errors_3d, b.estimators[k].errors_3d);
        EXPECT_EQ(a.estimators[k].errors_z, b.estimators[k].errors_z);
    }
}

TEST(Harness, SingleTrialReproducesBatch) {
    ExperimentConfig c = small_config();
    c.keep_trial_details = true;
    const RmseReport batch = run_experiment(c);
    const BiasTable table = build_bias_table(c.building, c.anchors, c.bias_mode, c.bias_samples, c.seed);
    for (std::size_t id : {0u, 57u, 199u}) {
        const TrialResult t = run_trial(c, &table, id);
        const TrialResult& ref = batch.trials[id];
        EXPECT_EQ(t.truth, ref.truth);
        EXPECT_EQ(t.ranges, ref.ranges);
        for (std::size_t k = 0; k < t.outcomes.size(); ++k) {
            EXPECT_EQ(t.outcomes[k].error_3d, ref.outcomes[k].error_3d);
            EXPECT_EQ(t.outcomes[k].error_z, ref.outcomes[k].error_z);
        }
    }
}

TEST(Harness, ReportStatisticsAreConsistent) {
    const RmseReport r = run_experiment(small_config());
    for (const EstimatorReport& e : r.estimators) {
        EXPECT_EQ(e.cdf_3d.abscissae.size(), r.n_trials);
        EXPECT_EQ(e.errors_3d.size() + e.failures, r.n_trials);
        EXPECT_NEAR(e.rmse_3d, rmse(e.errors_3d), 1e-12);
        EXPECT_DOUBLE_EQ(e.cdf_3d.fractions.back(), 1.0);
        EXPECT_NEAR(e.floor_accuracy, static_cast<double>(e.floor_hits) / r.n_trials, 1e-12);
    }
}

TEST(Harness, MedianCountsFailuresAsInfinite) {
    const std::vector<double> s{1.0, 2.0, 3.0};
    EXPECT_DOUBLE_EQ(median_with_failures(s, 0), 2.0);
    EXPECT_DOUBLE_EQ(median_with_failures(s, 1), 2.5);
    EXPECT_TRUE(std::isinf(median_with_failures(s, 3)));
    const EmpiricalCdf c = empirical_cdf(s, 1);
    EXPECT_EQ(c.abscissae.size(), 4u);
    EXPECT_DOUBLE_EQ(c.fractions[2], 0.75);
    EXPECT_DOUBLE_EQ(rmse(std::vector<double>{3.0, 4.0}), std::sqrt(12.5));
}

TEST(Harness, ExportWritesFiles) {
    ExperimentConfig c = small_config();
    c.n_trials = 20;
    c.estimators = {EstimatorKind::LLS, EstimatorKind::NLS};
    const fs::path dir = scratch_dir("export");
    const auto files = export_report(run_experiment(c), c, dir);
    EXPECT_TRUE(fs::exists(dir / "summary.csv"));
    EXPECT_TRUE(fs::exists(dir / "cdf_3d_nls.csv"));
    EXPECT_TRUE(fs::exists(dir / "config.json"));
    for (const auto& f : files) EXPECT_TRUE(fs::exists(f));
    for (const auto& entry : fs::directory_iterator(dir)) EXPECT_NE(entry.path().extension(), ".partial");
    std::ifstream cdf(dir / "cdf_3d_lls.csv");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(cdf, line)) ++lines;
    EXPECT_EQ(lines, 21u);
    fs::remove_all(dir);
}

TEST(Harness, UnwritableOutputFails) {
    ExperimentConfig c = small_config();
    c.n_trials = 5;
    c.estimators = {EstimatorKind::LLS};
    const fs::path blocker = scratch_dir("blocker");
    std::ofstream(blocker) << "file, not a directory";
    EXPECT_THROW(export_report(run_experiment(c), c, blocker / "out"), IoError);
    fs::remove(blocker);
}

TEST(Harness, ConfigParsing) {
    const ExperimentConfig c = parse_config(R"({"sigma_m": 0.2, "n_trials": 10, "bias_mode": "composite",
        "estimators": ["nls"], "anchors": [[1,-5,2],[5,-6,9],[9,-7,4],[14,-5,13]], "ippa_init": "centroid"})");
    EXPECT_DOUBLE_EQ(c.noise.sigma, 0.2);
    EXPECT_EQ(c.n_trials, 10u);
    EXPECT_EQ(c.bias_mode, BiasMode::Composite);
    EXPECT_EQ(c.anchors.size(), 4u);
    EXPECT_EQ(c.ippa.init_mode, InitMode::FloorCentroid);
    const ExperimentConfig back = parse_config(config_to_json(c));
    EXPECT_EQ(config_to_json(back), config_to_json(c));
}

TEST(Harness, ConfigErrors) {
    EXPECT_THROW(parse_config("{"), ConfigError);
    EXPECT_THROW(parse_config("[]"), ConfigError);
    EXPECT_THROW(parse_config(R"({"edge_prob": 2})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"sigma_m": "big"})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"anchors": [[1, 2, 3]]})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"estimators": ["magic"]})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"num_floors": 0})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"ippa_init": "random"})"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/diffpos.json"), ConfigError);
}

TEST(Harness, MeanCorrectionBeatsIdentificationOnly) {
    ExperimentConfig c;
    c.n_trials = 1000;
    c.bias_samples = 20000;
    c.estimators = {EstimatorKind::IppaID, EstimatorKind::IppaIDMean};
    c.keep_trial_details = true;
    const RmseReport r = run_experiment(c);
    std::vector<double> id, mean;
    for (const TrialResult& t : r.trials) {
        const auto planar = [&](const EstimatorOutcome& o) {
            return std::hypot(o.estimate.x - t.truth.x, o.estimate.y - t.truth.y);
        };
        if (t.outcomes[0].ok) id.push_back(planar(t.outcomes[0]));
        if (t.outcomes[1].ok) mean.push_back(planar(t.outcomes[1]));
    }
    EXPECT_LT(median_with_failures(mean, c.n_trials - mean.size()), median_with_failures(id, c.n_trials - id.size()));
}
