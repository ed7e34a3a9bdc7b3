#include "diffpos/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "diffpos/errors.hpp"
#include "diffpos/random.hpp"
#include "csv_util.hpp"
#include "parallel.hpp"

namespace diffpos {

namespace {

constexpr std::uint64_t kNodeStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

struct EstimatorName {
    EstimatorKind kind;
    const char* name;
};

constexpr EstimatorName kNames[] = {
    {EstimatorKind::LLS, "lls"},
    {EstimatorKind::IppaID, "ippa-id"},
    {EstimatorKind::IppaIDMin, "ippa-idmin"},
    {EstimatorKind::IppaIDMean, "ippa-idmean"},
    {EstimatorKind::NLS, "nls"},
};

PositionEstimate run_estimator(EstimatorKind kind, const ExperimentConfig& cfg, const BiasTable* table,
                               std::span<const double> ranges) {
    const auto ippa = [&](IppaVariant variant) {
        if (variant == IppaVariant::ID) {
            // Zero corrections; no characterization needed.
            const BiasTable zeros(BiasMode::Composite, cfg.building.num_floors(), cfg.anchors.size());
            return ippa_estimate(ranges, cfg.anchors, cfg.building, zeros, variant, cfg.solver, cfg.ippa);
        }
        if (table == nullptr) throw EstimationFailure("IPPA bias variant requires a bias table");
        return ippa_estimate(ranges, cfg.anchors, cfg.building, *table, variant, cfg.solver, cfg.ippa);
    };
    switch (kind) {
        case EstimatorKind::LLS:
            return lls_estimate(ranges, cfg.anchors, cfg.building);
        case EstimatorKind::IppaID:
            return ippa(IppaVariant::ID);
        case EstimatorKind::IppaIDMin:
            return ippa(IppaVariant::IDMin);
        case EstimatorKind::IppaIDMean:
            return ippa(IppaVariant::IDMean);
        case EstimatorKind::NLS:
            return nls_estimate(ranges, cfg.anchors, cfg.building, cfg.solver);
    }
    throw EstimationFailure("unknown estimator");
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

const char* to_string(EstimatorKind kind) {
    for (const auto& n : kNames)
        if (n.kind == kind) return n.name;
    return "?";
}

EstimatorKind parse_estimator(std::string_view name) {
    for (const auto& n : kNames)
        if (name == n.name) return n.kind;
    throw ConfigError("unknown estimator '" + std::string(name) +
                      "' (expected lls, ippa-id, ippa-idmin, ippa-idmean, nls)");
}

std::vector<EstimatorKind> parse_estimator_list(std::string_view csv) {
    std::vector<EstimatorKind> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const auto comma = csv.find(',', start);
        const std::string token = detail::trim(csv.substr(start, comma == std::string_view::npos ? csv.npos : comma - start));
        if (!token.empty()) {
            const EstimatorKind k = parse_estimator(token);
            if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
        }
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw ConfigError("estimator list is empty");
    return out;
}

std::vector<EstimatorKind> all_estimators() {
    std::vector<EstimatorKind> out;
    for (const auto& n : kNames) out.push_back(n.kind);
    return out;
}

TrialResult run_trial(const ExperimentConfig& config, const BiasTable* bias_table, std::size_t trial_id) {
    TrialResult result;
    result.trial_id = trial_id;
    result.truth = sample_node(config.building, derive_seed(config.seed, {trial_id, kNodeStream}));
    result.outcomes.resize(config.estimators.size());

    NoiseModel noise = config.noise;
    noise.seed = derive_seed(config.seed, {trial_id, kNoiseStream});
    std::optional<RangeVector> measured;
    try {
        measured.emplace(generate_measurements(result.truth, config.anchors, config.building, noise, config.edge_prob));
    } catch (const MeasurementUnavailable& e) {
        for (auto& o : result.outcomes) o.failure = e.what();
        return result;
    }
    const auto ranges = measured->ranges();
    result.ranges.assign(ranges.begin(), ranges.end());
    result.edge_choices.assign(measured->edge_choices().begin(), measured->edge_choices().end());

    const Point3 truth = config.building.node_point(result.truth);
    for (std::size_t e = 0; e < config.estimators.size(); ++e) {
        EstimatorOutcome& out = result.outcomes[e];
        try {
            out.estimate = run_estimator(config.estimators[e], config, bias_table, ranges);
            out.ok = true;
            out.error_3d = distance(Point3{out.estimate.x, out.estimate.y, out.estimate.z}, truth);
            out.error_z = std::abs(out.estimate.z - truth.z);
            out.floor_hit = out.estimate.floor == result.truth.floor;
        } catch (const std::runtime_error& ex) {
            out.ok = false;
            out.failure = ex.what();
        }
    }
    return result;
}

EmpiricalCdf empirical_cdf(std::span<const double> samples, std::size_t failures) {
    EmpiricalCdf cdf;
    cdf.abscissae.assign(samples.begin(), samples.end());
    std::sort(cdf.abscissae.begin(), cdf.abscissae.end());
    cdf.abscissae.insert(cdf.abscissae.end(), failures, std::numeric_limits<double>::infinity());
    const double n = static_cast<double>(cdf.abscissae.size());
    cdf.fractions.resize(cdf.abscissae.size());
    for (std::size_t k = 0; k < cdf.abscissae.size(); ++k) cdf.fractions[k] = static_cast<double>(k + 1) / n;
    return cdf;
}

double median_with_failures(std::span<const double> samples, std::size_t failures) {
    std::vector<double> all(samples.begin(), samples.end());
    all.insert(all.end(), failures, std::numeric_limits<double>::infinity());
    if (all.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t mid = all.size() / 2;
    std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(mid), all.end());
    const double upper = all[mid];
    if (all.size() % 2 == 1) return upper;
    const double lower = *std::max_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

double rmse(std::span<const double> samples) {
    if (samples.empty()) return 0.0;
    double sum = 0.0;
    for (double s : samples) sum += s * s;
    return std::sqrt(sum / static_cast<double>(samples.size()));
}

const EstimatorReport& RmseReport::at(EstimatorKind kind) const {
    for (const auto& r : estimators)
        if (r.kind == kind) return r;
    throw DomainError(std::string("estimator not in report: ") + to_string(kind));
}

RmseReport run_experiment(const ExperimentConfig& config, const BiasTable* bias_table) {
    config.validate();

    std::optional<BiasTable> built;
    if (config.needs_bias_table() && bias_table == nullptr) {
        built.emplace(build_bias_table(config.building, config.anchors, config.bias_mode, config.bias_samples,
                                       config.seed));
        bias_table = &*built;
    }
    if (bias_table != nullptr && bias_table->num_anchors() != config.anchors.size())
        throw ConfigError("bias table anchor count does not match the scenario");
    if (bias_table != nullptr && bias_table->mode() == BiasMode::Floorwise &&
        bias_table->num_floors() != config.building.num_floors())
        throw ConfigError("bias table floor count does not match the scenario");

    std::vector<TrialResult> trials(config.n_trials);
    detail::parallel_chunks(config.n_trials, [&](unsigned, std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            trials[t] = run_trial(config, bias_table, t);
            if (!config.keep_trial_details) {
                for (auto& o : trials[t].outcomes) o.estimate.candidates.clear();
                trials[t].ranges.clear();
                trials[t].edge_choices.clear();
            }
        }
    });

    RmseReport report;
    report.n_trials = config.n_trials;
    for (std::size_t e = 0; e < config.estimators.size(); ++e) {
        EstimatorReport r;
        r.kind = config.estimators[e];
        for (const auto& trial : trials) {
            const auto& o = trial.outcomes[e];
            if (!o.ok) {
                ++r.failures;
                continue;
            }
            r.errors_3d.push_back(o.error_3d);
            r.errors_z.push_back(o.error_z);
            if (o.floor_hit) ++r.floor_hits;
        }
        r.rmse_3d = rmse(r.errors_3d);
        r.rmse_z = rmse(r.errors_z);
        r.floor_accuracy = static_cast<double>(r.floor_hits) / static_cast<double>(config.n_trials);
        r.cdf_3d = empirical_cdf(r.errors_3d, r.failures);
        r.cdf_z = empirical_cdf(r.errors_z, r.failures);
        report.estimators.push_back(std::move(r));
    }
    if (config.keep_trial_details) report.trials = std::move(trials);
    return report;
}

namespace {

void write_cdf(std::ostream& os, const EmpiricalCdf& cdf) {
    os << "error_m,cumulative_fraction\n";
    for (std::size_t k = 0; k < cdf.abscissae.size(); ++k)
        os << format_double(cdf.abscissae[k]) << ',' << format_double(cdf.fractions[k]) << '\n';
}

}  // namespace

std::vector<std::filesystem::path> export_report(const RmseReport& report, const ExperimentConfig& config,
                                                 const std::filesystem::path& output_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec || !fs::is_directory(output_dir))
        throw IoError("cannot create output directory " + output_dir.string() + ": " + ec.message());

    std::vector<std::pair<std::string, std::string>> files;
    {
        std::ostringstream os;
        os << "estimator,rmse_3d_m,rmse_z_m,median_3d_m,median_z_m,floor_accuracy,failure_count\n";
        for (const auto& r : report.estimators)
            os << to_string(r.kind) << ',' << format_double(r.rmse_3d) << ',' << format_double(r.rmse_z) << ','
               << format_double(r.median_3d()) << ',' << format_double(r.median_z()) << ','
               << format_double(r.floor_accuracy) << ',' << r.failures << '\n';
        files.emplace_back("summary.csv", os.str());
    }
    for (const auto& r : report.estimators) {
        std::ostringstream d3, dz;
        write_cdf(d3, r.cdf_3d);
        write_cdf(dz, r.cdf_z);
        files.emplace_back(std::string("cdf_3d_") + to_string(r.kind) + ".csv", d3.str());
        files.emplace_back(std::string("cdf_z_") + to_string(r.kind) + ".csv", dz.str());
    }
    files.emplace_back("config.json", config_to_json(config));
    if (!report.trials.empty()) {
        std::ostringstream tr, diag;
        tr << "trial_id,floor,x_n,y_n,anchor_index,edge_choice,range_m\n";
        diag << "trial_id,estimator,floor_candidate,residual,iterations,converged\n";
        for (const auto& t : report.trials) {
            for (std::size_t j = 0; j < t.ranges.size(); ++j)
                tr << t.trial_id << ',' << t.truth.floor << ',' << format_double(t.truth.x) << ','
                   << format_double(t.truth.y) << ',' << j << ',' << to_string(t.edge_choices[j]) << ','
                   << format_double(t.ranges[j]) << '\n';
            for (std::size_t e = 0; e < t.outcomes.size(); ++e)
                for (const auto& c : t.outcomes[e].estimate.candidates)
                    diag << t.trial_id << ',' << to_string(config.estimators[e]) << ',' << c.floor << ','
                         << format_double(c.residual) << ',' << c.iterations << ',' << (c.converged ? 1 : 0)
                         << '\n';
        }
        files.emplace_back("trials.csv", tr.str());
        files.emplace_back("diagnostics.csv", diag.str());
    }

    std::vector<fs::path> staged;
    const auto discard = [&staged] {
        std::error_code ignore;
        for (const auto& p : staged) fs::remove(p, ignore);
    };
    for (const auto& [name, content] : files) {
        const fs::path tmp = output_dir / (name + ".partial");
        staged.push_back(tmp);
        std::ofstream os(tmp, std::ios::binary);
        os << content;
        os.close();
        if (!os) {
            discard();
            throw IoError("failed writing " + tmp.string());
        }
    }
    std::vector<fs::path> written;
    for (std::size_t k = 0; k < files.size(); ++k) {
        const fs::path target = output_dir / files[k].first;
        fs::rename(staged[k], target, ec);
        if (ec) {
            discard();
            for (const auto& w : written) fs::remove(w, ec);
            throw IoError("failed moving " + target.string() + " into place");
        }
        written.push_back(target);
    }
    return written;
}

}  // namespace diffpos
