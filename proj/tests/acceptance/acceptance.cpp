// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "diffpos/bias.hpp"
#include "diffpos/diffraction.hpp"
#include "diffpos/estimators.hpp"
#include "diffpos/harness.hpp"

using namespace diffpos;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void report(const char* id, bool pass, const std::string& detail) {
    std::printf("%s %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const BuildingModel kBuilding = BuildingModel::reference();

void ac1_diffraction_law() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> ax(-10.0, 30.0), ay(-30.0, -2.0), az(0.0, 30.0);
    std::uniform_real_distribution<double> nx(0.0, 20.0), ny(0.05, 20.0);
    std::uniform_int_distribution<int> fl(1, 7);
    std::size_t checked = 0, off_edge = 0, bad = 0;
    double worst_law = 0.0, worst_lambda = 0.0;
    while (checked < 10000) {
        const Point3 anchor{ax(rng), ay(rng), az(rng)};
        const NodePosition node{nx(rng), ny(rng), fl(rng)};
        const Edge edge = kBuilding.edge(node.floor, rng() % 2 ? EdgeKind::Upper : EdgeKind::Lower);
        const Point3 p = kBuilding.node_point(node);
        const DiffractionOutcome o = try_solve_diffraction_point(anchor, p, edge);
        if (o.status == DiffractionStatus::NoEdgeDiffraction) {
            ++off_edge;
            continue;
        }
        ++checked;
        if (!o.ok()) {
            ++bad;
            continue;
        }
        const double dl = std::abs(o.solution.lambda - fermat_oracle(anchor, p, edge, 1e-4));
        worst_law = std::max(worst_law, o.solution.law_residual);
        worst_lambda = std::max(worst_lambda, dl);
        if (!(o.solution.law_residual < 1e-9) || !(dl < 1e-5)) ++bad;
    }
    const double t = seconds_since(t0);
    report("AC1", bad == 0 && t < 10.0,
           fmt("diffraction law: %zu configs (%zu off-edge redrawn), max residual %.2e, max |dlambda| vs Fermat %.2e, "
               "%zu bad, %.2f s",
               checked, off_edge, worst_law, worst_lambda, bad, t));
}

void ac2_path_difference_scan() {
    const auto t0 = Clock::now();
    const PathDifferenceScan s = path_difference_scan(kBuilding, AnchorConfig::reference(), 0.05);
    const double t = seconds_since(t0);
    report("AC2", s.max_difference <= 1.1 && t < 300.0,
           fmt("path-difference scan at 0.05 m: max |upper - lower| = %.4f m over %zu points (%zu skipped), %.2f s",
               s.max_difference, s.evaluated, s.skipped, t));
}

void ac3_jacobian() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> ax(0.0, 20.0), ay(-30.0, -2.0), az(0.0, 30.0);
    std::uniform_real_distribution<double> nx(0.5, 19.5), ny(0.5, 19.5);
    std::uniform_int_distribution<int> fl(1, 7);
    const double h = 1e-5;
    std::size_t checked = 0, bad = 0, excluded = 0;
    double worst = 0.0;
    while (checked < 1000) {
        const Point3 a{ax(rng), ay(rng), az(rng)};
        const NodePosition n{nx(rng), ny(rng), fl(rng)};
        const DiffractionOutcome o =
            try_solve_diffraction_point(a, kBuilding.node_point(n), kBuilding.edge(n.floor, EdgeKind::Upper));
        if (!o.ok()) continue;
        const QuadraticCoefficients& q = o.solution.coefficients;
        if (q.discriminant() < 1e-4 * q.b * q.b) {
            ++excluded;
            continue;
        }
        const auto p = [&](double x, double y) {
            return try_path_length(a, {x, y, n.floor}, EdgeKind::Upper, kBuilding);
        };
        const auto xp = p(n.x + h, n.y), xm = p(n.x - h, n.y), yp = p(n.x, n.y + h), ym = p(n.x, n.y - h);
        if (!xp || !xm || !yp || !ym) continue;
        ++checked;
        const PathPartials g = path_partials(a, n, kBuilding);
        const double fdx = (*xp - *xm) / (2 * h), fdy = (*yp - *ym) / (2 * h);
        const double rel = std::hypot(g.d_dx - fdx, g.d_dy - fdy) / std::max(std::hypot(g.d_dx, g.d_dy), 1e-3);
        worst = std::max(worst, rel);
        if (!(rel < 1e-6)) ++bad;
    }
    const double t = seconds_since(t0);
    report("AC3", bad == 0 && t < 10.0,
           fmt("analytic vs central-difference partials: %zu configs (%zu near-singular excluded), max rel err %.2e, "
               "%zu bad, %.2f s",
               checked, excluded, worst, bad, t));
}

void ac4_noiseless_nls() {
    const auto t0 = Clock::now();
    ExperimentConfig c;
    c.noise.sigma = 0.0;
    c.edge_prob = 1.0;
    c.n_trials = 1000;
    c.seed = 404;
    c.estimators = {EstimatorKind::NLS};
    c.keep_trial_details = true;
    const RmseReport r = run_experiment(c);
    std::size_t good = 0;
    for (const TrialResult& tr : r.trials) {
        const EstimatorOutcome& o = tr.outcomes[0];
        good += o.ok && o.floor_hit && o.error_3d < 1e-3;
    }
    const double frac = static_cast<double>(good) / static_cast<double>(c.n_trials);
    const double t = seconds_since(t0);
    report("AC4", frac >= 0.999 && t < 60.0,
           fmt("noiseless NLS: %zu/%zu trials on the right floor within 1e-3 m (%.1f%%), %.2f s", good, c.n_trials,
               100.0 * frac, t));
}

struct Ordering {
    bool ok = true;
    std::string text;
};

Ordering check_order(const RmseReport& r, double (EstimatorReport::*stat)() const) {
    static const EstimatorKind order[] = {EstimatorKind::NLS, EstimatorKind::IppaIDMean, EstimatorKind::IppaIDMin,
                                          EstimatorKind::IppaID, EstimatorKind::LLS};
    Ordering o;
    for (std::size_t k = 0; k < std::size(order); ++k) {
        const double v = (r.at(order[k]).*stat)();
        if (k > 0) {
            const double prev = (r.at(order[k - 1]).*stat)();
            const bool holds = prev <= v;
            o.ok = o.ok && holds;
            o.text += holds ? " <= " : " > ";
        }
        o.text += fmt("%s %.4f", to_string(order[k]), v);
    }
    return o;
}

}  // namespace

int main() {
    ac1_diffraction_law();
    ac2_path_difference_scan();
    ac3_jacobian();
    ac4_noiseless_nls();

    // Criteria 5 to 7 and 9 share the reference Monte-Carlo scenario.
    ExperimentConfig c;
    c.noise.sigma = 0.1;
    c.edge_prob = 0.5;
    c.n_trials = 10000;
    c.seed = 1;
    c.keep_trial_details = true;

    auto t0 = Clock::now();
    const BiasTable floorwise = build_bias_table(c.building, c.anchors, BiasMode::Floorwise, c.bias_samples, c.seed);
    const RmseReport fw = run_experiment(c, &floorwise);
    const double t_fw = seconds_since(t0);
    {
        const Ordering d3 = check_order(fw, &EstimatorReport::median_3d);
        const Ordering dz = check_order(fw, &EstimatorReport::median_z);
        report("AC5", d3.ok && dz.ok && t_fw < 600.0,
               fmt("median ordering over %zu trials, %.1f s\n      3D: %s\n      Z:  %s", c.n_trials, t_fw,
                   d3.text.c_str(), dz.text.c_str()));
        for (const EstimatorReport& e : fw.estimators)
            std::printf("      %-12s floor accuracy %.4f, failures %zu\n", to_string(e.kind), e.floor_accuracy,
                        e.failures);
    }
    {
        const EstimatorReport& nls = fw.at(EstimatorKind::NLS);
        const auto under = static_cast<std::size_t>(
            std::count_if(nls.errors_3d.begin(), nls.errors_3d.end(), [](double e) { return e < 2.0; }));
        const double frac = static_cast<double>(under) / static_cast<double>(c.n_trials);
        report("AC6", frac >= 0.70, fmt("NLS 3D error < 2 m in %.2f%% of trials", 100.0 * frac));
    }
    {
        ExperimentConfig cc = c;
        cc.bias_mode = BiasMode::Composite;
        cc.keep_trial_details = false;
        cc.estimators = {EstimatorKind::IppaID, EstimatorKind::IppaIDMin, EstimatorKind::IppaIDMean};
        const RmseReport cp = run_experiment(cc);
        bool ok = true;
        std::string text;
        for (EstimatorKind k : cc.estimators) {
            const double a = fw.at(k).median_z(), b = cp.at(k).median_z();
            ok = ok && a <= b;
            text += fmt("\n      %-12s floorwise %.4f %s composite %.4f", to_string(k), a, a <= b ? "<=" : ">", b);
        }
        report("AC7", ok, "median Z error, floorwise vs composite bias tables:" + text);
    }
    {
        t0 = Clock::now();
        const BiasTable again = build_bias_table(c.building, c.anchors, BiasMode::Floorwise, c.bias_samples, c.seed);
        std::size_t negative = 0, samples = 0;
        for (const auto& [key, dist] : again.entries()) {
            samples += dist.samples.size();
            negative += static_cast<std::size_t>(
                std::count_if(dist.samples.begin(), dist.samples.end(), [](double b) { return !(b >= 0.0); }));
        }
        std::ostringstream first, second;
        floorwise.write_csv(first, true);
        again.write_csv(second, true);
        bool same_samples = floorwise.size() == again.size();
        for (const auto& [key, dist] : floorwise.entries())
            same_samples = same_samples && again.entries().at(key).samples == dist.samples;
        const bool identical = first.str() == second.str() && same_samples;
        report("AC8", negative == 0 && identical,
               fmt("bias tables: %zu samples over %zu (anchor, floor) pairs, %zu negative, rebuild %s, %.2f s", samples,
                   again.size(), negative, identical ? "byte-identical" : "DIFFERS", seconds_since(t0)));
    }
    {
        std::size_t mismatches = 0;
        const std::size_t ids[] = {0, 1, 2, 777, 4242, 9999};
        for (std::size_t id : ids) {
            const TrialResult solo = run_trial(c, &floorwise, id);
            const TrialResult& ref = fw.trials[id];
            bool same = solo.truth == ref.truth && solo.ranges == ref.ranges;
            for (std::size_t k = 0; k < solo.outcomes.size(); ++k)
                same = same && solo.outcomes[k].ok == ref.outcomes[k].ok &&
                       solo.outcomes[k].error_3d == ref.outcomes[k].error_3d &&
                       solo.outcomes[k].error_z == ref.outcomes[k].error_z;
            mismatches += !same;
        }
        report("AC9", mismatches == 0,
               fmt("single-trial replay: %zu of %zu trial ids match the batch run exactly", std::size(ids) - mismatches,
                   std::size(ids)));
    }

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
