#include "diffpos/diffraction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "diffpos/errors.hpp"
#include "parallel.hpp"

namespace diffpos {

namespace {

struct RootCandidate {
    double lambda;
    int sign;
};

Point3 unit(const Point3& v) {
    const double n = norm(v);
    return n > 0.0 ? (1.0 / n) * v : Point3{};
}

}  // namespace

QuadraticCoefficients quadratic_coefficients(const Point3& anchor, const Point3& node, const Edge& edge) {
    const double x1 = edge.endpoint_1.x;
    const double x2 = edge.endpoint_2.x;
    const double d = x1 - x2;
    if (d == 0.0) throw DomainError("degenerate edge: x1 == x2");

    const double z1 = edge.height();
    const double xa = anchor.x, ya = anchor.y, za = anchor.z;
    const double xn = node.x, yn = node.y, zn = node.z;

    const double node_perp = (z1 - zn) * (z1 - zn) + yn * yn;
    const double anchor_perp = (z1 - za) * (z1 - za) + ya * ya;

    QuadraticCoefficients q;
    q.a = d * d * ((yn * yn - ya * ya) + (zn * zn - za * za) + 2.0 * z1 * (za - zn));
    q.b = 2.0 * d * ((x2 - xa) * node_perp - (x2 - xn) * anchor_perp);
    q.c = (x2 - xa) * (x2 - xa) * node_perp - (x2 - xn) * (x2 - xn) * anchor_perp;
    return q;
}

Point3 edge_point(const Edge& edge, double lambda) {
    return lambda * edge.endpoint_1 + (1.0 - lambda) * edge.endpoint_2;
}

double law_residual(const Point3& anchor, const Point3& node, const Edge& edge, double lambda) {
    const Point3 q = edge_point(edge, lambda);
    const Point3 e = unit(edge.endpoint_2 - edge.endpoint_1);
    return std::abs(dot(unit(q - anchor), e) - dot(unit(node - q), e));
}

DiffractionOutcome try_solve_diffraction_point(const Point3& anchor, const Point3& node, const Edge& edge) {
    const QuadraticCoefficients coeffs = quadratic_coefficients(anchor, node, edge);
    const double a = coeffs.a, b = coeffs.b, c = coeffs.c;

    DiffractionOutcome out;
    out.solution.coefficients = coeffs;

    double disc = coeffs.discriminant();
    if (disc < 0.0) {
        if (disc < -kDiscriminantClamp * b * b) return out;
        disc = 0.0;
    }
    out.solution.discriminant = disc;

    std::array<RootCandidate, 2> roots{};
    std::size_t n_roots = 0;
    if (a == 0.0) {
        if (b == 0.0) return out;
        roots[n_roots++] = {-c / b, 0};
    } else {
        // Cancellation-free pair: t/a and c/t.
        const double sq = std::sqrt(disc);
        const double t = -0.5 * (b + std::copysign(sq, b));
        const int sgn_b = std::signbit(b) ? -1 : 1;
        if (t == 0.0) {
            roots[n_roots++] = {0.0, 1};
        } else {
            roots[n_roots++] = {t / a, -sgn_b};
            roots[n_roots++] = {c / t, sgn_b};
        }
    }

    constexpr double kRangeSlack = 1e-12;
    constexpr double kDoubleRootWindow = 1e-6;
    const RootCandidate* best_in_range = nullptr;
    double best_in_range_residual = std::numeric_limits<double>::infinity();
    bool any_valid = false;
    for (std::size_t k = 0; k < n_roots; ++k) {
        const RootCandidate& r = roots[k];
        if (!std::isfinite(r.lambda)) continue;
        const double res = law_residual(anchor, node, edge, r.lambda);
        if (!(res < kLawTolerance)) continue;
        any_valid = true;
        if (r.lambda >= -kRangeSlack && r.lambda <= 1.0 + kRangeSlack && res < best_in_range_residual) {
            best_in_range = &r;
            best_in_range_residual = res;
        }
    }

    // Near-double root: rounding in the discriminant can split the true root
    // into two neighbours that both miss the law, so try the vertex.
    RootCandidate vertex{};
    if (!any_valid && a != 0.0 && std::abs(disc) <= kDoubleRootWindow * b * b) {
        vertex = {-b / (2.0 * a), 1};
        const double res = law_residual(anchor, node, edge, vertex.lambda);
        if (res < kLawTolerance) {
            any_valid = true;
            if (vertex.lambda >= -kRangeSlack && vertex.lambda <= 1.0 + kRangeSlack) best_in_range = &vertex;
        }
    }

    if (best_in_range == nullptr) {
        out.status = any_valid ? DiffractionStatus::NoEdgeDiffraction : DiffractionStatus::LawViolated;
        return out;
    }

    const double lambda = std::clamp(best_in_range->lambda, 0.0, 1.0);
    out.status = DiffractionStatus::Ok;
    out.solution.lambda = lambda;
    out.solution.point = edge_point(edge, lambda);
    out.solution.law_residual = law_residual(anchor, node, edge, lambda);
    out.solution.root_sign = best_in_range->sign;
    return out;
}

DiffractionSolution solve_diffraction_point(const Point3& anchor, const Point3& node, const Edge& edge) {
    const DiffractionOutcome out = try_solve_diffraction_point(anchor, node, edge);
    switch (out.status) {
        case DiffractionStatus::Ok:
            return out.solution;
        case DiffractionStatus::NoEdgeDiffraction:
            throw NoEdgeDiffraction("diffraction point lies beyond the edge extremities");
        case DiffractionStatus::LawViolated:
            break;
    }
    throw NumericalFailure("no root of the edge quadratic satisfies the law of diffraction");
}

DiffractionSolution solve_diffraction_point(const Point3& anchor, const NodePosition& node, EdgeKind kind,
                                            const BuildingModel& building) {
    return solve_diffraction_point(anchor, building.node_point(node), building.edge(node.floor, kind));
}

std::optional<double> try_path_length(const Point3& anchor, const NodePosition& node, EdgeKind kind,
                                      const BuildingModel& building) {
    const Edge edge = building.edge(node.floor, kind);
    const DiffractionOutcome out = try_solve_diffraction_point(anchor, building.node_point(node), edge);
    if (!out.ok()) return std::nullopt;
    const double qx = out.solution.point.x;
    const double qz = edge.height();
    const double half_w = 0.5 * building.window_height();
    const double to_edge =
        std::sqrt((anchor.x - qx) * (anchor.x - qx) + anchor.y * anchor.y + (anchor.z - qz) * (anchor.z - qz));
    const double to_node = std::sqrt((node.x - qx) * (node.x - qx) + node.y * node.y + half_w * half_w);
    return to_edge + to_node;
}

double path_length(const Point3& anchor, const NodePosition& node, EdgeKind kind, const BuildingModel& building) {
    // Route through the throwing solver so the error kind is preserved.
    if (auto p = try_path_length(anchor, node, kind, building)) return *p;
    (void)solve_diffraction_point(anchor, node, kind, building);
    throw NumericalFailure("path length unavailable");
}

double fermat_oracle(const Point3& anchor, const Point3& node, const Edge& edge, double resolution) {
    if (!(resolution > 0.0) || resolution > 1e-3) throw DomainError("oracle resolution must lie in (0, 1e-3]");

    const auto total = [&](double lambda) {
        const Point3 q = lambda * edge.endpoint_1 + (1.0 - lambda) * edge.endpoint_2;
        return norm(q - anchor) + norm(node - q);
    };

    const auto n = static_cast<std::size_t>(std::ceil(1.0 / resolution));
    const auto grid = [n](std::size_t k) { return static_cast<double>(k) / static_cast<double>(n); };

    // First k with f(k+1) >= f(k); forward differences are nondecreasing.
    std::size_t lo = 0, hi = n;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (total(grid(mid + 1)) >= total(grid(mid)))
            hi = mid;
        else
            lo = mid + 1;
    }
    const std::size_t k = lo;

    double left = grid(k == 0 ? 0 : k - 1);
    double right = grid(std::min(n, k + 1));
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = right - inv_phi * (right - left);
    double x2 = left + inv_phi * (right - left);
    double f1 = total(x1), f2 = total(x2);
    const double stop = resolution * 1e-4;
    while (right - left > stop) {
        if (f1 <= f2) {
            right = x2;
            x2 = x1;
            f2 = f1;
            x1 = right - inv_phi * (right - left);
            f1 = total(x1);
        } else {
            left = x1;
            x1 = x2;
            f1 = f2;
            x2 = left + inv_phi * (right - left);
            f2 = total(x2);
        }
    }

    double best = 0.5 * (left + right);
    double best_f = total(best);
    for (double cand : {grid(k), left, right}) {
        const double f = total(cand);
        if (f < best_f) {
            best = cand;
            best_f = f;
        }
    }
    return best;
}

void PathDifferenceScan::merge(const PathDifferenceScan& other) {
    if (counts.size() < other.counts.size()) counts.resize(other.counts.size(), 0);
    for (std::size_t k = 0; k < other.counts.size(); ++k) counts[k] += other.counts[k];
    max_difference = std::max(max_difference, other.max_difference);
    evaluated += other.evaluated;
    skipped += other.skipped;
}

void PathDifferenceScan::finalize_cdf() {
    cdf.assign(counts.size(), 0.0);
    std::size_t running = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        running += counts[k];
        cdf[k] = evaluated > 0 ? static_cast<double>(running) / static_cast<double>(evaluated) : 0.0;
    }
}

PathDifferenceScan path_difference_scan(const BuildingModel& building, const AnchorConfig& anchors, double spacing,
                                        double bin_width, const std::function<void(const PathDifferenceRow&)>& sink) {
    if (!(spacing > 0.0)) throw DomainError("scan spacing must be positive");
    if (!(bin_width > 0.0)) throw DomainError("histogram bin width must be positive");

    const auto nx = static_cast<std::size_t>(std::floor(building.length() / spacing + 1e-9)) + 1;
    const auto ny = static_cast<std::size_t>(std::floor(building.breadth() / spacing + 1e-9));
    const auto floors = static_cast<std::size_t>(building.num_floors());
    const std::size_t columns = floors * nx;

    const auto scan_range = [&](std::size_t begin, std::size_t end, PathDifferenceScan& part) {
        part.bin_width = bin_width;
        for (std::size_t col = begin; col < end; ++col) {
            const int floor = static_cast<int>(col / nx) + 1;
            const double x = static_cast<double>(col % nx) * spacing;
            for (std::size_t iy = 1; iy <= ny; ++iy) {
                const NodePosition node{x, static_cast<double>(iy) * spacing, floor};
                for (std::size_t j = 0; j < anchors.size(); ++j) {
                    const auto upper = try_path_length(anchors[j], node, EdgeKind::Upper, building);
                    const auto lower = try_path_length(anchors[j], node, EdgeKind::Lower, building);
                    if (!upper || !lower) {
                        ++part.skipped;
                        continue;
                    }
                    const double diff = std::abs(*upper - *lower);
                    const auto bin = static_cast<std::size_t>(diff / bin_width);
                    if (bin >= part.counts.size()) part.counts.resize(bin + 1, 0);
                    ++part.counts[bin];
                    ++part.evaluated;
                    part.max_difference = std::max(part.max_difference, diff);
                    if (sink) sink({floor, node.x, node.y, j, *upper, *lower, diff});
                }
            }
        }
    };

    PathDifferenceScan result;
    result.bin_width = bin_width;
    if (sink) {
        scan_range(0, columns, result);
    } else {
        std::vector<PathDifferenceScan> parts(detail::worker_count(columns));
        detail::parallel_chunks(columns, [&](unsigned w, std::size_t b, std::size_t e) { scan_range(b, e, parts[w]); });
        for (const auto& p : parts) result.merge(p);
    }
    result.finalize_cdf();
    return result;
}

}  // namespace diffpos
