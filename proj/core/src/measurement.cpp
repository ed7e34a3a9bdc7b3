#include "diffpos/measurement.hpp"

#include <cmath>
#include <string>

#include "diffpos/diffraction.hpp"
#include "diffpos/errors.hpp"
#include "diffpos/random.hpp"

namespace diffpos {

RangeVector::RangeVector(std::vector<double> ranges, std::vector<EdgeKind> edge_choices, NodePosition truth)
    : ranges_(std::move(ranges)), edge_choices_(std::move(edge_choices)), truth_(truth) {
    if (ranges_.size() != edge_choices_.size()) throw DomainError("one edge choice per range required");
    for (double r : ranges_)
        if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("ranges must be positive and finite");
}

RangeVector generate_measurements(const NodePosition& node, const AnchorConfig& anchors,
                                  const BuildingModel& building, const NoiseModel& noise, double edge_prob) {
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw DomainError("edge_prob must lie in [0, 1]");
    if (!(noise.sigma >= 0.0)) throw DomainError("noise sigma must be non-negative");
    if (!building.contains(node)) throw DomainError("node lies outside the building");

    Rng rng(noise.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<double> ranges;
    std::vector<EdgeKind> choices;
    ranges.reserve(anchors.size());
    choices.reserve(anchors.size());
    for (std::size_t j = 0; j < anchors.size(); ++j) {
        // Both draws are consumed for every anchor so streams stay aligned.
        const double u = unit(rng);
        const double n = gauss(rng);
        EdgeKind kind = u < edge_prob ? EdgeKind::Upper : EdgeKind::Lower;
        auto p = try_path_length(anchors[j], node, kind, building);
        if (!p) {
            kind = kind == EdgeKind::Upper ? EdgeKind::Lower : EdgeKind::Upper;
            p = try_path_length(anchors[j], node, kind, building);
        }
        if (!p) throw MeasurementUnavailable("no diffraction path from anchor " + std::to_string(j));
        double r = *p;
        if (noise.sigma > 0.0) r += noise.sigma * n;
        ranges.push_back(r);
        choices.push_back(kind);
    }
    return RangeVector(std::move(ranges), std::move(choices), node);
}

NodePosition sample_node(const BuildingModel& building, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_int_distribution<int> floor_dist(1, building.num_floors());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    NodePosition node;
    node.floor = floor_dist(rng);
    node.x = unit(rng) * building.length();
    node.y = building.breadth() * (1.0 - unit(rng));
    return node;
}

}  // namespace diffpos
