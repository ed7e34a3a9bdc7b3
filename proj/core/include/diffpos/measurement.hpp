#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "diffpos/geometry.hpp"

namespace diffpos {

enum class NoiseKind { Gaussian };

struct NoiseModel {
    NoiseKind kind = NoiseKind::Gaussian;
    double sigma = 0.1;
    std::uint64_t seed = 0;
};

// Ranges from one hidden node. Estimators consume ranges() only; the ground
// truth rides along for scoring.
class RangeVector {
public:
    RangeVector(std::vector<double> ranges, std::vector<EdgeKind> edge_choices, NodePosition truth);

    std::span<const double> ranges() const { return ranges_; }
    std::span<const EdgeKind> edge_choices() const { return edge_choices_; }
    std::size_t size() const { return ranges_.size(); }
    const NodePosition& ground_truth() const { return truth_; }

private:
    std::vector<double> ranges_;
    std::vector<EdgeKind> edge_choices_;
    NodePosition truth_;
};

// Per anchor: Upper with probability edge_prob, otherwise Lower; path length of
// that edge plus a noise draw. Falls back to the other edge when the chosen
// one has no diffraction point; throws MeasurementUnavailable when neither has.
RangeVector generate_measurements(const NodePosition& node, const AnchorConfig& anchors,
                                  const BuildingModel& building, const NoiseModel& noise, double edge_prob);

// Floor uniform over [1, N], (x, y) uniform over [0, L] x (0, B].
NodePosition sample_node(const BuildingModel& building, std::uint64_t seed);

}  // namespace diffpos
