#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "diffpos/geometry.hpp"

namespace diffpos {

// Empirical distribution of the NLOS bias: upper-edge diffraction path length
// minus the straight anchor-to-node distance.
struct BiasDistribution {
    std::vector<double> samples;
    double min = 0.0;
    double mean = 0.0;
    double bin_width = 0.0;
    // Bin k covers [k*bin_width, (k+1)*bin_width).
    std::vector<std::size_t> counts;
    // Draws rejected because the diffraction point fell off the edge.
    std::size_t discarded = 0;
    // Sample count; equals samples.size() unless loaded from a summary-only CSV.
    std::size_t count = 0;

    static BiasDistribution from_samples(std::vector<double> samples, double bin_width, std::size_t discarded = 0);
};

enum class BiasMode { Floorwise, Composite };

const char* to_string(BiasMode mode);
BiasMode parse_bias_mode(const std::string& text);

enum class BiasStatistic { Zero, Min, Mean };

inline constexpr std::size_t kDefaultBiasSamples = 100000;
inline constexpr double kDefaultBiasBinWidth = 0.05;

// Floor key used for composite (all-floor) entries.
inline constexpr int kAllFloors = 0;

class BiasTable {
public:
    BiasTable(BiasMode mode, int num_floors, std::size_t num_anchors);

    BiasMode mode() const { return mode_; }
    int num_floors() const { return num_floors_; }
    std::size_t num_anchors() const { return num_anchors_; }
    std::size_t size() const { return entries_.size(); }

    // floor is 1-based, or kAllFloors in composite mode.
    void set(std::size_t anchor, int floor, BiasDistribution dist);
    const BiasDistribution& entry(std::size_t anchor, int floor) const;

    // Entry relevant to an estimator on a given floor: the per-floor entry in
    // floorwise mode, the pooled entry in composite mode.
    const BiasDistribution& for_floor(std::size_t anchor, int floor) const;

    // Per-anchor corrections for one floor estimator.
    std::vector<double> corrections(int floor, BiasStatistic stat) const;

    const std::map<std::pair<std::size_t, int>, BiasDistribution>& entries() const { return entries_; }

    // anchor_index,floor_index,n,min_m,mean_m with floor_index "ALL" for pooled
    // rows, optionally followed by histogram rows.
    void write_csv(std::ostream& os, bool with_histogram = false) const;
    void save_csv(const std::filesystem::path& path, bool with_histogram = false) const;
    static BiasTable read_csv(std::istream& is);
    static BiasTable load_csv(const std::filesystem::path& path);

private:
    BiasMode mode_;
    int num_floors_;
    std::size_t num_anchors_;
    std::map<std::pair<std::size_t, int>, BiasDistribution> entries_;
};

// Uniformly samples node positions on one floor and records the upper-edge
// NLOS bias for one anchor. Draws without edge diffraction are redrawn; more
// than 50% discards raises GeometryWarning. n_samples must be >= 1000.
BiasDistribution sample_bias(const Point3& anchor, int floor, const BuildingModel& building, std::size_t n_samples,
                             std::uint64_t seed, double bin_width = kDefaultBiasBinWidth);

// Stream seed for one (anchor, floor) pair.
std::uint64_t bias_stream_seed(std::uint64_t seed, std::size_t anchor, int floor);

// Composite entries pool the per-floor samples of the same seeded streams.
BiasTable build_bias_table(const BuildingModel& building, const AnchorConfig& anchors, BiasMode mode,
                           std::size_t n_samples, std::uint64_t seed, double bin_width = kDefaultBiasBinWidth);

}  // namespace diffpos
