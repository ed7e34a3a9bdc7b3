#include "diffpos/bias.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "csv_util.hpp"
#include "diffpos/diffraction.hpp"
#include "diffpos/errors.hpp"
#include "diffpos/random.hpp"
#include "parallel.hpp"

namespace diffpos {

BiasDistribution BiasDistribution::from_samples(std::vector<double> samples, double bin_width, std::size_t discarded) {
    BiasDistribution d;
    d.samples = std::move(samples);
    d.bin_width = bin_width;
    d.discarded = discarded;
    d.count = d.samples.size();
    if (d.samples.empty()) return d;
    d.min = *std::min_element(d.samples.begin(), d.samples.end());
    d.mean = std::accumulate(d.samples.begin(), d.samples.end(), 0.0) / static_cast<double>(d.samples.size());
    if (bin_width > 0.0) {
        for (double s : d.samples) {
            const auto bin = static_cast<std::size_t>(std::max(s, 0.0) / bin_width);
            if (bin >= d.counts.size()) d.counts.resize(bin + 1, 0);
            ++d.counts[bin];
        }
    }
    return d;
}

const char* to_string(BiasMode mode) { return mode == BiasMode::Floorwise ? "floorwise" : "composite"; }

BiasMode parse_bias_mode(const std::string& text) {
    if (text == "floorwise") return BiasMode::Floorwise;
    if (text == "composite") return BiasMode::Composite;
    throw ConfigError("unknown bias mode '" + text + "' (expected floorwise|composite)");
}

BiasTable::BiasTable(BiasMode mode, int num_floors, std::size_t num_anchors)
    : mode_(mode), num_floors_(num_floors), num_anchors_(num_anchors) {
    if (num_floors < 1 || num_anchors < 1) throw DomainError("bias table needs floors and anchors");
}

void BiasTable::set(std::size_t anchor, int floor, BiasDistribution dist) {
    if (anchor >= num_anchors_) throw DomainError("anchor index out of range");
    if (mode_ == BiasMode::Composite ? floor != kAllFloors : (floor < 1 || floor > num_floors_))
        throw DomainError("floor key does not match bias table mode");
    entries_.insert_or_assign({anchor, floor}, std::move(dist));
}

const BiasDistribution& BiasTable::entry(std::size_t anchor, int floor) const {
    const auto it = entries_.find({anchor, floor});
    if (it == entries_.end())
        throw DomainError("no bias entry for anchor " + std::to_string(anchor) + ", floor " + std::to_string(floor));
    return it->second;
}

const BiasDistribution& BiasTable::for_floor(std::size_t anchor, int floor) const {
    return entry(anchor, mode_ == BiasMode::Composite ? kAllFloors : floor);
}

std::vector<double> BiasTable::corrections(int floor, BiasStatistic stat) const {
    std::vector<double> out(num_anchors_, 0.0);
    if (stat == BiasStatistic::Zero) return out;
    for (std::size_t j = 0; j < num_anchors_; ++j) {
        const auto& d = for_floor(j, floor);
        out[j] = stat == BiasStatistic::Min ? d.min : d.mean;
    }
    return out;
}

void BiasTable::write_csv(std::ostream& os, bool with_histogram) const {
    const auto floor_key = [](int floor) { return floor == kAllFloors ? std::string("ALL") : std::to_string(floor); };
    os << std::setprecision(17);
    os << "anchor_index,floor_index,n,min_m,mean_m\n";
    for (const auto& [key, d] : entries_)
        os << key.first << ',' << floor_key(key.second) << ',' << d.count << ',' << d.min << ',' << d.mean << '\n';
    if (!with_histogram) return;
    os << "\nanchor_index,floor_index,bin_lower_m,bin_width_m,count\n";
    for (const auto& [key, d] : entries_)
        for (std::size_t k = 0; k < d.counts.size(); ++k)
            os << key.first << ',' << floor_key(key.second) << ',' << static_cast<double>(k) * d.bin_width << ','
               << d.bin_width << ',' << d.counts[k] << '\n';
}

void BiasTable::save_csv(const std::filesystem::path& path, bool with_histogram) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write bias table to " + path.string());
    write_csv(os, with_histogram);
    if (!os) throw IoError("failed writing bias table to " + path.string());
}

BiasTable BiasTable::read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || detail::trim(line) != "anchor_index,floor_index,n,min_m,mean_m")
        throw ConfigError("bias table CSV: missing header");

    struct Row {
        std::size_t anchor;
        int floor;
        BiasDistribution dist;
    };
    std::vector<Row> rows;
    bool composite = false, floorwise = false;
    std::size_t max_anchor = 0;
    int max_floor = 0;
    while (std::getline(is, line)) {
        line = detail::trim(line);
        if (line.empty()) break;  // histogram section follows
        const auto f = detail::split_csv(line);
        if (f.size() != 5) throw ConfigError("bias table CSV: expected 5 fields in '" + line + "'");
        Row r{};
        r.anchor = static_cast<std::size_t>(detail::parse_int(f[0], "anchor_index"));
        if (f[1] == "ALL") {
            r.floor = kAllFloors;
            composite = true;
        } else {
            r.floor = static_cast<int>(detail::parse_int(f[1], "floor_index"));
            if (r.floor < 1) throw ConfigError("bias table CSV: floor_index must be >= 1 or ALL");
            floorwise = true;
        }
        r.dist.count = static_cast<std::size_t>(detail::parse_int(f[2], "n"));
        r.dist.min = detail::parse_double(f[3], "min_m");
        r.dist.mean = detail::parse_double(f[4], "mean_m");
        max_anchor = std::max(max_anchor, r.anchor);
        max_floor = std::max(max_floor, r.floor);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw ConfigError("bias table CSV: no rows");
    if (composite && floorwise) throw ConfigError("bias table CSV: mixes floorwise and composite rows");

    // Floor count is only recoverable for floorwise tables; composite tables cover any floor.
    const int floors = composite ? std::numeric_limits<int>::max() : max_floor;
    BiasTable table(composite ? BiasMode::Composite : BiasMode::Floorwise, floors, max_anchor + 1);
    for (auto& r : rows) table.set(r.anchor, r.floor, std::move(r.dist));
    const std::size_t expected = composite ? table.num_anchors_ : table.num_anchors_ * static_cast<std::size_t>(floors);
    if (table.size() != expected) throw ConfigError("bias table CSV: incomplete table");
    return table;
}

BiasTable BiasTable::load_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read bias table " + path.string());
    return read_csv(is);
}

std::uint64_t bias_stream_seed(std::uint64_t seed, std::size_t anchor, int floor) {
    return derive_seed(seed, {0xB1A5, anchor, static_cast<std::uint64_t>(floor)});
}

BiasDistribution sample_bias(const Point3& anchor, int floor, const BuildingModel& building, std::size_t n_samples,
                             std::uint64_t seed, double bin_width) {
    if (n_samples < 1000) throw DomainError("sample_bias needs at least 1000 samples");
    if (!building.has_floor(floor)) throw DomainError("floor out of range");

    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double node_z = building.node_z(floor);

    std::vector<double> samples;
    samples.reserve(n_samples);
    std::size_t discarded = 0;
    while (samples.size() < n_samples) {
        const double x = unit(rng) * building.length();
        // Maps [0, 1) onto (0, B].
        const double y = building.breadth() * (1.0 - unit(rng));
        const NodePosition node{x, y, floor};
        const auto p = try_path_length(anchor, node, EdgeKind::Upper, building);
        if (!p) {
            if (++discarded > n_samples)
                throw GeometryWarning("more than half of the bias draws have no edge diffraction; "
                                      "anchor placement is implausible");
            continue;
        }
        samples.push_back(*p - distance(anchor, Point3{x, y, node_z}));
    }
    return BiasDistribution::from_samples(std::move(samples), bin_width, discarded);
}

BiasTable build_bias_table(const BuildingModel& building, const AnchorConfig& anchors, BiasMode mode,
                           std::size_t n_samples, std::uint64_t seed, double bin_width) {
    const int floors = building.num_floors();
    const std::size_t pairs = anchors.size() * static_cast<std::size_t>(floors);

    std::vector<BiasDistribution> per_pair(pairs);
    detail::parallel_chunks(pairs, [&](unsigned, std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const std::size_t j = k / static_cast<std::size_t>(floors);
            const int floor = static_cast<int>(k % static_cast<std::size_t>(floors)) + 1;
            per_pair[k] =
                sample_bias(anchors[j], floor, building, n_samples, bias_stream_seed(seed, j, floor), bin_width);
        }
    });

    BiasTable table(mode, floors, anchors.size());
    for (std::size_t j = 0; j < anchors.size(); ++j) {
        if (mode == BiasMode::Floorwise) {
            for (int floor = 1; floor <= floors; ++floor)
                table.set(j, floor, std::move(per_pair[j * static_cast<std::size_t>(floors) + floor - 1]));
            continue;
        }
        std::vector<double> pooled;
        pooled.reserve(n_samples * static_cast<std::size_t>(floors));
        std::size_t discarded = 0;
        for (int floor = 1; floor <= floors; ++floor) {
            const auto& d = per_pair[j * static_cast<std::size_t>(floors) + floor - 1];
            pooled.insert(pooled.end(), d.samples.begin(), d.samples.end());
            discarded += d.discarded;
        }
        table.set(j, kAllFloors, BiasDistribution::from_samples(std::move(pooled), bin_width, discarded));
    }
    return table;
}

}  // namespace diffpos
