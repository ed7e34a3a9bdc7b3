#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "diffpos/errors.hpp"
#include "diffpos/harness.hpp"

namespace diffpos {

namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    if (n_trials < 1) throw ConfigError("n_trials must be >= 1");
    if (estimators.empty()) throw ConfigError("at least one estimator must be enabled");
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw ConfigError("edge_prob must lie in [0, 1]");
    if (!(noise.sigma >= 0.0)) throw ConfigError("sigma must be non-negative");
    if (needs_bias_table() && bias_samples < 1000) throw ConfigError("bias_samples must be >= 1000");
    try {
        solver.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    for (EstimatorKind k : estimators)
        if (k == EstimatorKind::LLS && anchors.size() < 4) throw ConfigError("LLS needs at least four anchors");
}

bool ExperimentConfig::needs_bias_table() const {
    for (EstimatorKind k : estimators)
        if (k == EstimatorKind::IppaIDMin || k == EstimatorKind::IppaIDMean) return true;
    return false;
}

ExperimentConfig parse_config(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    ExperimentConfig cfg;
    try {
        BuildingDimensions dims;
        dims.num_floors = get_or(j, "num_floors", dims.num_floors);
        dims.floor_height = get_or(j, "floor_height_m", dims.floor_height);
        dims.length = get_or(j, "length_m", dims.length);
        dims.breadth = get_or(j, "breadth_m", dims.breadth);
        dims.window_height = get_or(j, "window_height_m", dims.window_height);
        const double wx_min = get_or(j, "window_x_min_m", 0.0);
        const double wx_max = get_or(j, "window_x_max_m", dims.length);
        cfg.building = BuildingModel(dims, wx_min, wx_max);

        if (j.contains("anchors")) {
            std::vector<Point3> anchors;
            for (const auto& a : j.at("anchors")) {
                if (!a.is_array() || a.size() != 3) throw ConfigError("each anchor must be an [x, y, z] triple");
                anchors.push_back({a[0].get<double>(), a[1].get<double>(), a[2].get<double>()});
            }
            cfg.anchors = AnchorConfig(std::move(anchors));
        }
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    cfg.noise.sigma = get_or(j, "sigma_m", cfg.noise.sigma);
    cfg.edge_prob = get_or(j, "edge_prob", cfg.edge_prob);
    cfg.n_trials = get_or(j, "n_trials", cfg.n_trials);
    cfg.bias_mode = parse_bias_mode(get_or(j, "bias_mode", std::string(to_string(cfg.bias_mode))));
    cfg.bias_samples = get_or(j, "bias_samples", cfg.bias_samples);
    if (j.contains("estimators")) {
        cfg.estimators.clear();
        for (const auto& name : j.at("estimators")) {
            if (!name.is_string()) throw ConfigError("estimators must be a list of names");
            cfg.estimators.push_back(parse_estimator(name.get<std::string>()));
        }
    }
    cfg.seed = get_or(j, "seed", cfg.seed);
    cfg.output_dir = get_or(j, "output_dir", cfg.output_dir.string());
    cfg.solver.delta = get_or(j, "delta_m", cfg.solver.delta);
    cfg.solver.max_iterations = get_or(j, "max_iterations", cfg.solver.max_iterations);
    cfg.solver.damping = get_or(j, "damping", cfg.solver.damping);

    const std::string residual = get_or(j, "ippa_residual", std::string("absolute"));
    if (residual == "absolute")
        cfg.ippa.residual_form = IppaResidualForm::AbsoluteMismatch;
    else if (residual == "product")
        cfg.ippa.residual_form = IppaResidualForm::PrintedProduct;
    else
        throw ConfigError("ippa_residual must be 'absolute' or 'product'");
    const std::string dist = get_or(j, "ippa_distance", std::string("3d"));
    if (dist == "3d")
        cfg.ippa.distance = IppaDistance::Lifted3D;
    else if (dist == "2d")
        cfg.ippa.distance = IppaDistance::Planar2D;
    else
        throw ConfigError("ippa_distance must be '3d' or '2d'");

    const std::string init = get_or(j, "ippa_init", std::string("far-wall"));
    if (init == "far-wall")
        cfg.ippa.init_mode = InitMode::FarWall;
    else if (init == "centroid")
        cfg.ippa.init_mode = InitMode::FloorCentroid;
    else
        throw ConfigError("ippa_init must be 'far-wall' or 'centroid'");

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    const auto& b = cfg.building;
    j["num_floors"] = b.num_floors();
    j["floor_height_m"] = b.floor_height();
    j["length_m"] = b.length();
    j["breadth_m"] = b.breadth();
    j["window_height_m"] = b.window_height();
    j["window_x_min_m"] = b.window_x_min();
    j["window_x_max_m"] = b.window_x_max();
    json anchors = json::array();
    for (const auto& a : cfg.anchors) anchors.push_back({a.x, a.y, a.z});
    j["anchors"] = anchors;
    j["sigma_m"] = cfg.noise.sigma;
    j["edge_prob"] = cfg.edge_prob;
    j["n_trials"] = cfg.n_trials;
    j["bias_mode"] = to_string(cfg.bias_mode);
    j["bias_samples"] = cfg.bias_samples;
    json names = json::array();
    for (EstimatorKind k : cfg.estimators) names.push_back(to_string(k));
    j["estimators"] = names;
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir.string();
    j["delta_m"] = cfg.solver.delta;
    j["max_iterations"] = cfg.solver.max_iterations;
    j["damping"] = cfg.solver.damping;
    j["ippa_residual"] = cfg.ippa.residual_form == IppaResidualForm::AbsoluteMismatch ? "absolute" : "product";
    j["ippa_distance"] = cfg.ippa.distance == IppaDistance::Lifted3D ? "3d" : "2d";
    j["ippa_init"] = cfg.ippa.init_mode == InitMode::FloorCentroid ? "centroid" : "far-wall";
    return j.dump(2) + "\n";
}

}  // namespace diffpos
