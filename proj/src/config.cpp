#include "pointprop/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

namespace pointprop {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return {};
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

// key -> setter-from-json-value, shared by both file formats.
using Setter = std::function<void(RunConfig&, const json&)>;

const std::map<std::string, Setter>& config_setters() {
    static const std::map<std::string, Setter> setters = {
        {"target_side", [](RunConfig& c, const json& v) { c.target_side = v.get<int>(); }},
        {"patch_side", [](RunConfig& c, const json& v) { c.patch_side = v.get<int>(); }},
        {"crop_pad", [](RunConfig& c, const json& v) { c.crop_pad = v.get<double>(); }},
        {"delta", [](RunConfig& c, const json& v) { c.delta = v.get<int>(); }},
        {"alpha", [](RunConfig& c, const json& v) { c.alpha = v.get<int>(); }},
        {"absorbing", [](RunConfig& c, const json& v) { c.absorbing = v.get<bool>(); }},
        {"beta", [](RunConfig& c, const json& v) { c.beta = v.get<double>(); }},
        {"tau_fg", [](RunConfig& c, const json& v) { c.tau_fg = v.get<double>(); }},
        {"tau_bg", [](RunConfig& c, const json& v) { c.tau_bg = v.get<double>(); }},
        {"dropout_rate", [](RunConfig& c, const json& v) { c.dropout_rate = v.get<double>(); }},
        {"keep_floor", [](RunConfig& c, const json& v) { c.keep_floor = v.get<int>(); }},
        {"lambda_point", [](RunConfig& c, const json& v) { c.lambda_point = v.get<double>(); }},
        {"lambda_crf", [](RunConfig& c, const json& v) { c.lambda_crf = v.get<double>(); }},
        {"lambda_mil", [](RunConfig& c, const json& v) { c.lambda_mil = v.get<double>(); }},
        {"dice_eps", [](RunConfig& c, const json& v) { c.dice_eps = v.get<double>(); }},
        {"sinkhorn_tolerance",
         [](RunConfig& c, const json& v) { c.sinkhorn_tolerance = v.get<double>(); }},
        {"sinkhorn_max_iterations",
         [](RunConfig& c, const json& v) { c.sinkhorn_max_iterations = v.get<int>(); }},
        {"crf_iterations", [](RunConfig& c, const json& v) { c.crf_iterations = v.get<int>(); }},
        {"crf_w_spatial", [](RunConfig& c, const json& v) { c.crf_w_spatial = v.get<double>(); }},
        {"crf_w_bilateral",
         [](RunConfig& c, const json& v) { c.crf_w_bilateral = v.get<double>(); }},
        {"crf_theta_gamma",
         [](RunConfig& c, const json& v) { c.crf_theta_gamma = v.get<double>(); }},
        {"crf_theta_alpha",
         [](RunConfig& c, const json& v) { c.crf_theta_alpha = v.get<double>(); }},
        {"crf_theta_beta",
         [](RunConfig& c, const json& v) { c.crf_theta_beta = v.get<double>(); }},
        {"crf_compat", [](RunConfig& c, const json& v) { c.crf_compat = v.get<double>(); }},
        {"sim_noise", [](RunConfig& c, const json& v) { c.sim_noise = v.get<double>(); }},
        {"sim_temperature",
         [](RunConfig& c, const json& v) { c.sim_temperature = v.get<double>(); }},
        {"sim_color_weight",
         [](RunConfig& c, const json& v) { c.sim_color_weight = v.get<double>(); }},
        {"sim_embed_weight",
         [](RunConfig& c, const json& v) { c.sim_embed_weight = v.get<double>(); }},
        {"mask_threshold",
         [](RunConfig& c, const json& v) { c.mask_threshold = v.get<double>(); }},
        {"seed", [](RunConfig& c, const json& v) { c.seed = v.get<std::uint64_t>(); }},
    };
    return setters;
}

json scalar_from_text(const std::string& text) {
    if (text == "true") {
        return json(true);
    }
    if (text == "false") {
        return json(false);
    }
    try {
        std::size_t pos = 0;
        if (text.find_first_of(".eE") == std::string::npos) {
            const long long v = std::stoll(text, &pos);
            if (pos == text.size()) {
                return json(v);
            }
        } else {
            const double v = std::stod(text, &pos);
            if (pos == text.size()) {
                return json(v);
            }
        }
    } catch (const std::exception&) {
    }
    return json(text);
}

void apply_key_value(RunConfig& config, const std::string& key, const json& value,
                     const std::string& where) {
    const auto& setters = config_setters();
    const auto it = setters.find(key);
    if (it == setters.end()) {
        throw ParseError(where + ": unknown config key '" + key + "'");
    }
    try {
        it->second(config, value);
    } catch (const json::exception& e) {
        throw ParseError(where + ": bad value for '" + key + "': " + e.what());
    }
}

} // namespace

void RunConfig::validate() const {
    if (target_side <= 0 || patch_side <= 0 || target_side % patch_side != 0) {
        throw InvalidArgument("config: target_side must be a positive multiple of patch_side");
    }
    if (delta < 0 || alpha < 1 || crop_pad < 0.0) {
        throw InvalidArgument("config: delta/alpha/crop_pad out of range");
    }
    if (beta < 0.0 || beta >= 1.0) {
        throw InvalidArgument("config: beta must be in [0, 1)");
    }
    if (tau_bg >= tau_fg) {
        throw InvalidArgument("config: tau_bg must be < tau_fg");
    }
    if (dropout_rate < 0.0 || dropout_rate >= 1.0 || keep_floor < 1) {
        throw InvalidArgument("config: bad dropout settings");
    }
    if (lambda_point < 0.0 || lambda_crf < 0.0 || lambda_mil < 0.0 || dice_eps <= 0.0) {
        throw InvalidArgument("config: loss weights must be nonnegative, dice_eps positive");
    }
    if (sinkhorn_tolerance <= 0.0 || sinkhorn_max_iterations < 1) {
        throw InvalidArgument("config: bad sinkhorn settings");
    }
    crf().validate();
    if (sim_noise < 0.0 || sim_temperature <= 0.0) {
        throw InvalidArgument("config: bad similarity settings");
    }
    if (mask_threshold < 0.0 || mask_threshold > 1.0) {
        throw InvalidArgument("config: mask_threshold must be in [0, 1]");
    }
}

std::string RunConfig::to_json_string() const {
    json j;
    j["target_side"] = target_side;
    j["patch_side"] = patch_side;
    j["crop_pad"] = crop_pad;
    j["delta"] = delta;
    j["alpha"] = alpha;
    j["absorbing"] = absorbing;
    j["beta"] = beta;
    j["tau_fg"] = tau_fg;
    j["tau_bg"] = tau_bg;
    j["dropout_rate"] = dropout_rate;
    j["keep_floor"] = keep_floor;
    j["lambda_point"] = lambda_point;
    j["lambda_crf"] = lambda_crf;
    j["lambda_mil"] = lambda_mil;
    j["dice_eps"] = dice_eps;
    j["sinkhorn_tolerance"] = sinkhorn_tolerance;
    j["sinkhorn_max_iterations"] = sinkhorn_max_iterations;
    j["crf_iterations"] = crf_iterations;
    j["crf_w_spatial"] = crf_w_spatial;
    j["crf_w_bilateral"] = crf_w_bilateral;
    j["crf_theta_gamma"] = crf_theta_gamma;
    j["crf_theta_alpha"] = crf_theta_alpha;
    j["crf_theta_beta"] = crf_theta_beta;
    j["crf_compat"] = crf_compat;
    j["sim_noise"] = sim_noise;
    j["sim_temperature"] = sim_temperature;
    j["sim_color_weight"] = sim_color_weight;
    j["sim_embed_weight"] = sim_embed_weight;
    j["mask_threshold"] = mask_threshold;
    j["seed"] = seed;
    return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config json: ") + e.what());
    }
    RunConfig config;
    for (const auto& [key, value] : j.items()) {
        apply_key_value(config, key, value, "config json");
    }
    config.validate();
    return config;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config: " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    if (path.extension() == ".json") {
        return RunConfig::from_json_string(buffer.str());
    }
    RunConfig config;
    std::string line;
    int line_no = 0;
    std::istringstream stream(buffer.str());
    while (std::getline(stream, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        apply_key_value(config, key, scalar_from_text(value),
                        path.string() + ":" + std::to_string(line_no));
    }
    config.validate();
    return config;
}

void write_run_json(const fs::path& dir, const RunConfig& config) {
    fs::create_directories(dir);
    std::ofstream out(dir / "run.json", std::ios::binary);
    if (!out) {
        throw IoError("cannot write run.json in " + dir.string());
    }
    out << config.to_json_string();
}

SceneSpec load_scene_spec(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open scene spec: " + path.string());
    }
    SceneSpec spec;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string where = path.string() + ":" + std::to_string(line_no);
        try {
            if (key == "image_side") {
                spec.image_side = std::stoi(value);
            } else if (key == "patch_side") {
                spec.patch_side = std::stoi(value);
            } else if (key == "n_objects") {
                spec.n_objects = std::stoi(value);
            } else if (key == "shape") {
                if (value == "rect") {
                    spec.shape_family = ShapeFamily::Rect;
                } else if (value == "ellipse") {
                    spec.shape_family = ShapeFamily::Ellipse;
                } else if (value == "polyomino") {
                    spec.shape_family = ShapeFamily::Polyomino;
                } else {
                    throw ParseError(where + ": unknown shape '" + value + "'");
                }
            } else if (key == "occluder") {
                if (value == "none") {
                    spec.occluder = OccluderKind::None;
                } else if (value == "bar") {
                    spec.occluder = OccluderKind::Bar;
                } else if (value == "blob") {
                    spec.occluder = OccluderKind::Blob;
                } else {
                    throw ParseError(where + ": unknown occluder '" + value + "'");
                }
            } else if (key == "occluder_min_width") {
                spec.occluder_min_width = std::stoi(value);
            } else if (key == "occluder_max_width") {
                spec.occluder_max_width = std::stoi(value);
            } else if (key == "noise_sigma") {
                spec.noise_sigma = std::stod(value);
            } else if (key == "seed") {
                spec.seed = std::stoull(value);
            } else {
                throw ParseError(where + ": unknown scene key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw ParseError(where + ": bad value for '" + key + "'");
        } catch (const std::out_of_range&) {
            throw ParseError(where + ": value out of range for '" + key + "'");
        }
    }
    spec.validate();
    return spec;
}

} // namespace pointprop
