#include "teesim/profile.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "teesim/errors.hpp"

namespace teesim {

std::uint64_t ModelProfile::gradient_bytes() const {
    std::uint64_t s = 0;
    for (const auto& l : layers) s += l.bytes;
    return s;
}

void ModelProfile::validate() const {
    if (name.empty()) throw ConfigError("profile: empty name");
    if (layers.empty()) throw ConfigError("profile " + name + ": no layers");
    if (gradient_bytes() != 4 * total_params)
        throw ConfigError("profile " + name + ": layer bytes " + std::to_string(gradient_bytes()) +
                          " != 4 x total_params " + std::to_string(total_params));
    if (per_device_batch < 1) throw ConfigError("profile " + name + ": per_device_batch must be >= 1");
    if (forward_time_s < 0 || backward_time_s < 0) throw ConfigError("profile " + name + ": negative compute time");
    if (bucket_cap_default_bytes == 0) throw ConfigError("profile " + name + ": zero default bucket cap");
}

ModelProfile profile_from_json_text(const std::string& text, const std::string& origin) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    static const std::set<std::string> known = {
        "name", "derivation", "calibration", "total_params", "per_device_batch", "input_bytes_per_sample",
        "forward_time_s", "backward_time_s", "bucket_cap_default_bytes", "first_bucket_bytes", "layers"};
    if (!j.is_object()) throw ConfigError(origin + ": not a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ConfigError(origin + ": unknown field '" + it.key() + "'");
    ModelProfile p;
    try {
        p.name = j.at("name").get<std::string>();
        p.total_params = j.at("total_params").get<std::uint64_t>();
        p.per_device_batch = j.at("per_device_batch").get<std::uint64_t>();
        p.input_bytes_per_sample = j.at("input_bytes_per_sample").get<std::uint64_t>();
        p.forward_time_s = j.at("forward_time_s").get<double>();
        p.backward_time_s = j.at("backward_time_s").get<double>();
        p.bucket_cap_default_bytes = j.value("bucket_cap_default_bytes", 25 * kMiB);
        p.first_bucket_bytes = j.value("first_bucket_bytes", std::uint64_t(0));
        for (const auto& l : j.at("layers")) p.layers.push_back({l.at("name").get<std::string>(), l.at("bytes").get<std::uint64_t>()});
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    p.validate();
    return p;
}

ModelProfile load_profile(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open profile " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return profile_from_json_text(ss.str(), path);
}

std::string preset_dir() {
    if (const char* d = std::getenv("TEESIM_PRESET_DIR"); d && *d) return d;
    return std::string(TEESIM_SOURCE_DIR) + "/presets";
}

ModelProfile load_model(const std::string& name_or_path) {
    namespace fs = std::filesystem;
    if (name_or_path.find('/') != std::string::npos || name_or_path.ends_with(".json"))
        return load_profile(name_or_path);
    fs::path p = fs::path(preset_dir()) / (name_or_path + ".json");
    if (!fs::exists(p)) throw ConfigError("unknown model '" + name_or_path + "' (no " + p.string() + ")");
    return load_profile(p.string());
}

BucketPlan bucketize(const ModelProfile& model, std::uint64_t cap_bytes) {
    if (cap_bytes == 0) throw ConfigError("bucket cap must be > 0");
    BucketPlan plan;
    plan.cap_bytes = cap_bytes;
    Bucket cur;
    for (std::size_t i = model.layers.size(); i-- > 0;) {
        cur.layers.push_back(i);
        cur.bytes += model.layers[i].bytes;
        std::uint64_t limit = plan.buckets.empty() && model.first_bucket_bytes ? model.first_bucket_bytes : cap_bytes;
        if (cur.bytes >= limit) {
            plan.buckets.push_back(std::move(cur));
            cur = {};
        }
    }
    if (!cur.layers.empty()) plan.buckets.push_back(std::move(cur));
    return plan;
}

}  // namespace teesim
