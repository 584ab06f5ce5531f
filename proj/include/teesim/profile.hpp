#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace teesim {

inline constexpr std::uint64_t kMiB = 1ull << 20;

struct Layer {
    std::string name;
    std::uint64_t bytes = 0;
};

struct ModelProfile {
    std::string name;
    std::vector<Layer> layers;  // front-to-back
    std::uint64_t total_params = 0;
    std::uint64_t per_device_batch = 1;
    std::uint64_t input_bytes_per_sample = 0;
    double forward_time_s = 0;
    double backward_time_s = 0;
    std::uint64_t bucket_cap_default_bytes = 25 * kMiB;
    // Limit for the first (last-layers) bucket, as DDP does; 0 disables.
    std::uint64_t first_bucket_bytes = 1 * kMiB;

    std::uint64_t gradient_bytes() const;
    void validate() const;  // throws ConfigError
};

ModelProfile profile_from_json_text(const std::string& text, const std::string& origin = "profile");
ModelProfile load_profile(const std::string& path);

// $TEESIM_PRESET_DIR if set, else the presets/ directory of the source tree.
std::string preset_dir();
// name is a preset name ("gpt2-xl") or a path to a profile JSON file.
ModelProfile load_model(const std::string& name_or_path);

struct Bucket {
    std::vector<std::size_t> layers;  // indices, in the (reverse) order they were added
    std::uint64_t bytes = 0;
};

struct BucketPlan {
    std::uint64_t cap_bytes = 0;
    std::vector<Bucket> buckets;  // in launch order: bucket 0 holds the last layers
    std::size_t k() const { return buckets.size(); }
};

// Greedy fill in reverse layer order; a bucket closes once it reaches its
// limit (first_bucket_bytes for the first bucket, cap_bytes afterwards).
BucketPlan bucketize(const ModelProfile& model, std::uint64_t cap_bytes);

}  // namespace teesim
