#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ckt/embedding.hpp"
#include "ckt/vocab.hpp"

namespace ckt {

/// The seven spatial relationship words tracked by the fine-grained
/// analysis, in report order.
inline const std::vector<std::string> kSpatialKeywords = {
    "left", "right", "front", "behind", "bottom", "top", "middle"};

/// One task instance: an image (candidate set), a referring expression, the
/// target candidate and its supporting fact.
struct Sample {
    std::int64_t sample_id = -1;
    std::vector<RegionCandidate> regions;
    std::string expression_raw;
    TextSequence expression;
    int target_index = -1;
    int gt_fact_id = -1;
    std::vector<std::string> spatial_keywords;

    /// Normalized area of the target's box.
    double target_box_area() const;
};

/// JSON-lines split files (header line + one sample per line). Round trips
/// are exact: floats are serialized with shortest-round-trip precision.
void save_split(const std::string& path, const std::string& split_name,
                const std::vector<Sample>& samples);
std::vector<Sample> load_split(const std::string& path);

bool samples_equal(const Sample& a, const Sample& b);

}  // namespace ckt
