#include "ckt/sample.hpp"

#include <json.hpp>

#include "ckt/errors.hpp"
#include "ckt/jsonl.hpp"

namespace ckt {

using nlohmann::json;

namespace {

json region_to_json(const RegionCandidate& r) {
    return json{{"feature", r.visual_feature},
                {"box", {r.box.x1, r.box.y1, r.box.x2, r.box.y2}},
                {"category_id", r.category_id}};
}

RegionCandidate region_from_json(const json& j) {
    const auto& box = j.at("box");
    if (!box.is_array() || box.size() != 4) {
        throw ParseError("region: box must be [x1,y1,x2,y2]");
    }
    return RegionCandidate(j.at("feature").get<std::vector<double>>(),
                           Box{box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
                               box[3].get<double>()},
                           j.at("category_id").get<int>());
}

}  // namespace

double Sample::target_box_area() const {
    if (target_index < 0 || static_cast<std::size_t>(target_index) >= regions.size()) {
        throw IndexError("sample " + std::to_string(sample_id) + ": target index out of range");
    }
    const auto& g = regions[static_cast<std::size_t>(target_index)].geometry;
    return g[6];
}

void save_split(const std::string& path, const std::string& split_name,
                const std::vector<Sample>& samples) {
    json header{{"format", "ckt.samples.v1"},
                {"split", split_name},
                {"count", samples.size()}};
    std::vector<json> records;
    records.reserve(samples.size());
    for (const auto& s : samples) {
        json regions = json::array();
        for (const auto& r : s.regions) regions.push_back(region_to_json(r));
        records.push_back(json{{"sample_id", s.sample_id},
                               {"regions", std::move(regions)},
                               {"expression_raw", s.expression_raw},
                               {"expression_token_ids", s.expression.token_ids},
                               {"target_index", s.target_index},
                               {"gt_fact_id", s.gt_fact_id},
                               {"spatial_keywords", s.spatial_keywords}});
    }
    write_jsonl(path, header, records);
}

std::vector<Sample> load_split(const std::string& path) {
    const JsonlFile file = read_jsonl(path, "ckt.samples.v1");
    std::vector<Sample> out;
    out.reserve(file.records.size());
    std::size_t line_no = 1;
    for (const auto& rec : file.records) {
        ++line_no;
        try {
            Sample s;
            s.sample_id = rec.at("sample_id").get<std::int64_t>();
            for (const auto& rj : rec.at("regions")) s.regions.push_back(region_from_json(rj));
            s.expression_raw = rec.at("expression_raw").get<std::string>();
            s.expression.token_ids = rec.at("expression_token_ids").get<std::vector<int>>();
            s.expression.kind = TextKind::expression;
            s.target_index = rec.at("target_index").get<int>();
            s.gt_fact_id = rec.at("gt_fact_id").get<int>();
            s.spatial_keywords = rec.at("spatial_keywords").get<std::vector<std::string>>();
            out.push_back(std::move(s));
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

bool samples_equal(const Sample& a, const Sample& b) {
    if (a.sample_id != b.sample_id || a.expression_raw != b.expression_raw ||
        a.expression.token_ids != b.expression.token_ids || a.target_index != b.target_index ||
        a.gt_fact_id != b.gt_fact_id || a.spatial_keywords != b.spatial_keywords ||
        a.regions.size() != b.regions.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.regions.size(); ++i) {
        const auto& ra = a.regions[i];
        const auto& rb = b.regions[i];
        if (ra.visual_feature != rb.visual_feature || ra.category_id != rb.category_id ||
            ra.box.x1 != rb.box.x1 || ra.box.y1 != rb.box.y1 || ra.box.x2 != rb.box.x2 ||
            ra.box.y2 != rb.box.y2) {
            return false;
        }
    }
    return true;
}

}  // namespace ckt
