#include "vvb/json_codec.hpp"

#include "vvb/errors.hpp"

namespace vvb {

using nlohmann::json;

void to_json(json& j, const GridSpec& g) {
    j = json{{"resolution", g.resolution},
             {"half_extent", g.half_extent},
             {"waist", g.waist}};
}

void from_json(const json& j, GridSpec& g) {
    g = GridSpec(j.at("resolution").get<int>(), j.at("half_extent").get<double>(),
                 j.at("waist").get<double>());
}

void to_json(json& j, const NoiseConfig& c) {
    j = json{{"seed", c.seed},
             {"center_jitter_sigma", c.center_jitter_sigma},
             {"waist_jitter_rel", c.waist_jitter_rel},
             {"impurity_eps", c.impurity_eps},
             {"pol_crosstalk_rad", c.pol_crosstalk_rad},
             {"intensity_noise_rel", c.intensity_noise_rel},
             {"background_rel", c.background_rel}};
}

void from_json(const json& j, NoiseConfig& c) {
    c.seed = j.at("seed").get<std::uint64_t>();
    c.center_jitter_sigma = j.at("center_jitter_sigma").get<double>();
    c.waist_jitter_rel = j.at("waist_jitter_rel").get<double>();
    c.impurity_eps = j.at("impurity_eps").get<double>();
    c.pol_crosstalk_rad = j.at("pol_crosstalk_rad").get<double>();
    c.intensity_noise_rel = j.at("intensity_noise_rel").get<double>();
    c.background_rel = j.at("background_rel").get<double>();
    c.validate();
}

void to_json(json& j, const LabelSpec& s) {
    j = json{{"task", task_name(s.task)}, {"class_count", s.class_count}};
    if (!s.class_list.empty()) {
        json list = json::array();
        for (const auto& [a, b] : s.class_list) list.push_back(json::array({a, b}));
        j["class_list"] = std::move(list);
    }
}

void from_json(const json& j, LabelSpec& s) {
    s.task = task_from_name(j.at("task").get<std::string>());
    s.class_count = j.at("class_count").get<std::uint16_t>();
    s.class_list.clear();
    if (j.contains("class_list")) {
        for (const auto& e : j.at("class_list"))
            s.class_list.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
}

void to_json(json& j, const Provenance& p) {
    j = json{{"grid", p.grid},
             {"noise", p.noise},
             {"seed", p.seed},
             {"per_class", p.per_class},
             {"split", p.split}};
}

void from_json(const json& j, Provenance& p) {
    p.grid = j.at("grid").get<GridSpec>();
    p.noise = j.at("noise").get<NoiseConfig>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.per_class = j.at("per_class").get<std::uint32_t>();
    p.split = j.at("split").get<std::string>();
}

} // namespace vvb
