#include "rlcnet/model_meta.hpp"

namespace rlcnet {

void to_json(nlohmann::json& j, const ModelMeta& meta)
{
    j = nlohmann::json::object();
    j["class"] = meta.circuit_class ? nlohmann::json(class_index(*meta.circuit_class)) : nlohmann::json();
    j["phi"] = meta.phi ? nlohmann::json(*meta.phi) : nlohmann::json();
    j["seed"] = meta.seed;
    j["schedule"] = meta.schedule;
}

void from_json(const nlohmann::json& j, ModelMeta& meta)
{
    meta = ModelMeta{};
    if (j.contains("class") && !j.at("class").is_null()) {
        meta.circuit_class = class_from_index(j.at("class").get<int>());
    }
    if (j.contains("phi") && !j.at("phi").is_null()) {
        meta.phi = j.at("phi").get<CircuitParams>();
    }
    meta.seed = j.value("seed", std::uint64_t{0});
    meta.schedule = j.value("schedule", std::string{});
}

}  // namespace rlcnet
