#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "rlcnet/circuit.hpp"

namespace rlcnet {

/// Provenance stored alongside model parameters in a checkpoint.
struct ModelMeta {
    std::optional<CircuitClass> circuit_class;
    std::optional<CircuitParams> phi;
    std::uint64_t seed = 0;
    std::string schedule;  // digest of the training schedule, e.g. "300@10,300@0.001"

    bool operator==(const ModelMeta&) const = default;
};

void to_json(nlohmann::json& j, const ModelMeta& meta);
void from_json(const nlohmann::json& j, ModelMeta& meta);

}  // namespace rlcnet
