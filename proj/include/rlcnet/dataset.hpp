#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rlcnet/circuit.hpp"

namespace rlcnet {

struct DatasetMeta {
    std::optional<CircuitClass> circuit_class;
    std::optional<CircuitParams> phi;
    double t0 = 0.0;
    double t1 = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::string generator;
    std::vector<double> initial_state;  // derivatives 0..n-1 of I at t0

    bool operator==(const DatasetMeta&) const = default;
};

/// Timestamped load-current samples.
struct Dataset {
    std::vector<double> times;   // seconds, strictly increasing
    std::vector<double> values;  // amperes
    DatasetMeta meta;

    std::size_t size() const { return times.size(); }

    /// Throws InvalidArgument on length mismatch or non-increasing times.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

struct RandomSplit {
    double fraction = 0.5;  // share of points that go to the training half
    std::uint64_t seed = 0;
};

/// Training half gets every sample with t <= t_cut.
struct TemporalSplit {
    double t_cut = 0.5;
};

using SplitMode = std::variant<RandomSplit, TemporalSplit>;

/// Returns (train, test). Both halves are sorted by time and partition the
/// input; an empty half is an error.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, const SplitMode& mode);

/// CSV with header `t,i_load`, plus a sidecar `<stem>.json` holding the metadata.
void write_csv(const Dataset& ds, const std::filesystem::path& path);

/// Reads the CSV and, when present, its sidecar.
Dataset read_csv(const std::filesystem::path& path);

/// Parses CSV text only (no sidecar).
Dataset parse_csv(const std::string& text);
std::string format_csv(const Dataset& ds);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

void to_json(nlohmann::json& j, const DatasetMeta& meta);
void from_json(const nlohmann::json& j, DatasetMeta& meta);

}  // namespace rlcnet
