#include "rlcnet/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rlcnet/error.hpp"
#include "rlcnet/io.hpp"
#include "rlcnet/random.hpp"

namespace rlcnet {

void Dataset::validate() const
{
    if (times.size() != values.size()) {
        throw InvalidArgument("dataset has " + std::to_string(times.size()) + " times but " +
                              std::to_string(values.size()) + " values");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw InvalidArgument("dataset times are not strictly increasing at row " + std::to_string(i));
        }
    }
}

namespace {

Dataset subset(const Dataset& ds, std::vector<std::size_t> indices)
{
    std::sort(indices.begin(), indices.end());
    Dataset out;
    out.meta = ds.meta;
    out.times.reserve(indices.size());
    out.values.reserve(indices.size());
    for (auto i : indices) {
        out.times.push_back(ds.times[i]);
        out.values.push_back(ds.values[i]);
    }
    return out;
}

}  // namespace

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, const SplitMode& mode)
{
    ds.validate();
    std::vector<std::size_t> train, test;

    if (const auto* random = std::get_if<RandomSplit>(&mode)) {
        if (!(random->fraction > 0.0 && random->fraction < 1.0)) {
            throw InvalidArgument("split fraction must lie strictly between 0 and 1");
        }
        std::vector<std::size_t> order(ds.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(random->seed);
        rng.shuffle(std::span<std::size_t>(order));
        const auto n_train = static_cast<std::size_t>(
            std::llround(random->fraction * static_cast<double>(ds.size())));
        train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
        test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    } else {
        const double t_cut = std::get<TemporalSplit>(mode).t_cut;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            (ds.times[i] <= t_cut ? train : test).push_back(i);
        }
    }
    if (train.empty() || test.empty()) {
        throw InvalidArgument("split leaves an empty partition");
    }

    auto train_ds = subset(ds, std::move(train));
    auto test_ds = subset(ds, std::move(test));
    if (const auto* random = std::get_if<RandomSplit>(&mode)) {
        train_ds.meta.seed = random->seed;
        test_ds.meta.seed = random->seed;
    }
    return {std::move(train_ds), std::move(test_ds)};
}

std::string format_csv(const Dataset& ds)
{
    ds.validate();
    std::string out = "t,i_load\n";
    out.reserve(ds.size() * 48);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out += format_double(ds.times[i]);
        out += ',';
        out += format_double(ds.values[i]);
        out += '\n';
    }
    return out;
}

namespace {

double parse_number(std::string_view field, int line)
{
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
        field.remove_suffix(1);
    }
    double value = 0.0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc{} || end != field.data() + field.size()) {
        throw ParseError("malformed number '" + std::string(field) + "'", line);
    }
    return value;
}

}  // namespace

Dataset parse_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("empty CSV file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,i_load") {
        throw ParseError("expected header 't,i_load', got '" + line + "'", 1);
    }

    Dataset ds;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw ParseError("expected two comma-separated fields", line_no);
        }
        const std::string_view view(line);
        const double t = parse_number(view.substr(0, comma), line_no);
        const double v = parse_number(view.substr(comma + 1), line_no);
        if (!ds.times.empty() && !(t > ds.times.back())) {
            throw ParseError("times are not strictly increasing", line_no);
        }
        ds.times.push_back(t);
        ds.values.push_back(v);
    }
    return ds;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path)
{
    auto p = csv_path;
    p.replace_extension(".json");
    return p;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path)
{
    write_text_file(path, format_csv(ds));
    write_json_file(sidecar_path(path), nlohmann::json(ds.meta));
}

Dataset read_csv(const std::filesystem::path& path)
{
    Dataset ds = parse_csv(read_text_file(path));
    const auto meta_path = sidecar_path(path);
    if (std::filesystem::exists(meta_path)) {
        ds.meta = read_json_file(meta_path).get<DatasetMeta>();
    }
    return ds;
}

void to_json(nlohmann::json& j, const DatasetMeta& meta)
{
    j = nlohmann::json::object();
    j["class"] = meta.circuit_class ? nlohmann::json(class_index(*meta.circuit_class)) : nlohmann::json();
    j["phi"] = meta.phi ? nlohmann::json(*meta.phi) : nlohmann::json();
    j["t0"] = meta.t0;
    j["t1"] = meta.t1;
    j["dt"] = meta.dt;
    j["seed"] = meta.seed;
    j["generator"] = meta.generator;
    j["initial_state"] = meta.initial_state;
}

void from_json(const nlohmann::json& j, DatasetMeta& meta)
{
    meta = DatasetMeta{};
    if (j.contains("class") && !j.at("class").is_null()) {
        meta.circuit_class = class_from_index(j.at("class").get<int>());
    }
    if (j.contains("phi") && !j.at("phi").is_null()) {
        meta.phi = j.at("phi").get<CircuitParams>();
    }
    meta.t0 = j.value("t0", 0.0);
    meta.t1 = j.value("t1", 0.0);
    meta.dt = j.value("dt", 0.0);
    meta.seed = j.value("seed", std::uint64_t{0});
    meta.generator = j.value("generator", std::string{});
    meta.initial_state = j.value("initial_state", std::vector<double>{});
}

}  // namespace rlcnet
