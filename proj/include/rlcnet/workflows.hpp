#pragma once

// Experiment drivers: source training, transfer, data-free fine-tuning, the
// cross-class matrix and inverse fits. Each run yields a RunRecord; a list of
// them forms an ExperimentReport.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rlcnet/adam.hpp"
#include "rlcnet/circuit.hpp"
#include "rlcnet/dataset.hpp"
#include "rlcnet/fourier_net.hpp"
#include "rlcnet/loss.hpp"
#include "rlcnet/mlp.hpp"

namespace rlcnet {

enum class ModelFamily { Fourier, Baseline };

std::string family_name(ModelFamily f);
ModelFamily family_from_name(const std::string& name);

using AnyModel = std::variant<FourierNet, Mlp>;

ModelFamily family_of(const AnyModel& model);
std::size_t param_count(const AnyModel& model);
double eval(const AnyModel& model, double t);
std::vector<double> predict(const AnyModel& model, std::span<const double> times);

struct AnyCheckpoint {
    AnyModel model;
    ModelMeta meta;
};

void save_checkpoint(const AnyModel& model, const ModelMeta& meta, const std::filesystem::path& path);
/// Dispatches on the "family" key.
AnyCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Where a run writes its artifacts; empty paths are skipped.
struct RunPaths {
    std::filesystem::path checkpoint;
    std::filesystem::path epoch_log;
};

struct RunRecord {
    std::string kind;  // "source", "finetune" or "inverse"
    ModelFamily family = ModelFamily::Fourier;
    std::optional<CircuitClass> source_class;
    CircuitClass target_class = CircuitClass::Class1;
    std::optional<bool> transfer;
    std::uint64_t seed = 0;
    double train_mse = 0.0;
    double test_mse = 0.0;
    double duration_s = 0.0;
    long epochs = 0;
    long best_epoch = 0;
    LossBreakdown final_loss;  // loss of the returned (best) parameters
    std::string epoch_log;
    std::string checkpoint;
};

struct ExperimentReport {
    std::vector<RunRecord> runs;
};

void to_json(nlohmann::json& j, const RunRecord& r);
void to_json(nlohmann::json& j, const ExperimentReport& report);
void from_json(const nlohmann::json& j, RunRecord& r);
void from_json(const nlohmann::json& j, ExperimentReport& report);
std::string format_report_csv(const ExperimentReport& report);

/// Result of one optimizer run over a model.
struct TrainResult {
    AnyModel best;  // lowest total training loss seen
    LossBreakdown best_loss;
    long best_epoch = 0;
    std::vector<EpochRecord> log;
};

/// ADAM over the model parameters for every epoch of `schedule`, keeping the
/// parameters with the lowest total loss.
TrainResult train_model(AnyModel model, const LossProblem& problem, const Schedule& schedule);

struct SourceOptions {
    ModelFamily family = ModelFamily::Fourier;
    int neurons = 10;       // Fourier
    int hidden_layers = 5;  // Baseline
    std::uint64_t seed = 0;
    std::optional<Schedule> schedule;  // defaults to the family's source schedule
    LossWeights weights;
};

struct SourceResult {
    AnyModel model;
    ModelMeta meta;
    RunRecord record;
    Dataset train;
    Dataset test;
    std::vector<EpochRecord> log;
};

/// Full-trajectory dataset of a class at its Initial parameters: two
/// back-to-back runs over [0, 0.5] and [0.5, 1].
Dataset source_dataset(CircuitClass c, double dt = 1e-4);

/// Random 50/50 split seeded with options.seed, physics loss with
/// collocation at the training times and initial conditions taken from the
/// simulator state stored in the dataset metadata.
SourceResult train_source(CircuitClass c, const Dataset& dataset, const SourceOptions& options,
                          const RunPaths& paths = {});

/// Parameter-based transfer: copies the source parameters. Throws
/// ArchitectureMismatch when `target_like` has a different architecture.
AnyModel transfer(const AnyModel& source, const AnyModel& target_like);

struct FineTuneOptions {
    bool transfer = true;
    std::uint64_t seed = 0;  // fresh init when transfer is off
    std::optional<Schedule> schedule;
    int collocation_points = 1000;
    double t_begin = 0.0;
    double t_split = 0.5;
    double t_end = 1.0;
    double dt = 1e-4;  // ground-truth step for evaluation
    LossWeights weights;
};

struct FineTuneResult {
    AnyModel model;
    ModelMeta meta;
    RunRecord record;
    std::vector<EpochRecord> log;
    Dataset truth;  // evaluation labels over [t_begin, t_end]
};

/// Data-free fine-tuning of `model` for (target, phi). With transfer off the
/// model is replaced by a fresh init of the same architecture. The test MSE
/// is measured on (t_split, t_end] against a fresh simulation; labels never
/// enter the loss.
FineTuneResult fine_tune(const AnyModel& model, std::optional<CircuitClass> source_class, CircuitClass target,
                         const CircuitParams& phi, const FineTuneOptions& options, const RunPaths& paths = {});

struct MatrixEntry {
    CircuitClass source;
    CircuitClass target;
    RunRecord record;
};

struct GeneralizationMatrix {
    std::vector<MatrixEntry> entries;  // the 6 off-diagonal pairs
    ExperimentReport report() const;
};

void to_json(nlohmann::json& j, const GeneralizationMatrix& m);

/// Fine-tunes every source checkpoint into every other class at the
/// Analysis parameters, one worker thread per pair. Throws InvalidArgument
/// when a source class is missing.
GeneralizationMatrix run_generalization_matrix(const std::map<CircuitClass, AnyModel>& sources,
                                               const FineTuneOptions& options,
                                               const std::filesystem::path& workdir = {});

struct InverseOptions {
    int neurons = 10;
    std::uint64_t seed = 0;
    std::optional<Schedule> schedule;  // defaults to the Fourier source schedule
    double phi_lr = 1e-2;              // ADAM rate on each free parameter relative to its initial guess
    LossWeights weights;
    std::optional<FourierNet> warm_start;
};

struct InverseResult {
    CircuitParams estimate;
    std::vector<std::vector<double>> trajectory;  // free-parameter values per epoch
    FourierNet net;
    LossBreakdown final_loss;
    std::vector<EpochRecord> log;
};

/// Joint ADAM over the network and the free physical parameters on the
/// supervised loss. `guess` supplies every parameter; only those in `free`
/// move. Throws DomainError when an estimate becomes non-positive.
InverseResult inverse_fit(const Dataset& dataset, CircuitClass c, std::span<const PhysicalParam> free,
                          const CircuitParams& guess, const InverseOptions& options);

}  // namespace rlcnet
