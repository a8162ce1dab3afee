#include "rlcnet/workflows.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <sstream>

#include "rlcnet/error.hpp"
#include "rlcnet/io.hpp"
#include "rlcnet/simulator.hpp"
#include "rlcnet/stats.hpp"

namespace rlcnet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

ScheduleRole source_role(ModelFamily f)
{
    return f == ModelFamily::Fourier ? ScheduleRole::SourceFourier : ScheduleRole::SourceBaseline;
}

ScheduleRole finetune_role(ModelFamily f)
{
    return f == ModelFamily::Fourier ? ScheduleRole::FineTuneFourier : ScheduleRole::FineTuneBaseline;
}

InitialConditions initial_conditions(const DatasetMeta& meta, int order, double t0)
{
    InitialConditions ic{t0, meta.initial_state};
    if (ic.values.empty()) ic.values.assign(static_cast<std::size_t>(order), 0.0);
    if (ic.values.size() != static_cast<std::size_t>(order)) {
        throw InvalidArgument("dataset initial state has " + std::to_string(ic.values.size()) +
                              " entries, the equation needs " + std::to_string(order));
    }
    return ic;
}

std::vector<double> uniform_grid(double t0, double t1, int points)
{
    if (points < 2) {
        throw InvalidArgument("collocation grid needs at least two points");
    }
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) grid[i] = t0 + (t1 - t0) * i / (points - 1);
    return grid;
}

void write_artifacts(const RunPaths& paths, const AnyModel& model, const ModelMeta& meta,
                     const std::vector<EpochRecord>& log, RunRecord& record)
{
    if (!paths.checkpoint.empty()) {
        save_checkpoint(model, meta, paths.checkpoint);
        record.checkpoint = paths.checkpoint.string();
    }
    if (!paths.epoch_log.empty()) {
        write_epoch_log(log, paths.epoch_log);
        record.epoch_log = paths.epoch_log.string();
    }
}

}  // namespace

std::string family_name(ModelFamily f)
{
    return f == ModelFamily::Fourier ? "fourier" : "baseline";
}

ModelFamily family_from_name(const std::string& name)
{
    if (name == "fourier" || name == "pifnn") return ModelFamily::Fourier;
    if (name == "baseline" || name == "mlp" || name == "pinn") return ModelFamily::Baseline;
    throw InvalidArgument("unknown model family '" + name + "' (expected fourier or baseline)");
}

ModelFamily family_of(const AnyModel& model)
{
    return std::holds_alternative<FourierNet>(model) ? ModelFamily::Fourier : ModelFamily::Baseline;
}

std::size_t param_count(const AnyModel& model)
{
    return std::visit([](const auto& m) { return m.param_count(); }, model);
}

double eval(const AnyModel& model, double t)
{
    return std::visit([t](const auto& m) { return m.eval(t); }, model);
}

std::vector<double> predict(const AnyModel& model, std::span<const double> times)
{
    if (const auto* mlp = std::get_if<Mlp>(&model)) {
        const Eigen::MatrixXd d = mlp->derivatives(times, 0);
        return std::vector<double>(d.data(), d.data() + d.size());
    }
    const auto& net = std::get<FourierNet>(model);
    std::vector<double> out(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) out[i] = net.eval(times[i]);
    return out;
}

void save_checkpoint(const AnyModel& model, const ModelMeta& meta, const std::filesystem::path& path)
{
    std::visit([&](const auto& m) { save_checkpoint(m, meta, path); }, model);
}

AnyCheckpoint load_checkpoint(const std::filesystem::path& path)
{
    const auto j = read_json_file(path);
    const std::string family = j.is_object() ? j.value("family", std::string{}) : std::string{};
    if (family == "fourier") {
        auto ck = fourier_checkpoint_from_json(j);
        return {std::move(ck.net), std::move(ck.meta)};
    }
    if (family == "mlp") {
        auto ck = mlp_checkpoint_from_json(j);
        return {std::move(ck.mlp), std::move(ck.meta)};
    }
    throw ParseError(path.string() + ": unknown checkpoint family '" + family + "'");
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const RunRecord& r)
{
    j = nlohmann::json{{"kind", r.kind},
                       {"family", family_name(r.family)},
                       {"source_class", r.source_class ? nlohmann::json(class_index(*r.source_class)) : nlohmann::json()},
                       {"target_class", class_index(r.target_class)},
                       {"transfer", r.transfer ? nlohmann::json(*r.transfer) : nlohmann::json()},
                       {"seed", r.seed},
                       {"train_mse", r.train_mse},
                       {"test_mse", r.test_mse},
                       {"duration_s", r.duration_s},
                       {"epochs", r.epochs},
                       {"best_epoch", r.best_epoch},
                       {"final_loss",
                        {{"total", r.final_loss.total},
                         {"l_data", r.final_loss.data},
                         {"l_pde", r.final_loss.pde},
                         {"l_ic", r.final_loss.ic}}},
                       {"epoch_log", r.epoch_log},
                       {"checkpoint", r.checkpoint}};
}

void from_json(const nlohmann::json& j, RunRecord& r)
{
    r = RunRecord{};
    r.kind = j.at("kind").get<std::string>();
    r.family = family_from_name(j.at("family").get<std::string>());
    if (!j.at("source_class").is_null()) r.source_class = class_from_index(j.at("source_class").get<int>());
    r.target_class = class_from_index(j.at("target_class").get<int>());
    if (!j.at("transfer").is_null()) r.transfer = j.at("transfer").get<bool>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.train_mse = j.at("train_mse").get<double>();
    r.test_mse = j.at("test_mse").get<double>();
    r.duration_s = j.at("duration_s").get<double>();
    r.epochs = j.at("epochs").get<long>();
    r.best_epoch = j.value("best_epoch", 0L);
    if (j.contains("final_loss")) {
        const auto& f = j.at("final_loss");
        r.final_loss = {f.at("total").get<double>(), f.at("l_data").get<double>(), f.at("l_pde").get<double>(),
                        f.at("l_ic").get<double>()};
    }
    r.epoch_log = j.value("epoch_log", std::string{});
    r.checkpoint = j.value("checkpoint", std::string{});
}

void to_json(nlohmann::json& j, const ExperimentReport& report)
{
    j = nlohmann::json{{"runs", report.runs}};
}

void from_json(const nlohmann::json& j, ExperimentReport& report)
{
    report.runs = j.at("runs").get<std::vector<RunRecord>>();
}

std::string format_report_csv(const ExperimentReport& report)
{
    std::ostringstream out;
    out << "kind,family,source_class,target_class,transfer,seed,train_mse,test_mse,duration_s,epochs,"
           "best_epoch,final_loss,epoch_log,checkpoint\n";
    for (const auto& r : report.runs) {
        out << r.kind << ',' << family_name(r.family) << ','
            << (r.source_class ? std::to_string(class_index(*r.source_class)) : "") << ','
            << class_index(r.target_class) << ',' << (r.transfer ? (*r.transfer ? "on" : "off") : "") << ','
            << r.seed << ',' << format_double(r.train_mse) << ',' << format_double(r.test_mse) << ','
            << format_double(r.duration_s) << ',' << r.epochs << ',' << r.best_epoch << ','
            << format_double(r.final_loss.total) << ',' << r.epoch_log << ',' << r.checkpoint << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

TrainResult train_model(AnyModel model, const LossProblem& problem, const Schedule& schedule)
{
    schedule.validate();
    return std::visit(
        [&](auto& m) -> TrainResult {
            std::vector<double> params = m.params();
            std::vector<double> grad;
            AdamState state(params.size());
            TrainResult out{m, {}, 0, {}};
            out.best_loss.total = std::numeric_limits<double>::infinity();
            const long epochs = schedule.total_epochs();
            out.log.reserve(static_cast<std::size_t>(epochs));

            auto consider = [&](long epoch, const LossBreakdown& loss) {
                if (loss.total < out.best_loss.total) {
                    out.best_loss = loss;
                    out.best_epoch = epoch;
                    std::get<std::decay_t<decltype(m)>>(out.best).set_params(params);
                }
            };
            for (long epoch = 0; epoch < epochs; ++epoch) {
                const double lr = schedule.lr_at(epoch);
                const auto loss = loss_gradient(m, problem, grad);
                out.log.push_back({epoch, lr, loss});
                consider(epoch, loss);
                adam_step(state, params, grad, lr);
                m.set_params(params);
            }
            consider(epochs, total_loss(m, problem));
            return out;
        },
        model);
}

Dataset source_dataset(CircuitClass c, double dt)
{
    const double boundaries[] = {0.0, 0.5, 1.0};
    return simulate_circuit(c, preset(c, PresetKind::Initial), boundaries, dt).data;
}

SourceResult train_source(CircuitClass c, const Dataset& dataset, const SourceOptions& options,
                          const RunPaths& paths)
{
    const auto start = Clock::now();
    dataset.validate();
    const CircuitParams phi = dataset.meta.phi.value_or(preset(c, PresetKind::Initial));
    const auto ode = ode_for_class(c, phi);
    const auto source = SourceWaveform::from(phi);

    auto [train, test] = split_dataset(dataset, RandomSplit{0.5, options.seed});

    LossConfig config;
    config.weights = options.weights;
    config.collocation = train.times;
    config.data = DataBlock{train.times, train.values};
    config.ic = initial_conditions(dataset.meta, ode.order(), dataset.times.front());
    const LossProblem problem(std::move(config), ode, source);

    const Schedule schedule = options.schedule.value_or(schedule_for(source_role(options.family)));
    AnyModel init = options.family == ModelFamily::Fourier
                        ? AnyModel(FourierNet::init(static_cast<std::size_t>(options.neurons), options.seed))
                        : AnyModel(Mlp::init(options.hidden_layers, options.seed));
    auto trained = train_model(std::move(init), problem, schedule);

    SourceResult out{std::move(trained.best), {}, {}, std::move(train), std::move(test), std::move(trained.log)};
    out.meta = ModelMeta{c, phi, options.seed, schedule.digest()};

    auto& r = out.record;
    r.kind = "source";
    r.family = options.family;
    r.source_class = c;
    r.target_class = c;
    r.seed = options.seed;
    r.train_mse = mse(predict(out.model, out.train.times), out.train.values);
    r.test_mse = mse(predict(out.model, out.test.times), out.test.values);
    r.epochs = schedule.total_epochs();
    r.best_epoch = trained.best_epoch;
    r.final_loss = trained.best_loss;
    write_artifacts(paths, out.model, out.meta, out.log, r);
    r.duration_s = seconds_since(start);
    return out;
}

AnyModel transfer(const AnyModel& source, const AnyModel& target_like)
{
    if (source.index() != target_like.index()) {
        throw ArchitectureMismatch("source and target models belong to different families");
    }
    if (const auto* s = std::get_if<FourierNet>(&source)) {
        const auto& t = std::get<FourierNet>(target_like);
        if (s->neurons() != t.neurons()) {
            throw ArchitectureMismatch("source has N=" + std::to_string(s->neurons()) + ", target has N=" +
                                       std::to_string(t.neurons()));
        }
        return *s;
    }
    const auto& s = std::get<Mlp>(source);
    const auto& t = std::get<Mlp>(target_like);
    if (s.layer_sizes() != t.layer_sizes()) {
        throw ArchitectureMismatch("source and target layer sizes differ");
    }
    return s;
}

namespace {

AnyModel fresh_like(const AnyModel& model, std::uint64_t seed)
{
    if (const auto* net = std::get_if<FourierNet>(&model)) return FourierNet::init(net->neurons(), seed);
    const auto& mlp = std::get<Mlp>(model);
    const auto sizes = mlp.layer_sizes();
    return Mlp::init(mlp.hidden_layers(), seed, sizes.at(1));
}

}  // namespace

FineTuneResult fine_tune(const AnyModel& model, std::optional<CircuitClass> source_class, CircuitClass target,
                         const CircuitParams& phi, const FineTuneOptions& options, const RunPaths& paths)
{
    const auto start = Clock::now();
    phi.validate();
    if (!(options.t_begin < options.t_split && options.t_split < options.t_end)) {
        throw InvalidArgument("fine-tuning needs t_begin < t_split < t_end");
    }
    const auto ode = ode_for_class(target, phi);
    const auto source = SourceWaveform::from(phi);

    // Labels are used for evaluation only; the loss sees the initial state.
    const double boundaries[] = {options.t_begin, options.t_split, options.t_end};
    auto truth = simulate_circuit(target, phi, boundaries, options.dt);

    LossConfig config;
    config.weights = options.weights;
    config.collocation = uniform_grid(options.t_begin, options.t_split, options.collocation_points);
    config.ic = InitialConditions{options.t_begin, truth.initial_state};
    const LossProblem problem(std::move(config), ode, source);

    const ModelFamily family = family_of(model);
    const Schedule schedule = options.schedule.value_or(schedule_for(finetune_role(family)));
    AnyModel init = options.transfer ? transfer(model, model) : fresh_like(model, options.seed);
    auto trained = train_model(std::move(init), problem, schedule);

    FineTuneResult out{std::move(trained.best), {}, {}, std::move(trained.log), std::move(truth.data)};
    out.meta = ModelMeta{target, phi, options.seed, schedule.digest()};

    std::vector<double> fit_t, fit_v, test_t, test_v;
    for (std::size_t i = 0; i < out.truth.size(); ++i) {
        const bool is_test = out.truth.times[i] > options.t_split;
        (is_test ? test_t : fit_t).push_back(out.truth.times[i]);
        (is_test ? test_v : fit_v).push_back(out.truth.values[i]);
    }

    auto& r = out.record;
    r.kind = "finetune";
    r.family = family;
    r.source_class = options.transfer ? source_class : std::nullopt;
    r.target_class = target;
    r.transfer = options.transfer;
    r.seed = options.seed;
    r.train_mse = mse(predict(out.model, fit_t), fit_v);
    r.test_mse = mse(predict(out.model, test_t), test_v);
    r.epochs = schedule.total_epochs();
    r.best_epoch = trained.best_epoch;
    r.final_loss = trained.best_loss;
    write_artifacts(paths, out.model, out.meta, out.log, r);
    r.duration_s = seconds_since(start);
    return out;
}

ExperimentReport GeneralizationMatrix::report() const
{
    ExperimentReport report;
    for (const auto& e : entries) report.runs.push_back(e.record);
    return report;
}

void to_json(nlohmann::json& j, const GeneralizationMatrix& m)
{
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& src : kAllClasses) {
        for (const auto& tgt : kAllClasses) {
            nlohmann::json cell{{"source", class_index(src)}, {"target", class_index(tgt)}};
            if (src == tgt) {
                cell["status"] = "reported in intra-class run";
            } else {
                for (const auto& e : m.entries) {
                    if (e.source == src && e.target == tgt) {
                        cell["status"] = "fine-tuned";
                        cell["test_mse"] = e.record.test_mse;
                        cell["train_mse"] = e.record.train_mse;
                        cell["run"] = e.record;
                    }
                }
            }
            cells.push_back(std::move(cell));
        }
    }
    j = nlohmann::json{{"cells", cells}};
}

GeneralizationMatrix run_generalization_matrix(const std::map<CircuitClass, AnyModel>& sources,
                                               const FineTuneOptions& options,
                                               const std::filesystem::path& workdir)
{
    for (auto c : kAllClasses) {
        if (!sources.contains(c)) {
            throw InvalidArgument("missing source checkpoint for class " + std::to_string(class_index(c)));
        }
    }
    std::vector<std::pair<CircuitClass, CircuitClass>> pairs;
    for (auto src : kAllClasses) {
        for (auto tgt : kAllClasses) {
            if (src != tgt) pairs.emplace_back(src, tgt);
        }
    }
    std::vector<std::future<RunRecord>> jobs;
    for (const auto& [src, tgt] : pairs) {
        jobs.push_back(std::async(std::launch::async, [&, src = src, tgt = tgt] {
            RunPaths paths;
            if (!workdir.empty()) {
                const std::string stem =
                    "T" + std::to_string(class_index(tgt)) + "_S" + std::to_string(class_index(src));
                paths = {workdir / (stem + ".ckpt.json"), workdir / (stem + ".log.csv")};
            }
            FineTuneOptions opts = options;
            opts.transfer = true;
            return fine_tune(sources.at(src), src, tgt, preset(tgt, PresetKind::Analysis), opts, paths).record;
        }));
    }
    GeneralizationMatrix out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        out.entries.push_back({pairs[i].first, pairs[i].second, jobs[i].get()});
    }
    return out;
}

InverseResult inverse_fit(const Dataset& dataset, CircuitClass c, std::span<const PhysicalParam> free,
                          const CircuitParams& guess, const InverseOptions& options)
{
    dataset.validate();
    guess.validate();
    CircuitParams phi = guess;
    const auto source = SourceWaveform::from(phi);

    LossConfig config;
    config.weights = options.weights;
    config.collocation = dataset.times;
    config.data = DataBlock{dataset.times, dataset.values};
    config.ic = initial_conditions(dataset.meta, ode_for_class(c, phi).order(), dataset.times.front());
    LossProblem problem(std::move(config), ode_for_class(c, phi), source);

    FourierNet net = options.warm_start.value_or(FourierNet::init(static_cast<std::size_t>(options.neurons), options.seed));
    const Schedule schedule = options.schedule.value_or(schedule_for(ScheduleRole::SourceFourier));
    schedule.validate();

    // Free parameters move in units of their initial guess.
    std::vector<double> scale, rel(free.size(), 1.0);
    for (auto p : free) scale.push_back(get(guess, p));

    std::vector<double> params = net.params();
    std::vector<double> grad;
    AdamState net_state(params.size());
    AdamState phi_state(free.size());

    InverseResult out;
    const long epochs = schedule.total_epochs();
    for (long epoch = 0; epoch < epochs; ++epoch) {
        const double lr = schedule.lr_at(epoch);
        const auto loss = loss_gradient(net, problem, grad);
        out.log.push_back({epoch, lr, loss});
        if (!free.empty()) {
            auto g = phi_gradient(net, problem, c, phi, free);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] *= scale[i];
            adam_step(phi_state, rel, g, options.phi_lr);
        }
        adam_step(net_state, params, grad, lr);
        net.set_params(params);

        std::vector<double> values;
        for (std::size_t i = 0; i < free.size(); ++i) {
            const double v = rel[i] * scale[i];
            if (!(v > 0.0)) {
                throw DomainError(std::string(name(free[i])) + " estimate left the positive domain at epoch " +
                                  std::to_string(epoch));
            }
            set(phi, free[i], v);
            values.push_back(v);
        }
        out.trajectory.push_back(std::move(values));
        if (!free.empty()) problem.set_ode(ode_for_class(c, phi));
    }
    out.estimate = phi;
    out.net = net;
    out.final_loss = total_loss(net, problem);
    return out;
}

}  // namespace rlcnet
