#include "cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "rlcnet/bondgraph.hpp"
#include "rlcnet/error.hpp"
#include "rlcnet/io.hpp"
#include "rlcnet/simulator.hpp"
#include "rlcnet/stats.hpp"
#include "rlcnet/workflows.hpp"

namespace rlcnet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reads --config files written as JSON. Keys at the top level apply to the
// active subcommand; an object keyed by a subcommand name applies to that one.
class JsonConfig : public CLI::Config {
public:
    explicit JsonConfig(std::string section) : section_(std::move(section)) {}

    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override
    {
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
        std::vector<CLI::ConfigItem> items;
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                for (const auto& [sub, v] : value.items()) items.push_back(item({key}, sub, v));
            } else {
                items.push_back(item(section_.empty() ? std::vector<std::string>{} : std::vector{section_}, key, value));
            }
        }
        return items;
    }

private:
    static std::string scalar(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

    static CLI::ConfigItem item(std::vector<std::string> parents, const std::string& name, const json& value)
    {
        CLI::ConfigItem it;
        it.parents = std::move(parents);
        it.name = name;
        if (value.is_array()) {
            for (const auto& v : value) it.inputs.push_back(scalar(v));
        } else {
            it.inputs.push_back(scalar(value));
        }
        return it;
    }

    std::string section_;
};

struct Context {
    fs::path workdir;
    std::vector<std::string> outputs;

    fs::path resolve(const fs::path& p) const
    {
        if (p.empty() || workdir.empty() || p.is_absolute()) return p;
        return workdir / p;
    }

    fs::path output(const fs::path& p)
    {
        const auto r = resolve(p);
        outputs.push_back(r.string());
        return r;
    }
};

fs::path with_suffix(const fs::path& path, const std::string& suffix)
{
    auto stem = path;
    stem.replace_extension();
    if (stem.extension() == ".ckpt") stem.replace_extension();
    return fs::path(stem.string() + suffix);
}

CircuitParams resolve_phi(CircuitClass c, const std::string& preset_name, const std::string& phi_file,
                          const Context& ctx)
{
    if (!phi_file.empty()) {
        auto phi = read_json_file(ctx.resolve(phi_file)).get<CircuitParams>();
        phi.validate();
        return phi;
    }
    return preset(c, preset_kind_from_name(preset_name));
}

void append_report(const fs::path& path, const RunRecord& record, Context& ctx)
{
    if (path.empty()) return;
    const auto p = ctx.output(path);
    ExperimentReport report;
    if (fs::exists(p)) report = read_json_file(p).get<ExperimentReport>();
    report.runs.push_back(record);
    write_json_file(p, report);
    const auto csv = with_suffix(p, ".csv");
    write_text_file(csv, format_report_csv(report));
    ctx.outputs.push_back(csv.string());
}

std::vector<double> read_last_column(const fs::path& path)
{
    std::istringstream in(read_text_file(path));
    std::string line;
    std::vector<double> values;
    int line_no = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto comma = line.rfind(',');
        const std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
        try {
            std::size_t used = 0;
            values.push_back(std::stod(field, &used));
            if (used != field.size()) throw std::invalid_argument(field);
        } catch (const std::exception&) {
            throw ParseError(path.string() + ": expected a number, got '" + field + "'", line_no);
        }
    }
    if (values.empty()) throw ParseError(path.string() + ": no samples");
    return values;
}

std::string timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

void update_manifest(const Context& ctx, const std::vector<std::string>& args, int code)
{
    if (ctx.workdir.empty()) return;
    const auto path = ctx.workdir / "manifest.json";
    json manifest{{"runs", json::array()}};
    if (fs::exists(path)) {
        try {
            manifest = read_json_file(path);
        } catch (const Error&) {
            manifest = json{{"runs", json::array()}};
        }
    }
    manifest["runs"].push_back({{"args", std::vector<std::string>(args.begin() + 1, args.end())},
                                {"outputs", ctx.outputs},
                                {"exit_code", code},
                                {"timestamp", timestamp()}});
    write_json_file(path, manifest);
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    int cls = 0;
    std::string preset = "initial";
    std::string phi;
    double t0 = 0.0, t1 = 1.0, dt = 1e-4;
    std::vector<double> breaks;
    std::string generator = "auto";
    std::string out;
};

int cmd_simulate(const SimulateArgs& a, Context& ctx)
{
    if (!(a.dt > 0.0)) throw InvalidArgument("--dt must be > 0");
    if (!(a.t1 > a.t0)) throw InvalidArgument("--t1 must be greater than --t0");
    const auto c = class_from_index(a.cls);
    const auto phi = resolve_phi(c, a.preset, a.phi, ctx);
    std::vector<double> boundaries{a.t0};
    for (double b : a.breaks) {
        if (!(b > boundaries.back() && b < a.t1)) throw InvalidArgument("--break values must increase inside (t0, t1)");
        boundaries.push_back(b);
    }
    boundaries.push_back(a.t1);
    const auto truth = simulate_circuit(c, phi, boundaries, a.dt, generator_from_name(a.generator));
    const auto out = ctx.output(a.out);
    write_csv(truth.data, out);
    ctx.outputs.push_back(sidecar_path(out).string());
    std::cout << "wrote " << truth.data.size() << " points over [" << format_double(a.t0) << ", "
              << format_double(a.t1) << "] with dt=" << format_double(a.dt) << " (" << truth.data.meta.generator
              << ") to " << out.string() << '\n';
    return kOk;
}

struct DeriveArgs {
    std::string netlist;
    std::string out;
    int check_class = 0;
    double tol = 1e-10;
};

int cmd_derive_ode(const DeriveArgs& a, Context& ctx)
{
    const auto spec = parse_netlist(read_text_file(ctx.resolve(a.netlist)));
    const auto ss = derive_state_space(assign_causality(spec));
    const auto ode = state_space_to_ode(ss);
    const json j = ode;
    if (a.out.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        write_json_file(ctx.output(a.out), j);
    }
    if (a.check_class == 0) return kOk;

    const auto c = class_from_index(a.check_class);
    CircuitParams phi{};
    bool has_r = false, has_l = false, has_c = false, has_src = false;
    for (const auto& e : spec.elements) {
        switch (e.kind) {
        case ElementKind::R: if (!has_r) phi.R = e.value, has_r = true; break;
        case ElementKind::L: if (!has_l) phi.L = e.value, has_l = true; break;
        case ElementKind::C: if (!has_c) phi.C = e.value, has_c = true; break;
        case ElementKind::Se: phi.Vmax = e.value, phi.f = e.frequency, has_src = true; break;
        default: break;
        }
    }
    if (!(has_r && has_l && has_c && has_src)) {
        throw InvalidArgument("--check-class needs a netlist with an r, an l and a c element");
    }
    const double err = projective_mismatch(ode, ode_for_class(c, phi));
    if (err < a.tol) {
        std::cout << "MATCH class " << a.check_class << " (max relative coefficient error " << err << ")\n";
        return kOk;
    }
    std::cout << "MISMATCH class " << a.check_class << " (max coefficient-ratio error " << err << ")\n";
    return kMismatch;
}

struct TrainArgs {
    std::string family = "fourier";
    int cls = 0;
    int neurons = 10;
    int hidden = 5;
    std::uint64_t seed = 0;
    std::string data;
    double dt = 1e-4;
    std::string schedule;
    std::string out;
    std::string log;
    std::string report;
};

int cmd_train(const TrainArgs& a, Context& ctx)
{
    const auto c = class_from_index(a.cls);
    SourceOptions opts;
    opts.family = family_from_name(a.family);
    opts.neurons = a.neurons;
    opts.hidden_layers = a.hidden;
    opts.seed = a.seed;
    if (!a.schedule.empty()) opts.schedule = Schedule::parse(a.schedule);
    const Dataset data = a.data.empty() ? source_dataset(c, a.dt) : read_csv(ctx.resolve(a.data));
    if (data.meta.circuit_class && *data.meta.circuit_class != c) {
        throw InvalidArgument("dataset was generated for class " + std::to_string(class_index(*data.meta.circuit_class)));
    }
    RunPaths paths{ctx.output(a.out), ctx.output(a.log.empty() ? with_suffix(a.out, ".log.csv") : fs::path(a.log))};
    const auto result = train_source(c, data, opts, paths);
    append_report(a.report, result.record, ctx);
    std::cout << json(result.record).dump(2) << '\n';
    return kOk;
}

struct FineTuneArgs {
    std::string ckpt;
    int target = 0;
    std::string preset = "analysis";
    std::string phi;
    bool no_data = false;
    bool no_transfer = false;
    std::uint64_t seed = 0;
    std::string schedule;
    int collocation = 1000;
    double dt = 1e-4;
    std::string out;
    std::string log;
    std::string report;
};

int cmd_finetune(const FineTuneArgs& a, Context& ctx)
{
    const auto source = load_checkpoint(ctx.resolve(a.ckpt));
    const auto target = class_from_index(a.target);
    const auto phi = resolve_phi(target, a.preset, a.phi, ctx);
    FineTuneOptions opts;
    opts.transfer = !a.no_transfer;
    opts.seed = a.seed;
    opts.collocation_points = a.collocation;
    opts.dt = a.dt;
    if (!a.schedule.empty()) opts.schedule = Schedule::parse(a.schedule);
    RunPaths paths{ctx.output(a.out), ctx.output(a.log.empty() ? with_suffix(a.out, ".log.csv") : fs::path(a.log))};
    const auto result = fine_tune(source.model, source.meta.circuit_class, target, phi, opts, paths);
    append_report(a.report, result.record, ctx);
    std::cout << json(result.record).dump(2) << '\n';
    return kOk;
}

struct EvaluateArgs {
    std::string ckpt;
    std::string data;
    double t_min = -std::numeric_limits<double>::infinity();
    double t_max = std::numeric_limits<double>::infinity();
    std::string errors_out;
};

int cmd_evaluate(const EvaluateArgs& a, Context& ctx)
{
    const auto ck = load_checkpoint(ctx.resolve(a.ckpt));
    const auto data = read_csv(ctx.resolve(a.data));
    std::vector<double> t, truth;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.times[i] >= a.t_min && data.times[i] <= a.t_max) {
            t.push_back(data.times[i]);
            truth.push_back(data.values[i]);
        }
    }
    if (t.empty()) throw InvalidArgument("no samples inside the requested window");
    const auto pred = predict(ck.model, t);
    if (!a.errors_out.empty()) {
        std::ostringstream out;
        out << "t,sq_error\n";
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double e = pred[i] - truth[i];
            out << format_double(t[i]) << ',' << format_double(e * e) << '\n';
        }
        write_text_file(ctx.output(a.errors_out), out.str());
    }
    std::cout << json{{"mse", mse(pred, truth)}, {"points", t.size()}, {"family", family_name(family_of(ck.model))}}.dump(2)
              << '\n';
    return kOk;
}

struct CompareArgs {
    std::string a, b, out;
    double alpha = 0.05;
};

int cmd_compare(const CompareArgs& a, Context& ctx)
{
    const auto x = read_last_column(ctx.resolve(a.a));
    const auto y = read_last_column(ctx.resolve(a.b));
    const json j = wilcoxon_rank_sum(x, y, a.alpha);
    if (!a.out.empty()) write_json_file(ctx.output(a.out), j);
    std::cout << j.dump(2) << '\n';
    return kOk;
}

struct MatrixArgs {
    std::vector<std::string> sources;
    std::uint64_t seed = 0;
    std::string schedule;
    int collocation = 1000;
    double dt = 1e-4;
    std::string out = "matrix.json";
    std::string report;
};

int cmd_matrix(const MatrixArgs& a, Context& ctx)
{
    std::map<CircuitClass, AnyModel> sources;
    for (const auto& s : a.sources) {
        auto ck = load_checkpoint(ctx.resolve(s));
        if (!ck.meta.circuit_class) throw InvalidArgument(s + ": checkpoint does not record its circuit class");
        sources.insert_or_assign(*ck.meta.circuit_class, std::move(ck.model));
    }
    FineTuneOptions opts;
    opts.seed = a.seed;
    opts.collocation_points = a.collocation;
    opts.dt = a.dt;
    if (!a.schedule.empty()) opts.schedule = Schedule::parse(a.schedule);
    const auto out = ctx.output(a.out);
    const auto dir = out.parent_path() / (out.stem().string() + "_runs");
    const auto matrix = run_generalization_matrix(sources, opts, dir);
    write_json_file(out, matrix);
    for (const auto& e : matrix.entries) append_report(a.report, e.record, ctx);
    std::cout << "target\\source";
    for (auto s : kAllClasses) std::cout << ",S" << class_index(s);
    std::cout << '\n';
    for (auto t : kAllClasses) {
        std::cout << 'T' << class_index(t);
        for (auto s : kAllClasses) {
            std::cout << ',';
            for (const auto& e : matrix.entries) {
                if (e.source == s && e.target == t) std::cout << format_double(e.record.test_mse);
            }
            if (s == t) std::cout << "intra";
        }
        std::cout << '\n';
    }
    return kOk;
}

struct PlotArgs {
    std::string data, ckpt, out = "plot.svg", csv;
    bool csv_only = false;
    double t_min = 0.5, t_max = 1.0;
};

int cmd_plot(const PlotArgs& a, Context& ctx)
{
    const auto ck = load_checkpoint(ctx.resolve(a.ckpt));
    const auto data = read_csv(ctx.resolve(a.data));
    PlotSeries truth{"ground truth", "#1f77b4", {}, {}};
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.times[i] >= a.t_min && data.times[i] <= a.t_max) {
            truth.t.push_back(data.times[i]);
            truth.y.push_back(data.values[i]);
        }
    }
    if (truth.t.size() < 2) throw InvalidArgument("fewer than two samples inside the plot window");
    PlotSeries pred{family_name(family_of(ck.model)) + " prediction", "#d62728", truth.t, predict(ck.model, truth.t)};

    const fs::path csv = a.csv.empty() ? with_suffix(a.out, ".csv") : fs::path(a.csv);
    write_text_file(ctx.output(csv), plot_csv(truth.t, truth.y, pred.y));
    if (!a.csv_only) {
        const PlotSeries series[] = {truth, pred};
        write_text_file(ctx.output(a.out), render_svg(series, "load current"));
    }
    std::cout << "plotted " << truth.t.size() << " points\n";
    return kOk;
}

struct InverseArgs {
    std::string data;
    int cls = 0;
    std::vector<std::string> free;
    std::vector<std::string> init;
    int neurons = 10;
    std::uint64_t seed = 0;
    std::string schedule;
    double phi_lr = 1e-2;
    std::string warm;
    std::string out;
};

int cmd_inverse(const InverseArgs& a, Context& ctx)
{
    const auto c = class_from_index(a.cls);
    const auto data = read_csv(ctx.resolve(a.data));
    CircuitParams guess = data.meta.phi.value_or(preset(c, PresetKind::Initial));
    std::vector<PhysicalParam> free;
    for (const auto& f : a.free) free.push_back(physical_param_from_name(f));
    for (const auto& kv : a.init) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw InvalidArgument("--init expects NAME=VALUE, got '" + kv + "'");
        set(guess, physical_param_from_name(kv.substr(0, eq)), std::stod(kv.substr(eq + 1)));
    }
    InverseOptions opts;
    opts.neurons = a.neurons;
    opts.seed = a.seed;
    opts.phi_lr = a.phi_lr;
    if (!a.schedule.empty()) opts.schedule = Schedule::parse(a.schedule);
    if (!a.warm.empty()) opts.warm_start = load_fourier_checkpoint(ctx.resolve(a.warm)).net;
    const auto result = inverse_fit(data, c, free, guess, opts);
    json j{{"estimate", result.estimate},
           {"final_loss",
            {{"total", result.final_loss.total},
             {"l_data", result.final_loss.data},
             {"l_pde", result.final_loss.pde},
             {"l_ic", result.final_loss.ic}}}};
    if (!a.out.empty()) write_json_file(ctx.output(a.out), j);
    std::cout << j.dump(2) << '\n';
    return kOk;
}

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const DivergenceError*>(&e) || dynamic_cast<const DomainError*>(&e)) return kDivergence;
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const CausalityError*>(&e)) return kParse;
    if (dynamic_cast<const ArchitectureMismatch*>(&e)) return kMismatch;
    if (dynamic_cast<const InvalidArgument*>(&e)) return kUsage;
    return kFailure;
}

const char* kind_for(const std::exception& e, int code)
{
    if (dynamic_cast<const CausalityError*>(&e)) return "causality error";
    switch (code) {
    case kUsage: return "invalid argument";
    case kDivergence: return "numerical divergence";
    case kParse: return "parse error";
    case kMismatch: return "mismatch";
    default: return "error";
    }
}

}  // namespace

int run(const std::vector<std::string>& args)
{
    CLI::App app{"Physics-informed Fourier networks for RLC circuits", args.empty() ? "rlcnet" : args[0]};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    // Option values may precede the subcommand, so match on known names.
    static const std::set<std::string> kSubcommands{"simulate", "derive-ode", "train",   "finetune", "evaluate",
                                                     "compare",  "matrix",     "plot",    "inverse"};
    std::string config_section;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (kSubcommands.contains(args[i])) {
            config_section = args[i];
            break;
        }
    }
    app.config_formatter(std::make_shared<JsonConfig>(config_section));
    app.set_config("--config", "", "JSON file with option values; command-line flags take precedence");

    Context ctx;
    std::string workdir;
    app.add_option("--workdir", workdir, "Directory for run artifacts; relative paths resolve inside it");

    auto positive_class = CLI::Range(1, 3);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Simulate a circuit and write a CSV dataset");
    s->add_option("--class", sim.cls, "Circuit class")->required()->check(positive_class);
    s->add_option("--preset", sim.preset, "Parameter preset")->check(CLI::IsMember({"initial", "analysis"}));
    s->add_option("--phi", sim.phi, "JSON file overriding R, L, C, Vmax, f");
    s->add_option("--t0", sim.t0, "Start time (s)");
    s->add_option("--t1", sim.t1, "End time (s)");
    s->add_option("--dt", sim.dt, "Sample step (s)");
    s->add_option("--break", sim.breaks, "Restart boundary; the run continues from the previous state");
    s->add_option("--generator", sim.generator, "Ground-truth generator")
        ->check(CLI::IsMember({"auto", "rk4", "steady-state"}));
    s->add_option("--out", sim.out, "Output CSV")->required();

    DeriveArgs der;
    auto* d = app.add_subcommand("derive-ode", "Derive the load-current ODE of a bond-graph netlist");
    d->add_option("--netlist", der.netlist, "Netlist file")->required();
    d->add_option("--out", der.out, "Output JSON (stdout when omitted)");
    d->add_option("--check-class", der.check_class, "Compare against a circuit class")->check(positive_class);
    d->add_option("--tol", der.tol, "Relative tolerance for --check-class");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train a source model on labelled data");
    t->add_option("--family", tr.family, "fourier or baseline")->check(CLI::IsMember({"fourier", "baseline"}));
    t->add_option("--class", tr.cls, "Circuit class")->required()->check(positive_class);
    t->add_option("--neurons", tr.neurons, "Fourier neurons")->check(CLI::PositiveNumber);
    t->add_option("--hidden", tr.hidden, "Baseline hidden layers")->check(CLI::Range(1, 5));
    t->add_option("--seed", tr.seed, "Seed for init and split");
    t->add_option("--data", tr.data, "Training CSV (simulated at the Initial preset when omitted)");
    t->add_option("--dt", tr.dt, "Sample step when simulating");
    t->add_option("--schedule", tr.schedule, "Epoch schedule, e.g. 300@10,300@0.001");
    t->add_option("--out", tr.out, "Checkpoint path")->required();
    t->add_option("--log", tr.log, "Epoch log CSV");
    t->add_option("--report", tr.report, "Report JSON to append to");

    FineTuneArgs ft;
    auto* f = app.add_subcommand("finetune", "Data-free fine-tuning of a checkpoint for new parameters");
    f->add_option("--ckpt", ft.ckpt, "Source checkpoint")->required();
    f->add_option("--target-class", ft.target, "Target circuit class")->required()->check(positive_class);
    f->add_option("--preset", ft.preset, "Parameter preset")->check(CLI::IsMember({"initial", "analysis"}));
    f->add_option("--phi", ft.phi, "JSON file overriding R, L, C, Vmax, f");
    f->add_flag("--no-data", ft.no_data, "Accepted for clarity; fine-tuning never reads labels");
    f->add_flag("--no-transfer", ft.no_transfer, "Start from a fresh init instead of the checkpoint");
    f->add_option("--seed", ft.seed, "Seed for the fresh init");
    f->add_option("--schedule", ft.schedule, "Epoch schedule");
    f->add_option("--collocation", ft.collocation, "Collocation points on [0, 0.5]")->check(CLI::Range(2, 1000000));
    f->add_option("--dt", ft.dt, "Ground-truth step for evaluation");
    f->add_option("--out", ft.out, "Target checkpoint path")->required();
    f->add_option("--log", ft.log, "Epoch log CSV");
    f->add_option("--report", ft.report, "Report JSON to append to");

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "Test MSE of a checkpoint against a dataset");
    e->add_option("--ckpt", ev.ckpt, "Checkpoint")->required();
    e->add_option("--data", ev.data, "Dataset CSV")->required();
    e->add_option("--t-min", ev.t_min, "Lower time bound");
    e->add_option("--t-max", ev.t_max, "Upper time bound");
    e->add_option("--errors-out", ev.errors_out, "Write per-sample squared errors (t,sq_error)");

    CompareArgs cmp;
    auto* c = app.add_subcommand("compare", "Wilcoxon rank-sum test between two error samples");
    c->add_option("--errors-a", cmp.a, "First error CSV (last column is used)")->required();
    c->add_option("--errors-b", cmp.b, "Second error CSV")->required();
    c->add_option("--alpha", cmp.alpha, "Significance level");
    c->add_option("--out", cmp.out, "Write the result JSON here too");

    MatrixArgs mx;
    auto* m = app.add_subcommand("matrix", "Cross-class fine-tuning matrix from three source checkpoints");
    m->add_option("--sources", mx.sources, "Source checkpoints, one per class")->required()->expected(3);
    m->add_option("--seed", mx.seed, "Seed recorded in the runs");
    m->add_option("--schedule", mx.schedule, "Epoch schedule");
    m->add_option("--collocation", mx.collocation, "Collocation points")->check(CLI::Range(2, 1000000));
    m->add_option("--dt", mx.dt, "Ground-truth step for evaluation");
    m->add_option("--out", mx.out, "Matrix JSON");
    m->add_option("--report", mx.report, "Report JSON to append to");

    PlotArgs pl;
    auto* p = app.add_subcommand("plot", "Ground truth against prediction as SVG and CSV");
    p->add_option("--data", pl.data, "Dataset CSV")->required();
    p->add_option("--ckpt", pl.ckpt, "Checkpoint")->required();
    p->add_option("--out", pl.out, "SVG path");
    p->add_option("--csv", pl.csv, "Companion CSV path (defaults next to the SVG)");
    p->add_flag("--csv-only", pl.csv_only, "Skip the SVG");
    p->add_option("--t-min", pl.t_min, "Window start");
    p->add_option("--t-max", pl.t_max, "Window end");

    InverseArgs inv;
    auto* i = app.add_subcommand("inverse", "Estimate R, L or C jointly with the network");
    i->add_option("--data", inv.data, "Labelled dataset CSV")->required();
    i->add_option("--class", inv.cls, "Circuit class")->required()->check(positive_class);
    i->add_option("--free", inv.free, "Free parameters (R, L, C)");
    i->add_option("--init", inv.init, "Initial guesses as NAME=VALUE");
    i->add_option("--neurons", inv.neurons, "Fourier neurons")->check(CLI::PositiveNumber);
    i->add_option("--seed", inv.seed, "Seed for the network init");
    i->add_option("--schedule", inv.schedule, "Epoch schedule");
    i->add_option("--phi-lr", inv.phi_lr, "Relative ADAM rate of the free parameters");
    i->add_option("--warm-start", inv.warm, "Fourier checkpoint to start from");
    i->add_option("--out", inv.out, "Result JSON");

    for (auto* sub : app.get_subcommands({})) sub->configurable();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    int code = kOk;
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& err) {
        const int rc = app.exit(err);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (!workdir.empty()) {
            ctx.workdir = workdir;
            fs::create_directories(ctx.workdir);
        }
        if (s->parsed()) code = cmd_simulate(sim, ctx);
        else if (d->parsed()) code = cmd_derive_ode(der, ctx);
        else if (t->parsed()) code = cmd_train(tr, ctx);
        else if (f->parsed()) code = cmd_finetune(ft, ctx);
        else if (e->parsed()) code = cmd_evaluate(ev, ctx);
        else if (c->parsed()) code = cmd_compare(cmp, ctx);
        else if (m->parsed()) code = cmd_matrix(mx, ctx);
        else if (p->parsed()) code = cmd_plot(pl, ctx);
        else if (i->parsed()) code = cmd_inverse(inv, ctx);
    } catch (const std::exception& err) {
        code = exit_code_for(err);
        std::cerr << "rlcnet: " << kind_for(err, code) << ": " << err.what() << '\n';
    }
    try {
        update_manifest(ctx, args, code);
    } catch (const std::exception& err) {
        std::cerr << "rlcnet: could not update manifest: " << err.what() << '\n';
    }
    return code;
}

}  // namespace rlcnet::cli
