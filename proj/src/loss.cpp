#include "rlcnet/loss.hpp"

#include <cmath>
#include <sstream>

#include "rlcnet/error.hpp"
#include "rlcnet/io.hpp"

namespace rlcnet {

double residual(std::span<const double> stack, const LinearOde& ode, const SourceWaveform& source, double t)
{
    if (static_cast<int>(stack.size()) < ode.order() + 1) {
        throw InvalidArgument("model supplies derivatives up to order " + std::to_string(stack.size() - 1) +
                              ", the equation needs order " + std::to_string(ode.order()));
    }
    double r = 0.0;
    for (std::size_t k = 0; k < ode.lhs.size(); ++k) r += ode.lhs[k] * stack[k];
    for (std::size_t k = 0; k < ode.forcing.size(); ++k) {
        r -= ode.forcing[k] * source_derivative(source, static_cast<int>(k), t);
    }
    return r;
}

double residual(const FourierNet& net, const LinearOde& ode, const SourceWaveform& source, double t)
{
    if (ode.order() > FourierNet::kMaxDerivativeOrder) {
        throw InvalidArgument("equation order exceeds the model's derivative range");
    }
    return residual(net.derivative_stack(t, ode.order()), ode, source, t);
}

LossProblem::LossProblem(LossConfig config, LinearOde ode, SourceWaveform source)
    : config_(std::move(config)), source_(source)
{
    const auto& w = config_.weights;
    if (!(w.data >= 0.0 && w.pde >= 0.0 && w.ic >= 0.0)) {
        throw InvalidArgument("loss weights must be non-negative");
    }
    if (config_.collocation.empty()) {
        throw InvalidArgument("collocation set is empty");
    }
    if (config_.data) {
        if (config_.data->times.size() != config_.data->targets.size()) {
            throw InvalidArgument("data block has mismatched times and targets");
        }
        times_ = config_.data->times;
    }
    times_.insert(times_.end(), config_.collocation.begin(), config_.collocation.end());
    times_.push_back(config_.ic.t0);
    set_ode(std::move(ode));
}

void LossProblem::set_ode(LinearOde ode)
{
    ode.validate();
    if (ode.order() < 1) {
        throw InvalidArgument("physics loss needs an equation of order >= 1");
    }
    if (config_.ic.values.size() != static_cast<std::size_t>(ode.order())) {
        throw InvalidArgument("initial conditions hold " + std::to_string(config_.ic.values.size()) +
                              " values, the equation needs " + std::to_string(ode.order()));
    }
    ode_ = std::move(ode);
    forcing_.resize(config_.collocation.size());
    for (std::size_t i = 0; i < forcing_.size(); ++i) {
        const double t = config_.collocation[i];
        double g = 0.0;
        for (std::size_t k = 0; k < ode_.forcing.size(); ++k) {
            g += ode_.forcing[k] * source_derivative(source_, static_cast<int>(k), t);
        }
        forcing_[i] = g;
    }
}

LossBreakdown LossProblem::evaluate(const Eigen::MatrixXd& derivs, Eigen::MatrixXd* adjoint) const
{
    const int n = ode_.order();
    const auto D = static_cast<Eigen::Index>(data_count());
    const auto M = static_cast<Eigen::Index>(config_.collocation.size());
    if (derivs.rows() != n + 1 || derivs.cols() != static_cast<Eigen::Index>(times_.size())) {
        throw InvalidArgument("derivative table has the wrong shape");
    }
    if (adjoint) *adjoint = Eigen::MatrixXd::Zero(derivs.rows(), derivs.cols());
    const auto& w = config_.weights;
    LossBreakdown out;

    if (D > 0) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < D; ++i) {
            const double e = derivs(0, i) - config_.data->targets[i];
            sum += e * e;
            if (adjoint) (*adjoint)(0, i) = w.data * 2.0 * e / static_cast<double>(D);
        }
        out.data = sum / static_cast<double>(D);
    }

    double sum = 0.0;
    for (Eigen::Index i = 0; i < M; ++i) {
        const Eigen::Index col = D + i;
        double r = -forcing_[i];
        for (int k = 0; k <= n; ++k) r += ode_.lhs[k] * derivs(k, col);
        sum += r * r;
        if (adjoint) {
            const double s = w.pde * 2.0 * r / static_cast<double>(M);
            for (int k = 0; k <= n; ++k) (*adjoint)(k, col) = s * ode_.lhs[k];
        }
    }
    out.pde = sum / static_cast<double>(M);

    const Eigen::Index ic_col = D + M;
    sum = 0.0;
    for (int k = 0; k < n; ++k) {
        const double e = derivs(k, ic_col) - config_.ic.values[k];
        sum += e * e;
        if (adjoint) (*adjoint)(k, ic_col) = w.ic * 2.0 * e / n;
    }
    out.ic = sum / n;

    out.total = w.data * out.data + w.pde * out.pde + w.ic * out.ic;
    if (!std::isfinite(out.total)) {
        throw DivergenceError("loss became non-finite");
    }
    return out;
}

std::vector<double> LossProblem::residuals(const Eigen::MatrixXd& derivs) const
{
    const auto D = static_cast<Eigen::Index>(data_count());
    std::vector<double> r(config_.collocation.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        double v = -forcing_[i];
        for (int k = 0; k <= ode_.order(); ++k) v += ode_.lhs[k] * derivs(k, D + static_cast<Eigen::Index>(i));
        r[i] = v;
    }
    return r;
}

std::vector<double> LossProblem::lhs_gradient(const Eigen::MatrixXd& derivs,
                                              const std::vector<std::vector<double>>& lhs_partials) const
{
    const auto D = static_cast<Eigen::Index>(data_count());
    const auto r = residuals(derivs);
    const double scale = config_.weights.pde * 2.0 / static_cast<double>(r.size());
    std::vector<double> grad(lhs_partials.size(), 0.0);
    for (std::size_t p = 0; p < lhs_partials.size(); ++p) {
        const auto& da = lhs_partials[p];
        double g = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            double dr = 0.0;
            for (std::size_t k = 0; k < da.size(); ++k) {
                dr += da[k] * derivs(static_cast<Eigen::Index>(k), D + static_cast<Eigen::Index>(i));
            }
            g += r[i] * dr;
        }
        grad[p] = scale * g;
    }
    return grad;
}

Eigen::MatrixXd derivative_table(const FourierNet& net, const LossProblem& problem)
{
    const int n = problem.max_order();
    if (n > FourierNet::kMaxDerivativeOrder) {
        throw InvalidArgument("equation order exceeds the model's derivative range");
    }
    const auto& times = problem.times();
    Eigen::MatrixXd table(n + 1, static_cast<Eigen::Index>(times.size()));
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto stack = net.derivative_stack(times[i], n);
        for (int k = 0; k <= n; ++k) table(k, static_cast<Eigen::Index>(i)) = stack[k];
    }
    return table;
}

Eigen::MatrixXd derivative_table(const Mlp& mlp, const LossProblem& problem, MlpTape* tape)
{
    if (problem.max_order() > Mlp::kMaxJetDegree) {
        throw InvalidArgument("equation order exceeds the model's derivative range");
    }
    return mlp.derivatives(problem.times(), problem.max_order(), tape);
}

LossBreakdown total_loss(const FourierNet& net, const LossProblem& problem)
{
    return problem.evaluate(derivative_table(net, problem));
}

LossBreakdown total_loss(const Mlp& mlp, const LossProblem& problem)
{
    return problem.evaluate(derivative_table(mlp, problem));
}

LossBreakdown loss_gradient(const FourierNet& net, const LossProblem& problem, std::vector<double>& grad)
{
    const auto table = derivative_table(net, problem);
    Eigen::MatrixXd adjoint;
    const auto loss = problem.evaluate(table, &adjoint);
    grad.assign(net.param_count(), 0.0);
    const auto& times = problem.times();
    std::vector<double> weights(static_cast<std::size_t>(adjoint.rows()));
    for (std::size_t i = 0; i < times.size(); ++i) {
        bool any = false;
        for (Eigen::Index k = 0; k < adjoint.rows(); ++k) {
            weights[k] = adjoint(k, static_cast<Eigen::Index>(i));
            any = any || weights[k] != 0.0;
        }
        if (any) net.accumulate_jacobian(weights, times[i], 1.0, grad);
    }
    return loss;
}

LossBreakdown loss_gradient(const Mlp& mlp, const LossProblem& problem, std::vector<double>& grad)
{
    MlpTape tape;
    const auto table = derivative_table(mlp, problem, &tape);
    Eigen::MatrixXd adjoint;
    const auto loss = problem.evaluate(table, &adjoint);
    grad = mlp.backward(tape, adjoint);
    return loss;
}

std::vector<double> phi_gradient(const FourierNet& net, const LossProblem& problem, CircuitClass c,
                                 const CircuitParams& phi, std::span<const PhysicalParam> free)
{
    if (free.empty()) {
        throw InvalidArgument("no free physical parameters");
    }
    for (auto p : free) {
        if (!(get(phi, p) > 0.0)) {
            throw DomainError(std::string(name(p)) + " left the positive domain");
        }
    }
    std::vector<std::vector<double>> partials;
    for (auto p : free) partials.push_back(ode_lhs_partial(c, phi, p));
    return problem.lhs_gradient(derivative_table(net, problem), partials);
}

std::string format_epoch_log(std::span<const EpochRecord> records)
{
    std::ostringstream out;
    out << "epoch,lr,total,l_data,l_pde,l_ic\n";
    for (const auto& r : records) {
        out << r.epoch << ',' << format_double(r.lr) << ',' << format_double(r.loss.total) << ','
            << format_double(r.loss.data) << ',' << format_double(r.loss.pde) << ',' << format_double(r.loss.ic)
            << '\n';
    }
    return out.str();
}

void write_epoch_log(std::span<const EpochRecord> records, const std::filesystem::path& path)
{
    write_text_file(path, format_epoch_log(records));
}

}  // namespace rlcnet
