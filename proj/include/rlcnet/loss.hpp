#pragma once

// Physics-informed losses shared by both model families.
//
// Every loss here is a function of model time derivatives at a fixed set of
// points: labelled data points (order 0), collocation points (orders
// 0..n) and the initial time (orders 0..n-1). LossProblem turns a table of
// those derivatives into the loss and its adjoint; each model family then
// maps the adjoint back onto its own parameters.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rlcnet/circuit.hpp"
#include "rlcnet/fourier_net.hpp"
#include "rlcnet/mlp.hpp"

namespace rlcnet {

/// Derivatives 0..order-1 of I at t0.
struct InitialConditions {
    double t0 = 0.0;
    std::vector<double> values;
};

struct LossWeights {
    double data = 1.0;
    double pde = 1.0;
    double ic = 1.0;
};

struct DataBlock {
    std::vector<double> times;
    std::vector<double> targets;
};

struct LossConfig {
    LossWeights weights;
    std::vector<double> collocation;
    std::optional<DataBlock> data;  // absent for data-free fine-tuning
    InitialConditions ic;
};

struct LossBreakdown {
    double total = 0.0;
    double data = 0.0;
    double pde = 0.0;
    double ic = 0.0;
};

/// sum_k lhs[k] * stack[k] - sum_k forcing[k] * V^(k)(t), where stack holds
/// model derivatives of orders 0, 1, ...
double residual(std::span<const double> stack, const LinearOde& ode, const SourceWaveform& source, double t);
double residual(const FourierNet& net, const LinearOde& ode, const SourceWaveform& source, double t);

class LossProblem {
public:
    LossProblem(LossConfig config, LinearOde ode, SourceWaveform source);

    const LossConfig& config() const { return config_; }
    const LinearOde& ode() const { return ode_; }
    const SourceWaveform& source() const { return source_; }

    /// Replaces the lhs coefficients; used by inverse fits as R, L, C move.
    void set_ode(LinearOde ode);

    /// All evaluation times: data points, then collocation points, then t0.
    const std::vector<double>& times() const { return times_; }
    int max_order() const { return ode_.order(); }

    /// `derivs` is (max_order + 1) x times().size(). When `adjoint` is given
    /// it receives d(total)/d(derivs) with the same shape.
    LossBreakdown evaluate(const Eigen::MatrixXd& derivs, Eigen::MatrixXd* adjoint = nullptr) const;

    /// Residuals at the collocation points.
    std::vector<double> residuals(const Eigen::MatrixXd& derivs) const;

    /// d(total)/d(p) for p in `free`, with `lhs_partials[i]` = d(lhs)/d(free[i]).
    std::vector<double> lhs_gradient(const Eigen::MatrixXd& derivs,
                                     const std::vector<std::vector<double>>& lhs_partials) const;

private:
    std::size_t data_count() const { return config_.data ? config_.data->times.size() : 0; }

    LossConfig config_;
    LinearOde ode_;
    SourceWaveform source_;
    std::vector<double> times_;
    std::vector<double> forcing_;  // forcing term at each collocation point
};

/// Derivative table of a model at the problem's times.
Eigen::MatrixXd derivative_table(const FourierNet& net, const LossProblem& problem);
Eigen::MatrixXd derivative_table(const Mlp& mlp, const LossProblem& problem, MlpTape* tape = nullptr);

LossBreakdown total_loss(const FourierNet& net, const LossProblem& problem);
LossBreakdown total_loss(const Mlp& mlp, const LossProblem& problem);

/// Loss and its exact gradient in the model's flat parameter layout.
LossBreakdown loss_gradient(const FourierNet& net, const LossProblem& problem, std::vector<double>& grad);
LossBreakdown loss_gradient(const Mlp& mlp, const LossProblem& problem, std::vector<double>& grad);

inline LossBreakdown loss_gradient_fourier(const FourierNet& net, const LossProblem& problem,
                                           std::vector<double>& grad)
{
    return loss_gradient(net, problem, grad);
}

/// Gradient of the loss over the free physical parameters of a circuit class.
std::vector<double> phi_gradient(const FourierNet& net, const LossProblem& problem, CircuitClass c,
                                 const CircuitParams& phi, std::span<const PhysicalParam> free);

/// Per-epoch loss history, written as `epoch,lr,total,l_data,l_pde,l_ic`.
struct EpochRecord {
    long epoch = 0;
    double lr = 0.0;
    LossBreakdown loss;
};

std::string format_epoch_log(std::span<const EpochRecord> records);
void write_epoch_log(std::span<const EpochRecord> records, const std::filesystem::path& path);

}  // namespace rlcnet
