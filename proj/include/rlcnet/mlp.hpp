#pragma once

// Fully connected tanh network used as the PINN baseline. Time derivatives
// come from truncated Taylor jets pushed through the layers; parameter
// gradients of jet-dependent losses from a reverse sweep over the same jets.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rlcnet/model_meta.hpp"

namespace rlcnet {

/// Taylor coefficients c_0..c_d of a scalar function around a point. The
/// n-th derivative is n! * c_n.
struct TaylorJet {
    std::vector<double> coeffs;

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    double derivative(int n) const;
};

/// Intermediate jets kept by Mlp::derivatives for the reverse sweep.
struct MlpTape {
    int degree = 0;
    Eigen::Index points = 0;
    // Per layer, (degree + 1) coefficient blocks of `points` columns side by
    // side: inputs[l] feeds layer l, pre[l] is its affine output.
    std::vector<Eigen::MatrixXd> inputs;
    std::vector<Eigen::MatrixXd> pre;
};

class Mlp {
public:
    static constexpr int kMaxJetDegree = 4;
    static constexpr int kDefaultWidth = 50;
    static constexpr int kMaxHiddenLayers = 5;

    Mlp() = default;
    /// weights[l] is fan_out x fan_in.
    Mlp(std::vector<Eigen::MatrixXd> weights, std::vector<Eigen::VectorXd> biases);

    /// Layer sizes [1, width x hidden, 1], Glorot-uniform weights, zero biases.
    static Mlp init(int hidden_layers, std::uint64_t seed, int width = kDefaultWidth);

    std::vector<int> layer_sizes() const;
    int hidden_layers() const { return static_cast<int>(weights_.size()) - 1; }
    std::size_t param_count() const;

    const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
    const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

    /// Flat layout: per layer, the weight matrix in column-major order, then its bias.
    std::vector<double> params() const;
    void set_params(std::span<const double> flat);

    double eval(double t) const;

    /// Jet of the output at t, seeded with (t, 1, 0, ...).
    TaylorJet jet_eval(double t, int degree) const;

    /// Derivatives of orders 0..degree at every time, as a (degree + 1) x M
    /// matrix. Fills `tape` for a later backward().
    Eigen::MatrixXd derivatives(std::span<const double> times, int degree, MlpTape* tape = nullptr) const;

    /// Gradient of sum(adjoint .* derivatives) over the flat parameters.
    std::vector<double> backward(const MlpTape& tape, const Eigen::MatrixXd& adjoint) const;

    bool operator==(const Mlp& other) const;

private:
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
};

inline std::size_t count_params(const Mlp& mlp) { return mlp.param_count(); }

struct MlpCheckpoint {
    Mlp mlp;
    ModelMeta meta;
};

inline constexpr int kMlpCheckpointVersion = 1;

nlohmann::json checkpoint_json(const Mlp& mlp, const ModelMeta& meta);
MlpCheckpoint mlp_checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const Mlp& mlp, const ModelMeta& meta, const std::filesystem::path& path);
MlpCheckpoint load_mlp_checkpoint(const std::filesystem::path& path);

}  // namespace rlcnet
