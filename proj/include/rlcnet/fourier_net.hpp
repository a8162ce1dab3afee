#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rlcnet/model_meta.hpp"

namespace rlcnet {

/// Shallow Fourier network with cosine activation:
///
///     I(t) = alpha0 + sum_k lambda_k * cos(W_k * t + b_k)
///
/// The flat parameter layout used by the Jacobian, the gradients and the
/// optimizer is [W_0..W_{N-1}, b_0..b_{N-1}, lambda_0..lambda_{N-1}, alpha0].
class FourierNet {
public:
    static constexpr int kMaxDerivativeOrder = 4;

    FourierNet() = default;
    FourierNet(std::vector<double> W, std::vector<double> b, std::vector<double> lambda, double alpha0);

    /// Phases and offset start at zero, W_k ~ N(0, 5) and
    /// lambda_k ~ N(0, 0.9703 / N), all drawn from Rng(seed).
    static FourierNet init(std::size_t neurons, std::uint64_t seed);

    std::size_t neurons() const { return W_.size(); }
    std::size_t param_count() const { return 3 * neurons() + 1; }

    const std::vector<double>& W() const { return W_; }
    const std::vector<double>& b() const { return b_; }
    const std::vector<double>& lambda() const { return lambda_; }
    double alpha0() const { return alpha0_; }

    std::vector<double> params() const;
    void set_params(std::span<const double> flat);

    double eval(double t) const;

    /// Closed-form n-th time derivative, 0 <= n <= 4.
    double derivative(int n, double t) const;

    /// Derivatives of orders 0..max_order at t in one pass.
    std::vector<double> derivative_stack(double t, int max_order) const;

    /// d(derivative(n, t)) / d(theta) in the flat parameter layout.
    std::vector<double> param_jacobian(int n, double t) const;

    /// grad += scale * sum_k weights[k] * d(derivative(k, t)) / d(theta).
    /// weights.size() - 1 is the highest order touched.
    void accumulate_jacobian(std::span<const double> weights, double t, double scale,
                             std::span<double> grad) const;

    bool operator==(const FourierNet&) const = default;

private:
    std::vector<double> W_;
    std::vector<double> b_;
    std::vector<double> lambda_;
    double alpha0_ = 0.0;
};

inline std::size_t count_params(const FourierNet& net) { return net.param_count(); }

struct FourierCheckpoint {
    FourierNet net;
    ModelMeta meta;
};

inline constexpr int kFourierCheckpointVersion = 1;

void save_checkpoint(const FourierNet& net, const ModelMeta& meta, const std::filesystem::path& path);
FourierCheckpoint load_fourier_checkpoint(const std::filesystem::path& path);

nlohmann::json checkpoint_json(const FourierNet& net, const ModelMeta& meta);
FourierCheckpoint fourier_checkpoint_from_json(const nlohmann::json& j);

}  // namespace rlcnet
