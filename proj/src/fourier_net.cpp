#include "rlcnet/fourier_net.hpp"

#include <cmath>

#include "rlcnet/error.hpp"
#include "rlcnet/io.hpp"
#include "rlcnet/random.hpp"

namespace rlcnet {

namespace {

void check_order(int n)
{
    if (n < 0 || n > FourierNet::kMaxDerivativeOrder) {
        throw InvalidArgument("derivative order must be in [0, 4], got " + std::to_string(n));
    }
}

// d^k/dphi^k cos(phi) cycles through cos, -sin, -cos, sin.
inline double cos_cycle(int k, double c, double s)
{
    switch (k & 3) {
    case 0: return c;
    case 1: return -s;
    case 2: return -c;
    default: return s;
    }
}

}  // namespace

FourierNet::FourierNet(std::vector<double> W, std::vector<double> b, std::vector<double> lambda,
                       double alpha0)
    : W_(std::move(W)), b_(std::move(b)), lambda_(std::move(lambda)), alpha0_(alpha0)
{
    if (W_.size() != b_.size() || W_.size() != lambda_.size()) {
        throw InvalidArgument("FourierNet parameter groups have different sizes");
    }
}

FourierNet FourierNet::init(std::size_t neurons, std::uint64_t seed)
{
    if (neurons == 0) {
        throw InvalidArgument("FourierNet needs at least one neuron");
    }
    Rng rng(seed);
    const double w_std = std::sqrt(5.0);
    const double lambda_std = std::sqrt(0.9703 / static_cast<double>(neurons));
    std::vector<double> W(neurons), lambda(neurons);
    for (auto& w : W) w = rng.normal(0.0, w_std);
    for (auto& l : lambda) l = rng.normal(0.0, lambda_std);
    return FourierNet(std::move(W), std::vector<double>(neurons, 0.0), std::move(lambda), 0.0);
}

std::vector<double> FourierNet::params() const
{
    std::vector<double> flat;
    flat.reserve(param_count());
    flat.insert(flat.end(), W_.begin(), W_.end());
    flat.insert(flat.end(), b_.begin(), b_.end());
    flat.insert(flat.end(), lambda_.begin(), lambda_.end());
    flat.push_back(alpha0_);
    return flat;
}

void FourierNet::set_params(std::span<const double> flat)
{
    if (flat.size() != param_count()) {
        throw InvalidArgument("parameter vector has " + std::to_string(flat.size()) +
                              " entries, FourierNet expects " + std::to_string(param_count()));
    }
    const std::size_t n = neurons();
    std::copy_n(flat.begin(), n, W_.begin());
    std::copy_n(flat.begin() + n, n, b_.begin());
    std::copy_n(flat.begin() + 2 * n, n, lambda_.begin());
    alpha0_ = flat[3 * n];
}

double FourierNet::eval(double t) const
{
    double sum = alpha0_;
    for (std::size_t k = 0; k < neurons(); ++k) {
        sum += lambda_[k] * std::cos(W_[k] * t + b_[k]);
    }
    return sum;
}

double FourierNet::derivative(int n, double t) const
{
    check_order(n);
    if (n == 0) return eval(t);

    double sum = 0.0;
    if (n % 2 == 0) {
        for (std::size_t k = 0; k < neurons(); ++k) {
            sum += lambda_[k] * std::pow(W_[k], n) * std::cos(W_[k] * t + b_[k]);
        }
        return (n / 2) % 2 == 0 ? sum : -sum;
    }
    for (std::size_t k = 0; k < neurons(); ++k) {
        sum += lambda_[k] * std::pow(W_[k], n) * std::sin(W_[k] * t + b_[k]);
    }
    return ((n + 1) / 2) % 2 == 0 ? sum : -sum;
}

std::vector<double> FourierNet::derivative_stack(double t, int max_order) const
{
    check_order(max_order);
    std::vector<double> stack(static_cast<std::size_t>(max_order) + 1, 0.0);
    stack[0] = alpha0_;
    for (std::size_t k = 0; k < neurons(); ++k) {
        const double phase = W_[k] * t + b_[k];
        const double c = std::cos(phase), s = std::sin(phase);
        double amp = lambda_[k];
        for (int n = 0; n <= max_order; ++n) {
            stack[n] += amp * cos_cycle(n, c, s);
            amp *= W_[k];
        }
    }
    return stack;
}

std::vector<double> FourierNet::param_jacobian(int n, double t) const
{
    check_order(n);
    std::vector<double> weights(static_cast<std::size_t>(n) + 1, 0.0);
    weights[n] = 1.0;
    std::vector<double> jac(param_count(), 0.0);
    accumulate_jacobian(weights, t, 1.0, jac);
    return jac;
}

void FourierNet::accumulate_jacobian(std::span<const double> weights, double t, double scale,
                                     std::span<double> grad) const
{
    if (weights.empty()) return;
    const int max_order = static_cast<int>(weights.size()) - 1;
    check_order(max_order);
    if (grad.size() != param_count()) {
        throw InvalidArgument("gradient buffer does not match the parameter count");
    }
    const std::size_t n = neurons();
    for (std::size_t k = 0; k < n; ++k) {
        const double w = W_[k];
        const double phase = w * t + b_[k];
        const double c = std::cos(phase), s = std::sin(phase);
        double d_w = 0.0, d_b = 0.0, d_lambda = 0.0;
        double w_pow = 1.0;       // w^order
        double w_pow_prev = 0.0;  // w^(order-1)
        for (int order = 0; order <= max_order; ++order) {
            const double a = weights[order];
            if (a != 0.0) {
                const double trig = cos_cycle(order, c, s);
                const double trig_shift = cos_cycle(order + 1, c, s);
                d_lambda += a * w_pow * trig;
                d_b += a * w_pow * trig_shift;
                d_w += a * (order * w_pow_prev * trig + t * w_pow * trig_shift);
            }
            w_pow_prev = w_pow;
            w_pow *= w;
        }
        grad[k] += scale * lambda_[k] * d_w;
        grad[n + k] += scale * lambda_[k] * d_b;
        grad[2 * n + k] += scale * d_lambda;
    }
    grad[3 * n] += scale * weights[0];
}

nlohmann::json checkpoint_json(const FourierNet& net, const ModelMeta& meta)
{
    return nlohmann::json{{"version", kFourierCheckpointVersion},
                          {"family", "fourier"},
                          {"N", net.neurons()},
                          {"W", net.W()},
                          {"b", net.b()},
                          {"lambda", net.lambda()},
                          {"alpha0", net.alpha0()},
                          {"meta", meta}};
}

FourierCheckpoint fourier_checkpoint_from_json(const nlohmann::json& j)
{
    try {
        const int version = j.at("version").get<int>();
        if (version != kFourierCheckpointVersion) {
            throw ParseError("unsupported Fourier checkpoint version " + std::to_string(version));
        }
        const auto n = j.at("N").get<std::size_t>();
        FourierNet net(j.at("W").get<std::vector<double>>(), j.at("b").get<std::vector<double>>(),
                       j.at("lambda").get<std::vector<double>>(), j.at("alpha0").get<double>());
        if (net.neurons() != n) {
            throw ParseError("checkpoint N does not match the stored parameter arrays");
        }
        ModelMeta meta = j.contains("meta") ? j.at("meta").get<ModelMeta>() : ModelMeta{};
        return {std::move(net), std::move(meta)};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("corrupt Fourier checkpoint: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("corrupt Fourier checkpoint: ") + e.what());
    }
}

void save_checkpoint(const FourierNet& net, const ModelMeta& meta, const std::filesystem::path& path)
{
    write_json_file(path, checkpoint_json(net, meta));
}

FourierCheckpoint load_fourier_checkpoint(const std::filesystem::path& path)
{
    return fourier_checkpoint_from_json(read_json_file(path));
}

}  // namespace rlcnet
