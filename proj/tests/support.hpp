#pragma once

// Reference evaluations and finite-difference helpers shared by the tests.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "rlcnet/fourier_net.hpp"
#include "rlcnet/mlp.hpp"
#include "rlcnet/random.hpp"

namespace testing {

using Wide = boost::multiprecision::cpp_bin_float_50;

/// The Fourier sum evaluated directly in 50-digit arithmetic.
inline Wide wide_eval(const rlcnet::FourierNet& net, const Wide& t)
{
    Wide sum = net.alpha0();
    for (std::size_t k = 0; k < net.neurons(); ++k) {
        sum += Wide(net.lambda()[k]) * boost::multiprecision::cos(Wide(net.W()[k]) * t + Wide(net.b()[k]));
    }
    return sum;
}

/// A plain tanh network forward pass in 50-digit arithmetic.
inline Wide wide_eval(const rlcnet::Mlp& mlp, const Wide& t)
{
    std::vector<Wide> a{t};
    const auto& Ws = mlp.weights();
    for (std::size_t l = 0; l < Ws.size(); ++l) {
        std::vector<Wide> z(static_cast<std::size_t>(Ws[l].rows()));
        for (Eigen::Index r = 0; r < Ws[l].rows(); ++r) {
            Wide s = mlp.biases()[l](r);
            for (Eigen::Index c = 0; c < Ws[l].cols(); ++c) s += Wide(Ws[l](r, c)) * a[c];
            z[r] = l + 1 < Ws.size() ? Wide(boost::multiprecision::tanh(s)) : s;
        }
        a = std::move(z);
    }
    return a[0];
}

/// Five-point central difference of order n (1..4) with step h.
template <typename F>
Wide five_point(F&& f, const Wide& t, const Wide& h, int n)
{
    const Wide m2 = f(t - 2 * h), m1 = f(t - h), z = f(t), p1 = f(t + h), p2 = f(t + 2 * h);
    switch (n) {
    case 1: return (m2 - 8 * m1 + 8 * p1 - p2) / (12 * h);
    case 2: return (-m2 + 16 * m1 - 30 * z + 16 * p1 - p2) / (12 * h * h);
    case 3: return (-m2 + 2 * m1 - 2 * p1 + p2) / (2 * h * h * h);
    default: return (m2 - 4 * m1 + 6 * z - 4 * p1 + p2) / (h * h * h * h);
    }
}

/// Central-difference gradient of f at x; each coordinate steps by
/// rel * max(1, |x_i|).
inline std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                       std::vector<double> x, double rel = 1e-6)
{
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        const double h = rel * std::max(1.0, std::abs(x0));
        x[i] = x0 + h;
        const double fp = f(x);
        x[i] = x0 - h;
        const double fm = f(x);
        x[i] = x0;
        g[i] = (fp - fm) / (2 * h);
    }
    return g;
}

/// max_i |a_i - b_i| / max_i |b_i|
inline double normwise_error(std::span<const double> a, std::span<const double> b)
{
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    return scale > 0.0 ? diff / scale : diff;
}

/// Random net with every parameter group populated (unlike init, which
/// zeroes the phases and the offset).
inline rlcnet::FourierNet random_net(rlcnet::Rng& rng, std::size_t neurons)
{
    std::vector<double> W(neurons), b(neurons), lambda(neurons);
    for (auto& w : W) w = rng.normal(0.0, std::sqrt(5.0));
    for (auto& p : b) p = rng.uniform(-M_PI, M_PI);
    for (auto& l : lambda) l = rng.normal(0.0, 1.0);
    return rlcnet::FourierNet(W, b, lambda, rng.normal(0.0, 1.0));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("rlcnet_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace testing
