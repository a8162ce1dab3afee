#include "rlcnet/simulator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "rlcnet/error.hpp"

namespace rlcnet {

double CompanionSystem::input(double t) const
{
    double u = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g[k] != 0.0) u += g[k] * source_derivative(source, static_cast<int>(k), t);
    }
    return u;
}

void CompanionSystem::derivative(double t, std::span<const double> x, std::span<double> dx) const
{
    const int n = order();
    double top = input(t);
    for (int k = 0; k < n; ++k) {
        top -= a[k] * x[k];
        if (k + 1 < n) dx[k] = x[k + 1];
    }
    dx[n - 1] = top;
}

CompanionSystem to_companion(const LinearOde& ode, const SourceWaveform& source)
{
    ode.validate();
    const int n = ode.order();
    if (n < 1) {
        throw InvalidArgument("companion form needs an ODE of order >= 1");
    }
    const double lead = ode.lhs[n];
    CompanionSystem sys;
    sys.source = source;
    sys.a.resize(n);
    for (int k = 0; k < n; ++k) sys.a[k] = ode.lhs[k] / lead;
    sys.g.resize(ode.forcing.size());
    for (std::size_t k = 0; k < ode.forcing.size(); ++k) sys.g[k] = ode.forcing[k] / lead;
    return sys;
}

std::vector<double> time_grid(double t0, double t1, double dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidArgument("time step must be finite and > 0");
    }
    if (!(t1 > t0)) {
        throw InvalidArgument("interval end must be greater than its start");
    }
    const double span = t1 - t0;
    const auto full_steps = static_cast<long>(std::floor(span / dt + 1e-9));
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(full_steps) + 2);
    for (long k = 0; k <= full_steps; ++k) {
        grid.push_back(t0 + static_cast<double>(k) * dt);
    }
    if (std::abs(grid.back() - t1) <= 1e-9 * dt) {
        grid.back() = t1;
    } else {
        grid.push_back(t1);
    }
    return grid;
}

Trajectory integrate_rk4(const CompanionSystem& sys, std::span<const double> x0, double t0, double t1,
                         double dt)
{
    const int n = sys.order();
    if (static_cast<int>(x0.size()) != n) {
        throw InvalidArgument("initial state has " + std::to_string(x0.size()) + " entries, system order is " +
                              std::to_string(n));
    }
    const auto grid = time_grid(t0, t1, dt);

    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

    Trajectory out;
    out.data.times = grid;
    out.data.values.reserve(grid.size());
    out.data.values.push_back(x[0]);

    for (std::size_t step = 1; step < grid.size(); ++step) {
        const double t = grid[step - 1];
        const double h = grid[step] - t;
        sys.derivative(t, x, k1);
        for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
        sys.derivative(t + 0.5 * h, tmp, k2);
        for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
        sys.derivative(t + 0.5 * h, tmp, k3);
        for (int i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
        sys.derivative(t + h, tmp, k4);
        for (int i = 0; i < n; ++i) {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (!std::isfinite(x[i])) {
                throw DivergenceError("RK4 state became non-finite at t = " + std::to_string(grid[step]));
            }
        }
        out.data.values.push_back(x[0]);
    }
    out.final_state = std::move(x);
    out.data.meta.t0 = t0;
    out.data.meta.t1 = t1;
    out.data.meta.dt = dt;
    out.data.meta.generator = "rk4";
    return out;
}

bool is_asymptotically_stable(const LinearOde& ode)
{
    ode.validate();
    const int n = ode.order();
    if (n == 0) return true;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) companion(i, i + 1) = 1.0;
    for (int k = 0; k < n; ++k) companion(n - 1, k) = -ode.lhs[k] / ode.lhs[n];
    const Eigen::VectorXcd roots = companion.eigenvalues();
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        if (roots[i].real() >= 0.0) return false;
    }
    return true;
}

namespace {

std::complex<double> poly_at(const std::vector<double>& coeffs, std::complex<double> s)
{
    std::complex<double> acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * s + *it;
    return acc;
}

}  // namespace

std::complex<double> frequency_response(const LinearOde& ode, double omega)
{
    const std::complex<double> s(0.0, omega);
    const auto denominator = poly_at(ode.lhs, s);
    if (std::abs(denominator) == 0.0) {
        throw InvalidArgument("source frequency coincides with a natural frequency of the ODE");
    }
    return poly_at(ode.forcing, s) / denominator;
}

double steady_state_derivative(const LinearOde& ode, const SourceWaveform& source, int k, double t)
{
    // V(t) = Im(vmax e^{j w t}); the response to e^{j w t} is H(jw) e^{j w t}.
    const std::complex<double> jw(0.0, source.omega);
    const auto h = frequency_response(ode, source.omega);
    const auto phasor = h * std::pow(jw, k) * source.vmax * std::exp(jw * t);
    return phasor.imag();
}

Generator generator_from_name(const std::string& name)
{
    if (name == "auto") return Generator::Auto;
    if (name == "rk4") return Generator::Rk4;
    if (name == "steady-state") return Generator::SteadyState;
    throw InvalidArgument("unknown generator '" + name + "' (expected auto, rk4 or steady-state)");
}

std::string generator_name(Generator g)
{
    switch (g) {
    case Generator::Auto: return "auto";
    case Generator::Rk4: return "rk4";
    case Generator::SteadyState: return "steady-state";
    }
    return "?";
}

GroundTruth simulate(const LinearOde& ode, const SourceWaveform& source, std::span<const double> boundaries,
                     double dt, Generator generator, std::span<const double> x0)
{
    ode.validate();
    if (boundaries.size() < 2) {
        throw InvalidArgument("simulation needs at least one interval");
    }
    const int n = ode.order();
    if (generator == Generator::Auto) {
        generator = is_asymptotically_stable(ode) ? Generator::Rk4 : Generator::SteadyState;
    }

    GroundTruth out;
    out.data.meta.t0 = boundaries.front();
    out.data.meta.t1 = boundaries.back();
    out.data.meta.dt = dt;
    out.data.meta.generator = generator_name(generator);

    if (generator == Generator::SteadyState) {
        for (std::size_t i = 0; i + 1 < boundaries.size(); ++i) {
            auto grid = time_grid(boundaries[i], boundaries[i + 1], dt);
            for (std::size_t j = (i == 0 ? 0 : 1); j < grid.size(); ++j) {
                out.data.times.push_back(grid[j]);
                out.data.values.push_back(steady_state_derivative(ode, source, 0, grid[j]));
            }
        }
        for (int k = 0; k < n; ++k) {
            out.initial_state.push_back(steady_state_derivative(ode, source, k, boundaries.front()));
            out.final_state.push_back(steady_state_derivative(ode, source, k, boundaries.back()));
        }
        out.data.meta.initial_state = out.initial_state;
        return out;
    }

    const auto sys = to_companion(ode, source);
    std::vector<double> state(x0.begin(), x0.end());
    if (state.empty()) state.assign(static_cast<std::size_t>(n), 0.0);
    out.initial_state = state;
    out.data.meta.initial_state = state;
    for (std::size_t i = 0; i + 1 < boundaries.size(); ++i) {
        auto run = integrate_rk4(sys, state, boundaries[i], boundaries[i + 1], dt);
        const std::size_t first = (i == 0 ? 0 : 1);
        out.data.times.insert(out.data.times.end(), run.data.times.begin() + first, run.data.times.end());
        out.data.values.insert(out.data.values.end(), run.data.values.begin() + first, run.data.values.end());
        state = std::move(run.final_state);
    }
    out.final_state = std::move(state);
    return out;
}

GroundTruth simulate_circuit(CircuitClass c, const CircuitParams& phi, std::span<const double> boundaries,
                             double dt, Generator generator)
{
    phi.validate();
    auto truth = simulate(ode_for_class(c, phi), SourceWaveform::from(phi), boundaries, dt, generator);
    truth.data.meta.circuit_class = c;
    truth.data.meta.phi = phi;
    return truth;
}

}  // namespace rlcnet
