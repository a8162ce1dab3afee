#pragma once

// Ground-truth generation: companion-form RK4 for stable circuits and the
// periodic steady state for equations whose homogeneous part is unstable.

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "rlcnet/circuit.hpp"
#include "rlcnet/dataset.hpp"

namespace rlcnet {

/// First-order form of a LinearOde with states (I, I', ..., I^(n-1)).
struct CompanionSystem {
    std::vector<double> a;  // lhs[k] / lhs[n], k < n
    std::vector<double> g;  // forcing[k] / lhs[n]
    SourceWaveform source;

    int order() const { return static_cast<int>(a.size()); }

    /// u(t) / lhs[n], the input routed into the top derivative state.
    double input(double t) const;

    void derivative(double t, std::span<const double> x, std::span<double> dx) const;
};

CompanionSystem to_companion(const LinearOde& ode, const SourceWaveform& source);

struct Trajectory {
    Dataset data;                     // samples of the first state (the load current)
    std::vector<double> final_state;  // full state at t1
};

/// Classical fixed-step RK4. Samples land on t0, t0 + dt, ...; the last step
/// is shortened so the final sample is exactly t1. Throws DivergenceError on
/// a non-finite state.
Trajectory integrate_rk4(const CompanionSystem& sys, std::span<const double> x0, double t0, double t1,
                         double dt);

/// Sample grid used by both generators.
std::vector<double> time_grid(double t0, double t1, double dt);

/// True when every root of the characteristic polynomial has a negative real part.
bool is_asymptotically_stable(const LinearOde& ode);

/// G(s) / A(s) at s = j*omega.
std::complex<double> frequency_response(const LinearOde& ode, double omega);

/// k-th derivative of the periodic particular solution driven by `source`.
double steady_state_derivative(const LinearOde& ode, const SourceWaveform& source, int k, double t);

enum class Generator { Auto, Rk4, SteadyState };

Generator generator_from_name(const std::string& name);
std::string generator_name(Generator g);

struct GroundTruth {
    Dataset data;
    std::vector<double> initial_state;  // derivatives 0..n-1 of I at the first boundary
    std::vector<double> final_state;
};

/// Runs the circuit over back-to-back intervals [boundaries[0], boundaries[1]],
/// [boundaries[1], boundaries[2]], ... with each run continuing from the final
/// state of the previous one; shared boundary samples appear once.
///
/// Auto picks RK4 from `x0` (rest when empty) for stable equations and the
/// steady state otherwise. The generator actually used is recorded in
/// data.meta.generator.
GroundTruth simulate(const LinearOde& ode, const SourceWaveform& source, std::span<const double> boundaries,
                     double dt, Generator generator = Generator::Auto, std::span<const double> x0 = {});

/// simulate() for a circuit class with metadata filled in.
GroundTruth simulate_circuit(CircuitClass c, const CircuitParams& phi, std::span<const double> boundaries,
                             double dt, Generator generator = Generator::Auto);

}  // namespace rlcnet
