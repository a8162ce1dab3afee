#pragma once

// Circuit parameters, the three circuit-class ODEs and the sinusoidal source.

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace rlcnet {

enum class CircuitClass { Class1 = 1, Class2 = 2, Class3 = 3 };

inline constexpr std::array<CircuitClass, 3> kAllClasses = {
    CircuitClass::Class1, CircuitClass::Class2, CircuitClass::Class3};

int class_index(CircuitClass c);
CircuitClass class_from_index(int index);

/// Physical parameters of a circuit, SI units throughout.
struct CircuitParams {
    double R = 0.0;     // ohm
    double L = 0.0;     // henry
    double C = 0.0;     // farad
    double Vmax = 0.0;  // volt
    double f = 0.0;     // hertz

    /// Throws InvalidArgument unless all five fields are finite and strictly positive.
    void validate() const;

    bool operator==(const CircuitParams&) const = default;
};

/// The physical parameters an inverse fit may treat as unknown.
enum class PhysicalParam { R, L, C };

double get(const CircuitParams& phi, PhysicalParam which);
void set(CircuitParams& phi, PhysicalParam which, double value);
std::string_view name(PhysicalParam which);
PhysicalParam physical_param_from_name(std::string_view name);

/// V(t) = vmax * sin(omega * t).
struct SourceWaveform {
    double vmax = 0.0;
    double omega = 0.0;

    static SourceWaveform from(const CircuitParams& phi);
};

/// k-th time derivative of the source at t. Follows the sin, cos, -sin, -cos
/// cycle scaled by omega^k.
double source_derivative(const SourceWaveform& wave, int k, double t);

/// sum_k lhs[k] * d^k I/dt^k = sum_k forcing[k] * d^k V/dt^k
///
/// Coefficients are stored densely by derivative order, zeros included. An
/// order-0 equation is a purely algebraic relation; the circuit classes are
/// all order >= 2.
struct LinearOde {
    std::vector<double> lhs;
    std::vector<double> forcing;

    int order() const { return static_cast<int>(lhs.size()) - 1; }

    /// Throws InvalidArgument when lhs is empty, the leading coefficient is
    /// zero or any coefficient is non-finite.
    void validate() const;
};

LinearOde ode_for_class(CircuitClass c, const CircuitParams& phi);

/// d(lhs)/d(which) for ode_for_class(c, phi). The forcing coefficients do
/// not depend on R, L or C for any class.
std::vector<double> ode_lhs_partial(CircuitClass c, const CircuitParams& phi, PhysicalParam which);

enum class PresetKind { Initial, Analysis };

/// Parameter rows used by the experiments: Initial for source training,
/// Analysis for the fine-tuning targets.
CircuitParams preset(CircuitClass c, PresetKind which);

PresetKind preset_kind_from_name(std::string_view name);

void to_json(nlohmann::json& j, const CircuitParams& phi);
void from_json(const nlohmann::json& j, CircuitParams& phi);
void to_json(nlohmann::json& j, const LinearOde& ode);
void from_json(const nlohmann::json& j, LinearOde& ode);

}  // namespace rlcnet
