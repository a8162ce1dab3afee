#include "rlcnet/circuit.hpp"

#include <cmath>
#include <numbers>

#include "rlcnet/error.hpp"

namespace rlcnet {

int class_index(CircuitClass c) { return static_cast<int>(c); }

CircuitClass class_from_index(int index)
{
    if (index < 1 || index > 3) {
        throw InvalidArgument("circuit class must be 1, 2 or 3, got " + std::to_string(index));
    }
    return static_cast<CircuitClass>(index);
}

void CircuitParams::validate() const
{
    const std::array<std::pair<const char*, double>, 5> fields = {
        {{"R", R}, {"L", L}, {"C", C}, {"Vmax", Vmax}, {"f", f}}};
    for (const auto& [key, value] : fields) {
        if (!std::isfinite(value) || value <= 0.0) {
            throw InvalidArgument(std::string("circuit parameter ") + key +
                                  " must be finite and > 0, got " + std::to_string(value));
        }
    }
}

double get(const CircuitParams& phi, PhysicalParam which)
{
    switch (which) {
    case PhysicalParam::R: return phi.R;
    case PhysicalParam::L: return phi.L;
    case PhysicalParam::C: return phi.C;
    }
    return 0.0;
}

void set(CircuitParams& phi, PhysicalParam which, double value)
{
    switch (which) {
    case PhysicalParam::R: phi.R = value; break;
    case PhysicalParam::L: phi.L = value; break;
    case PhysicalParam::C: phi.C = value; break;
    }
}

std::string_view name(PhysicalParam which)
{
    switch (which) {
    case PhysicalParam::R: return "R";
    case PhysicalParam::L: return "L";
    case PhysicalParam::C: return "C";
    }
    return "?";
}

PhysicalParam physical_param_from_name(std::string_view text)
{
    if (text == "R") return PhysicalParam::R;
    if (text == "L") return PhysicalParam::L;
    if (text == "C") return PhysicalParam::C;
    throw InvalidArgument("unknown physical parameter '" + std::string(text) + "' (expected R, L or C)");
}

SourceWaveform SourceWaveform::from(const CircuitParams& phi)
{
    return {phi.Vmax, 2.0 * std::numbers::pi * phi.f};
}

double source_derivative(const SourceWaveform& wave, int k, double t)
{
    if (k < 0) {
        throw InvalidArgument("source derivative order must be >= 0");
    }
    const double phase = wave.omega * t;
    const double scale = wave.vmax * std::pow(wave.omega, k);
    switch (k % 4) {
    case 0: return scale * std::sin(phase);
    case 1: return scale * std::cos(phase);
    case 2: return -scale * std::sin(phase);
    default: return -scale * std::cos(phase);
    }
}

void LinearOde::validate() const
{
    if (lhs.empty()) {
        throw InvalidArgument("ODE has no left-hand-side coefficients");
    }
    if (lhs.back() == 0.0) {
        throw InvalidArgument("ODE leading coefficient is zero");
    }
    for (double a : lhs) {
        if (!std::isfinite(a)) throw InvalidArgument("ODE coefficient is not finite");
    }
    for (double g : forcing) {
        if (!std::isfinite(g)) throw InvalidArgument("ODE forcing coefficient is not finite");
    }
}

LinearOde ode_for_class(CircuitClass c, const CircuitParams& phi)
{
    const double R = phi.R, L = phi.L, C = phi.C;
    switch (c) {
    case CircuitClass::Class1:
        return {{1.0 / C, R, L}, {0.0, 1.0}};
    case CircuitClass::Class2:
        return {{1.0 / C, 2.0 * R, L, R * L * C}, {0.0, 1.0}};
    case CircuitClass::Class3:
        // Printed form kept verbatim, including the missing third-order term.
        return {{R, L * L * C + 2.0 * L, 3.0 * L * C, 0.0, R * L * L * C * C}, {1.0}};
    }
    throw InvalidArgument("unknown circuit class");
}

std::vector<double> ode_lhs_partial(CircuitClass c, const CircuitParams& phi, PhysicalParam which)
{
    const double R = phi.R, L = phi.L, C = phi.C;
    using P = PhysicalParam;
    switch (c) {
    case CircuitClass::Class1:
        switch (which) {
        case P::R: return {0.0, 1.0, 0.0};
        case P::L: return {0.0, 0.0, 1.0};
        case P::C: return {-1.0 / (C * C), 0.0, 0.0};
        }
        break;
    case CircuitClass::Class2:
        switch (which) {
        case P::R: return {0.0, 2.0, 0.0, L * C};
        case P::L: return {0.0, 0.0, 1.0, R * C};
        case P::C: return {-1.0 / (C * C), 0.0, 0.0, R * L};
        }
        break;
    case CircuitClass::Class3:
        switch (which) {
        case P::R: return {1.0, 0.0, 0.0, 0.0, L * L * C * C};
        case P::L: return {0.0, 2.0 * L * C + 2.0, 3.0 * C, 0.0, 2.0 * R * L * C * C};
        case P::C: return {0.0, L * L, 3.0 * L, 0.0, 2.0 * R * L * L * C};
        }
        break;
    }
    throw InvalidArgument("unknown circuit class");
}

CircuitParams preset(CircuitClass c, PresetKind which)
{
    if (which == PresetKind::Initial) {
        switch (c) {
        case CircuitClass::Class1: return {5.0, 0.005, 0.009, 10.0, 30.0};
        case CircuitClass::Class2: return {50.0, 0.001, 0.00009, 150.0, 30.0};
        case CircuitClass::Class3: return {50.0, 0.005, 0.00006, 20.0, 30.0};
        }
    } else {
        switch (c) {
        case CircuitClass::Class1: return {10.0, 0.01, 0.0009, 15.0, 25.0};
        case CircuitClass::Class2: return {10.0, 0.0009, 0.00006, 90.0, 40.0};
        case CircuitClass::Class3: return {25.0, 0.009, 0.000065, 100.0, 60.0};
        }
    }
    throw InvalidArgument("unknown circuit class");
}

PresetKind preset_kind_from_name(std::string_view text)
{
    if (text == "initial") return PresetKind::Initial;
    if (text == "analysis") return PresetKind::Analysis;
    throw InvalidArgument("unknown preset '" + std::string(text) + "' (expected initial or analysis)");
}

void to_json(nlohmann::json& j, const CircuitParams& phi)
{
    j = nlohmann::json{{"R", phi.R}, {"L", phi.L}, {"C", phi.C}, {"Vmax", phi.Vmax}, {"f", phi.f}};
}

void from_json(const nlohmann::json& j, CircuitParams& phi)
{
    phi.R = j.at("R").get<double>();
    phi.L = j.at("L").get<double>();
    phi.C = j.at("C").get<double>();
    phi.Vmax = j.at("Vmax").get<double>();
    phi.f = j.at("f").get<double>();
}

void to_json(nlohmann::json& j, const LinearOde& ode)
{
    j = nlohmann::json{{"order", ode.order()}, {"lhs", ode.lhs}, {"forcing", ode.forcing}};
}

void from_json(const nlohmann::json& j, LinearOde& ode)
{
    ode.lhs = j.at("lhs").get<std::vector<double>>();
    ode.forcing = j.at("forcing").get<std::vector<double>>();
    if (j.contains("order") && j.at("order").get<int>() != ode.order()) {
        throw ParseError("ODE order does not match the length of lhs");
    }
}

}  // namespace rlcnet
