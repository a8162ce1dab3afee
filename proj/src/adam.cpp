#include "rlcnet/adam.hpp"

#include <cmath>
#include <sstream>

#include "rlcnet/error.hpp"
#include "rlcnet/io.hpp"

namespace rlcnet {

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad, double lr)
{
    if (params.size() != grad.size() || state.m.size() != params.size() ||
        state.v.size() != params.size()) {
        throw InvalidArgument("ADAM: parameter, gradient and moment sizes differ");
    }
    for (double g : grad) {
        if (!std::isfinite(g)) {
            throw DivergenceError("ADAM: non-finite gradient at step " + std::to_string(state.step + 1));
        }
    }
    ++state.step;
    const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grad[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.m[i] / correction1;
        const double v_hat = state.v[i] / correction2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

long Schedule::total_epochs() const
{
    long total = 0;
    for (const auto& s : segments) total += s.epochs;
    return total;
}

double Schedule::lr_at(long epoch) const
{
    long start = 0;
    for (const auto& s : segments) {
        if (epoch < start + s.epochs) return s.lr;
        start += s.epochs;
    }
    throw InvalidArgument("epoch " + std::to_string(epoch) + " is past the end of the schedule");
}

void Schedule::validate() const
{
    if (segments.empty()) {
        throw InvalidArgument("schedule has no segments");
    }
    for (const auto& s : segments) {
        if (s.epochs <= 0 || !(s.lr > 0.0) || !std::isfinite(s.lr)) {
            throw InvalidArgument("schedule segments need epochs > 0 and a finite rate > 0");
        }
    }
}

std::string Schedule::digest() const
{
    std::string out;
    for (const auto& s : segments) {
        if (!out.empty()) out += ',';
        out += std::to_string(s.epochs) + '@' + format_double(s.lr);
    }
    return out;
}

Schedule Schedule::parse(const std::string& digest)
{
    Schedule schedule;
    std::stringstream in(digest);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto at = item.find('@');
        if (at == std::string::npos) {
            throw ParseError("schedule segment '" + item + "' is not of the form EPOCHS@LR");
        }
        try {
            schedule.segments.push_back({std::stol(item.substr(0, at)), std::stod(item.substr(at + 1))});
        } catch (const std::exception&) {
            throw ParseError("schedule segment '" + item + "' is not of the form EPOCHS@LR");
        }
    }
    schedule.validate();
    return schedule;
}

Schedule schedule_for(ScheduleRole role)
{
    switch (role) {
    case ScheduleRole::SourceFourier: return {{{300, 10.0}, {300, 1e-3}}};
    case ScheduleRole::FineTuneFourier: return {{{300, 0.1}}};
    case ScheduleRole::SourceBaseline: return {{{100000, 1e-3}}};
    case ScheduleRole::FineTuneBaseline: return {{{50000, 1e-3}}};
    }
    throw InvalidArgument("unknown schedule role");
}

}  // namespace rlcnet
