#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rlcnet {

/// Moment estimates of one ADAM run. beta1, beta2 and eps default to the
/// values from the original ADAM description.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(std::size_t size = 0) : m(size, 0.0), v(size, 0.0) {}
};

/// One bias-corrected ADAM update in place. Throws DivergenceError when the
/// gradient holds a non-finite entry (params are left untouched).
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad, double lr);

/// Piecewise-constant learning rate.
struct Schedule {
    struct Segment {
        long epochs = 0;
        double lr = 0.0;
    };
    std::vector<Segment> segments;

    long total_epochs() const;

    /// Learning rate for a zero-based epoch index.
    double lr_at(long epoch) const;

    /// Throws InvalidArgument on empty schedules, non-positive lengths or rates.
    void validate() const;

    /// "300@10,300@0.001"
    std::string digest() const;
    static Schedule parse(const std::string& digest);
};

enum class ScheduleRole { SourceFourier, FineTuneFourier, SourceBaseline, FineTuneBaseline };

Schedule schedule_for(ScheduleRole role);

}  // namespace rlcnet
