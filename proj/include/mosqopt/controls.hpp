#pragma once

#include <array>
#include <string>
#include <vector>

namespace mosqopt {

enum class InterventionKind {
    Larvicide,           // pulse of extra larval mortality
    Adulticide,          // pulse of extra adult mortality
    HabitatElimination,  // carrying-capacity knockdown with exponential recovery
};

const char* to_string(InterventionKind kind);

// One scheduled control action. `timing` is the onset day; for pulses
// `efficacy` is the added per-day mortality at full strength and `duration`
// the dwell time; for habitat work `efficacy` is the fraction of baseline
// capacity removed at onset and `recovery_days` the exponential return time.
struct Intervention {
    InterventionKind kind = InterventionKind::Larvicide;
    double timing_days = 0.0;
    bool free_timing = true;                  // optimizer may move it
    double bounds_lo_days = 0.0;
    double bounds_hi_days = 0.0;
    double efficacy = 0.0;                    // per day (pulses) or fraction (habitat)
    double duration_days = 0.0;               // pulses only
    double recovery_days = 0.0;               // habitat only
    double edge_sharpness_per_day = 12.0;     // sigmoid steepness of on/off edges
    std::string label;                        // optional, for reports
};

struct ControlSchedule {
    std::vector<Intervention> interventions;

    std::vector<std::size_t> free_indices() const;
    std::vector<double> free_timings() const;
    void set_free_timings(const std::vector<double>& timings);
    std::vector<std::array<double, 2>> free_bounds() const;
};

// Two-sided logistic bump: sigma(k(t-p)) * sigma(k(p+D-t)). Smoothly ~0
// outside [p, p+D], ~1 deep inside; every timing derivative stays well
// defined, which is what the gradient machinery needs.
double smooth_pulse(double t, double onset, double duration, double sharpness);

// d(smooth_pulse)/d(onset); equals -d/dt, the bump just translates.
double smooth_pulse_donset(double t, double onset, double duration, double sharpness);

// Sum of efficacy-weighted pulses over the interventions of one kind.
double induced_mortality(const ControlSchedule& schedule, InterventionKind kind, double t);

// Capacity removed by one habitat intervention at time t:
//   efficacy * c0 * sigma(k(t-p)) * exp(-(t-p)/recovery)
double habitat_delta(const Intervention& iv, double c0, double t);

// d(habitat_delta)/d(onset)
double habitat_delta_donset(const Intervention& iv, double c0, double t);

// Seasonal habitat multiplier alpha(t): piecewise-linear samples (t, alpha),
// clamped at the ends; empty means identically 1.
struct AlphaSeries {
    std::vector<std::array<double, 2>> samples;
};

double alpha_at(const AlphaSeries& alpha, double t);

struct CarryingCapacityModel {
    double c0 = 0.0;                         // baseline larval capacity
    AlphaSeries alpha;                       // seasonal availability multiplier
    double capacity_floor_fraction = 1e-6;   // C(t) <= floor*c0 is treated as infeasible
};

// C(t) = (c0 - sum of habitat deltas) * alpha(t). Elimination effects add
// before the seasonal multiplier. The floor is checked by the caller across
// its evaluation grid (a smooth trajectory needs C bounded away from zero).
double carrying_capacity(const CarryingCapacityModel& model, const ControlSchedule& schedule,
                         double t);

// Kind-specific sanity checks. Bounds are checked for free timings only
// (committed/fixed actions may legitimately predate a rolling window); whether
// bounds fit the season is the scenario loader's concern. Throws ConfigError
// with `label` as context.
void validate_intervention(const Intervention& iv, const std::string& label);

}  // namespace mosqopt
