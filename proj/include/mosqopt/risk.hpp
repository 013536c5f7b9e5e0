#pragma once

#include <vector>

#include "mosqopt/lifecycle.hpp"

namespace mosqopt {

struct RiskCurve {
    std::vector<double> times;
    std::vector<double> r0;
    double cumulative = 0.0;  // trapezoidal integral of r0 over times
};

struct ObjectiveResult {
    double F = 0.0;            // cumulative risk, integral of R0 over the horizon
    double mean_daily_r0 = 0.0;
    double peak_r0 = 0.0;
    double peak_t = 0.0;
    RiskCurve curve;
};

// Time-dependent reproduction number, linear in the adult total:
//   R0(t) = (A/N_H) nB^2 gae^2 phi_HV phi_VH / gad * eta_H_inv / (1 + gad/gV)
// with every temperature-dependent symbol evaluated at temperature(t).
// eta_H_inv (the intrinsic incubation period, days) multiplies as printed.
double r0_at(double adult_total, double t, const EpidemiologicalParams& epi, const RateSet& rates,
             const SeasonalTemperature& profile, int start_day_of_year);

// Coefficient of A in R0 (state-independent). Zero adult mortality or zero
// EIP completion rate at that temperature is a singular-parameter error.
double d_r0_dA(double t, const EpidemiologicalParams& epi, const RateSet& rates,
               const SeasonalTemperature& profile, int start_day_of_year);

// Trapezoidal quadrature of R0 over the trajectory grid; also reports
// the mean daily value F/T and the peak.
ObjectiveResult objective(const Trajectory& traj, const ScenarioConfig& cfg);

// Same values computed against a prebuilt forcing table (hot path: the
// r0 coefficients at node times come from the table's even stage rows).
ObjectiveResult objective(const Trajectory& traj, const ScenarioConfig& cfg, const Forcing& forcing);

}  // namespace mosqopt
