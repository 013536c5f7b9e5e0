#include "mosqopt/risk.hpp"

#include <cmath>

#include "mosqopt/common.hpp"

namespace mosqopt {

namespace {

double r0_coef_at_temp(double temp, const EpidemiologicalParams& epi, const RateSet& rates) {
    const double nb = rate_at(rates.bites_per_cycle, temp);
    const double gae = rate_at(rates.gonotrophic, temp);
    const double gad = rate_at(rates.mort_adult, temp);
    const double gv = rate_at(rates.eip_rate, temp);
    if (!(gad > 0.0) || !(gv > 0.0))
        throw NumericError(
            "R0 is singular: adult mortality and EIP completion rates must be positive (temp " +
            std::to_string(temp) + " degC)");
    return nb * nb * gae * gae * epi.phi_HV * epi.phi_VH * epi.eta_H_inv_days /
           (epi.human_population * gad * (1.0 + gad / gv));
}

ObjectiveResult objective_from_coefs(const Trajectory& traj,
                                     const std::function<double(int)>& coef_at_node) {
    const int n = traj.n_steps;
    ObjectiveResult res;
    res.curve.times.resize(n + 1);
    res.curve.r0.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        res.curve.times[i] = traj.time_at(i);
        res.curve.r0[i] = coef_at_node(i) * traj.adult_totals[i];
    }
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += 0.5 * (res.curve.r0[i] + res.curve.r0[i + 1]);
    res.F = acc * traj.dt;
    res.curve.cumulative = res.F;
    const double T = traj.dt * n;
    res.mean_daily_r0 = T > 0.0 ? res.F / T : 0.0;
    res.peak_r0 = res.curve.r0.empty() ? 0.0 : res.curve.r0[0];
    res.peak_t = res.curve.times.empty() ? 0.0 : res.curve.times[0];
    for (int i = 1; i <= n; ++i)
        if (res.curve.r0[i] > res.peak_r0) {
            res.peak_r0 = res.curve.r0[i];
            res.peak_t = res.curve.times[i];
        }
    return res;
}

}  // namespace

double r0_at(double adult_total, double t, const EpidemiologicalParams& epi, const RateSet& rates,
             const SeasonalTemperature& profile, int start_day_of_year) {
    if (adult_total < 0.0) throw NumericError("R0 evaluated on a negative adult total");
    return adult_total * d_r0_dA(t, epi, rates, profile, start_day_of_year);
}

double d_r0_dA(double t, const EpidemiologicalParams& epi, const RateSet& rates,
               const SeasonalTemperature& profile, int start_day_of_year) {
    return r0_coef_at_temp(temperature_at(profile, t, start_day_of_year), epi, rates);
}

ObjectiveResult objective(const Trajectory& traj, const ScenarioConfig& cfg) {
    return objective_from_coefs(traj, [&](int i) {
        return d_r0_dA(traj.time_at(i), cfg.epi, cfg.rates, cfg.temperature, cfg.start_day_of_year);
    });
}

ObjectiveResult objective(const Trajectory& traj, const ScenarioConfig& cfg, const Forcing& forcing) {
    if (forcing.n_steps != traj.n_steps || forcing.t0 != traj.t0 || forcing.dt != traj.dt)
        throw NumericError("forcing table grid does not match trajectory grid");
    if (!forcing.r0_valid) {
        // fall back to direct evaluation, which reports the singular temperature
        return objective(traj, cfg);
    }
    return objective_from_coefs(traj, [&](int i) { return forcing.r0_coef[2 * i]; });
}

}  // namespace mosqopt
