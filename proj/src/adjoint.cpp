#include "mosqopt/adjoint.hpp"

#include <cmath>

#include "mosqopt/common.hpp"
#include "mosqopt/kernels.hpp"

namespace mosqopt {

namespace {

void require_matching(const Trajectory& traj, const ScenarioConfig& cfg) {
    if (traj.grid_hash != grid_schedule_hash(cfg))
        throw NumericError(
            "trajectory was produced under a different grid/schedule than this config "
            "(refusing the backward pass on mismatched runs)");
    if (traj.J != cfg.substates || traj.n_steps != cfg.n_steps())
        throw NumericError("trajectory dimensions do not match config");
}

// Costate RHS at one stage index. `x` is the forward state at the same
// instant, `lam` the costate, both 4J flat.
inline void adjoint_stage(const double* lam, const double* x, double* out, int J, const Forcing& f,
                          const ControlTable& ct, std::size_t s, bool clamp, double clamp_k,
                          double adult_source) {
    const auto& K = kernels::ops();
    const std::size_t Ju = static_cast<std::size_t>(J);
    const double Jd = static_cast<double>(J);

    const double sumL = K.sum(x + J, Ju);
    const double E_J = x[J - 1];
    const double C = ct.capacity[s];
    const F1Eval fe = f1_eval(sumL, C, clamp, clamp_k);

    const double ge = f.dev_egg[s], gl = f.dev_larva[s], gp = f.dev_pupa[s];
    const double ga = f.gonotrophic[s];
    const double lamE1 = lam[0], lamL1 = lam[J], lamP1 = lam[2 * J], lamA1 = lam[3 * J];

    // df1/dL_j = -slope/C, identical for every j; enters each larval row
    const double df1_dL = -fe.slope / C;
    const double uL = -df1_dL * Jd * ge * E_J * lamL1;

    K.adjoint_chain_rhs(out, lam, Ju, Jd * ge, Jd * ge + f.mort_egg[s],
                        fe.value * Jd * ge * lamL1, 0.0);
    K.adjoint_chain_rhs(out + J, lam + J, Ju, Jd * gl,
                        Jd * gl + f.mort_larva[s] + ct.r_larvicide[s], Jd * gl * lamP1, uL);
    K.adjoint_chain_rhs(out + 2 * J, lam + 2 * J, Ju, Jd * gp, Jd * gp + f.mort_pupa[s],
                        0.5 * Jd * gp * lamA1, 0.0);
    K.adjoint_chain_rhs(out + 3 * J, lam + 3 * J, Ju, Jd * ga,
                        Jd * ga + f.mort_adult[s] + ct.r_adulticide[s],
                        Jd * ga * (lamA1 + f.oviposition[s] * lamE1), adult_source);
}

AdjointTrajectory backward_sweep(const Trajectory& traj, const ScenarioConfig& cfg,
                                 const Forcing& forcing,
                                 const std::function<double(double)>& adult_source,
                                 bool use_risk_source) {
    require_matching(traj, cfg);
    if (forcing.n_steps != traj.n_steps || forcing.t0 != traj.t0 || forcing.dt != traj.dt)
        throw NumericError("forcing table grid does not match trajectory grid");
    if (use_risk_source && !forcing.r0_valid)
        throw NumericError("R0 source is singular over this scenario's temperature range");
    if (traj.derivs.empty())
        throw NumericError("trajectory lacks stored derivatives; dense output unavailable");

    const int n = traj.n_steps, J = traj.J, m = 4 * J;
    const auto& K = kernels::ops();
    const double dt = traj.dt;

    AdjointTrajectory adj;
    adj.t0 = traj.t0;
    adj.dt = dt;
    adj.n_steps = n;
    adj.J = J;
    adj.grid_hash = traj.grid_hash;
    adj.lambda.assign(static_cast<std::size_t>(n + 1) * m, 0.0);  // lambda(T) = 0 row included

    const ControlTable ct = ControlTable::build(cfg, forcing);
    const bool clamp = cfg.recruitment_clamp;
    const double ck = cfg.clamp_sharpness;

    auto source_at = [&](std::size_t stage) {
        if (use_risk_source) return forcing.r0_coef[stage];
        return adult_source(traj.t0 + 0.5 * dt * static_cast<double>(stage));
    };

    std::vector<double> k1(m), k2(m), k3(m), k4(m), tmp(m), mid(m);
    for (int step = n - 1; step >= 0; --step) {
        const double* x0 = traj.states.data() + static_cast<std::size_t>(step) * m;
        const double* x1 = x0 + m;
        const double* f0 = traj.derivs.data() + static_cast<std::size_t>(step) * m;
        const double* f1d = f0 + m;
        K.hermite_midpoint(mid.data(), x0, x1, f0, f1d, dt / 8.0, m);

        const double* lam1 = adj.lambda.data() + static_cast<std::size_t>(step + 1) * m;
        double* lam0 = adj.lambda.data() + static_cast<std::size_t>(step) * m;
        const std::size_t s0 = static_cast<std::size_t>(2 * step);
        const double h = -dt;  // integrating towards smaller t

        adjoint_stage(lam1, x1, k1.data(), J, forcing, ct, s0 + 2, clamp, ck, source_at(s0 + 2));
        K.axpy(tmp.data(), lam1, k1.data(), 0.5 * h, m);
        adjoint_stage(tmp.data(), mid.data(), k2.data(), J, forcing, ct, s0 + 1, clamp, ck,
                      source_at(s0 + 1));
        K.axpy(tmp.data(), lam1, k2.data(), 0.5 * h, m);
        adjoint_stage(tmp.data(), mid.data(), k3.data(), J, forcing, ct, s0 + 1, clamp, ck,
                      source_at(s0 + 1));
        K.axpy(tmp.data(), lam1, k3.data(), h, m);
        adjoint_stage(tmp.data(), x0, k4.data(), J, forcing, ct, s0, clamp, ck, source_at(s0));
        K.rk4_combine(lam0, lam1, k1.data(), k2.data(), k3.data(), k4.data(), h, m);

        for (int i = 0; i < m; ++i)
            if (!std::isfinite(lam0[i]))
                throw NumericError("costate became non-finite at t=" +
                                   std::to_string(traj.time_at(step)));
    }
    return adj;
}

}  // namespace

std::vector<double> adjoint_rhs(const std::vector<double>& lambda, double t, const Trajectory& traj,
                                const ScenarioConfig& cfg) {
    require_matching(traj, cfg);
    const int J = traj.J, m = 4 * J;
    if (lambda.size() != static_cast<std::size_t>(m))
        throw NumericError("costate dimension mismatch in adjoint_rhs");
    if (t < traj.t0 - 1e-9 || t > traj.time_at(traj.n_steps) + 1e-9)
        throw NumericError("adjoint_rhs time outside the stored trajectory");
    if (traj.derivs.empty()) throw NumericError("trajectory lacks stored derivatives");

    // forward state at t via cubic Hermite on the bracketing interval
    std::vector<double> x(m);
    const double pos = (t - traj.t0) / traj.dt;
    int step = std::min(static_cast<int>(pos), traj.n_steps - 1);
    if (step < 0) step = 0;
    const double theta = pos - step;
    {
        const double* x0 = traj.states.data() + static_cast<std::size_t>(step) * m;
        const double* x1 = x0 + m;
        const double* f0 = traj.derivs.data() + static_cast<std::size_t>(step) * m;
        const double* f1d = f0 + m;
        const double h = traj.dt;
        const double t2 = theta * theta, t3 = t2 * theta;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + theta;
        const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        for (int i = 0; i < m; ++i)
            x[i] = h00 * x0[i] + h10 * h * f0[i] + h01 * x1[i] + h11 * h * f1d[i];
    }

    // single-instant forcing and control values
    const double temp = temperature_at(cfg.temperature, t, cfg.start_day_of_year);
    Forcing f;
    f.dev_egg = {rate_at(cfg.rates.dev_egg, temp)};
    f.dev_larva = {rate_at(cfg.rates.dev_larva, temp)};
    f.dev_pupa = {rate_at(cfg.rates.dev_pupa, temp)};
    f.gonotrophic = {rate_at(cfg.rates.gonotrophic, temp)};
    f.mort_egg = {rate_at(cfg.rates.mort_egg, temp)};
    f.mort_larva = {rate_at(cfg.rates.mort_larva, temp)};
    f.mort_pupa = {rate_at(cfg.rates.mort_pupa, temp)};
    f.mort_adult = {rate_at(cfg.rates.mort_adult, temp)};
    f.oviposition = {rate_at(cfg.rates.oviposition, temp)};
    f.alpha = {alpha_at(cfg.capacity.alpha, t)};
    ControlTable ct;
    ct.r_larvicide = {induced_mortality(cfg.schedule, InterventionKind::Larvicide, t)};
    ct.r_adulticide = {induced_mortality(cfg.schedule, InterventionKind::Adulticide, t)};
    ct.capacity = {carrying_capacity(cfg.capacity, cfg.schedule, t)};

    const double src = d_r0_dA(t, cfg.epi, cfg.rates, cfg.temperature, cfg.start_day_of_year);
    std::vector<double> out(m);
    adjoint_stage(lambda.data(), x.data(), out.data(), J, f, ct, 0, cfg.recruitment_clamp,
                  cfg.clamp_sharpness, src);
    return out;
}

AdjointTrajectory integrate_backward(const Trajectory& traj, const ScenarioConfig& cfg) {
    const Forcing forcing = Forcing::build(cfg);
    return backward_sweep(traj, cfg, forcing, {}, true);
}

AdjointTrajectory integrate_backward(const Trajectory& traj, const ScenarioConfig& cfg,
                                     const Forcing& forcing) {
    return backward_sweep(traj, cfg, forcing, {}, true);
}

AdjointTrajectory integrate_backward(const Trajectory& traj, const ScenarioConfig& cfg,
                                     const Forcing& forcing,
                                     const std::function<double(double)>& adult_source) {
    return backward_sweep(traj, cfg, forcing, adult_source, false);
}

std::vector<double> gradient(const Trajectory& traj, const AdjointTrajectory& adj,
                             const ScenarioConfig& cfg) {
    const Forcing forcing = Forcing::build(cfg);
    return gradient(traj, adj, cfg, forcing);
}

std::vector<double> gradient(const Trajectory& traj, const AdjointTrajectory& adj,
                             const ScenarioConfig& cfg, const Forcing& forcing) {
    require_matching(traj, cfg);
    if (adj.grid_hash != traj.grid_hash)
        throw NumericError("costate trajectory does not match the forward trajectory");

    const int n = traj.n_steps, J = traj.J, m = 4 * J;
    const auto& K = kernels::ops();
    const ControlTable ct = ControlTable::build(cfg, forcing);

    // Node-wise common factors shared by all interventions of one kind.
    std::vector<double> dotL(n + 1), dotA(n + 1), hab(n + 1);
    const bool clamp = cfg.recruitment_clamp;
    const double ck = cfg.clamp_sharpness;
    const double Jd = static_cast<double>(J);
    for (int i = 0; i <= n; ++i) {
        const double* x = traj.states.data() + static_cast<std::size_t>(i) * m;
        const double* lam = adj.lambda.data() + static_cast<std::size_t>(i) * m;
        dotL[i] = K.dot(lam + J, x + J, J);
        dotA[i] = K.dot(lam + 3 * J, x + 3 * J, J);
        const std::size_t s = static_cast<std::size_t>(2 * i);
        const double sumL = traj.larva_totals[i];
        const double C = ct.capacity[s];
        const F1Eval fe = f1_eval(sumL, C, clamp, ck);
        const double df1_dC = fe.slope * sumL / (C * C);
        hab[i] = lam[J] * x[J - 1] * df1_dC * forcing.alpha[s] * Jd * forcing.dev_egg[s];
    }

    std::vector<double> grad;
    grad.reserve(cfg.schedule.free_indices().size());
    for (const auto& iv : cfg.schedule.interventions) {
        if (!iv.free_timing) continue;
        double acc = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double w = (i == 0 || i == n) ? 0.5 : 1.0;
            const double t = traj.time_at(i);
            double integrand = 0.0;
            switch (iv.kind) {
                case InterventionKind::Larvicide:
                    integrand = dotL[i] * iv.efficacy *
                                smooth_pulse_donset(t, iv.timing_days, iv.duration_days,
                                                    iv.edge_sharpness_per_day);
                    break;
                case InterventionKind::Adulticide:
                    integrand = dotA[i] * iv.efficacy *
                                smooth_pulse_donset(t, iv.timing_days, iv.duration_days,
                                                    iv.edge_sharpness_per_day);
                    break;
                case InterventionKind::HabitatElimination:
                    integrand = hab[i] * habitat_delta_donset(iv, cfg.capacity.c0, t);
                    break;
            }
            acc += w * integrand;
        }
        grad.push_back(acc * traj.dt);
    }
    return grad;
}

std::vector<double> finite_difference_gradient(const ScenarioConfig& cfg, double eps_days) {
    const Forcing forcing = Forcing::build(cfg);
    return finite_difference_gradient(cfg, eps_days, forcing);
}

std::vector<double> finite_difference_gradient(const ScenarioConfig& cfg, double eps_days,
                                               const Forcing& forcing) {
    if (!(eps_days > 0.0)) throw ConfigError("finite-difference step must be > 0");
    const std::vector<double> base = cfg.schedule.free_timings();
    std::vector<double> grad(base.size());
    parallel_for(base.size(), [&](std::size_t k) {
        auto probe = [&](double delta) {
            std::vector<double> timings = base;
            timings[k] += delta;
            ScenarioConfig probe_cfg = with_timings(cfg, timings);
            // probes may step just past a timing bound; pin the schedule so
            // bound checks don't reject the perturbed point
            for (auto& iv : probe_cfg.schedule.interventions) iv.free_timing = false;
            const Trajectory traj = integrate_forward(probe_cfg, forcing);
            return objective(traj, probe_cfg, forcing).F;
        };
        grad[k] = (probe(eps_days) - probe(-eps_days)) / (2.0 * eps_days);
    });
    return grad;
}

ObjectiveGradient objective_gradient(const ScenarioConfig& cfg, const Forcing& forcing) {
    const Trajectory traj = integrate_forward(cfg, forcing);
    ObjectiveGradient out;
    out.F = objective(traj, cfg, forcing).F;
    const AdjointTrajectory adj = integrate_backward(traj, cfg, forcing);
    out.grad = gradient(traj, adj, cfg, forcing);
    return out;
}

}  // namespace mosqopt
