#include "mosqopt/lifecycle.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "mosqopt/common.hpp"
#include "mosqopt/kernels.hpp"

namespace mosqopt {

namespace {

void append_hash(std::uint64_t& h, double v) { h = fnv1a(&v, sizeof v, h); }
void append_hash(std::uint64_t& h, int v) { h = fnv1a(&v, sizeof v, h); }

void check_finite_block(const double* x, int n, double t, const char* what) {
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(x[i]))
            throw NumericError(std::string(what) + " became non-finite at t=" + std::to_string(t));
}

}  // namespace

LifecycleState LifecycleState::zeros(int J) {
    LifecycleState s;
    s.J = J;
    s.x.assign(static_cast<std::size_t>(4 * J), 0.0);
    return s;
}

double LifecycleState::egg_total() const { return kernels::ops().sum(x.data(), J); }
double LifecycleState::larva_total() const { return kernels::ops().sum(x.data() + J, J); }
double LifecycleState::pupa_total() const { return kernels::ops().sum(x.data() + 2 * J, J); }
double LifecycleState::adult_total() const { return kernels::ops().sum(x.data() + 3 * J, J); }

int ScenarioConfig::n_steps() const {
    return static_cast<int>(std::llround(horizon_days / dt_days));
}

void ScenarioConfig::validate() const {
    if (substates < 1) throw ConfigError("substates_per_stage must be >= 1");
    if (!(dt_days > 0.0) || dt_days > 0.5)
        throw ConfigError("dt_days must lie in (0, 0.5], got " + std::to_string(dt_days));
    if (!(horizon_days > 0.0)) throw ConfigError("horizon_days must be > 0");
    const double steps = horizon_days / dt_days;
    if (std::abs(steps - std::llround(steps)) > 1e-9 * std::max(1.0, steps))
        throw ConfigError("horizon_days must be an integer multiple of dt_days");
    if (t0_days < 0.0) throw ConfigError("start time must be >= 0");
    if (start_day_of_year < 1 || start_day_of_year > 365)
        throw ConfigError("start_day_of_year must be in [1, 365]");
    for (double v : temperature.day_temp_c)
        if (!std::isfinite(v)) throw ConfigError("temperature profile has non-finite entries");

    validate_rates(rates, temperature);

    if (!(capacity.c0 > 0.0)) throw ConfigError("carrying_capacity_c0 must be > 0");
    if (capacity.capacity_floor_fraction < 0.0 || capacity.capacity_floor_fraction >= 1.0)
        throw ConfigError("capacity_floor_fraction must be in [0, 1)");
    if (!capacity.alpha.samples.empty()) {
        double prev = -1e300;
        for (const auto& s : capacity.alpha.samples) {
            if (!std::isfinite(s[0]) || !std::isfinite(s[1]) || s[1] < 0.0)
                throw ConfigError("alpha series must be finite with values >= 0");
            if (s[0] <= prev) throw ConfigError("alpha series times must be strictly increasing");
            prev = s[0];
        }
    }
    if (!(clamp_sharpness > 0.0)) throw ConfigError("clamp_sharpness must be > 0");

    if (!(epi.human_population > 0.0)) throw ConfigError("human_population must be > 0");
    if (!(epi.eta_H_inv_days > 0.0)) throw ConfigError("intrinsic incubation period must be > 0");
    if (epi.phi_HV < 0.0 || epi.phi_HV > 1.0 || epi.phi_VH < 0.0 || epi.phi_VH > 1.0)
        throw ConfigError("transmission probabilities must lie in [0, 1]");

    if (initial_state.J != substates ||
        initial_state.x.size() != static_cast<std::size_t>(4 * substates))
        throw ConfigError("initial state dimension does not match substates_per_stage");
    for (double v : initial_state.x)
        if (!std::isfinite(v) || v < 0.0)
            throw ConfigError("initial state entries must be finite and >= 0");

    for (std::size_t i = 0; i < schedule.interventions.size(); ++i)
        validate_intervention(schedule.interventions[i],
                              "schedule/interventions[" + std::to_string(i) + "]");
}

double f1(double total_larvae, double capacity, bool clamp, double sharpness) {
    return f1_eval(total_larvae, capacity, clamp, sharpness).value;
}

F1Eval f1_eval(double total_larvae, double capacity, bool clamp, double sharpness) {
    if (!(capacity > 0.0))
        throw NumericError("recruitment factor needs positive capacity, got " +
                           std::to_string(capacity));
    const double u = 1.0 - total_larvae / capacity;
    if (!clamp) return {u, 1.0};
    // softplus(k u)/k and its slope sigmoid(k u), computed stably both ways
    const double z = sharpness * u;
    double value, slope;
    if (z > 0.0) {
        const double e = std::exp(-z);
        value = (z + std::log1p(e)) / sharpness;
        slope = 1.0 / (1.0 + e);
    } else {
        const double e = std::exp(z);
        value = std::log1p(e) / sharpness;
        slope = e / (1.0 + e);
    }
    return {value, slope};
}

Forcing Forcing::build(const ScenarioConfig& cfg) {
    Forcing f;
    f.t0 = cfg.t0_days;
    f.dt = cfg.dt_days;
    f.n_steps = cfg.n_steps();
    const std::size_t m = f.stage_count();
    for (auto* v : {&f.dev_egg, &f.dev_larva, &f.dev_pupa, &f.gonotrophic, &f.mort_egg,
                    &f.mort_larva, &f.mort_pupa, &f.mort_adult, &f.oviposition, &f.alpha,
                    &f.r0_coef})
        v->resize(m);

    const double nb_gae_coef = 1.0 / cfg.epi.human_population * cfg.epi.phi_HV * cfg.epi.phi_VH *
                               cfg.epi.eta_H_inv_days;
    f.r0_valid = true;
    for (std::size_t s = 0; s < m; ++s) {
        const double t = f.t0 + 0.5 * f.dt * static_cast<double>(s);
        const double temp = temperature_at(cfg.temperature, t, cfg.start_day_of_year);
        f.dev_egg[s] = rate_at(cfg.rates.dev_egg, temp);
        f.dev_larva[s] = rate_at(cfg.rates.dev_larva, temp);
        f.dev_pupa[s] = rate_at(cfg.rates.dev_pupa, temp);
        f.gonotrophic[s] = rate_at(cfg.rates.gonotrophic, temp);
        f.mort_egg[s] = rate_at(cfg.rates.mort_egg, temp);
        f.mort_larva[s] = rate_at(cfg.rates.mort_larva, temp);
        f.mort_pupa[s] = rate_at(cfg.rates.mort_pupa, temp);
        f.mort_adult[s] = rate_at(cfg.rates.mort_adult, temp);
        f.oviposition[s] = rate_at(cfg.rates.oviposition, temp);
        f.alpha[s] = alpha_at(cfg.capacity.alpha, t);
        const double nb = rate_at(cfg.rates.bites_per_cycle, temp);
        const double gae = f.gonotrophic[s];
        const double gad = f.mort_adult[s];
        const double gv = rate_at(cfg.rates.eip_rate, temp);
        if (gad > 0.0 && gv > 0.0) {
            f.r0_coef[s] = nb_gae_coef * nb * nb * gae * gae / gad / (1.0 + gad / gv);
        } else {
            f.r0_valid = false;
            f.r0_coef[s] = 0.0;
        }
    }
    return f;
}

ControlTable ControlTable::build(const ScenarioConfig& cfg, const Forcing& forcing) {
    ControlTable ct;
    const std::size_t m = forcing.stage_count();
    ct.r_larvicide.resize(m);
    ct.r_adulticide.resize(m);
    ct.capacity.resize(m);
    const double floor = cfg.capacity.capacity_floor_fraction * cfg.capacity.c0;
    for (std::size_t s = 0; s < m; ++s) {
        const double t = forcing.t0 + 0.5 * forcing.dt * static_cast<double>(s);
        ct.r_larvicide[s] = induced_mortality(cfg.schedule, InterventionKind::Larvicide, t);
        ct.r_adulticide[s] = induced_mortality(cfg.schedule, InterventionKind::Adulticide, t);
        const double cap = carrying_capacity(cfg.capacity, cfg.schedule, t);
        if (cap <= floor)
            throw NumericError("carrying capacity " + std::to_string(cap) +
                               " at t=" + std::to_string(t) + " is at or below the floor " +
                               std::to_string(floor) + " (infeasible habitat schedule)");
        ct.capacity[s] = cap;
    }
    return ct;
}

std::uint64_t grid_schedule_hash(const ScenarioConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    append_hash(h, cfg.substates);
    append_hash(h, cfg.t0_days);
    append_hash(h, cfg.horizon_days);
    append_hash(h, cfg.dt_days);
    append_hash(h, cfg.start_day_of_year);
    append_hash(h, cfg.recruitment_clamp ? 1 : 0);
    append_hash(h, cfg.clamp_sharpness);
    append_hash(h, cfg.capacity.c0);
    append_hash(h, cfg.capacity.capacity_floor_fraction);
    for (const auto& s : cfg.capacity.alpha.samples) {
        append_hash(h, s[0]);
        append_hash(h, s[1]);
    }
    for (double v : cfg.temperature.day_temp_c) append_hash(h, v);
    for (const RateCurve* c :
         {&cfg.rates.dev_egg, &cfg.rates.dev_larva, &cfg.rates.dev_pupa, &cfg.rates.gonotrophic,
          &cfg.rates.mort_egg, &cfg.rates.mort_larva, &cfg.rates.mort_pupa, &cfg.rates.mort_adult,
          &cfg.rates.oviposition, &cfg.rates.bites_per_cycle, &cfg.rates.eip_rate})
        for (const auto& s : c->samples) {
            append_hash(h, s[0]);
            append_hash(h, s[1]);
        }
    for (const auto& iv : cfg.schedule.interventions) {
        append_hash(h, static_cast<int>(iv.kind));
        append_hash(h, iv.timing_days);
        append_hash(h, iv.efficacy);
        append_hash(h, iv.duration_days);
        append_hash(h, iv.recovery_days);
        append_hash(h, iv.edge_sharpness_per_day);
    }
    return h;
}

namespace {

// One RHS evaluation against precomputed per-stage tables. x and out are 4J.
inline void rhs_stage(const double* x, double* out, int J, const Forcing& f,
                      const ControlTable& ct, std::size_t s, bool clamp, double clamp_k) {
    const auto& K = kernels::ops();
    const std::size_t Ju = static_cast<std::size_t>(J);
    const double Jd = static_cast<double>(J);
    const double sumL = K.sum(x + J, Ju);
    const double f1v = f1_eval(sumL, ct.capacity[s], clamp, clamp_k).value;

    const double ge = f.dev_egg[s], gl = f.dev_larva[s], gp = f.dev_pupa[s];
    const double ga = f.gonotrophic[s];
    const double A_J = x[4 * J - 1], E_J = x[J - 1], L_J = x[2 * J - 1], P_J = x[3 * J - 1];

    K.chain_rhs(out, x, Ju, Jd * ge, Jd * ge + f.mort_egg[s],
                Jd * f.oviposition[s] * ga * A_J);
    K.chain_rhs(out + J, x + J, Ju, Jd * gl, Jd * gl + f.mort_larva[s] + ct.r_larvicide[s],
                Jd * f1v * ge * E_J);
    K.chain_rhs(out + 2 * J, x + 2 * J, Ju, Jd * gp, Jd * gp + f.mort_pupa[s],
                Jd * gl * L_J);
    K.chain_rhs(out + 3 * J, x + 3 * J, Ju, Jd * ga, Jd * ga + f.mort_adult[s] + ct.r_adulticide[s],
                Jd * (0.5 * gp * P_J + ga * A_J));
}

}  // namespace

Trajectory integrate_forward(const ScenarioConfig& cfg) {
    const Forcing forcing = Forcing::build(cfg);
    return integrate_forward(cfg, forcing);
}

Trajectory integrate_forward(const ScenarioConfig& cfg, const Forcing& forcing) {
    cfg.validate();
    const int n = cfg.n_steps();
    if (forcing.n_steps != n || forcing.t0 != cfg.t0_days || forcing.dt != cfg.dt_days)
        throw NumericError("forcing table grid does not match scenario grid");
    const ControlTable ct = ControlTable::build(cfg, forcing);

    const int J = cfg.substates;
    const int m = 4 * J;
    const auto& K = kernels::ops();

    Trajectory traj;
    traj.t0 = cfg.t0_days;
    traj.dt = cfg.dt_days;
    traj.n_steps = n;
    traj.J = J;
    traj.states.resize(static_cast<std::size_t>(n + 1) * m);
    traj.derivs.resize(static_cast<std::size_t>(n + 1) * m);
    traj.larva_totals.resize(n + 1);
    traj.adult_totals.resize(n + 1);
    traj.grid_hash = grid_schedule_hash(cfg);

    std::copy(cfg.initial_state.x.begin(), cfg.initial_state.x.end(), traj.states.begin());

    std::vector<double> k2(m), k3(m), k4(m), tmp(m);
    const double dt = cfg.dt_days;
    const bool clamp = cfg.recruitment_clamp;
    const double ck = cfg.clamp_sharpness;

    for (int step = 0; step < n; ++step) {
        double* x = traj.states.data() + static_cast<std::size_t>(step) * m;
        double* k1 = traj.derivs.data() + static_cast<std::size_t>(step) * m;  // dense output
        const std::size_t s0 = static_cast<std::size_t>(2 * step);

        rhs_stage(x, k1, J, forcing, ct, s0, clamp, ck);
        K.axpy(tmp.data(), x, k1, 0.5 * dt, m);
        rhs_stage(tmp.data(), k2.data(), J, forcing, ct, s0 + 1, clamp, ck);
        K.axpy(tmp.data(), x, k2.data(), 0.5 * dt, m);
        rhs_stage(tmp.data(), k3.data(), J, forcing, ct, s0 + 1, clamp, ck);
        K.axpy(tmp.data(), x, k3.data(), dt, m);
        rhs_stage(tmp.data(), k4.data(), J, forcing, ct, s0 + 2, clamp, ck);

        double* xn = x + m;
        K.rk4_combine(xn, x, k1, k2.data(), k3.data(), k4.data(), dt, m);
        check_finite_block(xn, m, traj.time_at(step + 1), "state");

        traj.larva_totals[step] = K.sum(x + J, J);
        traj.adult_totals[step] = K.sum(x + 3 * J, J);
    }
    // node derivative and totals at the final node
    double* xN = traj.states.data() + static_cast<std::size_t>(n) * m;
    rhs_stage(xN, traj.derivs.data() + static_cast<std::size_t>(n) * m, J, forcing, ct,
              static_cast<std::size_t>(2 * n), clamp, ck);
    traj.larva_totals[n] = K.sum(xN + J, J);
    traj.adult_totals[n] = K.sum(xN + 3 * J, J);
    return traj;
}

std::span<const double> Trajectory::state_at(int node) const {
    return {states.data() + static_cast<std::size_t>(node) * 4 * J, static_cast<std::size_t>(4 * J)};
}

std::span<const double> Trajectory::deriv_at(int node) const {
    return {derivs.data() + static_cast<std::size_t>(node) * 4 * J, static_cast<std::size_t>(4 * J)};
}

LifecycleState Trajectory::final_state() const {
    LifecycleState s = LifecycleState::zeros(J);
    const auto last = state_at(n_steps);
    std::copy(last.begin(), last.end(), s.x.begin());
    return s;
}

LifecycleState rhs(const LifecycleState& state, double t, const ScenarioConfig& cfg) {
    if (state.J != cfg.substates) throw NumericError("state dimension mismatch in rhs");
    check_finite_block(state.x.data(), 4 * state.J, t, "state");

    // Single-instant tables so the public entry point shares the loop kernel.
    const double temp = temperature_at(cfg.temperature, t, cfg.start_day_of_year);
    Forcing f;
    f.t0 = t;
    f.dt = cfg.dt_days;
    f.n_steps = 0;
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
    const double cap = carrying_capacity(cfg.capacity, cfg.schedule, t);
    const double floor = cfg.capacity.capacity_floor_fraction * cfg.capacity.c0;
    if (cap <= floor)
        throw NumericError("carrying capacity at t=" + std::to_string(t) + " is below the floor");
    ct.capacity = {cap};

    LifecycleState out = LifecycleState::zeros(cfg.substates);
    rhs_stage(state.x.data(), out.x.data(), cfg.substates, f, ct, 0, cfg.recruitment_clamp,
              cfg.clamp_sharpness);
    return out;
}

FluxBreakdown rhs_fluxes(const LifecycleState& state, double t, const ScenarioConfig& cfg) {
    const int J = cfg.substates;
    const double Jd = static_cast<double>(J);
    const double temp = temperature_at(cfg.temperature, t, cfg.start_day_of_year);
    const double ge = rate_at(cfg.rates.dev_egg, temp);
    const double gl = rate_at(cfg.rates.dev_larva, temp);
    const double gp = rate_at(cfg.rates.dev_pupa, temp);
    const double ga = rate_at(cfg.rates.gonotrophic, temp);
    const double ov = rate_at(cfg.rates.oviposition, temp);
    const double r_l = induced_mortality(cfg.schedule, InterventionKind::Larvicide, t);
    const double r_a = induced_mortality(cfg.schedule, InterventionKind::Adulticide, t);
    const double cap = carrying_capacity(cfg.capacity, cfg.schedule, t);
    const double sumL = kernels::ops().sum(state.x.data() + J, J);
    const double f1v = f1_eval(sumL, cap, cfg.recruitment_clamp, cfg.clamp_sharpness).value;

    FluxBreakdown fb;
    fb.inflow.assign(4 * J, 0.0);
    fb.advance_out.assign(4 * J, 0.0);
    fb.death.assign(4 * J, 0.0);

    const auto E = state.eggs(), L = state.larvae(), P = state.pupae(), A = state.adults();
    const double mort[4] = {rate_at(cfg.rates.mort_egg, temp), rate_at(cfg.rates.mort_larva, temp) + r_l,
                            rate_at(cfg.rates.mort_pupa, temp), rate_at(cfg.rates.mort_adult, temp) + r_a};
    const double adv[4] = {Jd * ge, Jd * gl, Jd * gp, Jd * ga};
    const double inj[4] = {Jd * ov * ga * A[J - 1], Jd * f1v * ge * E[J - 1], Jd * gl * L[J - 1],
                           Jd * (0.5 * gp * P[J - 1] + ga * A[J - 1])};
    for (int stage = 0; stage < 4; ++stage) {
        const double* xs = state.x.data() + stage * J;
        double* in = fb.inflow.data() + stage * J;
        double* outf = fb.advance_out.data() + stage * J;
        double* dth = fb.death.data() + stage * J;
        in[0] = inj[stage];
        for (int j = 1; j < J; ++j) in[j] = adv[stage] * xs[j - 1];
        for (int j = 0; j < J; ++j) {
            outf[j] = adv[stage] * xs[j];
            dth[j] = mort[stage] * xs[j];
        }
    }
    return fb;
}

std::array<std::vector<double>, 4> equilibrium_substate_profile(double temp_c,
                                                                const ScenarioConfig& cfg) {
    const int J = cfg.substates;
    const double Jd = static_cast<double>(J);
    const struct {
        const RateCurve* dev;
        const RateCurve* mort;
        const char* name;
    } stages[4] = {{&cfg.rates.dev_egg, &cfg.rates.mort_egg, "egg"},
                   {&cfg.rates.dev_larva, &cfg.rates.mort_larva, "larva"},
                   {&cfg.rates.dev_pupa, &cfg.rates.mort_pupa, "pupa"},
                   {&cfg.rates.gonotrophic, &cfg.rates.mort_adult, "adult"}};
    std::array<std::vector<double>, 4> out;
    for (int s = 0; s < 4; ++s) {
        const double g = rate_at(*stages[s].dev, temp_c);
        const double mu = rate_at(*stages[s].mort, temp_c);
        if (!(g > 0.0))
            throw NumericError(std::string("degenerate substate profile: ") + stages[s].name +
                               " development rate is zero at " + std::to_string(temp_c) + " degC");
        // stationary chain balance: (Jg + mu) w_1 = inflow, (Jg + mu) w_j = Jg w_{j-1}
        const double ratio = Jd * g / (Jd * g + mu);
        std::vector<double> w(static_cast<std::size_t>(J));
        double acc = 1.0, total = 0.0;
        for (int j = 0; j < J; ++j) {
            w[j] = acc;
            total += acc;
            acc *= ratio;
        }
        for (auto& v : w) v /= total;
        out[s] = std::move(w);
    }
    return out;
}

ScenarioConfig with_timings(const ScenarioConfig& cfg, const std::vector<double>& free_timings) {
    ScenarioConfig copy = cfg;
    copy.schedule.set_free_timings(free_timings);
    copy.initial_state = cfg.initial_state;
    return copy;
}

}  // namespace mosqopt
