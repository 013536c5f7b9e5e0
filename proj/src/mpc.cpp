#include "mosqopt/mpc.hpp"

#include <algorithm>
#include <cmath>

#include "mosqopt/common.hpp"
#include "mosqopt/kernels.hpp"

namespace mosqopt {

namespace {

bool is_grid_multiple(double value, double dt) {
    const double steps = value / dt;
    return std::abs(steps - std::llround(steps)) <= 1e-9 * std::max(1.0, steps);
}

}  // namespace

void MpcSettings::validate(const ScenarioConfig& planner_cfg) const {
    if (!(epoch_days > 0.0)) throw ConfigError("mpc epoch_days must be > 0");
    if (horizon_days < epoch_days) throw ConfigError("mpc horizon_days must be >= epoch_days");
    if (obs_sigma < 0.0) throw ConfigError("mpc obs_sigma must be >= 0");
    if (reopt_restarts < 0) throw ConfigError("mpc reopt_restarts must be >= 0");
    if (reopt_max_iters < 1) throw ConfigError("mpc reopt_max_iters must be >= 1");
    if (!is_grid_multiple(epoch_days, planner_cfg.dt_days) ||
        !is_grid_multiple(horizon_days, planner_cfg.dt_days))
        throw ConfigError("mpc epoch_days and horizon_days must be integer multiples of dt_days");
    epoch0_optimizer.validate();
}

Observation synth_observe(const LifecycleState& state, double t, double sigma, RngStream& rng) {
    Observation obs;
    obs.t = t;
    // fixed draw order (E, L, P, A) keeps streams reproducible
    obs.egg_total = state.egg_total() * std::exp(sigma * rng.normal());
    obs.larva_total = state.larva_total() * std::exp(sigma * rng.normal());
    obs.pupa_total = state.pupa_total() * std::exp(sigma * rng.normal());
    obs.adult_total = state.adult_total() * std::exp(sigma * rng.normal());
    return obs;
}

LifecycleState reinit_state(const Observation& obs, double temp_c, const ScenarioConfig& cfg) {
    const auto weights = equilibrium_substate_profile(temp_c, cfg);
    const double totals[4] = {obs.egg_total, obs.larva_total, obs.pupa_total, obs.adult_total};
    LifecycleState state = LifecycleState::zeros(cfg.substates);
    for (int stage = 0; stage < 4; ++stage)
        for (int j = 0; j < cfg.substates; ++j)
            state.x[static_cast<std::size_t>(stage) * cfg.substates + j] =
                totals[stage] * weights[stage][j];
    return state;
}

ClosedLoopResult mpc_run(const ScenarioConfig& true_cfg, const ScenarioConfig& planner_cfg,
                         const MpcSettings& settings) {
    planner_cfg.validate();
    true_cfg.validate();
    settings.validate(planner_cfg);
    if (true_cfg.substates != planner_cfg.substates || true_cfg.dt_days != planner_cfg.dt_days)
        throw ConfigError("true and planner models must share substates_per_stage and dt_days");
    if (true_cfg.horizon_days != planner_cfg.horizon_days ||
        true_cfg.t0_days != 0.0 || planner_cfg.t0_days != 0.0)
        throw ConfigError("mpc expects both models to start at t=0 with a common season length");
    const std::size_t n_iv = planner_cfg.schedule.interventions.size();
    if (true_cfg.schedule.interventions.size() != n_iv)
        throw ConfigError("true and planner models must carry the same intervention inventory");
    for (std::size_t i = 0; i < n_iv; ++i)
        if (true_cfg.schedule.interventions[i].kind != planner_cfg.schedule.interventions[i].kind)
            throw ConfigError("true and planner schedules disagree on intervention kinds");

    const double T = planner_cfg.horizon_days;
    const double dt = planner_cfg.dt_days;
    const int J = planner_cfg.substates;
    const int m = 4 * J;
    const double grid_eps = 0.5 * dt;

    ClosedLoopResult result;
    result.executed = planner_cfg.schedule;

    // committed[i]: timing frozen; fixed-timing interventions are committed
    // from the start (they are not decision variables).
    std::vector<bool> committed(n_iv);
    for (std::size_t i = 0; i < n_iv; ++i)
        committed[i] = !planner_cfg.schedule.interventions[i].free_timing;

    std::vector<double> plan(n_iv);  // current planned timing per schedule index
    for (std::size_t i = 0; i < n_iv; ++i)
        plan[i] = planner_cfg.schedule.interventions[i].timing_days;

    LifecycleState true_state = true_cfg.initial_state;
    LifecycleState planner_state = planner_cfg.initial_state;

    // stitched true trajectory
    Trajectory stitched;
    stitched.t0 = 0.0;
    stitched.dt = dt;
    stitched.n_steps = static_cast<int>(std::llround(T / dt));
    stitched.J = J;
    stitched.states.reserve(static_cast<std::size_t>(stitched.n_steps + 1) * m);
    stitched.states.insert(stitched.states.end(), true_state.x.begin(), true_state.x.end());

    std::optional<Observation> pending_obs;
    double t_now = 0.0;
    int epoch_idx = 0;
    while (t_now < T - grid_eps) {
        const double window_end = std::min(t_now + settings.horizon_days, T);
        const double epoch_end = std::min(t_now + settings.epoch_days, T);

        EpochLog log;
        log.epoch = epoch_idx;
        log.t_start = t_now;
        log.t_end = epoch_end;
        if (pending_obs) {
            log.has_observation = true;
            log.observation = *pending_obs;
        }

        // planner window: committed timings frozen, the rest free within
        // [max(lo, t_now), hi]; timings beyond the window park harmlessly
        // (zero gradient) and are re-planned when the window reaches them.
        ScenarioConfig window = planner_cfg;
        window.t0_days = t_now;
        window.horizon_days = window_end - t_now;
        window.initial_state = planner_state;
        bool any_free = false;
        for (std::size_t i = 0; i < n_iv; ++i) {
            auto& iv = window.schedule.interventions[i];
            iv.timing_days = plan[i];
            if (committed[i]) {
                iv.free_timing = false;
            } else {
                iv.free_timing = true;
                iv.bounds_lo_days = std::min(std::max(iv.bounds_lo_days, t_now), iv.bounds_hi_days);
                iv.timing_days = std::clamp(plan[i], iv.bounds_lo_days, iv.bounds_hi_days);
                any_free = true;
            }
        }

        if (any_free) {
            OptimizerSettings os = settings.epoch0_optimizer;
            std::vector<std::vector<double>> warm;
            if (epoch_idx > 0) {
                os.n_restarts = std::max(1, settings.reopt_restarts);
                os.max_iters = settings.reopt_max_iters;
                os.rng_seed = derive_seed(settings.rng_seed, "mpc-reopt",
                                          static_cast<std::uint64_t>(epoch_idx));
                warm.push_back(window.schedule.free_timings());
            }
            try {
                const Forcing window_forcing = Forcing::build(window);
                const OptimizationResult opt = multi_start(window, window_forcing, os, warm);
                std::size_t k = 0;
                for (std::size_t i = 0; i < n_iv; ++i)
                    if (!committed[i]) plan[i] = opt.best_timings[k++];
                log.planned_F = opt.best_F;
            } catch (const std::exception&) {
                log.reopt_failed = true;  // degraded mode: previous plan stands
            }
        }
        for (std::size_t i = 0; i < n_iv; ++i)
            if (!committed[i]) log.planned_timings.push_back(plan[i]);

        // commit plans landing inside this epoch
        for (std::size_t i = 0; i < n_iv; ++i) {
            if (committed[i] || plan[i] >= epoch_end - grid_eps * 0.0) continue;
            if (plan[i] < epoch_end) {
                committed[i] = true;
                result.executed.interventions[i].timing_days = plan[i];
                log.committed_indices.push_back(i);
            }
        }

        // advance the true model one epoch under committed controls only
        ScenarioConfig advance = true_cfg;
        advance.t0_days = t_now;
        advance.horizon_days = epoch_end - t_now;
        advance.initial_state = true_state;
        advance.schedule.interventions.clear();
        for (std::size_t i = 0; i < n_iv; ++i) {
            if (!committed[i]) continue;
            Intervention iv = true_cfg.schedule.interventions[i];
            iv.timing_days = result.executed.interventions[i].timing_days;
            iv.free_timing = false;
            advance.schedule.interventions.push_back(iv);
        }
        const Trajectory seg = integrate_forward(advance);
        stitched.states.insert(stitched.states.end(), seg.states.begin() + m, seg.states.end());
        true_state = seg.final_state();

        result.epochs.push_back(std::move(log));
        t_now = epoch_end;
        ++epoch_idx;
        if (t_now >= T - grid_eps) break;

        RngStream rng(derive_seed(settings.rng_seed, "mpc-observe",
                                  static_cast<std::uint64_t>(epoch_idx)));
        pending_obs = synth_observe(true_state, t_now, settings.obs_sigma, rng);
        const double temp = temperature_at(planner_cfg.temperature, t_now,
                                           planner_cfg.start_day_of_year);
        planner_state = reinit_state(*pending_obs, temp, planner_cfg);
    }

    // flush: plans that never entered an epoch (parked at/after season end)
    for (std::size_t i = 0; i < n_iv; ++i)
        if (!committed[i]) result.executed.interventions[i].timing_days = plan[i];

    const auto& K = kernels::ops();
    stitched.larva_totals.resize(stitched.n_steps + 1);
    stitched.adult_totals.resize(stitched.n_steps + 1);
    for (int i = 0; i <= stitched.n_steps; ++i) {
        const double* row = stitched.states.data() + static_cast<std::size_t>(i) * m;
        stitched.larva_totals[i] = K.sum(row + J, J);
        stitched.adult_totals[i] = K.sum(row + 3 * J, J);
    }
    result.realized = objective(stitched, true_cfg);
    result.realized_F = result.realized.F;
    result.true_trajectory = std::move(stitched);
    return result;
}

}  // namespace mosqopt
