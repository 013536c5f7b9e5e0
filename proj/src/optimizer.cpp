#include "mosqopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mosqopt/common.hpp"

namespace mosqopt {

namespace {

constexpr double kStepFloor = 1e-10;  // line-search underflow threshold, days

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double eval_objective(const ScenarioConfig& cfg, const Forcing& forcing,
                      const std::vector<double>& timings, Trajectory* traj_out) {
    const ScenarioConfig c = with_timings(cfg, timings);
    Trajectory traj = integrate_forward(c, forcing);
    const double F = objective(traj, c, forcing).F;
    if (traj_out) *traj_out = std::move(traj);
    return F;
}

}  // namespace

void OptimizerSettings::validate() const {
    if (max_iters < 1) throw ConfigError("optimizer max_iters must be >= 1");
    if (!(step_init_days > 0.0)) throw ConfigError("optimizer step_init_days must be > 0");
    if (!(backtrack_factor > 0.0) || backtrack_factor >= 1.0)
        throw ConfigError("optimizer backtrack_factor must lie in (0, 1)");
    if (!(armijo_c > 0.0) || armijo_c >= 1.0)
        throw ConfigError("optimizer armijo_c must lie in (0, 1)");
    if (!(grad_tol > 0.0)) throw ConfigError("optimizer grad_tol must be > 0");
    if (n_restarts < 1) throw ConfigError("optimizer n_restarts must be >= 1");
}

std::vector<double> project(std::vector<double> timings,
                            const std::vector<std::array<double, 2>>& bounds) {
    if (timings.size() != bounds.size())
        throw NumericError("projection dimension mismatch");
    for (std::size_t i = 0; i < timings.size(); ++i)
        timings[i] = std::clamp(timings[i], bounds[i][0], bounds[i][1]);
    return timings;
}

std::vector<double> canonicalize_timings(const ControlSchedule& schedule,
                                         std::vector<double> free_timings) {
    // group key: everything that makes two interventions interchangeable
    std::map<std::string, std::vector<std::size_t>> groups;
    std::size_t k = 0;
    for (const auto& iv : schedule.interventions) {
        if (!iv.free_timing) continue;
        char key[160];
        std::snprintf(key, sizeof key, "%d|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g",
                      static_cast<int>(iv.kind), iv.efficacy, iv.duration_days, iv.recovery_days,
                      iv.edge_sharpness_per_day, iv.bounds_lo_days, iv.bounds_hi_days);
        groups[key].push_back(k++);
    }
    if (k != free_timings.size()) throw NumericError("timing vector does not match schedule");
    for (auto& [key, positions] : groups) {
        std::vector<double> vals;
        vals.reserve(positions.size());
        for (std::size_t p : positions) vals.push_back(free_timings[p]);
        std::sort(vals.begin(), vals.end());
        for (std::size_t i = 0; i < positions.size(); ++i) free_timings[positions[i]] = vals[i];
    }
    return free_timings;
}

RestartRecord descend(const ScenarioConfig& cfg, const std::vector<double>& init_timings,
                      const OptimizerSettings& settings) {
    const Forcing forcing = Forcing::build(cfg);
    return descend(cfg, forcing, init_timings, settings);
}

RestartRecord descend(const ScenarioConfig& cfg, const Forcing& forcing,
                      const std::vector<double>& init_timings, const OptimizerSettings& settings) {
    settings.validate();
    const auto bounds = cfg.schedule.free_bounds();
    if (bounds.empty()) throw ConfigError("schedule has no free timings to optimize");

    RestartRecord rec;
    rec.init_timings = init_timings;
    std::vector<double> x = project(init_timings, bounds);

    Trajectory traj;
    double F;
    try {
        F = eval_objective(cfg, forcing, x, &traj);
    } catch (const std::exception& e) {
        throw NumericError("objective undefined at the starting point: " + std::string(e.what()));
    }
    rec.trace_F.push_back(F);

    auto gradient_at = [&](const std::vector<double>& timings, const Trajectory& tr) {
        const ScenarioConfig c = with_timings(cfg, timings);
        const AdjointTrajectory adj = integrate_backward(tr, c, forcing);
        return gradient(tr, adj, c, forcing);
    };

    std::vector<double> g = gradient_at(x, traj);
    double step = settings.step_init_days;
    const double step_cap = 4.0 * settings.step_init_days;

    for (int iter = 0; iter < settings.max_iters; ++iter) {
        const double gnorm = inf_norm(g);
        if (gnorm < settings.grad_tol) {
            rec.converged = true;
            break;
        }
        bool accepted = false;
        bool stationary = false;
        Trajectory trial_traj;
        std::vector<double> trial;
        double F_trial = 0.0;
        while (step > kStepFloor) {
            trial.assign(x.begin(), x.end());
            const double scale = step / gnorm;
            for (std::size_t i = 0; i < trial.size(); ++i) trial[i] -= scale * g[i];
            trial = project(std::move(trial), bounds);
            double moved = 0.0;
            double decrease = 0.0;  // <g, x - trial> >= 0 by the projection geometry
            for (std::size_t i = 0; i < trial.size(); ++i) {
                moved = std::max(moved, std::abs(trial[i] - x[i]));
                decrease += g[i] * (x[i] - trial[i]);
            }
            if (moved == 0.0) {
                // gradient pushes only against active bounds: KKT-stationary
                stationary = true;
                break;
            }
            try {
                F_trial = eval_objective(cfg, forcing, trial, &trial_traj);
            } catch (const std::exception&) {
                F_trial = std::numeric_limits<double>::infinity();
            }
            if (std::isfinite(F_trial) && F_trial <= F - settings.armijo_c * decrease) {
                accepted = true;
                break;
            }
            step *= settings.backtrack_factor;
        }
        if (stationary) {
            rec.converged = true;
            break;
        }
        if (!accepted) break;  // line search underflow
        x = std::move(trial);
        F = F_trial;
        traj = std::move(trial_traj);
        g = gradient_at(x, traj);
        rec.iters += 1;
        rec.trace_F.push_back(F);
        step = std::min(step / settings.backtrack_factor, step_cap);
    }

    rec.final_timings = canonicalize_timings(cfg.schedule, x);
    rec.final_F = F;
    return rec;
}

OptimizationResult multi_start(const ScenarioConfig& cfg, const OptimizerSettings& settings) {
    const Forcing forcing = Forcing::build(cfg);
    return multi_start(cfg, forcing, settings);
}

OptimizationResult multi_start(const ScenarioConfig& cfg, const Forcing& forcing,
                               const OptimizerSettings& settings,
                               const std::vector<std::vector<double>>& warm_starts) {
    settings.validate();
    const auto bounds = cfg.schedule.free_bounds();
    if (bounds.empty()) throw ConfigError("schedule has no free timings to optimize");

    std::vector<std::vector<double>> inits = warm_starts;
    for (int r = 0; r < settings.n_restarts; ++r) {
        RngStream rng(derive_seed(settings.rng_seed, "optimizer-restart", static_cast<std::uint64_t>(r)));
        std::vector<double> init(bounds.size());
        for (std::size_t i = 0; i < bounds.size(); ++i)
            init[i] = rng.uniform(bounds[i][0], bounds[i][1]);
        inits.push_back(std::move(init));
    }

    OptimizationResult result;
    result.restarts.resize(inits.size());
    parallel_for(inits.size(), [&](std::size_t i) {
        try {
            result.restarts[i] = descend(cfg, forcing, inits[i], settings);
        } catch (const std::exception& e) {
            result.restarts[i].init_timings = inits[i];
            result.restarts[i].failed = true;
            result.restarts[i].error = e.what();
        }
    });

    for (std::size_t i = 0; i < result.restarts.size(); ++i) {
        const auto& rec = result.restarts[i];
        if (rec.failed) continue;
        if (rec.final_F < result.best_F) {
            result.best_F = rec.final_F;
            result.best_restart = static_cast<int>(i);
        }
    }
    if (result.best_restart < 0) {
        std::string first = result.restarts.empty() ? "no restarts" : result.restarts[0].error;
        throw NumericError("every optimizer restart failed (first error: " + first + ")");
    }
    result.best_timings = result.restarts[result.best_restart].final_timings;
    return result;
}

}  // namespace mosqopt
