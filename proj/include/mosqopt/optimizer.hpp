#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "mosqopt/adjoint.hpp"

namespace mosqopt {

struct OptimizerSettings {
    int max_iters = 200;
    double step_init_days = 8.0;        // initial infinity-norm trial step
    double backtrack_factor = 0.5;      // step shrink on a rejected trial
    double armijo_c = 1e-4;             // sufficient-decrease constant
    double grad_tol = 1e-5;             // stop when the gradient inf-norm drops below
    int n_restarts = 20;
    std::uint64_t rng_seed = 1;

    void validate() const;
};

struct RestartRecord {
    std::vector<double> init_timings;
    std::vector<double> final_timings;  // canonicalized (sorted within identical groups)
    double final_F = std::numeric_limits<double>::infinity();
    int iters = 0;                      // accepted descent steps
    bool converged = false;             // gradient tolerance (or bound-stationarity) reached
    bool failed = false;                // solve error at the initial point
    std::string error;
    std::vector<double> trace_F;        // objective at init and after each accepted step
};

struct OptimizationResult {
    std::vector<double> best_timings;
    double best_F = std::numeric_limits<double>::infinity();
    int best_restart = -1;
    std::vector<RestartRecord> restarts;

    const std::vector<double>& best_trace() const { return restarts.at(best_restart).trace_F; }
};

// Componentwise clamp into the bounds boxes.
std::vector<double> project(std::vector<double> timings,
                            const std::vector<std::array<double, 2>>& bounds);

// Interventions that differ only in timing are interchangeable; sorting their
// timings gives one canonical representative per permutation orbit so
// restarts compare stably.
std::vector<double> canonicalize_timings(const ControlSchedule& schedule,
                                         std::vector<double> free_timings);

// Projected gradient descent with Armijo backtracking from one starting point.
// Objective decrease is guaranteed across accepted iterates. A solve failure
// at a trial point rejects the step; a failure at the starting point marks the
// record failed.
RestartRecord descend(const ScenarioConfig& cfg, const std::vector<double>& init_timings,
                      const OptimizerSettings& settings);
RestartRecord descend(const ScenarioConfig& cfg, const Forcing& forcing,
                      const std::vector<double>& init_timings, const OptimizerSettings& settings);

// Independent restarts from seeded uniform-random starting points (plus any
// caller-supplied warm starts, which run first). Restart r draws from a
// stream derived from (rng_seed, r) so results are order- and
// concurrency-independent.
OptimizationResult multi_start(const ScenarioConfig& cfg, const OptimizerSettings& settings);
OptimizationResult multi_start(const ScenarioConfig& cfg, const Forcing& forcing,
                               const OptimizerSettings& settings,
                               const std::vector<std::vector<double>>& warm_starts = {});

}  // namespace mosqopt
