#pragma once

#include <optional>

#include "mosqopt/optimizer.hpp"

namespace mosqopt {

// Noisy surveillance snapshot: stage totals only, substates unobserved.
struct Observation {
    double t = 0.0;
    double egg_total = 0.0;
    double larva_total = 0.0;
    double pupa_total = 0.0;
    double adult_total = 0.0;
};

struct MpcSettings {
    double epoch_days = 7.0;       // surveillance / commitment cadence
    double horizon_days = 42.0;    // rolling planning window
    double obs_sigma = 0.0;        // lognormal multiplicative noise per stage total
    int reopt_restarts = 5;        // fresh restarts besides the warm start (epochs > 0)
    int reopt_max_iters = 40;
    std::uint64_t rng_seed = 1;    // drives observation noise and re-opt restart draws
    OptimizerSettings epoch0_optimizer;  // the full-strength first solve (open-loop equivalent)

    void validate(const ScenarioConfig& planner_cfg) const;
};

struct EpochLog {
    int epoch = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    bool has_observation = false;  // epoch 0 starts from the configured state
    Observation observation;
    std::vector<double> planned_timings;       // full free-timing vector after this re-plan
    double planned_F = 0.0;                    // planner's window objective
    std::vector<std::size_t> committed_indices;  // schedule indices committed this epoch
    bool reopt_failed = false;                 // degraded mode: previous plan carried
};

struct ClosedLoopResult {
    ControlSchedule executed;      // schedule with final committed timings
    double realized_F = 0.0;       // objective on the stitched true trajectory
    ObjectiveResult realized;      // full realized risk summary
    std::vector<EpochLog> epochs;
    Trajectory true_trajectory;    // stitched closed-loop run of the true model
};

// Stage totals with independent multiplicative lognormal noise exp(sigma*Z).
// sigma = 0 reproduces the totals exactly.
Observation synth_observe(const LifecycleState& state, double t, double sigma, RngStream& rng);

// Distribute each observed total over substates proportionally to the
// stationary substate occupancy at the prevailing temperature. Totals are
// preserved exactly.
LifecycleState reinit_state(const Observation& obs, double temp_c, const ScenarioConfig& cfg);

// Receding-horizon closed loop: per epoch, re-optimize the uncommitted
// timings over [t_now, t_now + horizon] (warm-started from the previous
// plan), commit the ones falling inside the next epoch, advance the true
// model one epoch under committed controls only, observe with noise, and
// re-initialize the planner state from the observation. Committed timings
// are never revised. Reports the objective realized on the true trajectory.
ClosedLoopResult mpc_run(const ScenarioConfig& true_cfg, const ScenarioConfig& planner_cfg,
                         const MpcSettings& settings);

}  // namespace mosqopt
