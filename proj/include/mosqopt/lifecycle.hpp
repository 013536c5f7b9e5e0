#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mosqopt/controls.hpp"
#include "mosqopt/environment.hpp"

namespace mosqopt {

// Parameters of the transmission-risk formula that are not temperature curves.
// eta_H_inv is the intrinsic incubation period in days and multiplies R0
// directly (formula implemented verbatim in the risk module).
struct EpidemiologicalParams {
    double human_population = 0.0;       // N_H
    double eta_H_inv_days = 0.0;         // intrinsic incubation period
    double phi_HV = 0.0;                 // human -> vector per-bite transmission prob
    double phi_VH = 0.0;                 // vector -> human per-bite transmission prob
};

// 4J-vector of substate populations, flat layout [E_1..E_J, L_1..L_J,
// P_1..P_J, A_1..A_J].
struct LifecycleState {
    int J = 0;
    std::vector<double> x;

    static LifecycleState zeros(int J);

    std::span<double> eggs() { return {x.data(), static_cast<std::size_t>(J)}; }
    std::span<double> larvae() { return {x.data() + J, static_cast<std::size_t>(J)}; }
    std::span<double> pupae() { return {x.data() + 2 * J, static_cast<std::size_t>(J)}; }
    std::span<double> adults() { return {x.data() + 3 * J, static_cast<std::size_t>(J)}; }
    std::span<const double> eggs() const { return {x.data(), static_cast<std::size_t>(J)}; }
    std::span<const double> larvae() const { return {x.data() + J, static_cast<std::size_t>(J)}; }
    std::span<const double> pupae() const { return {x.data() + 2 * J, static_cast<std::size_t>(J)}; }
    std::span<const double> adults() const { return {x.data() + 3 * J, static_cast<std::size_t>(J)}; }

    double egg_total() const;
    double larva_total() const;
    double pupa_total() const;
    double adult_total() const;
};

// Everything a solve needs. Copyable: the optimizer clones it to move timings.
struct ScenarioConfig {
    int substates = 16;                   // J
    double t0_days = 0.0;                 // absolute start time (nonzero in rolling windows)
    double horizon_days = 365.0;          // T, length of the run
    double dt_days = 0.05;
    int start_day_of_year = 1;            // calendar day at absolute t = 0

    SeasonalTemperature temperature;
    RateSet rates;

    CarryingCapacityModel capacity;       // c0, alpha(t), floor
    bool recruitment_clamp = true;
    double clamp_sharpness = 50.0;        // softplus scale of the clamped f1

    LifecycleState initial_state;
    ControlSchedule schedule;
    EpidemiologicalParams epi;

    int n_steps() const;                  // horizon / dt, exact by validation
    void validate() const;                // throws ConfigError
};

// Recruitment attenuation: 1 - total_larvae/C, or its smooth nonnegative
// version softplus(k*(1 - ratio))/k when clamped. Returns the value; the
// derivative helpers below expose the slope d(f1)/d(1 - ratio).
double f1(double total_larvae, double capacity, bool clamp, double sharpness);

// Value and d(f1)/du at u = 1 - total_larvae/C (slope is 1 unclamped,
// sigmoid(k*u) clamped); used by the adjoint terms.
struct F1Eval {
    double value;
    double slope;
};
F1Eval f1_eval(double total_larvae, double capacity, bool clamp, double sharpness);

// Temperature-driven rates sampled on the half-step grid t0 + s*dt/2,
// s = 0..2n. Schedule-independent, so one build serves every timing the
// optimizer tries against the same scenario.
struct Forcing {
    double t0 = 0.0;
    double dt = 0.0;
    int n_steps = 0;
    std::vector<double> dev_egg, dev_larva, dev_pupa, gonotrophic;
    std::vector<double> mort_egg, mort_larva, mort_pupa, mort_adult;
    std::vector<double> oviposition, alpha;
    std::vector<double> r0_coef;          // dR0/dA at each stage time; empty if singular
    bool r0_valid = false;

    static Forcing build(const ScenarioConfig& cfg);
    std::size_t stage_count() const { return static_cast<std::size_t>(2 * n_steps + 1); }
};

// Control-dependent forcing on the same half-step grid: induced mortalities
// and composed carrying capacity. Rebuilt per candidate timing vector.
// Throws NumericError naming t if capacity falls to its floor.
struct ControlTable {
    std::vector<double> r_larvicide, r_adulticide, capacity;
    static ControlTable build(const ScenarioConfig& cfg, const Forcing& forcing);
};

// Dense forward record: states and RHS values at every grid node (the RHS
// values give cubic-Hermite dense output for the backward pass).
struct Trajectory {
    double t0 = 0.0;
    double dt = 0.0;
    int n_steps = 0;
    int J = 0;
    std::vector<double> states;           // (n_steps+1) x 4J, row-major
    std::vector<double> derivs;           // same shape; empty when not recorded
    std::vector<double> larva_totals;     // per node
    std::vector<double> adult_totals;     // per node
    std::uint64_t grid_hash = 0;          // fingerprints grid + schedule + model knobs

    std::span<const double> state_at(int node) const;
    std::span<const double> deriv_at(int node) const;
    double time_at(int node) const { return t0 + node * dt; }
    LifecycleState final_state() const;
};

// Fingerprint of everything the adjoint pass must share with the forward pass
// (grid, schedule, capacity model, clamp settings). Differing hashes between a
// trajectory and a config are a consistency error, never a silent reuse.
std::uint64_t grid_schedule_hash(const ScenarioConfig& cfg);

// Time derivative at one instant; diagnostic/test surface for the integrator's
// inner loop (the loop itself uses precomputed tables).
LifecycleState rhs(const LifecycleState& state, double t, const ScenarioConfig& cfg);

// Per-substate decomposition rhs = inflow - advance_out - death, for mass
// bookkeeping audits.
struct FluxBreakdown {
    std::vector<double> inflow, advance_out, death;  // each 4J
};
FluxBreakdown rhs_fluxes(const LifecycleState& state, double t, const ScenarioConfig& cfg);

// Classical fixed-step 4th-order integration on the dt grid; stores every node
// state and node derivative.
Trajectory integrate_forward(const ScenarioConfig& cfg);
Trajectory integrate_forward(const ScenarioConfig& cfg, const Forcing& forcing);

// Stationary occupancy of the J substates of each stage under frozen rates at
// `temp`; order {egg, larva, pupa, adult}. Each vector sums to 1.
std::array<std::vector<double>, 4> equilibrium_substate_profile(double temp_c,
                                                                const ScenarioConfig& cfg);

// Copy of cfg with the free timings replaced (order = schedule declaration).
ScenarioConfig with_timings(const ScenarioConfig& cfg, const std::vector<double>& free_timings);

}  // namespace mosqopt
