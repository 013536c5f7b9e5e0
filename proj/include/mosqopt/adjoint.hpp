#pragma once

#include <functional>
#include <vector>

#include "mosqopt/risk.hpp"

namespace mosqopt {

// Costates on the forward grid, flat layout [lam_E, lam_L, lam_P, lam_A] per
// node, matching LifecycleState. lambda(T) = 0 by construction.
struct AdjointTrajectory {
    double t0 = 0.0;
    double dt = 0.0;
    int n_steps = 0;
    int J = 0;
    std::vector<double> lambda;  // (n_steps+1) x 4J, row-major
    std::uint64_t grid_hash = 0;

    std::span<const double> lambda_at(int node) const {
        return {lambda.data() + static_cast<std::size_t>(node) * 4 * J,
                static_cast<std::size_t>(4 * J)};
    }
    double time_at(int node) const { return t0 + node * dt; }
};

// Costate time derivative at one instant; diagnostic/test surface. `lambda` is
// the flat 4J vector; forward states are taken from the stored trajectory
// (cubic-Hermite dense output between nodes). The trajectory must carry the
// same grid/schedule fingerprint as cfg.
std::vector<double> adjoint_rhs(const std::vector<double>& lambda, double t, const Trajectory& traj,
                                const ScenarioConfig& cfg);

// Backward fixed-step 4th-order sweep from lambda(T)=0 on the forward grid.
// Forward states at half-steps come from cubic-Hermite dense output (stored
// node derivatives), keeping the backward pass at full integrator order.
AdjointTrajectory integrate_backward(const Trajectory& traj, const ScenarioConfig& cfg);
AdjointTrajectory integrate_backward(const Trajectory& traj, const ScenarioConfig& cfg,
                                     const Forcing& forcing);

// Same sweep with the adult-row source term replaced by `adult_source(t)`
// (the production source is dR0/dA at temperature(t)). Lets tests drive the
// costate system with analytically tractable sources.
AdjointTrajectory integrate_backward(const Trajectory& traj, const ScenarioConfig& cfg,
                                     const Forcing& forcing,
                                     const std::function<double(double)>& adult_source);

// Exact gradient of the cumulative-risk objective with respect to every free
// intervention timing (schedule order): trapezoidal quadrature of the
// adjoint-weighted timing sensitivities along the grid.
std::vector<double> gradient(const Trajectory& traj, const AdjointTrajectory& adj,
                             const ScenarioConfig& cfg);
std::vector<double> gradient(const Trajectory& traj, const AdjointTrajectory& adj,
                             const ScenarioConfig& cfg, const Forcing& forcing);

// Central-difference reference gradient: 2 forward solves per free timing.
// The independent oracle the adjoint path is tested against.
std::vector<double> finite_difference_gradient(const ScenarioConfig& cfg, double eps_days);
std::vector<double> finite_difference_gradient(const ScenarioConfig& cfg, double eps_days,
                                               const Forcing& forcing);

struct ObjectiveGradient {
    double F = 0.0;
    std::vector<double> grad;
};

// Forward solve + objective + backward solve + gradient in one call.
ObjectiveGradient objective_gradient(const ScenarioConfig& cfg, const Forcing& forcing);

}  // namespace mosqopt
