#include "mosqopt/controls.hpp"

#include <cmath>

#include "mosqopt/common.hpp"

namespace mosqopt {

namespace {

// Numerically stable logistic.
double sigma(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double sigma_deriv(double x) {
    const double s = sigma(x);
    return s * (1.0 - s);
}

// Beyond this many logistic widths the bump and its derivatives are below
// 1e-19; returning exact zero keeps far-field work out of the hot loops.
constexpr double kTailWidths = 45.0;

}  // namespace

const char* to_string(InterventionKind kind) {
    switch (kind) {
        case InterventionKind::Larvicide: return "larvicide";
        case InterventionKind::Adulticide: return "adulticide";
        case InterventionKind::HabitatElimination: return "habitat_elimination";
    }
    return "?";
}

std::vector<std::size_t> ControlSchedule::free_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < interventions.size(); ++i)
        if (interventions[i].free_timing) idx.push_back(i);
    return idx;
}

std::vector<double> ControlSchedule::free_timings() const {
    std::vector<double> t;
    for (const auto& iv : interventions)
        if (iv.free_timing) t.push_back(iv.timing_days);
    return t;
}

void ControlSchedule::set_free_timings(const std::vector<double>& timings) {
    std::size_t k = 0;
    for (auto& iv : interventions)
        if (iv.free_timing) {
            if (k >= timings.size()) throw NumericError("timing vector shorter than free schedule");
            iv.timing_days = timings[k++];
        }
    if (k != timings.size()) throw NumericError("timing vector longer than free schedule");
}

std::vector<std::array<double, 2>> ControlSchedule::free_bounds() const {
    std::vector<std::array<double, 2>> b;
    for (const auto& iv : interventions)
        if (iv.free_timing) b.push_back({iv.bounds_lo_days, iv.bounds_hi_days});
    return b;
}

double smooth_pulse(double t, double onset, double duration, double sharpness) {
    const double a = sharpness * (t - onset);
    const double b = sharpness * (onset + duration - t);
    if (a < -kTailWidths || b < -kTailWidths) return 0.0;
    return sigma(a) * sigma(b);
}

double smooth_pulse_donset(double t, double onset, double duration, double sharpness) {
    const double a = sharpness * (t - onset);
    const double b = sharpness * (onset + duration - t);
    if (a < -kTailWidths || b < -kTailWidths) return 0.0;
    return sharpness * (sigma(a) * sigma_deriv(b) - sigma_deriv(a) * sigma(b));
}

double induced_mortality(const ControlSchedule& schedule, InterventionKind kind, double t) {
    double r = 0.0;
    for (const auto& iv : schedule.interventions)
        if (iv.kind == kind && kind != InterventionKind::HabitatElimination)
            r += iv.efficacy * smooth_pulse(t, iv.timing_days, iv.duration_days, iv.edge_sharpness_per_day);
    return r;
}

double habitat_delta(const Intervention& iv, double c0, double t) {
    const double u = t - iv.timing_days;
    const double a = iv.edge_sharpness_per_day * u;
    if (a < -kTailWidths) return 0.0;
    const double decay = u / iv.recovery_days;
    if (decay > 700.0) return 0.0;
    // sigma(a) * exp(-decay), composed stably: for u < 0 both factors are
    // computed from exp of negative arguments (valid because validation
    // enforces sharpness > 1/recovery).
    if (a >= 0.0) return iv.efficacy * c0 * std::exp(-decay) / (1.0 + std::exp(-a));
    const double e = std::exp(a - decay);
    return iv.efficacy * c0 * e / (1.0 + std::exp(a));
}

double habitat_delta_donset(const Intervention& iv, double c0, double t) {
    const double u = t - iv.timing_days;
    const double k = iv.edge_sharpness_per_day;
    const double a = k * u;
    if (a < -kTailWidths) return 0.0;
    const double inv_tau = 1.0 / iv.recovery_days;
    const double decay = u * inv_tau;
    if (decay > 700.0) return 0.0;
    // onset enters only through u = t - p, so d/dp = -d/du of sigma(ku) e^{-u/tau},
    // i.e. (inv_tau * sigma - k * sigma') * e^{-decay}
    if (a >= 0.0) {
        const double sig = 1.0 / (1.0 + std::exp(-a));
        const double dsig = sig * (1.0 - sig);
        return iv.efficacy * c0 * (inv_tau * sig - k * dsig) * std::exp(-decay);
    }
    const double ea = std::exp(a);
    const double sig = ea / (1.0 + ea);
    const double sig_env = std::exp(a - decay) / (1.0 + ea);  // sigma * e^{-decay}, stable
    return iv.efficacy * c0 * sig_env * (inv_tau - k * (1.0 - sig));
}

double alpha_at(const AlphaSeries& alpha, double t) {
    const auto& s = alpha.samples;
    if (s.empty()) return 1.0;
    if (s.size() == 1 || t <= s.front()[0]) return s.front()[1];
    if (t >= s.back()[0]) return s.back()[1];
    std::size_t i = 1;
    while (s[i][0] < t) ++i;
    const double t0 = s[i - 1][0], t1 = s[i][0];
    const double a0 = s[i - 1][1], a1 = s[i][1];
    return a0 + (a1 - a0) * (t - t0) / (t1 - t0);
}

double carrying_capacity(const CarryingCapacityModel& model, const ControlSchedule& schedule,
                         double t) {
    double removed = 0.0;
    for (const auto& iv : schedule.interventions)
        if (iv.kind == InterventionKind::HabitatElimination)
            removed += habitat_delta(iv, model.c0, t);
    return (model.c0 - removed) * alpha_at(model.alpha, t);
}

void validate_intervention(const Intervention& iv, const std::string& label) {
    if (!std::isfinite(iv.timing_days)) throw ConfigError(label + ": non-finite timing");
    if (iv.free_timing) {
        if (iv.bounds_lo_days < 0.0 || iv.bounds_lo_days > iv.bounds_hi_days)
            throw ConfigError(label + ": timing bounds must satisfy 0 <= lo <= hi");
        if (iv.timing_days < iv.bounds_lo_days || iv.timing_days > iv.bounds_hi_days)
            throw ConfigError(label + ": timing outside its bounds");
    }
    if (iv.edge_sharpness_per_day <= 0.0) throw ConfigError(label + ": edge sharpness must be > 0");
    if (iv.kind == InterventionKind::HabitatElimination) {
        if (iv.efficacy < 0.0 || iv.efficacy >= 1.0)
            throw ConfigError(label + ": habitat efficacy must be in [0, 1)");
        if (iv.recovery_days <= 0.0) throw ConfigError(label + ": recovery time must be > 0");
        if (iv.edge_sharpness_per_day * iv.recovery_days <= 1.0)
            throw ConfigError(label +
                              ": edge sharpness must exceed 1/recovery (otherwise the knockdown "
                              "grows without bound before onset)");
    } else {
        if (iv.efficacy < 0.0) throw ConfigError(label + ": pulse efficacy must be >= 0");
        if (iv.duration_days <= 0.0) throw ConfigError(label + ": pulse duration must be > 0");
    }
}

}  // namespace mosqopt
