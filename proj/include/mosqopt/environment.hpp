#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace mosqopt {

// One row of the input weather table.
struct TemperatureRecord {
    int year = 0;
    int month = 0;
    int day = 0;
    double temp_c = 0.0;
};

struct TemperatureSeries {
    std::vector<TemperatureRecord> records;  // strictly increasing dates, gaps imputed
};

// Day-of-year climatology: multi-year means smoothed with a centered moving
// average, periodic over 365 days. Entry 366 mirrors entry 365 so leap-day
// lookups stay in range; evaluation wraps with period 365, which avoids a
// one-day discontinuity at the year boundary.
struct SeasonalTemperature {
    std::array<double, 366> day_temp_c{};  // [d-1] holds day d
    int smoothing_window_days = 7;
};

// Piecewise-linear rate-vs-temperature curve, clamped at both ends. A single
// sample acts as a constant.
struct RateCurve {
    // (temp_c, rate) pairs with strictly increasing temperatures
    std::vector<std::array<double, 2>> samples;
};

// The temperature-driven parameter set of the life-cycle model. Development
// rates are per day; mortalities per day; oviposition is eggs laid per
// gonotrophic cycle; bites_per_cycle is human bites per cycle; eip_rate is the
// reciprocal of the extrinsic incubation period.
struct RateSet {
    RateCurve dev_egg;      // egg -> larva
    RateCurve dev_larva;    // larva -> pupa
    RateCurve dev_pupa;     // pupa -> adult
    RateCurve gonotrophic;  // adult cycle completion
    RateCurve mort_egg;
    RateCurve mort_larva;
    RateCurve mort_pupa;
    RateCurve mort_adult;
    RateCurve oviposition;
    RateCurve bites_per_cycle;
    RateCurve eip_rate;
};

// Reads a `date,temp_c` CSV (ISO dates, strictly increasing). A single
// missing calendar day is imputed as the mean of its neighbours; runs of two
// or more missing days raise ConfigError listing the gap. Temperatures
// outside [-50, 60] degC are rejected.
TemperatureSeries load_temperature_series(const std::filesystem::path& path);

// Collapses a series to the day-of-year climatology. Requires at least one
// observation for every day 1..365 after imputation; window must be odd and
// >= 1. Day-366 observations (leap Dec 31) fold into day 365.
SeasonalTemperature seasonal_profile(const TemperatureSeries& series, int smoothing_window_days = 7);

// Temperature at simulation time t (days since start). start_day_of_year = 1
// means the simulation starts on Jan 1. Linear interpolation between daily
// values, periodic over 365 days.
double temperature_at(const SeasonalTemperature& profile, double t_days, int start_day_of_year);

double rate_at(const RateCurve& curve, double temp_c);

void validate_curve(const RateCurve& curve, const std::string& label);

// Minimum of the curve over [tmin, tmax] (piecewise-linear, so attained at an
// endpoint or an interior sample).
double curve_min(const RateCurve& curve, double tmin, double tmax);

// Validates every curve and checks that the development rates (the four
// transit-time denominators) stay strictly positive over the operational
// temperature range of the given profile.
void validate_rates(const RateSet& rates, const SeasonalTemperature& profile);

// Range of day values attained by a profile (min, max).
std::array<double, 2> profile_range(const SeasonalTemperature& profile);

// Builders used by presets and tests: fill a profile directly from a function
// of day-of-year coordinate in [0, 365), no smoothing applied.
SeasonalTemperature seasonal_from_function(const std::function<double(double)>& day_to_temp);
SeasonalTemperature constant_seasonal(double temp_c);

}  // namespace mosqopt
