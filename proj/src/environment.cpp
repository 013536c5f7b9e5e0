#include "mosqopt/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mosqopt/common.hpp"

namespace mosqopt {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static const int base[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return base[m - 1];
}

// Days since 1970-01-01 (proleptic Gregorian), for gap detection.
long civil_to_days(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

void days_to_civil(long z, int& y, int& m, int& d) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long yy = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

int day_of_year(int y, int m, int d) {
    int doy = d;
    for (int i = 1; i < m; ++i) doy += days_in_month(y, i);
    return doy;
}

std::string format_date(int y, int m, int d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
    return buf;
}

bool parse_iso_date(const std::string& s, int& y, int& m, int& d) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    y = std::stoi(s.substr(0, 4));
    m = std::stoi(s.substr(5, 2));
    d = std::stoi(s.substr(8, 2));
    if (m < 1 || m > 12) return false;
    if (d < 1 || d > days_in_month(y, m)) return false;
    return true;
}

}  // namespace

TemperatureSeries load_temperature_series(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open temperature file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty temperature file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "date,temp_c")
        throw ConfigError(path.string() + ": expected header 'date,temp_c', got '" + line + "'");

    TemperatureSeries series;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected 'date,temp_c' row");
        const std::string date_s = line.substr(0, comma);
        const std::string temp_s = line.substr(comma + 1);
        TemperatureRecord rec;
        if (!parse_iso_date(date_s, rec.year, rec.month, rec.day))
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad date '" + date_s + "'");
        std::size_t used = 0;
        try {
            rec.temp_c = std::stod(temp_s, &used);
        } catch (const std::exception&) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad temperature '" + temp_s + "'");
        }
        while (used < temp_s.size() && std::isspace(static_cast<unsigned char>(temp_s[used]))) ++used;
        if (used != temp_s.size())
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad temperature '" + temp_s + "'");
        if (!std::isfinite(rec.temp_c) || rec.temp_c < -60.0 || rec.temp_c > 60.0)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": temperature " + temp_s +
                              " outside plausible range [-60, 60] degC");
        series.records.push_back(rec);
    }
    if (series.records.empty()) throw ConfigError(path.string() + ": no data rows");

    // Normalize row order to date order, then check duplicates and fill gaps.
    std::stable_sort(series.records.begin(), series.records.end(),
                     [](const TemperatureRecord& a, const TemperatureRecord& b) {
                         return civil_to_days(a.year, a.month, a.day) < civil_to_days(b.year, b.month, b.day);
                     });
    TemperatureSeries out;
    out.records.reserve(series.records.size());
    long prev_days = 0;
    for (std::size_t i = 0; i < series.records.size(); ++i) {
        const auto& r = series.records[i];
        const long days = civil_to_days(r.year, static_cast<unsigned>(r.month), static_cast<unsigned>(r.day));
        if (i > 0) {
            const long gap = days - prev_days;
            if (gap == 0)
                throw ConfigError(path.string() + ": duplicate date " +
                                  format_date(r.year, r.month, r.day));
            if (gap == 2) {
                // one missing day: impute as the mean of its neighbours
                int y, m, d;
                days_to_civil(prev_days + 1, y, m, d);
                out.records.push_back(
                    {y, m, d, 0.5 * (series.records[i - 1].temp_c + r.temp_c)});
            } else if (gap > 2) {
                std::string missing;
                for (long z = prev_days + 1; z < days; ++z) {
                    int y, m, d;
                    days_to_civil(z, y, m, d);
                    if (!missing.empty()) missing += ", ";
                    missing += format_date(y, m, d);
                }
                throw ConfigError(path.string() + ": gap of " + std::to_string(gap - 1) +
                                  " missing days (" + missing + "); only single-day gaps are imputed");
            }
        }
        out.records.push_back(r);
        prev_days = days;
    }
    return out;
}

SeasonalTemperature seasonal_profile(const TemperatureSeries& series, int smoothing_window_days) {
    if (smoothing_window_days < 1 || smoothing_window_days % 2 == 0)
        throw ConfigError("smoothing window must be an odd positive day count, got " +
                          std::to_string(smoothing_window_days));
    std::array<double, 365> sums{};
    std::array<int, 365> counts{};
    for (const auto& r : series.records) {
        int doy = day_of_year(r.year, r.month, r.day);
        if (doy == 366) doy = 365;  // leap Dec 31 folds into day 365
        sums[doy - 1] += r.temp_c;
        counts[doy - 1] += 1;
    }
    int n_missing = 0;
    std::string example;
    for (int d = 0; d < 365; ++d) {
        if (counts[d] == 0) {
            ++n_missing;
            if (example.empty()) example = std::to_string(d + 1);
        }
    }
    if (n_missing > 0)
        throw ConfigError("temperature series does not cover a full year: " +
                          std::to_string(n_missing) + " day(s)-of-year missing (first: day " +
                          example + ")");

    std::array<double, 365> means{};
    for (int d = 0; d < 365; ++d) means[d] = sums[d] / counts[d];

    SeasonalTemperature profile;
    profile.smoothing_window_days = smoothing_window_days;
    const int half = smoothing_window_days / 2;
    for (int d = 0; d < 365; ++d) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k) {
            int idx = (d + k) % 365;
            if (idx < 0) idx += 365;
            acc += means[idx];
        }
        profile.day_temp_c[d] = acc / smoothing_window_days;
    }
    profile.day_temp_c[365] = profile.day_temp_c[364];
    return profile;
}

double temperature_at(const SeasonalTemperature& profile, double t_days, int start_day_of_year) {
    if (start_day_of_year < 1 || start_day_of_year > 365)
        throw ConfigError("start_day_of_year must be in [1, 365], got " +
                          std::to_string(start_day_of_year));
    double d = std::fmod(static_cast<double>(start_day_of_year - 1) + t_days, 365.0);
    if (d < 0.0) d += 365.0;
    const int i = std::min(static_cast<int>(d), 364);
    const double frac = d - i;
    const int j = (i + 1) % 365;
    return profile.day_temp_c[i] + frac * (profile.day_temp_c[j] - profile.day_temp_c[i]);
}

double rate_at(const RateCurve& curve, double temp_c) {
    const auto& s = curve.samples;
    if (s.empty()) throw ConfigError("rate curve has no samples");
    if (temp_c <= s.front()[0]) return s.front()[1];
    if (temp_c >= s.back()[0]) return s.back()[1];
    // samples are few (typically < 16); linear scan is fine and branch-friendly
    std::size_t i = 1;
    while (s[i][0] < temp_c) ++i;
    const double t0 = s[i - 1][0], t1 = s[i][0];
    const double r0 = s[i - 1][1], r1 = s[i][1];
    return r0 + (r1 - r0) * (temp_c - t0) / (t1 - t0);
}

void validate_curve(const RateCurve& curve, const std::string& label) {
    if (curve.samples.empty()) throw ConfigError(label + ": rate curve needs at least one sample");
    double prev = -1e300;
    for (const auto& p : curve.samples) {
        if (!std::isfinite(p[0]) || !std::isfinite(p[1]))
            throw ConfigError(label + ": non-finite curve sample");
        if (p[0] <= prev) throw ConfigError(label + ": curve temperatures must be strictly increasing");
        if (p[1] < 0.0) throw ConfigError(label + ": negative rate at " + std::to_string(p[0]) + " degC");
        prev = p[0];
    }
}

double curve_min(const RateCurve& curve, double tmin, double tmax) {
    double m = std::min(rate_at(curve, tmin), rate_at(curve, tmax));
    for (const auto& p : curve.samples)
        if (p[0] > tmin && p[0] < tmax) m = std::min(m, p[1]);
    return m;
}

std::array<double, 2> profile_range(const SeasonalTemperature& profile) {
    double lo = profile.day_temp_c[0], hi = profile.day_temp_c[0];
    for (int d = 0; d < 365; ++d) {
        lo = std::min(lo, profile.day_temp_c[d]);
        hi = std::max(hi, profile.day_temp_c[d]);
    }
    return {lo, hi};
}

void validate_rates(const RateSet& rates, const SeasonalTemperature& profile) {
    validate_curve(rates.dev_egg, "dev_egg");
    validate_curve(rates.dev_larva, "dev_larva");
    validate_curve(rates.dev_pupa, "dev_pupa");
    validate_curve(rates.gonotrophic, "gonotrophic");
    validate_curve(rates.mort_egg, "mort_egg");
    validate_curve(rates.mort_larva, "mort_larva");
    validate_curve(rates.mort_pupa, "mort_pupa");
    validate_curve(rates.mort_adult, "mort_adult");
    validate_curve(rates.oviposition, "oviposition");
    validate_curve(rates.bites_per_cycle, "bites_per_cycle");
    validate_curve(rates.eip_rate, "eip_rate");

    const auto range = profile_range(profile);
    const struct {
        const RateCurve* c;
        const char* name;
    } devs[] = {{&rates.dev_egg, "dev_egg"},
                {&rates.dev_larva, "dev_larva"},
                {&rates.dev_pupa, "dev_pupa"},
                {&rates.gonotrophic, "gonotrophic"}};
    for (const auto& d : devs) {
        if (curve_min(*d.c, range[0], range[1]) <= 0.0)
            throw ConfigError(std::string(d.name) +
                              ": development rate must be strictly positive over the operating "
                              "temperature range [" +
                              std::to_string(range[0]) + ", " + std::to_string(range[1]) + "] degC");
    }
}

SeasonalTemperature seasonal_from_function(const std::function<double(double)>& day_to_temp) {
    SeasonalTemperature profile;
    for (int d = 0; d < 365; ++d) profile.day_temp_c[d] = day_to_temp(static_cast<double>(d));
    profile.day_temp_c[365] = profile.day_temp_c[364];
    return profile;
}

SeasonalTemperature constant_seasonal(double temp_c) {
    return seasonal_from_function([temp_c](double) { return temp_c; });
}

}  // namespace mosqopt
