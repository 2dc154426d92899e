#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace kcoddp::pipeline {

inline constexpr std::size_t kDaylightHours = 12;
inline constexpr std::size_t kSeasonMonths = 7;  // April to October
inline constexpr double kW126Threshold = 21.0;   // ppm-hours

/// Hourly concentrations (ppm) for days 1..T, hours 1..12, with the season
/// month (1 = April, ..., 7 = October) of every day.
struct HourlyOzoneSeries {
  std::vector<std::array<double, kDaylightHours>> q;
  std::vector<int> month_of_day;

  std::size_t days() const { return q.size(); }
};

/// Q / (1 + 4403 exp(-126 Q)).
double w126_weight(double q);

struct W126Result {
  std::vector<double> daily;                 // Z_t
  std::array<double, kSeasonMonths> monthly{};  // M_j
  std::array<double, kSeasonMonths - 2> running{};  // three-month totals ending at months 3..7
  double annual = 0.0;                       // max of the running totals
  bool exceeds = false;                      // annual >= 21
};

W126Result w126_annual(const HourlyOzoneSeries& series);

/// Calendar months of April 1 .. October 31 (214 days).
std::vector<int> calendar_month_map();

/// Header day,hour,q_ppm[,month]. Every (day, hour) for days 1..T and hours
/// 1..12 must appear once. Without a month column T must be 214 and the
/// calendar map is used.
HourlyOzoneSeries read_hourly_csv(std::istream& in);
HourlyOzoneSeries read_hourly_csv(const std::string& path);

}  // namespace kcoddp::pipeline
