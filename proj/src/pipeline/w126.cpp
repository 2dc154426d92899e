#include "kcoddp/pipeline/w126.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "kcoddp/error.hpp"
#include "kcoddp/pipeline/io.hpp"

namespace kcoddp::pipeline {

double w126_weight(double q) {
  if (!(q >= 0.0) || !std::isfinite(q)) throw InvalidParameter("w126_weight: q must be >= 0");
  return q / (1.0 + 4403.0 * std::exp(-126.0 * q));
}

W126Result w126_annual(const HourlyOzoneSeries& s) {
  require(s.month_of_day.size() == s.days(), "w126: one month per day");
  W126Result r;
  std::array<bool, kSeasonMonths> seen{};
  r.daily.reserve(s.days());
  for (std::size_t t = 0; t < s.days(); ++t) {
    const int m = s.month_of_day[t];
    require(m >= 1 && m <= static_cast<int>(kSeasonMonths), "w126: month must lie in 1..7");
    double z = 0.0;
    for (const double q : s.q[t]) z += w126_weight(q);
    r.daily.push_back(z);
    r.monthly[static_cast<std::size_t>(m - 1)] += z;
    seen[static_cast<std::size_t>(m - 1)] = true;
  }
  for (std::size_t j = 0; j < kSeasonMonths; ++j)
    if (!seen[j]) throw InvalidParameter("w126: month " + std::to_string(j + 1) + " has no days");
  for (std::size_t j = 2; j < kSeasonMonths; ++j)
    r.running[j - 2] = r.monthly[j - 2] + r.monthly[j - 1] + r.monthly[j];
  r.annual = *std::max_element(r.running.begin(), r.running.end());
  r.exceeds = r.annual >= kW126Threshold;
  return r;
}

std::vector<int> calendar_month_map() {
  const int lengths[kSeasonMonths] = {30, 31, 30, 31, 31, 30, 31};
  std::vector<int> map;
  for (int m = 0; m < static_cast<int>(kSeasonMonths); ++m) map.insert(map.end(), lengths[m], m + 1);
  return map;
}

HourlyOzoneSeries read_hourly_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("hourly: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  const bool with_month = header.size() == 4;
  if (!(header.size() == 3 || with_month) || header[0] != "day" || header[1] != "hour" ||
      header[2] != "q_ppm" || (with_month && header[3] != "month"))
    throw ParseError("hourly: header must be day,hour,q_ppm[,month]");

  std::map<std::size_t, std::array<double, kDaylightHours>> q;
  std::map<std::size_t, std::array<bool, kDaylightHours>> have;
  std::map<std::size_t, int> month;
  std::size_t row = 1;
  const auto as_int = [&](const std::string& f, const char* what) {
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(f, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != f.size())
      throw ParseError("hourly: row " + std::to_string(row) + ": bad " + what + " '" + f + "'");
    return v;
  };
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw ParseError("hourly: row " + std::to_string(row) + ": wrong number of fields");
    const long day = as_int(f[0], "day");
    const long hour = as_int(f[1], "hour");
    if (day < 1) throw ParseError("hourly: row " + std::to_string(row) + ": day must be >= 1");
    if (hour < 1 || hour > static_cast<long>(kDaylightHours))
      throw ParseError("hourly: row " + std::to_string(row) + ": hour must lie in 1..12");
    double v = 0.0;
    try {
      std::size_t pos = 0;
      v = std::stod(f[2], &pos);
      if (pos != f[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("hourly: row " + std::to_string(row) + ": bad q_ppm '" + f[2] + "'");
    }
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ParseError("hourly: row " + std::to_string(row) + ": q_ppm must be >= 0");
    const auto d = static_cast<std::size_t>(day);
    const auto h = static_cast<std::size_t>(hour - 1);
    if (have[d][h]) throw ParseError("hourly: row " + std::to_string(row) + ": duplicate day/hour");
    have[d][h] = true;
    q[d][h] = v;
    if (with_month) {
      const long m = as_int(f[3], "month");
      if (m < 1 || m > static_cast<long>(kSeasonMonths))
        throw ParseError("hourly: row " + std::to_string(row) + ": month must lie in 1..7");
      const auto [it, inserted] = month.emplace(d, static_cast<int>(m));
      if (!inserted && it->second != m)
        throw ParseError("hourly: row " + std::to_string(row) + ": day has two months");
    }
  }
  if (q.empty()) throw ParseError("hourly: no rows");
  const std::size_t T = q.rbegin()->first;
  HourlyOzoneSeries s;
  for (std::size_t d = 1; d <= T; ++d) {
    const auto it = have.find(d);
    if (it == have.end() || !std::all_of(it->second.begin(), it->second.end(), [](bool b) { return b; }))
      throw ParseError("hourly: day " + std::to_string(d) + " is missing hours");
    s.q.push_back(q[d]);
    if (with_month) s.month_of_day.push_back(month[d]);
  }
  if (!with_month) {
    if (T != 214)
      throw ParseError("hourly: without a month column the series must cover the 214 days of April-October");
    s.month_of_day = calendar_month_map();
  }
  return s;
}

HourlyOzoneSeries read_hourly_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_hourly_csv(in);
}

}  // namespace kcoddp::pipeline
