#include "kcoddp/pipeline/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kcoddp/error.hpp"

namespace kcoddp::pipeline {

namespace {

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

double parse_number(const std::string& field, const std::string& what, std::size_t row) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    throw ParseError(what + ": row " + std::to_string(row) + ": not a number: '" + field + "'");
  }
  while (pos < field.size() && (field[pos] == ' ' || field[pos] == '\t')) ++pos;
  if (pos != field.size())
    throw ParseError(what + ": row " + std::to_string(row) + ": not a number: '" + field + "'");
  if (!std::isfinite(v))
    throw ParseError(what + ": row " + std::to_string(row) + ": non-finite value");
  return v;
}

std::vector<double> parse_list(const std::string& field, std::size_t row) {
  std::vector<double> out;
  if (field.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto semi = field.find(';', start);
    out.push_back(parse_number(field.substr(start, semi - start), "samples", row));
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  return out;
}

std::string join_list(const std::vector<double>& v) {
  std::string s = "\"";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += format_double(v[i]);
  }
  return s + "\"";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

const char* const kSampleHeader =
    "iter,k,V,z_s1,z_s2,z_t,theta1,theta2,phi,a_delta,b_psi,psi1,psi2,log_delta,tau,alpha,"
    "lambda,sigma,alpha0,alpha1,log_post";

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

model::SpaceTimePoint Scaling::apply(const model::SpaceTimePoint& p) const {
  model::SpaceTimePoint q;
  for (std::size_t d = 0; d < 3; ++d) q[d] = (p[d] - center[d]) / scale[d];
  return q;
}

model::SpaceTimePoint Scaling::invert(const model::SpaceTimePoint& p) const {
  model::SpaceTimePoint q;
  for (std::size_t d = 0; d < 3; ++d) q[d] = p[d] * scale[d] + center[d];
  return q;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (const char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

model::Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("dataset: empty input");
  const auto header = split_csv_line(strip_cr(line));
  const bool with_cov = header.size() == 5;
  const std::vector<std::string> expected = {"s1", "s2", "t", "y", "x_cmaq"};
  if (header.size() < 4 || header.size() > 5)
    throw ParseError("dataset: header must be s1,s2,t,y[,x_cmaq]");
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] != expected[i]) throw ParseError("dataset: header must be s1,s2,t,y[,x_cmaq]");

  model::Dataset data;
  std::vector<double> cov;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw ParseError("dataset: row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " fields");
    model::SpaceTimePoint p{parse_number(f[0], "dataset", row), parse_number(f[1], "dataset", row),
                            parse_number(f[2], "dataset", row)};
    data.points.push_back(p);
    data.y.push_back(parse_number(f[3], "dataset", row));
    if (with_cov) cov.push_back(parse_number(f[4], "dataset", row));
  }
  if (data.size() == 0) throw ParseError("dataset: no rows");
  if (with_cov) data.covariate = std::move(cov);
  return data;
}

model::Dataset read_dataset_csv(const std::string& path) {
  auto in = open_in(path);
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const model::Dataset& data) {
  out << (data.regression() ? "s1,s2,t,y,x_cmaq\n" : "s1,s2,t,y\n");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& p = data.points[i];
    out << format_double(p.s1) << ',' << format_double(p.s2) << ',' << format_double(p.t) << ','
        << format_double(data.y[i]);
    if (data.regression()) out << ',' << format_double((*data.covariate)[i]);
    out << '\n';
  }
}

void write_dataset_csv(const std::string& path, const model::Dataset& data) {
  auto out = open_out(path);
  write_dataset_csv(out, data);
}

Scaling fit_scaling(const model::Dataset& data) {
  require(data.size() >= 2, "scaling needs at least two rows");
  Scaling s;
  const auto n = static_cast<double>(data.size());
  for (std::size_t d = 0; d < 3; ++d) {
    double m = 0.0;
    for (const auto& p : data.points) m += p[d];
    m /= n;
    double ss = 0.0;
    for (const auto& p : data.points) ss += (p[d] - m) * (p[d] - m);
    const double sd = std::sqrt(ss / (n - 1.0));
    s.center[d] = m;
    s.scale[d] = sd > 0.0 ? sd : 1.0;  // a constant column is only centred
  }
  return s;
}

model::Dataset apply_scaling(const model::Dataset& data, const Scaling& scaling) {
  model::Dataset out = data;
  for (auto& p : out.points) p = scaling.apply(p);
  return out;
}

LoadedData prepare_dataset(model::Dataset raw, const LoadOptions& options) {
  LoadedData out;
  out.raw = raw;
  model::Dataset d = std::move(raw);
  if (d.regression() && options.log_transform_regression) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!(d.y[i] > 0.0) || !((*d.covariate)[i] > 0.0))
        throw ParseError("dataset: row " + std::to_string(i + 2) +
                         ": regression mode needs positive y and x_cmaq");
      d.y[i] = std::log(d.y[i]);
      (*d.covariate)[i] = std::log((*d.covariate)[i]);
    }
    out.log_transformed = true;
  }
  if (options.scale && d.size() >= 2) {
    out.scaling = fit_scaling(d);
    d = apply_scaling(d, out.scaling);
  }
  out.data = std::move(d);
  return out;
}

LoadedData load_dataset(const std::string& path, const LoadOptions& options) {
  return prepare_dataset(read_dataset_csv(path), options);
}

void write_samples_csv(std::ostream& out, const ttmcmc::SampleArchive& archive) {
  out << kSampleHeader << '\n';
  for (const auto& r : archive.rows) {
    std::vector<double> zs[3];
    for (const auto& z : r.var.z)
      for (std::size_t d = 0; d < 3; ++d) zs[d].push_back(z[d]);
    const auto& f = r.fixed;
    out << r.iter << ',' << r.var.k() << ',' << join_list(r.var.V) << ',' << join_list(zs[0]) << ','
        << join_list(zs[1]) << ',' << join_list(zs[2]) << ',' << join_list(r.var.theta1) << ','
        << join_list(r.var.theta2) << ',' << format_double(f.phi) << ','
        << format_double(f.a_delta) << ',' << format_double(f.b_psi) << ',' << join_list(f.psi1)
        << ',' << join_list(f.psi2) << ',' << join_list(f.log_delta) << ','
        << format_double(f.tau) << ',' << format_double(f.alpha) << ','
        << format_double(f.lambda) << ',' << format_double(f.sigma) << ','
        << format_double(f.alpha0) << ',' << format_double(f.alpha1) << ','
        << format_double(r.log_post) << '\n';
  }
}

void write_samples_csv(const std::string& path, const ttmcmc::SampleArchive& archive) {
  auto out = open_out(path);
  write_samples_csv(out, archive);
}

std::vector<ttmcmc::SampleRow> read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kSampleHeader)
    throw ParseError("samples: unexpected header");
  std::vector<ttmcmc::SampleRow> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 21) throw ParseError("samples: row " + std::to_string(row) + ": expected 21 fields");
    ttmcmc::SampleRow r;
    r.iter = static_cast<std::size_t>(parse_number(f[0], "samples", row));
    const auto k = static_cast<std::size_t>(parse_number(f[1], "samples", row));
    r.var.V = parse_list(f[2], row);
    const auto z1 = parse_list(f[3], row), z2 = parse_list(f[4], row), z3 = parse_list(f[5], row);
    r.var.theta1 = parse_list(f[6], row);
    r.var.theta2 = parse_list(f[7], row);
    if (r.var.V.size() != k || z1.size() != k || z2.size() != k || z3.size() != k ||
        r.var.theta1.size() != k || r.var.theta2.size() != k)
      throw ParseError("samples: row " + std::to_string(row) + ": block lengths differ from k");
    for (std::size_t i = 0; i < k; ++i) r.var.z.push_back({z1[i], z2[i], z3[i]});
    auto& fx = r.fixed;
    fx.phi = parse_number(f[8], "samples", row);
    fx.a_delta = parse_number(f[9], "samples", row);
    fx.b_psi = parse_number(f[10], "samples", row);
    fx.psi1 = parse_list(f[11], row);
    fx.psi2 = parse_list(f[12], row);
    fx.log_delta = parse_list(f[13], row);
    fx.tau = parse_number(f[14], "samples", row);
    fx.alpha = parse_number(f[15], "samples", row);
    fx.lambda = parse_number(f[16], "samples", row);
    fx.sigma = parse_number(f[17], "samples", row);
    fx.alpha0 = parse_number(f[18], "samples", row);
    fx.alpha1 = parse_number(f[19], "samples", row);
    r.log_post = parse_number(f[20], "samples", row);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ttmcmc::SampleRow> read_samples_csv(const std::string& path) {
  auto in = open_in(path);
  return read_samples_csv(in);
}

void write_acceptance_csv(std::ostream& out, const std::vector<ttmcmc::SampleArchive>& archives) {
  out << "chain,move,proposed,accepted,rate,kept_proposed,kept_accepted,kept_rate\n";
  for (const auto& a : archives)
    for (const auto type : {ttmcmc::MoveType::birth, ttmcmc::MoveType::death,
                            ttmcmc::MoveType::no_change}) {
      const auto i = static_cast<std::size_t>(type);
      out << a.chain_id << ',' << ttmcmc::move_name(type) << ',' << a.counts.proposed[i] << ','
          << a.counts.accepted[i] << ',' << format_double(a.counts.rate(type)) << ','
          << a.counts_kept.proposed[i] << ',' << a.counts_kept.accepted[i] << ','
          << format_double(a.counts_kept.rate(type)) << '\n';
    }
}

void write_acceptance_csv(const std::string& path,
                          const std::vector<ttmcmc::SampleArchive>& archives) {
  auto out = open_out(path);
  write_acceptance_csv(out, archives);
}

}  // namespace kcoddp::pipeline
