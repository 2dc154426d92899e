#include "kcoddp/pipeline/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "kcoddp/error.hpp"

namespace kcoddp::pipeline {

RunConfig::RunConfig() {
  chain.n_iter = 20000;
  chain.burn_in = 5000;
  chain.thin = 10;
  chain.k_init = 15;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ParseError("config: '" + key + "' expects a number, got '" + v + "'");
  }
  if (pos != v.size()) throw ParseError("config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long out = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    out = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw ParseError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  if (pos != v.size())
    throw ParseError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Get>
Field real(Get get) {
  return {[get](RunConfig& c, const std::string& k, const std::string& v) { get(c) = to_double(k, v); },
          [get](const RunConfig& c) { return fmt(get(const_cast<RunConfig&>(c))); }};
}

template <typename Get>
Field count(Get get) {
  return {[get](RunConfig& c, const std::string& k, const std::string& v) {
            get(c) = static_cast<std::remove_reference_t<decltype(get(c))>>(to_uint(k, v));
          },
          [get](const RunConfig& c) { return std::to_string(get(const_cast<RunConfig&>(c))); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"seed", count([](RunConfig& c) -> std::uint64_t& { return c.seed; })},
      {"n_iter", count([](RunConfig& c) -> std::size_t& { return c.chain.n_iter; })},
      {"burn_in", count([](RunConfig& c) -> std::size_t& { return c.chain.burn_in; })},
      {"thin", count([](RunConfig& c) -> std::size_t& { return c.chain.thin; })},
      {"k_init", count([](RunConfig& c) -> std::size_t& { return c.chain.k_init; })},
      {"k_max", count([](RunConfig& c) -> std::size_t& { return c.hyper.k_max; })},
      {"n_chains", count([](RunConfig& c) -> std::size_t& { return c.n_chains; })},
      {"threads", count([](RunConfig& c) -> std::size_t& { return c.threads; })},
      {"epsilon", real([](RunConfig& c) -> double& { return c.epsilon; })},
      {"n0", real([](RunConfig& c) -> double& { return c.hyper.n0; })},
      {"eta", real([](RunConfig& c) -> double& { return c.hyper.eta; })},
      {"b_lambda", real([](RunConfig& c) -> double& { return c.hyper.b_lambda; })},
      {"uniform_lo", real([](RunConfig& c) -> double& { return c.hyper.uniform_lo; })},
      {"uniform_hi", real([](RunConfig& c) -> double& { return c.hyper.uniform_hi; })},
      {"A", real([](RunConfig& c) -> double& { return c.hyper.A; })},
      {"tau_sd", real([](RunConfig& c) -> double& { return c.hyper.tau_sd; })},
      {"sigma_log_mean", real([](RunConfig& c) -> double& { return c.hyper.sigma_log_mean; })},
      {"sigma_log_sd", real([](RunConfig& c) -> double& { return c.hyper.sigma_log_sd; })},
      {"regression_prior_var", real([](RunConfig& c) -> double& { return c.hyper.regression_prior_var; })},
      {"phi_init", real([](RunConfig& c) -> double& { return c.chain.phi_init; })},
      {"a_delta_init", real([](RunConfig& c) -> double& { return c.chain.a_delta_init; })},
      {"b_psi_init", real([](RunConfig& c) -> double& { return c.chain.b_psi_init; })},
      {"alpha_init", real([](RunConfig& c) -> double& { return c.chain.alpha_init; })},
      {"lambda_init", real([](RunConfig& c) -> double& { return c.chain.lambda_init; })},
      {"tau_init", real([](RunConfig& c) -> double& { return c.chain.tau_init; })},
      {"sigma_init", real([](RunConfig& c) -> double& { return c.chain.sigma_init; })},
      {"w_birth", real([](RunConfig& c) -> double& { return c.chain.weights.birth; })},
      {"w_death", real([](RunConfig& c) -> double& { return c.chain.weights.death; })},
      {"w_no_change", real([](RunConfig& c) -> double& { return c.chain.weights.no_change; })},
      {"scale.V", real([](RunConfig& c) -> double& { return c.chain.scales.V; })},
      {"scale.z", real([](RunConfig& c) -> double& { return c.chain.scales.z; })},
      {"scale.theta1", real([](RunConfig& c) -> double& { return c.chain.scales.theta1; })},
      {"scale.theta2", real([](RunConfig& c) -> double& { return c.chain.scales.theta2; })},
      {"split.V", real([](RunConfig& c) -> double& { return c.chain.scales.split_V; })},
      {"split.z", real([](RunConfig& c) -> double& { return c.chain.scales.split_z; })},
      {"split.theta1", real([](RunConfig& c) -> double& { return c.chain.scales.split_theta1; })},
      {"split.theta2", real([](RunConfig& c) -> double& { return c.chain.scales.split_theta2; })},
      {"scale.phi", real([](RunConfig& c) -> double& { return c.chain.scales.phi; })},
      {"scale.a_delta", real([](RunConfig& c) -> double& { return c.chain.scales.a_delta; })},
      {"scale.b_psi", real([](RunConfig& c) -> double& { return c.chain.scales.b_psi; })},
      {"scale.alpha", real([](RunConfig& c) -> double& { return c.chain.scales.alpha; })},
      {"scale.lambda", real([](RunConfig& c) -> double& { return c.chain.scales.lambda; })},
      {"scale.tau", real([](RunConfig& c) -> double& { return c.chain.scales.tau; })},
      {"scale.sigma", real([](RunConfig& c) -> double& { return c.chain.scales.sigma; })},
      {"scale.psi1", real([](RunConfig& c) -> double& { return c.chain.scales.psi1; })},
      {"scale.psi2", real([](RunConfig& c) -> double& { return c.chain.scales.psi2; })},
      {"scale.delta", real([](RunConfig& c) -> double& { return c.chain.scales.delta; })},
      {"scale.alpha0", real([](RunConfig& c) -> double& { return c.chain.scales.alpha0; })},
      {"scale.alpha1", real([](RunConfig& c) -> double& { return c.chain.scales.alpha1; })},
  };
  return table;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError("config line " + std::to_string(lineno) + ": empty key or value");
    out[key] = value;
  }
  return out;
}

ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void apply_config(RunConfig& config, const ConfigMap& entries) {
  const auto& table = fields();
  for (const auto& [key, value] : entries) {
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const auto& f) { return f.first == key; });
    if (it == table.end()) throw ParseError("config: unknown key '" + key + "'");
    it->second.set(config, key, value);
  }
}

std::string format_config(const RunConfig& config) {
  std::ostringstream os;
  for (const auto& [key, field] : fields()) os << key << " = " << field.get(config) << "\n";
  return os.str();
}

std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv(kSeedEnvVar);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return to_uint(kSeedEnvVar, v);
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const RunConfig& from_file) {
  if (flag) return *flag;
  if (const auto env = seed_from_env()) return *env;
  return from_file.seed;
}

}  // namespace kcoddp::pipeline
