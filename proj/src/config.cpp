// Copyright 2026 The cvim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "cvim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cvim/errors.hpp"
#include "cvim/semiclassical.hpp"

namespace cvim {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"machine", {"type"}},
      {"problem", {"assets", "asset_file", "matrix"}},
      {"physics", {"detuning", "kerr", "epsilon_max", "drive_scale", "fock_dim", "amplitude_floor"}},
      {"sweep", {"ramp_durations", "rates", "n_traj", "seed", "workers"}},
      {"output", {"path"}},
  };
  return s;
}

const std::set<std::string> kCvimOnly{"detuning", "kerr", "drive_scale", "fock_dim", "amplitude_floor"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

/// Strip a trailing "# ..." or "; ..." comment from a value.
std::string strip_comment(const std::string& v) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if ((v[i] == '#' || v[i] == ';') && (i == 0 || v[i - 1] == ' ' || v[i - 1] == '\t')) return trim(v.substr(0, i));
  return trim(v);
}

[[noreturn]] void fail(std::string_view field, std::string_view rule) {
  throw ConfigError("config: " + std::string(field) + ": " + std::string(rule));
}

double to_double(std::string_view field, const std::string& token) {
  const std::string t = trim(token);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    fail(field, "expected a number, got '" + t + "'");
  return v;
}

long to_long(std::string_view field, const std::string& token) {
  const std::string t = trim(token);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) fail(field, "expected an integer, got '" + t + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

std::vector<double> to_list(std::string_view field, const std::string& v) {
  std::vector<double> out;
  for (const auto& tok : split(v, ',')) out.push_back(to_double(field, tok));
  if (out.empty()) fail(field, "list must not be empty");
  return out;
}

Eigen::MatrixXd to_matrix(const std::string& v) {
  const auto rows = split(v, ';');
  const Index n = static_cast<Index>(rows.size());
  if (n == 0) fail("matrix", "must not be empty");
  Eigen::MatrixXd m(n, n);
  for (Index r = 0; r < n; ++r) {
    std::istringstream is(rows[static_cast<std::size_t>(r)]);
    std::vector<std::string> toks;
    for (std::string tok; is >> tok;) toks.push_back(tok);
    if (static_cast<Index>(toks.size()) != n) fail("matrix", "must be square (rows separated by ';')");
    for (Index c = 0; c < n; ++c) m(r, c) = to_double("matrix", toks[static_cast<std::size_t>(c)]);
  }
  return m;
}

std::vector<double> dedup_grid(std::string_view field, std::vector<double> values, std::vector<std::string>& warnings) {
  std::sort(values.begin(), values.end());
  const std::size_t before = values.size();
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.size() != before)
    warnings.push_back(std::string(field) + ": removed " + std::to_string(before - values.size()) +
                       " duplicate value(s)");
  return values;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_number(v[i]);
  return out;
}

}  // namespace

std::string_view machine_name(Machine m) { return m == Machine::cvim ? "cvim" : "qubit"; }

std::vector<double> default_ramp_durations(Machine m) {
  if (m == Machine::qubit) return {75.0, 150.0, 300.0, 600.0};
  return {25.0, 50.0, 100.0, 200.0};
}

std::vector<double> default_rates() {
  std::vector<double> r;
  for (int k = 0; k < 4; ++k) r.push_back(1e-3 * std::pow(10.0, 2.0 * k / 3.0));
  return r;
}

double predicted_photon_number(const SweepConfig& config) {
  const Eigen::MatrixXd j = cvim_coupling(config.problem);
  const double lambda =
      j.rows() < 2 ? 0.0 : Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(j).eigenvalues().maxCoeff();
  double scale = 1.0;
  for (double s : config.drive_scale) scale = std::max(scale, std::abs(s));
  return std::norm(steady_amplitude(config.detuning, std::max(lambda, 0.0), config.kerr, scale * config.epsilon_max, 0.0));
}

void check_config(SweepConfig& c) {
  c.problem.validate();
  const int n = c.problem.size();
  if (n < 1) fail("problem", "needs at least one spin");
  if (c.ramp_durations.empty()) fail("ramp_durations", "must not be empty");
  if (c.rates.empty()) fail("rates", "must not be empty");
  for (double t : c.ramp_durations)
    if (!(t > 0.0)) fail("ramp_durations", "every ramp duration must be > 0");
  for (double r : c.rates)
    if (!(r >= 0.0)) fail("rates", "every rate must be >= 0, got " + format_number(r));
  if (c.n_traj < 1) fail("n_traj", "must be >= 1");
  if (c.workers < 1) fail("workers", "must be >= 1");
  if (!(c.epsilon_max > 0.0)) fail("epsilon_max", "must be > 0");

  if (c.machine == Machine::qubit) {
    if (n > kMaxAnnealerQubits) fail("problem", "qubit machine supports at most " + std::to_string(kMaxAnnealerQubits) + " spins");
    return;
  }
  if (!(c.kerr > 0.0)) fail("kerr", "must be > 0");
  if (!(c.amplitude_floor >= 0.0)) fail("amplitude_floor", "must be >= 0");
  if (!c.drive_scale.empty() && static_cast<int>(c.drive_scale.size()) != n)
    fail("drive_scale", "needs one entry per spin");
  KPOSystemParams params = KPOSystemParams::uniform(c.detuning, c.kerr, 0.0, cvim_coupling(c.problem));
  if (!c.drive_scale.empty()) params.drive_scale = c.drive_scale;
  try {
    params.validate();
  } catch (const ParameterError& e) {
    fail("detuning", e.what());
  }
  double alpha_sq = 0.0;
  try {
    alpha_sq = predicted_photon_number(c);
  } catch (const DomainError&) {
    fail("epsilon_max", "drive never crosses the bifurcation threshold");
  }
  c.recommended_fock_dim = static_cast<int>(std::ceil(4.0 * alpha_sq + 6.0));
  if (c.fock_dim_auto) c.fock_dim = c.recommended_fock_dim;
  if (c.fock_dim < 4) fail("fock_dim", "must be >= 4");
  if (std::pow(static_cast<double>(c.fock_dim), n) > kMaxStateDimension)
    fail("fock_dim", "state dimension " + std::to_string(c.fock_dim) + "^" + std::to_string(n) + " exceeds " +
                         format_number(kMaxStateDimension));
  const std::string note = "fock_dim: " + std::to_string(c.fock_dim) + " is below the recommended " +
                           std::to_string(c.recommended_fock_dim) + " (4|alpha|^2 + 6)";
  if (c.fock_dim < c.recommended_fock_dim &&
      std::find(c.warnings.begin(), c.warnings.end(), note) == c.warnings.end())
    c.warnings.push_back(note);
}

SweepConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream is{std::string(text)};
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
  }

  std::map<std::string, std::string> values;  // "section.key" -> value
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (body.empty()) fail(section, "key outside of any section");
    if (it == schema().end()) fail(section, "unknown section [" + section + "]");
    for (const auto& [key, node] : body) {
      if (!it->second.count(key)) fail(section + "." + key, "unknown key");
      values[section + "." + key] = strip_comment(node.data());
    }
  }
  const auto get = [&](const std::string& k) -> const std::string* {
    const auto it = values.find(k);
    return it == values.end() ? nullptr : &it->second;
  };

  SweepConfig c;
  if (const auto* v = get("machine.type")) {
    if (*v == "cvim") c.machine = Machine::cvim;
    else if (*v == "qubit") c.machine = Machine::qubit;
    else fail("type", "must be 'cvim' or 'qubit', got '" + *v + "'");
  }
  if (c.machine == Machine::qubit) {
    c.epsilon_max = 6.0;
    for (const auto& k : kCvimOnly)
      if (get("physics." + k)) fail(k, "does not apply to machine 'qubit'");
  }

  const int sources = (get("problem.assets") ? 1 : 0) + (get("problem.asset_file") ? 1 : 0) + (get("problem.matrix") ? 1 : 0);
  if (sources != 1) fail("problem", "give exactly one of assets, asset_file, matrix");
  if (const auto* v = get("problem.assets")) {
    std::vector<long> assets;
    for (const auto& tok : split(*v, ',')) assets.push_back(to_long("assets", tok));
    if (assets.empty()) fail("assets", "list must not be empty");
    c.problem = npp_to_ising(assets);
  } else if (const auto* v = get("problem.asset_file")) {
    std::filesystem::path p(*v);
    if (p.is_relative()) p = base_dir / p;
    try {
      c.problem = npp_to_ising(read_asset_file(p));
    } catch (const std::exception& e) {
      fail("asset_file", e.what());
    }
  } else {
    try {
      c.problem = ising_from_matrix(to_matrix(*get("problem.matrix")));
    } catch (const ParameterError& e) {
      fail("matrix", e.what());
    }
  }

  if (const auto* v = get("physics.detuning")) c.detuning = to_double("detuning", *v);
  if (const auto* v = get("physics.kerr")) c.kerr = to_double("kerr", *v);
  if (const auto* v = get("physics.epsilon_max")) c.epsilon_max = to_double("epsilon_max", *v);
  if (const auto* v = get("physics.drive_scale")) c.drive_scale = to_list("drive_scale", *v);
  if (const auto* v = get("physics.amplitude_floor")) c.amplitude_floor = to_double("amplitude_floor", *v);
  if (const auto* v = get("physics.fock_dim"); v && *v != "auto") {
    const long d = to_long("fock_dim", *v);
    if (d < 4 || d > 1000) fail("fock_dim", "must be 'auto' or an integer in [4, 1000]");
    c.fock_dim = static_cast<int>(d);
    c.fock_dim_auto = false;
  }

  c.ramp_durations = default_ramp_durations(c.machine);
  c.rates = default_rates();
  if (const auto* v = get("sweep.ramp_durations"))
    c.ramp_durations = dedup_grid("ramp_durations", to_list("ramp_durations", *v), c.warnings);
  if (const auto* v = get("sweep.rates")) c.rates = dedup_grid("rates", to_list("rates", *v), c.warnings);
  if (const auto* v = get("sweep.n_traj")) c.n_traj = static_cast<int>(to_long("n_traj", *v));
  if (const auto* v = get("sweep.seed")) {
    const long s = to_long("seed", *v);
    if (s < 0) fail("seed", "must be >= 0");
    c.base_seed = static_cast<std::uint64_t>(s);
  }
  if (const auto* v = get("sweep.workers")) c.workers = static_cast<int>(to_long("workers", *v));
  if (const auto* v = get("output.path")) {
    if (v->empty()) fail("path", "must not be empty");
    c.output_path = *v;
  }
  check_config(c);
  return c;
}

SweepConfig validate_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

nlohmann::json SweepConfig::to_json() const {
  nlohmann::json j;
  j["machine"] = {{"type", std::string(machine_name(machine))}};
  nlohmann::json prob;
  if (!problem.assets.empty()) prob["assets"] = problem.assets;
  std::vector<std::vector<double>> rows;
  for (Index r = 0; r < problem.cost.rows(); ++r) {
    rows.emplace_back();
    for (Index col = 0; col < problem.cost.cols(); ++col) rows.back().push_back(problem.cost(r, col));
  }
  prob["cost"] = rows;
  if (problem.scale) prob["scale"] = *problem.scale;
  j["problem"] = prob;
  nlohmann::json phys{{"epsilon_max", epsilon_max}};
  if (machine == Machine::cvim) {
    phys["detuning"] = detuning;
    phys["kerr"] = kerr;
    phys["drive_scale"] = drive_scale.empty() ? std::vector<double>(static_cast<std::size_t>(problem.size()), 1.0)
                                              : drive_scale;
    phys["fock_dim"] = fock_dim;
    phys["fock_dim_auto"] = fock_dim_auto;
    phys["recommended_fock_dim"] = recommended_fock_dim;
    phys["amplitude_floor"] = amplitude_floor;
  }
  j["physics"] = phys;
  j["sweep"] = {{"ramp_durations", ramp_durations},
                {"rates", rates},
                {"n_traj", n_traj},
                {"seed", base_seed},
                {"workers", workers}};
  j["output"] = {{"path", output_path.generic_string()}};
  return j;
}

std::string SweepConfig::to_ini() const {
  std::ostringstream os;
  os << "[machine]\ntype = " << machine_name(machine) << "\n\n[problem]\n";
  if (!problem.assets.empty()) {
    os << "assets = ";
    for (std::size_t i = 0; i < problem.assets.size(); ++i) os << (i ? ", " : "") << problem.assets[i];
    os << "\n";
  } else {
    os << "matrix = ";
    for (Index r = 0; r < problem.cost.rows(); ++r) {
      if (r) os << "; ";
      for (Index col = 0; col < problem.cost.cols(); ++col) os << (col ? " " : "") << format_number(problem.cost(r, col));
    }
    os << "\n";
  }
  os << "\n[physics]\nepsilon_max = " << format_number(epsilon_max) << "\n";
  if (machine == Machine::cvim) {
    os << "detuning = " << format_number(detuning) << "\nkerr = " << format_number(kerr) << "\n";
    if (!drive_scale.empty()) os << "drive_scale = " << join(drive_scale) << "\n";
    os << "fock_dim = " << fock_dim << "\namplitude_floor = " << format_number(amplitude_floor) << "\n";
  }
  os << "\n[sweep]\nramp_durations = " << join(ramp_durations) << "\nrates = " << join(rates) << "\nn_traj = " << n_traj
     << "\nseed = " << base_seed << "\nworkers = " << workers << "\n\n[output]\npath = " << output_path.generic_string()
     << "\n";
  return os.str();
}

}  // namespace cvim
