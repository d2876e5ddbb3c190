#include "iontrap/scenarios.hpp"

#include "iontrap/dynamics.hpp"
#include "iontrap/hamiltonians.hpp"
#include "iontrap/measurement.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

namespace iontrap {

namespace fs = std::filesystem;

std::string version_string() { return IONTRAP_VERSION; }

double parse_number(const std::string& raw) {
  std::string s;
  for (char ch : raw)
    if (ch != ' ' && ch != '\t') s.push_back(ch);
  if (s.empty()) throw ConfigError("empty numeric value");
  double result = 1.0;
  char op = '*';
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find_first_of("*/", pos);
    const std::string token = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    double v = 0.0;
    std::string body = token;
    double sign = 1.0;
    while (!body.empty() && (body[0] == '-' || body[0] == '+')) {
      if (body[0] == '-') sign = -sign;
      body.erase(0, 1);
    }
    if (body == "pi") {
      v = sign * M_PI;
    } else {
      try {
        v = parse_double(token);
      } catch (const std::invalid_argument&) {
        throw ConfigError("not a number: '" + raw + "'");
      }
    }
    result = op == '*' ? result * v : result / v;
    if (next == std::string::npos) break;
    op = s[next];
    pos = next + 1;
  }
  if (!std::isfinite(result)) throw ConfigError("non-finite numeric value: '" + raw + "'");
  return result;
}

// ---------------------------------------------------------------------------
// Catalog and configuration.

const std::vector<ScenarioInfo>& catalog() {
  static const std::vector<ScenarioInfo> scenarios = {
      {"ghz",
       "|1,0,a> under the m=n=1 Raman model; GHZ state at lambda*t = pi/4",
       {{"lambda", "1", "effective coupling"},
        {"t", "pi/4", "final time"},
        {"dim_x", "4", "Fock cutoff of mode x"},
        {"dim_y", "4", "Fock cutoff of mode y"},
        {"samples", "101", "time samples in [0, t]"}}},
      {"ghz_counter",
       "vacuum start under pair creation with an internal flip; GHZ state at lambda*t = pi/4",
       {{"lambda", "1", "effective coupling"},
        {"t", "pi/4", "final time"},
        {"dim_x", "4", "Fock cutoff of mode x"},
        {"dim_y", "4", "Fock cutoff of mode y"},
        {"samples", "101", "time samples in [0, t]"},
        {"start_level", "b", "initial internal level (a or b)"},
        {"orientation", "b_to_a", "flip accompanying pair creation (a_to_b or b_to_a)"}}},
      {"jcm2mode",
       "two-mode Jaynes-Cummings dynamics from coherent states: collapse and revival",
       {{"lambda", "1", "effective coupling"},
        {"beta", "3", "coherent amplitude of mode x"},
        {"gamma", "3", "coherent amplitude of mode y"},
        {"dim_x", "35", "Fock cutoff of mode x"},
        {"dim_y", "35", "Fock cutoff of mode y"},
        {"span", "2", "final time in units of the revival estimate"},
        {"samples", "801", "time samples"}}},
      {"cat_half_revival",
       "projection onto level a at half the revival time: two-mode cat state",
       {{"lambda", "1", "effective coupling"},
        {"beta", "3", "coherent amplitude of mode x"},
        {"gamma", "3", "coherent amplitude of mode y"},
        {"dim_x", "35", "Fock cutoff of mode x"},
        {"dim_y", "35", "Fock cutoff of mode y"},
        {"fraction", "0.5", "evolution time in units of the revival estimate"},
        {"grid_points", "101", "Wigner grid points per axis"}}},
      {"downconvert2",
       "two-phonon down conversion a_x a_y^+2 from a coherent x mode",
       {{"lambda", "1", "effective coupling"},
        {"beta", "2", "coherent amplitude of mode x"},
        {"dim_x", "22", "Fock cutoff of mode x"},
        {"dim_y", "40", "Fock cutoff of mode y"},
        {"t_max", "3", "final time"},
        {"samples", "301", "time samples"},
        {"grid_points", "101", "Wigner grid points per axis"}}},
      {"downconvert3",
       "three-phonon down conversion a_x a_y^+3 from a coherent x mode",
       {{"lambda", "1", "effective coupling"},
        {"beta", "2", "coherent amplitude of mode x"},
        {"dim_x", "22", "Fock cutoff of mode x"},
        {"dim_y", "50", "Fock cutoff of mode y"},
        {"t_max", "3", "final time"},
        {"samples", "301", "time samples"},
        {"grid_points", "101", "Wigner grid points per axis"}}},
      {"adiabatic_check",
       "full three-level model against the effective a<->b exchange",
       {{"epsilon", "0.1", "Lamb-Dicke parameter"},
        {"rabi", "20", "Rabi frequency of both lasers"},
        {"delta", "200", "detuning from the upper level"},
        {"nu_x", "10", "trap frequency x"},
        {"nu_y", "14", "trap frequency y"},
        {"dim_x", "6", "Fock cutoff of mode x"},
        {"dim_y", "6", "Fock cutoff of mode y"},
        {"compensate", "1", "cancel the carrier light shift with a two-photon offset (0 or 1)"},
        {"t_max", "1000", "final time"},
        {"dt_fraction", "0.02", "initial step as a fraction of 2*pi/delta"},
        {"tolerance", "1e-3", "terminal-state error target"}}},
      {"linear_coupler",
       "beam-splitter exchange a_x a_y^+ + h.c.; full transfer at lambda*t = pi/2",
       {{"lambda", "1", "effective coupling"},
        {"t", "pi/2", "final time"},
        {"dim_x", "4", "Fock cutoff of mode x"},
        {"dim_y", "4", "Fock cutoff of mode y"},
        {"samples", "101", "time samples in [0, t]"}}},
  };
  return scenarios;
}

const ScenarioInfo& scenario_info(const std::string& name) {
  for (const auto& s : catalog())
    if (s.name == name) return s;
  throw ConfigError("unknown scenario '" + name + "'");
}

ScenarioConfig::ScenarioConfig(std::string name) : name_(std::move(name)) { scenario_info(name_); }

void ScenarioConfig::set(const std::string& key, const std::string& value) {
  const auto& info = scenario_info(name_);
  const bool known = std::any_of(info.params.begin(), info.params.end(), [&](const ParamSpec& p) { return p.key == key; });
  if (!known) throw ConfigError("unknown key '" + key + "' for scenario " + name_);
  values_[key] = value;
}

void ScenarioConfig::set_all(const KeyValues& kv) {
  for (const auto& [k, v] : kv) set(k, v);
}

const std::string& ScenarioConfig::text(const std::string& key) const {
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  for (const auto& p : scenario_info(name_).params)
    if (p.key == key) return p.default_value;
  throw ConfigError("unknown key '" + key + "' for scenario " + name_);
}

double ScenarioConfig::number(const std::string& key) const {
  try {
    return parse_number(text(key));
  } catch (const ConfigError& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

long ScenarioConfig::integer(const std::string& key) const {
  const double v = number(key);
  if (v != std::round(v) || std::abs(v) > 1e9) throw ConfigError("key '" + key + "' must be an integer");
  return static_cast<long>(v);
}

bool ScenarioConfig::flag(const std::string& key) const {
  const long v = integer(key);
  if (v != 0 && v != 1) throw ConfigError("key '" + key + "' must be 0 or 1");
  return v == 1;
}

KeyValues ScenarioConfig::resolved() const {
  KeyValues out;
  for (const auto& p : scenario_info(name_).params) out.emplace_back(p.key, text(p.key));
  return out;
}

Check Check::make(std::string name, double value, std::string relation, double threshold) {
  bool pass = false;
  if (relation == "<=") pass = value <= threshold;
  else if (relation == "<") pass = value < threshold;
  else if (relation == ">=") pass = value >= threshold;
  else if (relation == ">") pass = value > threshold;
  else throw std::invalid_argument("unknown relation " + relation);
  return {std::move(name), value, threshold, std::move(relation), pass};
}

bool ScenarioResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const Check& ScenarioResult::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("no check named " + name);
}

std::vector<const Check*> ScenarioResult::failures() const {
  std::vector<const Check*> out;
  for (const auto& c : checks)
    if (!c.pass) out.push_back(&c);
  return out;
}

// ---------------------------------------------------------------------------
// Shared machinery.

namespace {

constexpr double unitarity_tol = 1e-10;
constexpr double stepped_unitarity_tol = 1e-8;
constexpr double hermiticity_tol = 1e-12;
constexpr double charge_tol = 1e-8;
constexpr double parity_tol = 1e-8;
constexpr double wigner_norm_tol = 2e-2;
constexpr double coherent_tol = 1e-6;
constexpr double reversal_tol = 1e-9;

void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

Index dimension(const ScenarioConfig& cfg, const std::string& key, Index minimum = 2) {
  const long v = cfg.integer(key);
  require(v >= minimum, key + " must be >= " + std::to_string(minimum));
  return static_cast<Index>(v);
}

double positive(const ScenarioConfig& cfg, const std::string& key) {
  const double v = cfg.number(key);
  require(v > 0.0, key + " must be > 0");
  return v;
}

double non_negative(const ScenarioConfig& cfg, const std::string& key) {
  const double v = cfg.number(key);
  require(v >= 0.0, key + " must be >= 0");
  return v;
}

std::size_t sample_count(const ScenarioConfig& cfg) {
  return static_cast<std::size_t>(dimension(cfg, "samples", 2));
}

StateVector basis_state(const HybridSpace& space, Index nx, Index ny, std::optional<Level> level) {
  Vector v = Vector::Zero(space.total_dim());
  const Index fock[2] = {nx, ny};
  v(space.index(fock, level)) = 1.0;
  return {space, v};
}

std::vector<double> to_std(const RealVector& v) { return {v.data(), v.data() + v.size()}; }

std::vector<double> index_axis(Index n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = static_cast<double>(k);
  return out;
}

class Recorder {
 public:
  explicit Recorder(ScenarioResult& r) : r_(r) {}

  void check(std::string name, double value, std::string relation, double threshold) {
    r_.checks.push_back(Check::make(std::move(name), value, std::move(relation), threshold));
  }
  void scalar(const std::string& name, double value) { r_.scalars[name] = value; }

  void unitarity(const Trajectory& traj, double tol = unitarity_tol) {
    double worst = 0.0;
    for (const auto& s : traj.states) worst = std::max(worst, std::abs(s.norm() - 1.0));
    check("invariant.unitarity", worst, "<=", tol);
  }

  void hermiticity(double defect) { check("invariant.hermiticity", defect, "<=", hermiticity_tol); }

  void charges(const Trajectory& traj, std::initializer_list<ChargeKind> kinds, int m, int n) {
    for (auto kind : kinds) {
      const Operator q = conserved_charge(kind, m, n, traj.states.front().space);
      const double q0 = traj.states.front().amplitudes.dot(q * traj.states.front().amplitudes).real();
      double drift = 0.0;
      for (const auto& s : traj.states) drift = std::max(drift, std::abs(s.amplitudes.dot(q * s.amplitudes).real() - q0));
      const char* label = kind == ChargeKind::K ? "K" : kind == ChargeKind::L ? "L" : "pairdiff";
      check(std::string("invariant.charge_") + label, drift, "<=", charge_tol);
    }
  }

  void time_reversal(double error) { check("invariant.time_reversal", error, "<=", reversal_tol); }

  void static_reversal(const StateVector& psi0, const Operator& h, double t) {
    const StaticPropagator prop(h);
    time_reversal((prop.apply(prop.apply(psi0.amplitudes, t), -t) - psi0.amplitudes).norm());
  }

  void coherent(const StateVector& initial, char mode, double alpha) {
    const DensityOperator rho = reduce(initial, Subsystem::mode(mode));
    const double mean = alpha * alpha;
    double err = std::abs(mean_number(rho) - mean);
    const RealVector p = number_distribution(rho);
    double log_weight = -mean;  // log of e^{−|α|²}|α|^{2k}/k!
    for (Index k = 0; k < p.size(); ++k) {
      if (k > 0) log_weight += std::log(mean) - std::log(static_cast<double>(k));
      const double poisson = mean == 0.0 ? (k == 0 ? 1.0 : 0.0) : std::exp(log_weight);
      err = std::max(err, std::abs(p(k) - poisson));
    }
    check(std::string("invariant.coherent_") + mode, err, "<=", coherent_tol);
  }

  void wigner(const std::string& name, const DensityOperator& rho, const WignerGrid& w) {
    const double parity = 2.0 / M_PI * parity_expectation(rho);
    check("invariant.wigner_parity." + name, std::abs(wigner_at(rho, 0.0) - parity), "<=", parity_tol);
    check("invariant.wigner_norm." + name, std::abs(w.riemann_sum() - 1.0), "<=", wigner_norm_tol);
    r_.grids[name] = w;
  }

 private:
  ScenarioResult& r_;
};

WignerGrid wigner_on_default(const DensityOperator& rho, Index points) {
  GridSpec g = default_grid(rho);
  g.re_points = g.im_points = points;
  return wigner(rho, g);
}

// ---------------------------------------------------------------------------

void run_ghz(const ScenarioConfig& cfg, ScenarioResult& r) {
  Recorder rec(r);
  const double lambda = positive(cfg, "lambda");
  const double t = non_negative(cfg, "t");
  const HybridSpace space({{dimension(cfg, "dim_x"), 'x'}, {dimension(cfg, "dim_y"), 'y'}}, InternalSpace::two_level());
  const Operator h = build_raman_effective(space, EffectiveModel::direct(1, 1, lambda));

  const StateVector psi0 = basis_state(space, 1, 0, Level::a);
  StateVector target{space, (basis_state(space, 1, 0, Level::a).amplitudes -
                             cplx(0.0, 1.0) * basis_state(space, 0, 1, Level::b).amplitudes) /
                                std::sqrt(2.0)};
  const auto times = linspace(0.0, t, sample_count(cfg));
  const auto traj = trajectory(psi0, h, times,
                               {expectation("p_a", projector(space, Level::a)), expectation("p_b", projector(space, Level::b))});
  std::vector<double> fid;
  for (const auto& s : traj.states) fid.push_back(fidelity(s, target));

  Series pop;
  pop.add("t", "1/lambda", times)
      .add("p_a", "1", traj.real_series("p_a"))
      .add("p_b", "1", traj.real_series("p_b"))
      .add("fidelity", "1", fid);
  r.series["populations"] = std::move(pop);

  rec.check("ghz_fidelity", fid.back(), ">=", 1.0 - 1e-8);
  const auto& final = traj.states.back();
  if (traj.real_series("p_a").back() > 1e-14) {
    const auto m = project_internal(final, Level::a);
    rec.scalar("project_a_probability", m.probability);
  }
  rec.scalar("final_fidelity", fid.back());

  rec.unitarity(traj);
  rec.hermiticity(hermiticity_defect(h));
  rec.charges(traj, {ChargeKind::K, ChargeKind::L}, 1, 1);
  rec.static_reversal(psi0, h, t);
}

void run_ghz_counter(const ScenarioConfig& cfg, ScenarioResult& r) {
  Recorder rec(r);
  const double lambda = positive(cfg, "lambda");
  const double t = non_negative(cfg, "t");
  const std::string& start_text = cfg.text("start_level");
  require(start_text == "a" || start_text == "b", "start_level must be a or b");
  const std::string& orient_text = cfg.text("orientation");
  require(orient_text == "a_to_b" || orient_text == "b_to_a", "orientation must be a_to_b or b_to_a");
  const Level start = parse_level(start_text[0]);
  const Level other = start == Level::a ? Level::b : Level::a;
  const auto orientation = orient_text == "a_to_b" ? PairCreation::with_a_to_b : PairCreation::with_b_to_a;

  const HybridSpace space({{dimension(cfg, "dim_x"), 'x'}, {dimension(cfg, "dim_y"), 'y'}}, InternalSpace::two_level());
  const Operator h = build_counter_rotating(space, EffectiveModel::direct(1, 1, lambda), orientation);
  const StateVector psi0 = basis_state(space, 0, 0, start);
  StateVector target{space, (psi0.amplitudes - cplx(0.0, 1.0) * basis_state(space, 1, 1, other).amplitudes) /
                                std::sqrt(2.0)};

  const auto times = linspace(0.0, t, sample_count(cfg));
  const auto traj = trajectory(psi0, h, times,
                               {expectation("p_a", projector(space, Level::a)), expectation("p_b", projector(space, Level::b)),
                                expectation("n_x", number_operator(space, 'x'))});
  std::vector<double> fid;
  for (const auto& s : traj.states) fid.push_back(fidelity(s, target));
  Series pop;
  pop.add("t", "1/lambda", times)
      .add("p_a", "1", traj.real_series("p_a"))
      .add("p_b", "1", traj.real_series("p_b"))
      .add("n_x", "quanta", traj.real_series("n_x"))
      .add("fidelity", "1", fid);
  r.series["populations"] = std::move(pop);

  rec.check("ghz_counter_fidelity", fid.back(), ">=", 1.0 - 1e-8);
  rec.scalar("final_fidelity", fid.back());
  rec.unitarity(traj);
  rec.hermiticity(hermiticity_defect(h));
  if (orientation == PairCreation::with_b_to_a)
    rec.charges(traj, {ChargeKind::L, ChargeKind::pairdiff}, 1, 1);
  else
    rec.charges(traj, {ChargeKind::pairdiff}, 1, 1);
  rec.static_reversal(psi0, h, t);
}

struct TwoModeCoherent {
  double lambda, beta, gamma, t_r;
  HybridSpace space;
  Operator h;
  StateVector psi0;
};

TwoModeCoherent jcm_setup(const ScenarioConfig& cfg) {
  TwoModeCoherent s;
  s.lambda = positive(cfg, "lambda");
  s.beta = positive(cfg, "beta");
  s.gamma = positive(cfg, "gamma");
  s.t_r = revival_estimate(s.beta, s.gamma, s.lambda).t_rx;
  const ModeSpace mx{dimension(cfg, "dim_x"), 'x'}, my{dimension(cfg, "dim_y"), 'y'};
  s.space = HybridSpace({mx, my}, InternalSpace::two_level());
  s.h = build_raman_effective(s.space, EffectiveModel::direct(1, 1, s.lambda));
  s.psi0 = compose({coherent_state(mx, s.beta), coherent_state(my, s.gamma),
                    level_state(InternalSpace::two_level(), Level::a)});
  return s;
}

void run_jcm2mode(const ScenarioConfig& cfg, ScenarioResult& r) {
  Recorder rec(r);
  const auto s = jcm_setup(cfg);
  const double span = positive(cfg, "span");
  require(span >= 1.5, "span must be >= 1.5 to bracket the revival");
  const auto times = linspace(0.0, span * s.t_r, sample_count(cfg));
  const Operator inversion = projector(s.space, Level::a) - projector(s.space, Level::b);
  const auto traj = trajectory(s.psi0, s.h, times,
                               {expectation("inversion", inversion), expectation("n_x", number_operator(s.space, 'x')),
                                expectation("n_y", number_operator(s.space, 'y'))});
  const auto inv = traj.real_series("inversion");
  const auto literal = quasidistribution_recurrence(traj, 'x', RecurrenceAlignment::none);
  const auto aligned = quasidistribution_recurrence(traj, 'x', RecurrenceAlignment::rotation);

  Series dyn;
  dyn.add("t", "1/lambda", times)
      .add("inversion", "1", inv)
      .add("n_x", "quanta", traj.real_series("n_x"))
      .add("n_y", "quanta", traj.real_series("n_y"))
      .add("recurrence_literal", "1", literal)
      .add("recurrence_aligned", "1", aligned);
  r.series["dynamics"] = std::move(dyn);

  // Collapse: spread of the inversion over [t_R/4, t_R/2].
  double sum = 0.0, sum2 = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] >= s.t_r / 4 && times[k] <= s.t_r / 2) {
      sum += inv[k];
      sum2 += inv[k] * inv[k];
      ++count;
    }
  require(count >= 3, "too few samples in the collapse window; raise samples");
  const double mean = sum / static_cast<double>(count);
  const double stddev = std::sqrt(std::max(0.0, sum2 / static_cast<double>(count) - mean * mean));
  const double amplitude = std::abs(inv.front());
  rec.check("collapse_window_std", stddev, "<", 0.1 * amplitude);

  // Revival: the largest overlap in [t_R/2, 3t_R/2] must be an interior local
  // maximum within 15% of t_R.
  auto window_peak = [&](const std::vector<double>& series, bool& interior) {
    std::size_t lo = times.size(), hi = 0;
    for (std::size_t k = 0; k < times.size(); ++k)
      if (times[k] >= 0.5 * s.t_r && times[k] <= 1.5 * s.t_r) {
        lo = std::min(lo, k);
        hi = std::max(hi, k);
      }
    std::size_t best = lo;
    for (std::size_t k = lo; k <= hi; ++k)
      if (series[k] > series[best]) best = k;
    interior = best > lo && best < hi && series[best] > series[best - 1] && series[best] > series[best + 1];
    return best;
  };
  bool interior = false;
  const std::size_t peak = window_peak(aligned, interior);
  const double offset = interior ? std::abs(times[peak] - s.t_r) / s.t_r : 1.0;
  rec.check("recurrence_peak_offset", offset, "<=", 0.15);
  bool literal_interior = false;
  const std::size_t literal_peak = window_peak(literal, literal_interior);

  rec.scalar("revival_estimate", s.t_r);
  rec.scalar("recurrence_peak_time", times[peak]);
  rec.scalar("recurrence_peak_value", aligned[peak]);
  rec.scalar("literal_peak_time", times[literal_peak]);
  rec.scalar("literal_peak_value", literal[literal_peak]);
  rec.scalar("collapse_window_std", stddev);

  rec.unitarity(traj);
  rec.hermiticity(hermiticity_defect(s.h));
  rec.charges(traj, {ChargeKind::K, ChargeKind::L}, 1, 1);
  rec.static_reversal(s.psi0, s.h, times.back());
  rec.coherent(s.psi0, 'x', s.beta);
  rec.coherent(s.psi0, 'y', s.gamma);
}

void run_cat(const ScenarioConfig& cfg, ScenarioResult& r) {
  Recorder rec(r);
  const auto s = jcm_setup(cfg);
  const double t = positive(cfg, "fraction") * s.t_r;
  const Index points = dimension(cfg, "grid_points", 5);
  const std::vector<double> times = {0.0, t};
  const auto traj = trajectory(s.psi0, s.h, times, {});
  const auto m = project_internal(traj.states.back(), Level::a);

  const double two_mode = purity(pure_density(m.post_state));
  const DensityOperator rho_x = reduce(m.post_state, Subsystem::mode('x'));
  const DensityOperator rho_y = reduce(m.post_state, Subsystem::mode('y'));
  rec.check("cat_two_mode_purity", two_mode, ">=", 0.99);
  rec.check("cat_x_purity", purity(rho_x), "<=", 0.6);
  rec.check("cat_y_purity", purity(rho_y), "<=", 0.6);

  const WignerGrid wx = wigner_on_default(rho_x, points);
  const WignerGrid wy = wigner_on_default(rho_y, points);
  rec.wigner("wigner_x", rho_x, wx);
  rec.wigner("wigner_y", rho_y, wy);

  const RealVector px = number_distribution(rho_x), py = number_distribution(rho_y);
  r.series["number_x"] = Series{}.add("n", "quanta", index_axis(px.size())).add("p", "1", to_std(px));
  r.series["number_y"] = Series{}.add("n", "quanta", index_axis(py.size())).add("p", "1", to_std(py));

  rec.scalar("time", t);
  rec.scalar("projection_probability", m.probability);
  rec.scalar("components_x", static_cast<double>(count_components(wx)));
  rec.scalar("components_y", static_cast<double>(count_components(wy)));
  rec.scalar("negative_volume_x", negativity(wx).negative_volume);
  rec.scalar("negative_volume_y", negativity(wy).negative_volume);

  rec.unitarity(traj);
  rec.hermiticity(hermiticity_defect(s.h));
  rec.charges(traj, {ChargeKind::K, ChargeKind::L}, 1, 1);
  rec.static_reversal(s.psi0, s.h, t);
  rec.coherent(s.psi0, 'x', s.beta);
  rec.coherent(s.psi0, 'y', s.gamma);
}

void run_downconvert(const ScenarioConfig& cfg, ScenarioResult& r, int n) {
  Recorder rec(r);
  const double lambda = positive(cfg, "lambda");
  const double beta = non_negative(cfg, "beta");
  const double t_max = positive(cfg, "t_max");
  const Index points = dimension(cfg, "grid_points", 5);
  const ModeSpace mx{dimension(cfg, "dim_x"), 'x'}, my{dimension(cfg, "dim_y", n + 1), 'y'};
  const HybridSpace space({mx, my});
  const Operator h = build_degenerate_effective(space, EffectiveModel::direct(1, n, lambda));
  const StateVector psi0 = compose({coherent_state(mx, beta), fock_state(my, 0)});

  const auto times = linspace(0.0, t_max, sample_count(cfg));
  const auto traj = trajectory(psi0, h, times,
                               {expectation("n_x", number_operator(space, 'x')),
                                expectation("n_y", number_operator(space, 'y'))});
  const auto nx = traj.real_series("n_x");
  std::vector<double> var, theta;
  for (const auto& st : traj.states) {
    const auto sq = optimal_quadrature_variance(reduce(st, Subsystem::mode('y')));
    var.push_back(sq.variance);
    theta.push_back(sq.theta);
  }
  Series dyn;
  dyn.add("t", "1/lambda", times)
      .add("n_x", "quanta", nx)
      .add("n_y", "quanta", traj.real_series("n_y"))
      .add("variance_y_opt", "1", var)
      .add("theta_y_opt", "rad", theta);
  r.series["dynamics"] = std::move(dyn);

  // Developed time: earliest global minimum of ⟨n_x⟩.
  std::size_t dev = 0;
  for (std::size_t k = 1; k < nx.size(); ++k)
    if (nx[k] < nx[dev]) dev = k;
  const double early_min = *std::min_element(var.begin(), var.begin() + static_cast<std::ptrdiff_t>(dev) + 1);

  const auto& developed = traj.states[dev];
  const DensityOperator rho_x = reduce(developed, Subsystem::mode('x'));
  const DensityOperator rho_y = reduce(developed, Subsystem::mode('y'));
  const RealVector px = number_distribution(rho_x), py = number_distribution(rho_y);
  r.series["number_x"] = Series{}.add("n", "quanta", index_axis(px.size())).add("p", "1", to_std(px));
  r.series["number_y"] = Series{}.add("n", "quanta", index_axis(py.size())).add("p", "1", to_std(py));
  const auto maxima_x = static_cast<double>(count_local_maxima(px, 1));
  const auto maxima_y = static_cast<double>(count_local_maxima(py, static_cast<std::size_t>(n)));

  const WignerGrid wx = wigner_on_default(rho_x, points);
  const WignerGrid wy = wigner_on_default(rho_y, points);
  rec.wigner("wigner_x", rho_x, wx);
  rec.wigner("wigner_y", rho_y, wy);
  const double sym_y = rotational_symmetry_score(wy, n);
  const auto neg_y = negativity(wy);

  if (n == 2) {
    rec.check("early_min_variance_y", early_min, "<", 0.45);
    rec.check("local_maxima_x", maxima_x, ">=", 2.0);
    rec.check("local_maxima_y", maxima_y, ">=", 2.0);
  } else {
    rec.check("symmetry_score_y", sym_y, ">", 0.95);
    rec.check("negative_volume_y", neg_y.negative_volume, ">", 1e-3);
    const auto radial = radial_marginal(wx, 50);
    r.series["radial_x"] = Series{}.add("r", "1", to_std(radial.radius)).add("weight", "1", to_std(radial.weight));
  }

  rec.scalar("developed_time", times[dev]);
  rec.scalar("min_n_x", nx[dev]);
  rec.scalar("early_min_variance_y", early_min);
  rec.scalar("local_maxima_x", maxima_x);
  rec.scalar("local_maxima_y", maxima_y);
  rec.scalar("symmetry_score_y", sym_y);
  rec.scalar("symmetry_score_y_k2", rotational_symmetry_score(wy, 2));
  rec.scalar("negative_volume_y", neg_y.negative_volume);
  rec.scalar("min_wigner_y", neg_y.min_value);

  rec.unitarity(traj);
  rec.hermiticity(hermiticity_defect(h));
  rec.charges(traj, {ChargeKind::K}, 1, n);
  rec.static_reversal(psi0, h, t_max);
  rec.coherent(psi0, 'x', beta);
}

/// Least-squares fit of A + B cos ωt + C sin ωt over a frequency scan.
double fit_frequency(const std::vector<double>& t, const std::vector<double>& y, double lo, double hi, int steps) {
  double best_w = lo, best_res = std::numeric_limits<double>::infinity();
  const auto n = static_cast<Index>(t.size());
  RealVector yy = Eigen::Map<const RealVector>(y.data(), n);
  for (int s = 0; s <= steps; ++s) {
    const double w = lo + (hi - lo) * s / steps;
    RealMatrix basis(n, 3);
    for (Index k = 0; k < n; ++k) basis.row(k) << 1.0, std::cos(w * t[static_cast<std::size_t>(k)]),
        std::sin(w * t[static_cast<std::size_t>(k)]);
    const RealVector coef = basis.colPivHouseholderQr().solve(yy);
    const double res = (basis * coef - yy).squaredNorm();
    if (res < best_res) {
      best_res = res;
      best_w = w;
    }
  }
  return best_w;
}

void run_adiabatic(const ScenarioConfig& cfg, ScenarioResult& r) {
  Recorder rec(r);
  IonParams p;
  p.epsilon = positive(cfg, "epsilon");
  p.rabi_x = p.rabi_y = positive(cfg, "rabi");
  p.delta = positive(cfg, "delta");
  p.nu_x = positive(cfg, "nu_x");
  p.nu_y = positive(cfg, "nu_y");
  p.m = p.n = 1;
  try {
    validate(p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const double t_max = positive(cfg, "t_max");
  const bool compensate = cfg.flag("compensate");

  FullModelSpec spec{p, resonant_lasers(p), ResonanceVariant::normal, 0.0};
  if (compensate) {
    try {
      spec.two_photon_offset = -carrier_light_shift(p).differential();
    } catch (const std::domain_error& e) {
      throw ConfigError(std::string("compensate=1: ") + e.what());
    }
  }
  const HybridSpace space({{dimension(cfg, "dim_x"), 'x'}, {dimension(cfg, "dim_y"), 'y'}}, InternalSpace::lambda());
  std::optional<FullModelHamiltonian> full;
  try {
    full.emplace(build_full_rotating_frame(space, spec));
  } catch (const DimensionError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const FullModelHamiltonian& hfull = *full;
  const TimeDependentHamiltonian handle{space, [hfull](double t) { return hfull(t); }, hfull.period()};

  const double lambda = coupling_constant(p).magnitude;
  const double stride = hfull.period().value_or(2.0 * M_PI / std::max(p.nu_x, p.nu_y));
  const auto periods = static_cast<std::size_t>(std::floor(t_max / stride));
  require(periods >= 8, "t_max must span at least 8 sampling strides");
  std::vector<double> times(periods + 1);
  for (std::size_t k = 0; k <= periods; ++k) times[k] = static_cast<double>(k) * stride;

  EvolutionConfig ecfg;
  ecfg.method = EvolutionMethod::stepped;
  ecfg.dt = positive(cfg, "dt_fraction") * 2.0 * M_PI / p.delta;
  ecfg.tolerance = positive(cfg, "tolerance");
  try {
    ecfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  const StateVector psi0 = basis_state(space, 1, 0, Level::a);
  const auto traj = trajectory(psi0, handle, times,
                               {expectation("p_a", projector(space, Level::a)), expectation("p_b", projector(space, Level::b)),
                                expectation("p_c", projector(space, Level::c))},
                               ecfg);
  const auto pb = traj.real_series("p_b");

  // Effective comparison on the {a, b} subspace.
  const HybridSpace eff_space({{space.modes()[0]}, {space.modes()[1]}}, InternalSpace::two_level());
  const Operator heff = build_raman_effective(eff_space, EffectiveModel::from_params(p, true));
  const StateVector eff0 = basis_state(eff_space, 1, 0, Level::a);
  const auto eff = trajectory(eff0, heff, times, {expectation("p_b", projector(eff_space, Level::b))});
  const auto pb_eff = eff.real_series("p_b");

  Series pop;
  pop.add("t", "1/freq", times)
      .add("p_a", "1", traj.real_series("p_a"))
      .add("p_b", "1", pb)
      .add("p_c", "1", traj.real_series("p_c"))
      .add("p_b_effective", "1", pb_eff);
  r.series["populations"] = std::move(pop);

  const double omega = fit_frequency(times, pb, lambda, 3.0 * lambda, 4000);
  const double peak = *std::max_element(pb.begin(), pb.end());
  rec.check("frequency_relative_error", std::abs(omega / (2.0 * lambda) - 1.0), "<=", 0.1);
  rec.check("peak_transfer", peak, ">=", 0.9);

  double deviation = 0.0;
  for (std::size_t k = 0; k < pb.size(); ++k) deviation = std::max(deviation, std::abs(pb[k] - pb_eff[k]));
  const auto pc = traj.real_series("p_c");
  rec.scalar("lambda", lambda);
  rec.scalar("fitted_frequency", omega);
  rec.scalar("peak_transfer", peak);
  rec.scalar("max_deviation_from_effective", deviation);
  rec.scalar("max_p_c", *std::max_element(pc.begin(), pc.end()));
  rec.scalar("two_photon_offset", spec.two_photon_offset);
  rec.scalar("final_dt", traj.diagnostics.final_dt);
  rec.scalar("error_estimate", traj.diagnostics.error_estimate);

  rec.unitarity(traj, stepped_unitarity_tol);
  double herm = 0.0;
  for (double frac : {0.0, 0.31, 0.77}) herm = std::max(herm, hermiticity_defect(hfull(frac * stride)));
  rec.hermiticity(herm);

  // Backward evolution under H'(s) = −H(T − s) on the same step grid.
  const double t_end = times.back();
  const TimeDependentHamiltonian reversed{space, [hfull, t_end](double s) -> Matrix { return -hfull(t_end - s); },
                                          hfull.period()};
  SteppedPropagator back(reversed, traj.diagnostics.final_dt);
  rec.time_reversal((back.advance(traj.states.back().amplitudes, 0.0, t_end) - psi0.amplitudes).norm());
  rec.charges(eff, {ChargeKind::K, ChargeKind::L}, 1, 1);
}

void run_linear_coupler(const ScenarioConfig& cfg, ScenarioResult& r) {
  Recorder rec(r);
  const double lambda = positive(cfg, "lambda");
  const double t = non_negative(cfg, "t");
  const HybridSpace space = HybridSpace::two_mode(dimension(cfg, "dim_x"), dimension(cfg, "dim_y"));
  const Operator h = build_degenerate_effective(space, EffectiveModel::direct(1, 1, lambda));
  const StateVector psi0 = basis_state(space, 1, 0, std::nullopt);
  const StateVector target = basis_state(space, 0, 1, std::nullopt);
  const auto times = linspace(0.0, t, sample_count(cfg));
  const auto traj = trajectory(psi0, h, times,
                               {expectation("n_x", number_operator(space, 'x')),
                                expectation("n_y", number_operator(space, 'y'))});
  std::vector<double> fid;
  for (const auto& s : traj.states) fid.push_back(fidelity(s, target));
  Series dyn;
  dyn.add("t", "1/lambda", times)
      .add("n_x", "quanta", traj.real_series("n_x"))
      .add("n_y", "quanta", traj.real_series("n_y"))
      .add("transfer_fidelity", "1", fid);
  r.series["dynamics"] = std::move(dyn);

  rec.check("transfer_fidelity", fid.back(), ">=", 1.0 - 1e-8);
  rec.scalar("final_fidelity", fid.back());
  rec.unitarity(traj);
  rec.hermiticity(hermiticity_defect(h));
  rec.charges(traj, {ChargeKind::K}, 1, 1);
  rec.static_reversal(psi0, h, t);
}

}  // namespace

ScenarioResult run(const ScenarioConfig& config) {
  if (config.name().empty()) throw ConfigError("scenario name missing");
  const auto start = std::chrono::steady_clock::now();
  ScenarioResult r;
  r.config = config;
  const auto& name = config.name();
  if (name == "ghz") run_ghz(config, r);
  else if (name == "ghz_counter") run_ghz_counter(config, r);
  else if (name == "jcm2mode") run_jcm2mode(config, r);
  else if (name == "cat_half_revival") run_cat(config, r);
  else if (name == "downconvert2") run_downconvert(config, r, 2);
  else if (name == "downconvert3") run_downconvert(config, r, 3);
  else if (name == "adiabatic_check") run_adiabatic(config, r);
  else if (name == "linear_coupler") run_linear_coupler(config, r);
  else throw ConfigError("unknown scenario '" + name + "'");
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// ---------------------------------------------------------------------------
// Sweeps.

SweepReport sweep(const ScenarioConfig& base, const std::string& axis, const std::vector<std::string>& values) {
  SweepReport report{base.name(), axis, {}};
  try {
    parse_number(base.text(axis));
  } catch (const ConfigError&) {
    throw ConfigError("sweep axis '" + axis + "' is not a numeric field of " + base.name());
  }
  for (const auto& v : values) parse_number(v);
  for (const auto& v : values) {
    SweepRow row;
    row.value = v;
    try {
      ScenarioConfig cfg = base;
      cfg.set(axis, v);
      const auto result = run(cfg);
      row.completed = true;
      row.passed = result.passed();
      row.scalars = result.scalars;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

Series SweepReport::collate() const {
  std::set<std::string> names;
  for (const auto& row : rows)
    for (const auto& [k, v] : row.scalars) names.insert(k);
  std::vector<double> axis_values, completed, passed;
  for (const auto& row : rows) {
    axis_values.push_back(parse_number(row.value));
    completed.push_back(row.completed ? 1.0 : 0.0);
    passed.push_back(row.passed ? 1.0 : 0.0);
  }
  Series s;
  s.add(axis, "-", axis_values).add("completed", "-", completed).add("passed", "-", passed);
  for (const auto& name : names) {
    std::vector<double> col;
    for (const auto& row : rows) {
      auto it = row.scalars.find(name);
      col.push_back(it == row.scalars.end() ? std::numeric_limits<double>::quiet_NaN() : it->second);
    }
    s.add(name, "-", col);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Bundles and manifests.

std::string manifest_text(const ScenarioResult& result, const std::vector<BundleFile>& files, bool json) {
  KeyValues kv;
  kv.emplace_back("scenario", result.config.name());
  kv.emplace_back("version", version_string());
  kv.emplace_back("json", json ? "1" : "0");
  for (const auto& [k, v] : result.config.resolved()) kv.emplace_back("config." + k, v);
  kv.emplace_back("passed", result.passed() ? "1" : "0");
  for (const auto& c : result.checks) {
    kv.emplace_back("check." + c.name + ".pass", c.pass ? "1" : "0");
    kv.emplace_back("check." + c.name + ".value", format_double(c.value));
    kv.emplace_back("check." + c.name + ".relation", c.relation);
    kv.emplace_back("check." + c.name + ".threshold", format_double(c.threshold));
  }
  for (const auto& [k, v] : result.scalars) kv.emplace_back("scalar." + k, format_double(v));
  for (const auto& f : files) kv.emplace_back("file." + f.name, f.sha256);
  return key_values_text(kv);
}

std::vector<BundleFile> write_bundle(const ScenarioResult& result, const fs::path& dir, bool json) {
  std::vector<BundleFile> files;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_atomic(dir / name, content);
    files.push_back({name, sha256_hex(content)});
  };
  for (const auto& [name, s] : result.series) {
    emit(name + ".csv", series_csv(s));
    if (json) emit(name + ".json", series_json(s));
  }
  for (const auto& [name, g] : result.grids) {
    emit(name + ".csv", grid_csv(g));
    if (json) emit(name + ".json", grid_json(g));
  }
  write_atomic(dir / "manifest.txt", manifest_text(result, files, json));
  return files;
}

RerunReport rerun_from_manifest(const fs::path& manifest, const fs::path& dir) {
  const KeyValues kv = read_key_values(manifest);
  std::string scenario;
  bool json = false;
  KeyValues config;
  std::map<std::string, std::string> digests;
  for (const auto& [k, v] : kv) {
    if (k == "scenario") scenario = v;
    else if (k == "json") json = v == "1";
    else if (k.rfind("config.", 0) == 0) config.emplace_back(k.substr(7), v);
    else if (k.rfind("file.", 0) == 0) digests[k.substr(5)] = v;
  }
  if (scenario.empty()) throw ConfigError(manifest.string() + ": manifest names no scenario");
  ScenarioConfig cfg(scenario);
  cfg.set_all(config);
  RerunReport report;
  report.result = run(cfg);
  const auto files = write_bundle(report.result, dir, json);
  std::map<std::string, std::string> fresh;
  for (const auto& f : files) fresh[f.name] = f.sha256;
  for (const auto& [name, sha] : digests) {
    auto it = fresh.find(name);
    if (it == fresh.end() || it->second != sha) report.mismatches.push_back(name);
  }
  for (const auto& [name, sha] : fresh)
    if (!digests.count(name)) report.mismatches.push_back(name);
  report.identical = report.mismatches.empty();
  return report;
}

}  // namespace iontrap
