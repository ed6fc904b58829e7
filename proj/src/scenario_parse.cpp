#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fockbench/scenario.hpp"

namespace fockbench {

namespace {

int line_of(const YAML::Node& node) { return node.Mark().is_null() ? 0 : node.Mark().line + 1; }

// Walks one mapping of the document, reporting every problem with its line.
class Section {
 public:
  Section(const YAML::Node& node, std::string path, const std::string& origin, int parent_line)
      : node_(node), path_(std::move(path)), origin_(origin) {
    line_ = line_of(node);
    if (line_ == 0) line_ = parent_line;
    if (!node.IsMap()) fail(line_, "section '" + path_ + "' must be a mapping");
  }

  [[noreturn]] void fail(int line, const std::string& message) const { throw ParseError(origin_, line, message); }
  [[noreturn]] void fail(const std::string& message) const { fail(line_, message); }

  // Rejects any key outside allowed.
  void allow(std::initializer_list<const char*> allowed) const { allow(std::vector<std::string>(allowed.begin(), allowed.end())); }
  void allow(const std::vector<std::string>& allowed) const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string key = it->first.Scalar();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(line_of(it->first), "unknown key '" + key + "' in " + where() + " (allowed: " + list + ")");
      }
    }
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }
  int line() const { return line_; }
  int line(const std::string& key) const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (it->first.Scalar() == key) return line_of(it->first);
    }
    return line_;
  }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const std::string& key) const {
    if (!has(key)) fail("missing required key '" + field(key) + "'");
    return to_number(node_[key], key);
  }
  double number(const std::string& key, double fallback) const { return has(key) ? to_number(node_[key], key) : fallback; }
  std::optional<double> maybe_number(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return to_number(node_[key], key);
  }

  long long integer(const std::string& key) const {
    const double v = number(key);
    if (!(std::floor(v) == v) || std::abs(v) > 9.0e15) fail(line(key), "'" + field(key) + "' must be an integer");
    return static_cast<long long>(v);
  }
  long long integer(const std::string& key, long long fallback) const { return has(key) ? integer(key) : fallback; }

  std::string text(const std::string& key) const {
    if (!has(key)) fail("missing required key '" + field(key) + "'");
    const YAML::Node n = node_[key];
    if (!n.IsScalar()) fail(line(key), "'" + field(key) + "' must be a scalar");
    return n.Scalar();
  }
  std::string text(const std::string& key, const std::string& fallback) const { return has(key) ? text(key) : fallback; }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = text(key);
    if (v == "true" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "no" || v == "off") return false;
    fail(line(key), "'" + field(key) + "' must be true or false");
  }

  std::vector<double> numbers(const std::string& key) const {
    const YAML::Node n = node_[key];
    if (!n.IsSequence()) fail(line(key), "'" + field(key) + "' must be a list of numbers");
    std::vector<double> out;
    for (const auto& item : n) out.push_back(to_number(item, key));
    return out;
  }

  Section child(const std::string& key) const {
    if (!has(key)) fail("missing required section '" + field(key) + "'");
    return Section(node_[key], field(key), origin_, line(key));
  }

  const YAML::Node& node() const { return node_; }
  const std::string& path() const { return path_; }

 private:
  std::string where() const { return path_.empty() ? "the top level" : "section '" + path_ + "'"; }

  double to_number(const YAML::Node& n, const std::string& key) const {
    const int at = line_of(n) ? line_of(n) : line(key);
    if (!n.IsScalar()) fail(at, "'" + field(key) + "' must be a number");
    std::string s = n.Scalar();
    std::string lower = s;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "inf" || lower == ".inf" || lower == "infinity" || lower == "+inf") return std::numeric_limits<double>::infinity();
    std::istringstream is(s);
    is.imbue(std::locale::classic());
    double v;
    is >> v;
    if (is.fail() || !(is >> std::ws).eof()) fail(at, "'" + field(key) + "' must be a number, got '" + s + "'");
    if (std::isnan(v)) fail(at, "'" + field(key) + "' must not be NaN");
    return v;
  }

  YAML::Node node_;
  std::string path_;
  const std::string& origin_;
  int line_ = 0;
};

template <class F>
auto checked(const Section& s, F&& build) -> decltype(build()) {
  try {
    return build();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    s.fail(std::string("invalid ") + (s.path().empty() ? "scenario" : s.path()) + ": " + e.what());
  }
}

Engine parse_engine(const Section& top) {
  const std::string name = top.text("engine");
  if (name == "decay") return Engine::decay;
  if (name == "cumulant") return Engine::cumulant;
  if (name == "laser-steady") return Engine::laser_steady;
  if (name == "lindblad-validate") return Engine::lindblad_validate;
  if (name == "classb-spectrum") return Engine::classb_spectrum;
  if (name == "gillespie") return Engine::gillespie;
  top.fail(top.line("engine"),
           "unknown engine '" + name + "' (expected decay, cumulant, laser-steady, lindblad-validate, classb-spectrum or gillespie)");
}

KerrCavitySpec parse_cavity(const Section& s, double unit) {
  s.allow({"omega0", "beta", "v", "L_c", "kappa_bg"});
  KerrCavitySpec c;
  c.omega0 = s.number("omega0") * unit;
  c.beta = s.number("beta");
  c.v = s.number("v") * unit;
  c.L_c = s.number("L_c");
  c.kappa_bg = s.number("kappa_bg", 0.0) * unit;
  checked(s, [&] {
    validate(c);
    return 0;
  });
  return c;
}

FanoMirrorSpec parse_mirror(const Section& s, double unit) {
  s.allow({"omega_d", "gamma", "t_d", "r_d", "parity_sign", "phase"});
  FanoMirrorSpec m;
  m.omega_d = s.number("omega_d") * unit;
  m.gamma = s.number("gamma") * unit;
  m.t_d = s.number("t_d");
  m.r_d = s.number("r_d");
  const long long sign = s.integer("parity_sign", 1);
  if (sign != 1 && sign != -1) s.fail(s.line("parity_sign"), "'" + s.field("parity_sign") + "' must be +1 or -1");
  m.parity_sign = static_cast<int>(sign);
  m.phase = s.maybe_number("phase");
  return m;
}

void parse_loss(const Section& s, double unit, Scenario& sc) {
  const std::string kind = s.text("kind");
  if (kind == "linear") {
    s.allow({"kind", "kappa"});
    const double kappa = s.number("kappa") * unit;
    sc.loss = checked(s, [&] { return LossModel::linear(kappa); });
  } else if (kind == "fano-kerr") {
    s.allow({"kind", "cavity", "mirror"});
    const KerrCavitySpec c = parse_cavity(s.child("cavity"), unit);
    const Section ms = s.child("mirror");
    const FanoMirrorSpec m = parse_mirror(ms, unit);
    sc.loss = checked(ms, [&] { return LossModel::fano_kerr(c, m); });
  } else if (kind == "tabulated") {
    s.allow({"kind", "cavity", "omega", "transmission"});
    const KerrCavitySpec c = parse_cavity(s.child("cavity"), unit);
    std::vector<double> omega = s.numbers("omega");
    for (double& w : omega) w *= unit;
    std::vector<double> trans = s.numbers("transmission");
    sc.loss = checked(s, [&] { return LossModel::tabulated(c, omega, trans); });
  } else if (kind == "mirror-mode") {
    s.allow({"kind", "cavity", "mode"});
    AdiabaticParams p;
    p.cavity = parse_cavity(s.child("cavity"), unit);
    const Section m = s.child("mode");
    m.allow({"omega_d", "gamma", "kappa", "coupling", "coupling_phase"});
    p.omega_d = m.number("omega_d") * unit;
    p.gamma = m.number("gamma") * unit;
    p.kappa = m.number("kappa") * unit;
    p.lambda = std::polar(m.number("coupling") * unit, m.number("coupling_phase", 0.0));
    checked(m, [&] {
      validate(p);
      return 0;
    });
    sc.mirror_mode = p;
    sc.loss = checked(m, [&] { return equivalent_fano_loss(p); });
  } else {
    s.fail(s.line("kind"), "unknown loss kind '" + kind + "' (expected linear, fano-kerr, tabulated or mirror-mode)");
  }
}

void parse_gain(const Section& s, double unit, Scenario& sc) {
  const std::string kind = s.text("kind");
  if (kind == "none") {
    s.allow({"kind"});
    sc.gain = NoGain{};
  } else if (kind == "saturable") {
    s.allow({"kind", "A", "n_s"});
    SaturableGain g;
    g.A = s.number("A") * unit;
    g.n_s = s.number("n_s", std::numeric_limits<double>::infinity());
    sc.gain = g;
  } else if (kind == "classb") {
    s.allow({"kind", "R_sp", "Lambda", "gamma_par"});
    ClassBGain g;
    g.R_sp = s.number("R_sp") * unit;
    g.Lambda = s.number("Lambda") * unit;
    g.gamma_par = s.number("gamma_par") * unit;
    sc.gain = g;
  } else {
    s.fail(s.line("kind"), "unknown gain kind '" + kind + "' (expected none, saturable or classb)");
  }
  checked(s, [&] {
    validate(sc.gain);
    return 0;
  });
}

InitialCondition parse_initial(const Section& s, Engine engine) {
  const std::string kind = s.text("kind");
  std::vector<std::string> allowed{"kind"};
  InitialCondition ic;
  if (kind == "vacuum") {
    ic.kind = InitialCondition::Kind::vacuum;
  } else if (kind == "fock") {
    ic.kind = InitialCondition::Kind::fock;
    allowed.push_back("n");
    ic.n = s.integer("n");
    if (ic.n < 0) s.fail(s.line("n"), "'" + s.field("n") + "' must be >= 0");
  } else if (kind == "coherent" || kind == "thermal") {
    ic.kind = kind == "coherent" ? InitialCondition::Kind::coherent : InitialCondition::Kind::thermal;
    allowed.push_back("n_bar");
    ic.n_bar = s.number("n_bar");
    if (!(ic.n_bar >= 0) || !std::isfinite(ic.n_bar)) s.fail(s.line("n_bar"), "'" + s.field("n_bar") + "' must be finite and >= 0");
  } else {
    s.fail(s.line("kind"), "unknown initial kind '" + kind + "' (expected vacuum, fock, coherent or thermal)");
  }
  if (engine == Engine::cumulant) {
    allowed.push_back("variance");
    ic.variance = s.maybe_number("variance");
    if (ic.variance && !(*ic.variance >= 0 && std::isfinite(*ic.variance))) {
      s.fail(s.line("variance"), "'" + s.field("variance") + "' must be finite and >= 0 (a variance cannot be negative)");
    }
  }
  s.allow(allowed);
  return ic;
}

std::vector<double> parse_grid(const Section& s, const std::string& key, double unit) {
  std::vector<double> out;
  if (s.node()[key].IsSequence()) {
    out = s.numbers(key);
  } else {
    const Section g = s.child(key);
    g.allow({"start", "stop", "count", "spacing"});
    const double a = g.number("start"), b = g.number("stop");
    const long long count = g.integer("count");
    const std::string spacing = g.text("spacing", "linear");
    if (count < 1) g.fail(g.line("count"), "'" + g.field("count") + "' must be >= 1");
    if (!(b >= a)) g.fail("'" + g.field("stop") + "' must be >= start");
    if (spacing != "linear" && spacing != "log") g.fail(g.line("spacing"), "'" + g.field("spacing") + "' must be linear or log");
    if (spacing == "log" && !(a > 0)) g.fail(g.line("start"), "log spacing needs start > 0");
    for (long long i = 0; i < count; ++i) {
      const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
      out.push_back(spacing == "log" ? a * std::pow(b / a, f) : a + (b - a) * f);
    }
  }
  for (double& v : out) v *= unit;
  return out;
}

void require_sorted(const Section& s, const std::string& key, const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) s.fail(s.line(key), "'" + s.field(key) + "' entries must be finite");
    if (i > 0 && !(v[i] > v[i - 1])) s.fail(s.line(key), "'" + s.field(key) + "' must be strictly increasing");
  }
}

void parse_numerics(const Section& s, double unit, Scenario& sc) {
  Numerics& n = sc.numerics;
  std::vector<std::string> allowed{"rel_tol"};
  const bool timed = sc.engine == Engine::decay || sc.engine == Engine::cumulant || sc.engine == Engine::gillespie ||
                     sc.engine == Engine::lindblad_validate;
  if (timed) {
    for (const char* k : {"t_final", "report_times", "report_count"}) allowed.push_back(k);
  }
  if (sc.engine == Engine::decay || sc.engine == Engine::laser_steady || sc.engine == Engine::lindblad_validate) {
    allowed.push_back("n_max");
  }
  if (sc.engine == Engine::decay) allowed.push_back("save_distributions");
  if (sc.engine == Engine::gillespie) {
    for (const char* k : {"trajectories", "seed"}) allowed.push_back(k);
  }
  if (sc.engine == Engine::classb_spectrum) {
    for (const char* k : {"n_lo", "n_hi", "grid_points", "omega_grid", "monte_carlo", "seed"}) allowed.push_back(k);
  }
  if (sc.engine == Engine::lindblad_validate) {
    for (const char* k : {"gamma_ratios", "mirror_levels", "two_mode_n_max", "adiabatic_tolerance", "two_mode_tolerance"})
      allowed.push_back(k);
  }
  s.allow(allowed);

  n.rel_tol = s.number("rel_tol", n.rel_tol);
  if (!(n.rel_tol >= 1e-13 && n.rel_tol <= 1e-2)) s.fail(s.line("rel_tol"), "'numerics.rel_tol' must lie in [1e-13, 1e-2]");
  if (s.has("n_max")) {
    if (s.text("n_max") != "auto") {
      const long long v = s.integer("n_max");
      if (v < 1) s.fail(s.line("n_max"), "'numerics.n_max' must be >= 1 or auto");
      n.n_max = static_cast<std::size_t>(v);
    }
  }
  if (timed) {
    n.t_final = s.number("t_final") / unit;
    if (!(n.t_final > 0) || !std::isfinite(n.t_final)) s.fail(s.line("t_final"), "'numerics.t_final' must be finite and > 0");
    if (s.has("report_times") && s.has("report_count")) s.fail(s.line("report_count"), "give report_times or report_count, not both");
    if (s.has("report_times")) {
      n.report_times = parse_grid(s, "report_times", 1.0);
      require_sorted(s, "report_times", n.report_times);
      for (double& t : n.report_times) {
        if (!(t > 0)) s.fail(s.line("report_times"), "'numerics.report_times' entries must be > 0");
        t /= unit;
        if (t > n.t_final * (1 + 1e-15)) s.fail(s.line("report_times"), "'numerics.report_times' entries must not exceed t_final");
        t = std::min(t, n.t_final);
      }
    } else {
      const long long count = s.integer("report_count", 200);
      if (count < 1) s.fail(s.line("report_count"), "'numerics.report_count' must be >= 1");
      for (long long i = 1; i <= count; ++i) n.report_times.push_back(n.t_final * static_cast<double>(i) / static_cast<double>(count));
    }
  }
  n.save_distributions = s.flag("save_distributions", false);
  if (s.has("seed")) {
    const long long seed = s.integer("seed");
    if (seed < 0) s.fail(s.line("seed"), "'numerics.seed' must be >= 0");
    n.seed = static_cast<std::uint64_t>(seed);
  }
  if (sc.engine == Engine::gillespie) {
    const long long t = s.integer("trajectories");
    if (t < 2) s.fail(s.line("trajectories"), "'numerics.trajectories' must be >= 2");
    n.trajectories = static_cast<std::size_t>(t);
  }
  if (sc.engine == Engine::classb_spectrum) {
    n.n_lo = s.number("n_lo", 0.0);
    n.n_hi = s.number("n_hi");
    if (!(n.n_lo >= 0 && n.n_hi > n.n_lo && std::isfinite(n.n_hi))) s.fail(s.line("n_hi"), "need 0 <= n_lo < n_hi < inf");
    const long long g = s.integer("grid_points", static_cast<long long>(n.grid_points));
    if (g < 2) s.fail(s.line("grid_points"), "'numerics.grid_points' must be >= 2");
    n.grid_points = static_cast<std::size_t>(g);
    if (s.has("omega_grid")) {
      n.omega_grid = parse_grid(s, "omega_grid", unit);
      require_sorted(s, "omega_grid", n.omega_grid);
      if (n.omega_grid.front() < 0) s.fail(s.line("omega_grid"), "'numerics.omega_grid' must be >= 0");
    }
    if (s.has("monte_carlo")) {
      const Section m = s.child("monte_carlo");
      m.allow({"trajectories", "averaging_times", "step_fraction"});
      MonteCarloControls mc;
      const long long t = m.integer("trajectories");
      if (t < 2) m.fail(m.line("trajectories"), "'" + m.field("trajectories") + "' must be >= 2");
      mc.trajectories = static_cast<std::size_t>(t);
      mc.averaging_times = m.number("averaging_times", mc.averaging_times);
      mc.step_fraction = m.number("step_fraction", mc.step_fraction);
      if (!(mc.averaging_times > 0)) m.fail(m.line("averaging_times"), "'" + m.field("averaging_times") + "' must be > 0");
      if (!(mc.step_fraction > 0 && mc.step_fraction <= 0.01)) {
        m.fail(m.line("step_fraction"), "'" + m.field("step_fraction") + "' must lie in (0, 0.01]");
      }
      n.monte_carlo = mc;
    }
  }
  if (sc.engine == Engine::lindblad_validate) {
    if (!n.n_max) n.n_max = 100;
    if (*n.n_max > 300) s.fail(s.line("n_max"), "'numerics.n_max' must be <= 300 for lindblad-validate");
    if (s.has("gamma_ratios")) {
      n.gamma_ratios = s.numbers("gamma_ratios");
      require_sorted(s, "gamma_ratios", n.gamma_ratios);
      for (double r : n.gamma_ratios) {
        if (!(r >= 20)) s.fail(s.line("gamma_ratios"), "'numerics.gamma_ratios' entries must be >= 20");
      }
    }
    const long long ml = s.integer("mirror_levels", static_cast<long long>(n.mirror_levels));
    if (ml < 2 || ml > 7) s.fail(s.line("mirror_levels"), "'numerics.mirror_levels' must lie in [2, 7]");
    n.mirror_levels = static_cast<std::size_t>(ml);
    const long long tm = s.integer("two_mode_n_max", static_cast<long long>(n.two_mode_n_max));
    if (tm < 1 || tm > 40) s.fail(s.line("two_mode_n_max"), "'numerics.two_mode_n_max' must lie in [1, 40]");
    n.two_mode_n_max = static_cast<std::size_t>(tm);
    n.adiabatic_tolerance = s.number("adiabatic_tolerance", n.adiabatic_tolerance);
    n.two_mode_tolerance = s.number("two_mode_tolerance", n.two_mode_tolerance);
    if (!(n.adiabatic_tolerance > 0)) s.fail(s.line("adiabatic_tolerance"), "'numerics.adiabatic_tolerance' must be > 0");
    if (!(n.two_mode_tolerance > 0)) s.fail(s.line("two_mode_tolerance"), "'numerics.two_mode_tolerance' must be > 0");
  }
}

// Cross-section rules: which gains, initial states and numerics each engine needs.
void check_engine(const Section& top, Scenario& sc) {
  const bool has_initial = sc.initial.has_value();
  const auto gain_line = top.line("gain"), init_line = top.line("initial");
  auto need_gain = [&](bool ok, const char* what) {
    if (!ok) top.fail(gain_line, std::string("engine ") + engine_name(sc.engine) + " needs " + what);
  };
  switch (sc.engine) {
    case Engine::decay:
    case Engine::gillespie:
      need_gain(!std::holds_alternative<ClassBGain>(sc.gain), "gain kind none or saturable");
      if (!has_initial) top.fail(std::string("engine ") + engine_name(sc.engine) + " needs an 'initial' section");
      break;
    case Engine::cumulant:
      need_gain(std::holds_alternative<NoGain>(sc.gain), "gain kind none (it models free decay)");
      if (!has_initial) top.fail("engine cumulant needs an 'initial' section");
      break;
    case Engine::laser_steady:
      need_gain(std::holds_alternative<SaturableGain>(sc.gain), "a saturable gain section");
      if (has_initial) top.fail(init_line, "engine laser-steady computes a stationary state and takes no 'initial' section");
      break;
    case Engine::classb_spectrum:
      need_gain(std::holds_alternative<ClassBGain>(sc.gain), "a classb gain section");
      if (has_initial) top.fail(init_line, "engine classb-spectrum takes no 'initial' section");
      break;
    case Engine::lindblad_validate:
      need_gain(std::holds_alternative<NoGain>(sc.gain), "gain kind none");
      if (!sc.mirror_mode) top.fail(top.line("loss"), "engine lindblad-validate needs loss kind mirror-mode");
      if (!has_initial) top.fail("engine lindblad-validate needs an 'initial' section");
      break;
  }
  if (!top.has("numerics") && sc.engine != Engine::laser_steady) {
    top.fail(std::string("engine ") + engine_name(sc.engine) + " needs a 'numerics' section");
  }
}

YAML::Node load_document(const std::string& text, const std::string& origin) {
  try {
    YAML::Node root = YAML::Load(text);
    if (!root || root.IsNull()) throw ParseError(origin, 1, "empty scenario document");
    return root;
  } catch (const YAML::Exception& e) {
    throw ParseError(origin, e.mark.is_null() ? 0 : e.mark.line + 1, "malformed document: " + e.msg);
  }
}

// Node::operator= writes through to the document, so the walk uses reset().
YAML::Node find_path(const YAML::Node& root, const std::string& path) {
  YAML::Node node;
  node.reset(root);
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    const YAML::Node& current = node;
    if (!current.IsMap() || !current[part]) return YAML::Node(YAML::NodeType::Undefined);
    node.reset(current[part]);
  }
  return node;
}

Scenario parse_root(const YAML::Node& root, const std::string& text, const std::string& origin, bool with_sweep) {
  const Section top(root, "", origin, 1);
  top.allow({"name", "description", "engine", "time_unit", "loss", "gain", "initial", "numerics", "sweep", "budget_seconds"});
  Scenario sc;
  sc.origin = origin;
  sc.source = text;
  sc.name = top.text("name", "scenario");
  sc.description = top.text("description", "");
  sc.engine = parse_engine(top);
  sc.time_unit = top.number("time_unit", 1.0);
  if (!(sc.time_unit > 0) || !std::isfinite(sc.time_unit)) top.fail(top.line("time_unit"), "'time_unit' must be finite and > 0");
  if (top.has("budget_seconds")) {
    sc.budget_seconds = top.number("budget_seconds");
    if (!(*sc.budget_seconds > 0)) top.fail(top.line("budget_seconds"), "'budget_seconds' must be > 0");
  }
  parse_loss(top.child("loss"), sc.time_unit, sc);
  if (top.has("gain")) parse_gain(top.child("gain"), sc.time_unit, sc);
  if (top.has("initial")) sc.initial = parse_initial(top.child("initial"), sc.engine);
  if (top.has("numerics")) parse_numerics(top.child("numerics"), sc.time_unit, sc);
  check_engine(top, sc);
  if (sc.engine == Engine::laser_steady && !top.has("numerics")) sc.numerics = Numerics{};

  if (top.has("sweep") && with_sweep) {
    const Section s = top.child("sweep");
    s.allow({"parameter", "values"});
    SweepSpec sw;
    sw.parameter = s.text("parameter");
    const YAML::Node target = find_path(root, sw.parameter);
    if (!target || !target.IsScalar()) {
      s.fail(s.line("parameter"), "sweep parameter '" + sw.parameter + "' does not name a scalar in this document");
    }
    if (sw.parameter.rfind("sweep", 0) == 0 || sw.parameter == "engine") {
      s.fail(s.line("parameter"), "sweep parameter '" + sw.parameter + "' cannot be swept");
    }
    sw.values = parse_grid(s, "values", 1.0);
    if (sw.values.empty()) s.fail(s.line("values"), "'sweep.values' must not be empty");
    require_sorted(s, "values", sw.values);
    sc.sweep = sw;
  }
  return sc;
}

}  // namespace

const char* engine_name(Engine engine) noexcept {
  switch (engine) {
    case Engine::decay: return "decay";
    case Engine::cumulant: return "cumulant";
    case Engine::laser_steady: return "laser-steady";
    case Engine::lindblad_validate: return "lindblad-validate";
    case Engine::classb_spectrum: return "classb-spectrum";
    case Engine::gillespie: return "gillespie";
  }
  return "unknown";
}

double InitialCondition::mean() const {
  switch (kind) {
    case Kind::vacuum: return 0.0;
    case Kind::fock: return static_cast<double>(n);
    case Kind::coherent:
    case Kind::thermal: return n_bar;
  }
  return 0.0;
}

double InitialCondition::state_variance() const {
  switch (kind) {
    case Kind::vacuum:
    case Kind::fock: return 0.0;
    case Kind::coherent: return n_bar;
    case Kind::thermal: return n_bar + n_bar * n_bar;
  }
  return 0.0;
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  return parse_root(load_document(text, origin), text, origin, true);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open scenario file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

Scenario with_parameter(const Scenario& base, const std::string& path, double value) {
  YAML::Node root = YAML::Clone(load_document(base.source, base.origin));
  YAML::Node target = find_path(root, path);
  if (!target || !target.IsScalar()) throw ParseError(base.origin, 0, "parameter '" + path + "' does not name a scalar");
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << value;
  target = os.str();
  try {
    Scenario sc = parse_root(root, base.source, base.origin, false);
    return sc;
  } catch (const ParseError& e) {
    throw ParseError(std::string(e.what()) + " (with " + path + " = " + os.str() + ")");
  }
}

}  // namespace fockbench
