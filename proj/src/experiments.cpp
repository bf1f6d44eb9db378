#include "vclock/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "vclock/errors.hpp"
#include "vclock/kernels.hpp"
#include "vclock/parallel.hpp"
#include "vclock/resolvent.hpp"
#include "vclock/stats.hpp"

namespace vclock {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v[i]);
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(key + ": cannot parse number '" + v + "'");
  return x;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  std::size_t x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(key + ": cannot parse count '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "regime",          "seed",           "paths",          "ladder",           "alpha_ladder",
      "probes",          "horizon",        "step",           "step_factor",      "f",
      "curve.a",         "curve.b",        "curve.atom",     "lambda",           "nu",
      "scheme",          "clock.step",     "clock.depth",    "limit.reference",  "limit.min_jump",
      "limit.grid_points", "ks.alpha",     "ks.final",       "deviation.final",  "deviation.quantile",
      "matched_paths",   "path_rows",      "large_time.branch", "large_time.rescale", "large_time.tail_horizon",
      "large_time.tail_step", "bursts",    "bursts.paths",   "bursts.deltas",    "bursts.probes",
      "output_dir"};
  return keys;
}

// n K(n .) within the kernel's own family where possible.
KernelSpec accelerate(const KernelSpec& K, double n) {
  if (const auto* e = std::get_if<Exponential>(&K.family())) return KernelSpec::exponential(n * e->c, n * e->b);
  if (const auto* f = std::get_if<Fractional>(&K.family()))
    return KernelSpec::fractional(std::pow(n, f->alpha) * f->c, f->alpha);
  if (const auto* g = std::get_if<GammaKernel>(&K.family()))
    return KernelSpec::gamma(std::pow(n, g->alpha) * g->c, n * g->b, g->alpha);
  return KernelSpec::dirac_scaled(K, n);
}

// c^2 f(x / c)
TimeChangeFn rescale_f(const TimeChangeFn& f, double c) {
  switch (f.kind()) {
    case TimeChangeFn::Kind::Identity:
      return TimeChangeFn::linear(c);
    case TimeChangeFn::Kind::Linear:
      return TimeChangeFn::linear(c * f.a1());
    case TimeChangeFn::Kind::LinearPlusQuadratic:
      return TimeChangeFn::linear_plus_quadratic(c * f.a1(), f.a2());
    default:
      throw ConfigError("large_time.rescale: c_n^2 f(x / c_n) is only supported for identity, linear and quadratic f");
  }
}

// lim c_n^2 f(x / c_n): the quadratic part of f, or nothing when it vanishes.
std::optional<TimeChangeFn> quadratic_part(const TimeChangeFn& f) {
  switch (f.kind()) {
    case TimeChangeFn::Kind::Identity:
    case TimeChangeFn::Kind::Linear:
      return std::nullopt;
    case TimeChangeFn::Kind::LinearPlusQuadratic:
      if (f.a2() > 0.0) return TimeChangeFn::linear_plus_quadratic(0.0, f.a2());
      return std::nullopt;
    default:
      throw ConfigError("large_time.rescale: the rescaled time change has no limit for this f family");
  }
}

// int_0^inf of a curve, when finite
double curve_total(const CurveSpec& c, const std::string& what) {
  using K = CurveSpec::Kind;
  switch (c.kind) {
    case K::Constant:
      if (c.c0 == 0.0) return 0.0;
      break;
    case K::Exp:
      if (c.rate > 0.0) return c.c0 / c.rate;
      break;
    case K::Relax:
      if (c.c0 == 0.0 && c.rate > 0.0) return c.c1 / c.rate;
      break;
    default:
      if (c.c0 == 0.0) return 0.0;
      break;
  }
  throw ConfigError("large_time: " + what + " is not integrable, so G0 has no finite limit; set large_time.rescale");
}

// lim_{t -> inf} c(t)
double curve_tail(const CurveSpec& c, const std::string& what) {
  using K = CurveSpec::Kind;
  switch (c.kind) {
    case K::Constant:
      return c.c0;
    case K::Exp:
      return c.rate > 0.0 ? 0.0 : (c.rate == 0.0 ? c.c0 : throw ConfigError("large_time: " + what + " grows"));
    case K::Relax:
      if (c.rate > 0.0) return c.c0;
      break;
    case K::Power:
      if (c.p < 0.0 || c.c0 == 0.0) return 0.0;
      if (c.p == 0.0) return c.c0;
      break;
    case K::Linear:
      if (c.c0 == 0.0) return 0.0;
      break;
  }
  throw ConfigError("large_time: " + what + " has no finite limit, so G0(n t) / n does not converge");
}

bool use_l1_branch(const RegimeConfig& cfg) {
  if (cfg.branch == "l1") return true;
  if (cfg.branch == "non_l1") return false;
  return cfg.clock.kernel.integrable();
}

// clock input of ladder point i without the clock step
ClockInput raw_input(const RegimeConfig& cfg, std::size_t i) {
  ClockInput in = cfg.clock;
  const double T = in.horizon;
  const double p = cfg.ladder_value(i);
  double n = p;
  switch (cfg.regime) {
    case Regime::Fast:
      in.curve.b = in.curve.b.scaled(n);
      in.curve.atom *= n;
      in.lambda *= n;
      in.nu *= n;
      break;
    case Regime::LargeTime: {
      const double c = cfg.rescale ? 1.0 / n : 1.0;
      in.kernel = accelerate(cfg.clock.kernel, n);
      in.curve.a = in.curve.a.time_scaled(n).scaled(n * c);
      in.curve.b = in.curve.b.time_scaled(n).scaled(n * c);
      in.curve.atom *= c;
      if (cfg.rescale) in.f = rescale_f(in.f, c);
      break;
    }
    case Regime::HyperRough:
      in.kernel = KernelSpec::fractional(1.0, p);
      n = 1.0;
      break;
    case Regime::CustomDirac:
      in.kernel = accelerate(cfg.clock.kernel, n);
      break;
  }
  in.step = cfg.step > 0.0 ? cfg.step : T / (cfg.step_factor * n);
  in.seed = cfg.seed;
  return in;
}

// One Brownian clock for the whole ladder and the limit: the given step, else the default of the
// last (finest) ladder point.
// Deterministic limits need no shared clock, so each point keeps its own default.
double common_clock_step(const RegimeConfig& cfg) {
  if (cfg.clock.clock_step > 0.0) return cfg.clock.clock_step;
  const bool deterministic = cfg.clock.nu == 0.0 || (cfg.regime == Regime::LargeTime && cfg.rescale &&
                                                     !quadratic_part(cfg.clock.f).has_value());
  if (deterministic) return 0.0;
  ClockInput in = raw_input(cfg, cfg.ladder_size() - 1);
  if (!(in.nu > 0.0) || in.scheme != Scheme::TimeChange) return 0.0;
  in.clock_step = 0.0;
  return ClockSimulator(in).clock_step();
}

double interp(const std::vector<double>& X, double step, double t) {
  const double u = t / step;
  const std::size_t N = X.size() - 1;
  const auto k = static_cast<std::size_t>(std::floor(u));
  if (k >= N) return X[N];
  const double w = u - static_cast<double>(k);
  return X[k] + w * (X[k + 1] - X[k]);
}

std::vector<double> grid_times(double T, std::size_t n) {
  std::vector<double> g(n + 1);
  for (std::size_t k = 0; k <= n; ++k) g[k] = T * static_cast<double>(k) / static_cast<double>(n);
  g.back() = T;
  return g;
}

// Quantile q of v (v is sorted in place).
double quantile_of(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto k = static_cast<std::size_t>(std::floor(pos));
  if (k + 1 >= v.size()) return v.back();
  return v[k] + (pos - static_cast<double>(k)) * (v[k + 1] - v[k]);
}

Gate strict_decay_gate(const std::string& name, const std::vector<double>& v) {
  // largest ratio of consecutive values; strict decay means every ratio is below 1
  double worst = 0.0;
  bool ok = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double r = v[i - 1] > 0.0 ? v[i] / v[i - 1] : (v[i] > 0.0 ? INFINITY : 1.0);
    worst = std::max(worst, r);
    if (!(v[i] < v[i - 1])) ok = false;
  }
  return {name, worst, 1.0, ok};
}

LimitGridOptions grid_options(const RegimeConfig& cfg, double h, std::uint64_t stream, bool records) {
  LimitGridOptions o;
  o.clock_step = h;
  o.clock_depth = cfg.clock.clock_depth;
  o.seed = cfg.seed;
  o.stream = stream;
  o.min_jump = cfg.min_jump;
  o.keep_records = records;
  return o;
}

std::string reference_kind(const RegimeConfig& cfg, const LimitModel& m) {
  if (m.deterministic) return "deterministic";
  if (cfg.reference == "exact") {
    if (!m.affine) throw ConfigError("limit.reference=exact needs an affine limit time change");
    return "exact";
  }
  if (cfg.reference == "grid") return "grid";
  return m.affine ? "exact" : "grid";
}

std::vector<double> merged_grid(double T, std::size_t n, const std::vector<double>& extra) {
  auto g = grid_times(T, n);
  g.insert(g.end(), extra.begin(), extra.end());
  std::sort(g.begin(), g.end());
  std::vector<double> out;
  for (double t : g)
    if (out.empty() || t > out.back() + 1e-12 * T) out.push_back(t);
  out.back() = T;
  return out;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << text;
}

}  // namespace

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Fast:
      return "fast";
    case Regime::LargeTime:
      return "large_time";
    case Regime::HyperRough:
      return "hyper_rough";
    case Regime::CustomDirac:
      return "custom_dirac";
  }
  return "fast";
}

Regime parse_regime(const std::string& s) {
  if (s == "fast") return Regime::Fast;
  if (s == "large_time") return Regime::LargeTime;
  if (s == "hyper_rough") return Regime::HyperRough;
  if (s == "custom_dirac") return Regime::CustomDirac;
  throw ConfigError("regime: expected fast, large_time, hyper_rough or custom_dirac, got '" + s + "'");
}

// ---------------------------------------------------------------- config

RegimeConfig RegimeConfig::parse(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.rfind("kernel.", 0) != 0 && !known_keys().count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (!kv.emplace(key, val).second) throw ConfigError("config: duplicate key '" + key + "'");
  }

  try {
    return from_map(kv);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

RegimeConfig RegimeConfig::from_map(const std::map<std::string, std::string>& kv) {
  RegimeConfig c;
  auto has = [&](const char* k) { return kv.count(k) > 0; };
  auto get = [&](const char* k) -> const std::string& { return kv.at(k); };
  if (has("regime")) c.regime = parse_regime(get("regime"));
  if (has("seed")) c.seed = to_count("seed", get("seed"));
  if (has("paths")) c.paths = to_count("paths", get("paths"));
  if (has("ladder")) c.ladder = to_list("ladder", get("ladder"));
  if (has("alpha_ladder")) c.alpha_ladder = to_list("alpha_ladder", get("alpha_ladder"));
  if (has("probes")) c.probes = to_list("probes", get("probes"));
  if (has("horizon")) c.clock.horizon = to_double("horizon", get("horizon"));
  if (has("step")) c.step = to_double("step", get("step"));
  if (has("step_factor")) c.step_factor = to_double("step_factor", get("step_factor"));
  bool any_kernel = false;
  for (const auto& [k, v] : kv)
    if (k.rfind("kernel.", 0) == 0) any_kernel = true;
  if (any_kernel) c.clock.kernel = from_key_values(kv, "kernel");
  if (has("f")) c.clock.f = TimeChangeFn::parse(get("f"));
  if (has("curve.a")) c.clock.curve.a = CurveSpec::parse(get("curve.a"));
  if (has("curve.b")) c.clock.curve.b = CurveSpec::parse(get("curve.b"));
  if (has("curve.atom")) c.clock.curve.atom = to_double("curve.atom", get("curve.atom"));
  if (has("lambda")) c.clock.lambda = to_double("lambda", get("lambda"));
  if (has("nu")) c.clock.nu = to_double("nu", get("nu"));
  if (has("scheme")) c.clock.scheme = parse_scheme(get("scheme"));
  if (has("clock.step")) c.clock.clock_step = to_double("clock.step", get("clock.step"));
  if (has("clock.depth")) c.clock.clock_depth = static_cast<int>(to_count("clock.depth", get("clock.depth")));
  if (has("limit.reference")) c.reference = get("limit.reference");
  if (has("limit.min_jump")) c.min_jump = to_double("limit.min_jump", get("limit.min_jump"));
  if (has("limit.grid_points")) c.grid_points = to_count("limit.grid_points", get("limit.grid_points"));
  if (has("ks.alpha")) c.ks_alpha = to_double("ks.alpha", get("ks.alpha"));
  if (has("ks.final")) c.ks_final = to_double("ks.final", get("ks.final"));
  if (has("deviation.final")) c.deviation_final = to_double("deviation.final", get("deviation.final"));
  if (has("deviation.quantile")) c.deviation_quantile = to_double("deviation.quantile", get("deviation.quantile"));
  if (has("matched_paths")) c.matched_paths = to_count("matched_paths", get("matched_paths"));
  if (has("path_rows")) c.path_rows = to_count("path_rows", get("path_rows"));
  if (has("large_time.branch")) c.branch = get("large_time.branch");
  if (has("large_time.rescale")) c.rescale = to_bool("large_time.rescale", get("large_time.rescale"));
  if (has("large_time.tail_horizon"))
    c.tail_horizon = to_double("large_time.tail_horizon", get("large_time.tail_horizon"));
  if (has("large_time.tail_step")) c.tail_step = to_double("large_time.tail_step", get("large_time.tail_step"));
  if (has("bursts")) c.bursts = to_bool("bursts", get("bursts"));
  if (has("bursts.paths")) c.burst_paths = to_count("bursts.paths", get("bursts.paths"));
  if (has("bursts.deltas")) c.burst_deltas = to_list("bursts.deltas", get("bursts.deltas"));
  if (has("bursts.probes")) c.burst_probes = to_count("bursts.probes", get("bursts.probes"));
  if (has("output_dir")) c.output_dir = get("output_dir");
  if (c.probes.empty()) c.probes = {c.clock.horizon / 2, c.clock.horizon};
  c.validate();
  return c;
}

RegimeConfig RegimeConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string RegimeConfig::to_text() const {
  std::ostringstream os;
  os << "regime = " << to_string(regime) << '\n';
  os << "seed = " << seed << '\n';
  os << "paths = " << paths << '\n';
  os << "ladder = " << fmt_list(ladder) << '\n';
  if (!alpha_ladder.empty()) os << "alpha_ladder = " << fmt_list(alpha_ladder) << '\n';
  os << "probes = " << fmt_list(probes) << '\n';
  os << "horizon = " << fmt(clock.horizon) << '\n';
  os << "step = " << fmt(step) << '\n';
  os << "step_factor = " << fmt(step_factor) << '\n';
  std::map<std::string, std::string> kk;
  to_key_values(clock.kernel, "kernel", kk);
  for (const auto& [k, v] : kk) os << k << " = " << v << '\n';
  os << "f = " << clock.f.to_string() << '\n';
  os << "curve.a = " << clock.curve.a.to_string() << '\n';
  os << "curve.b = " << clock.curve.b.to_string() << '\n';
  os << "curve.atom = " << fmt(clock.curve.atom) << '\n';
  os << "lambda = " << fmt(clock.lambda) << '\n';
  os << "nu = " << fmt(clock.nu) << '\n';
  os << "scheme = " << to_string(clock.scheme) << '\n';
  os << "clock.step = " << fmt(clock.clock_step) << '\n';
  os << "clock.depth = " << clock.clock_depth << '\n';
  os << "limit.reference = " << reference << '\n';
  os << "limit.min_jump = " << fmt(min_jump) << '\n';
  os << "limit.grid_points = " << grid_points << '\n';
  os << "ks.alpha = " << fmt(ks_alpha) << '\n';
  os << "ks.final = " << fmt(ks_final) << '\n';
  os << "deviation.final = " << fmt(deviation_final) << '\n';
  os << "deviation.quantile = " << fmt(deviation_quantile) << '\n';
  os << "matched_paths = " << matched_paths << '\n';
  os << "path_rows = " << path_rows << '\n';
  os << "large_time.branch = " << branch << '\n';
  os << "large_time.rescale = " << (rescale ? "true" : "false") << '\n';
  os << "large_time.tail_horizon = " << fmt(tail_horizon) << '\n';
  os << "large_time.tail_step = " << fmt(tail_step) << '\n';
  os << "bursts = " << (bursts ? "true" : "false") << '\n';
  os << "bursts.paths = " << burst_paths << '\n';
  os << "bursts.deltas = " << fmt_list(burst_deltas) << '\n';
  os << "bursts.probes = " << burst_probes << '\n';
  os << "output_dir = " << output_dir << '\n';
  return os.str();
}

void RegimeConfig::validate() const {
  const double T = clock.horizon;
  if (!(T > 0.0)) throw ConfigError("horizon must be > 0");
  if (paths < 2) throw ConfigError("paths must be >= 2");
  if (regime == Regime::HyperRough) {
    if (alpha_ladder.empty()) throw ConfigError("hyper_rough: alpha_ladder is required");
    for (std::size_t i = 0; i < alpha_ladder.size(); ++i) {
      if (!(alpha_ladder[i] > 0.0 && alpha_ladder[i] < 1.0))
        throw ConfigError("hyper_rough: alpha must lie in (0, 1); alpha = 1 is the Markovian clock with no limit claim");
      if (i > 0 && !(alpha_ladder[i] < alpha_ladder[i - 1]))
        throw ConfigError("hyper_rough: alpha_ladder must be strictly decreasing");
    }
  } else {
    if (ladder.empty()) throw ConfigError("ladder must not be empty");
    if (!strictly_increasing(ladder)) throw ConfigError("ladder must be strictly increasing");
    if (!(ladder.front() > 0.0)) throw ConfigError("ladder values must be > 0");
  }
  if (probes.empty()) throw ConfigError("probes must not be empty");
  if (!strictly_increasing(probes)) throw ConfigError("probes must be strictly increasing");
  for (double t : probes)
    if (!(t > 0.0 && t <= T)) throw ConfigError("probe times must lie in (0, T]");
  if (step < 0.0 || !(step_factor > 0.0)) throw ConfigError("step must be >= 0 and step_factor > 0");
  if (reference != "auto" && reference != "exact" && reference != "grid")
    throw ConfigError("limit.reference: expected auto, exact or grid");
  if (!(min_jump > 0.0)) throw ConfigError("limit.min_jump must be > 0");
  if (grid_points < 2) throw ConfigError("limit.grid_points must be >= 2");
  if (!(ks_alpha > 0.0 && ks_alpha < 1.0)) throw ConfigError("ks.alpha must lie in (0, 1)");
  if (!(deviation_quantile > 0.0 && deviation_quantile <= 1.0))
    throw ConfigError("deviation.quantile must lie in (0, 1]");
  if (branch != "auto" && branch != "l1" && branch != "non_l1")
    throw ConfigError("large_time.branch: expected auto, l1 or non_l1");
  if (rescale && regime != Regime::LargeTime) throw ConfigError("large_time.rescale only applies to large_time");
  if (bursts) {
    if (burst_deltas.empty()) throw ConfigError("bursts.deltas must not be empty");
    for (std::size_t i = 1; i < burst_deltas.size(); ++i)
      if (!(burst_deltas[i] < burst_deltas[i - 1])) throw ConfigError("bursts.deltas must be strictly decreasing");
  }
  if (clock.lambda < 0.0 || clock.nu < 0.0) throw ConfigError("lambda and nu must be >= 0");
  if (path_rows < 2) throw ConfigError("path_rows must be >= 2");

  const KernelSpec& K = clock.kernel;
  switch (regime) {
    case Regime::Fast:
      if (!K.completely_monotone()) throw ConfigError("fast regime: the kernel must be completely monotone");
      if (!(clock.lambda > 0.0)) throw ConfigError("fast regime: lambda must be > 0");
      if (!clock.curve.a.nondecreasing() || !clock.curve.a.nonnegative())
        throw ConfigError("fast regime: a must be nonnegative and non-decreasing");
      if (!clock.curve.b.nonnegative() || clock.curve.atom < 0.0) throw ConfigError("fast regime: b must be nonnegative");
      break;
    case Regime::LargeTime:
      if (branch == "l1" && !K.integrable()) throw ConfigError("large_time l1 branch: the kernel must be integrable");
      if (!use_l1_branch(*this)) {
        if (K.integrable()) throw ConfigError("large_time non_l1 branch: the kernel is integrable");
        if (!K.completely_monotone()) throw ConfigError("large_time non_l1 branch: the kernel must be completely monotone");
        if (!(clock.lambda > 0.0)) throw ConfigError("large_time non_l1 branch: lambda must be > 0");
        if (!(tail_horizon > 0.0 && tail_step > 0.0 && tail_step < tail_horizon))
          throw ConfigError("large_time: need 0 < tail_step < tail_horizon");
      }
      break;
    case Regime::HyperRough:
      break;
    case Regime::CustomDirac:
      if (!K.integrable()) throw ConfigError("custom_dirac: the kernel must be integrable");
      break;
  }
  if (bursts && (regime == Regime::Fast || (regime == Regime::LargeTime && !use_l1_branch(*this))))
    throw ConfigError("bursts: need a regime with fixed (lambda, nu) and a Dirac kernel limit "
                      "(custom_dirac, hyper_rough or large_time l1)");
}

std::string RegimeConfig::resolved_output_dir() const {
  if (const char* env = std::getenv("VCLOCK_OUTPUT_DIR"))
    if (*env) return env;
  return output_dir;
}

std::size_t RegimeConfig::ladder_size() const {
  return regime == Regime::HyperRough ? alpha_ladder.size() : ladder.size();
}

double RegimeConfig::ladder_value(std::size_t i) const {
  return regime == Regime::HyperRough ? alpha_ladder.at(i) : ladder.at(i);
}

std::string config_schema() {
  return R"(# key = value, one per line; '#' starts a comment
regime = fast                # fast | large_time | hyper_rough | custom_dirac
seed = 1                     # master seed
paths = 5000                 # paths per ladder point
ladder = 4,16,64             # n ladder, strictly increasing
alpha_ladder = 0.5,0.25,0.1  # hyper_rough only, strictly decreasing in (0, 1)
probes = 0.05,0.1            # probe times in (0, T]; default T/2, T
horizon = 1                  # T
step = 0                     # fixed step; 0 uses T / (step_factor n)
step_factor = 200
kernel.family = exponential  # exponential | constant | fractional | gamma | shifted | dirac | tabulated
kernel.c = 1                 # family parameters: c, b, alpha, eps, n, base.*, t, k, file
f = identity                 # identity | linear:a1=.. | quadratic:a1=..,a2=.. | power:p=.. | tabulated:..
curve.a = constant:c=0       # constant:c | exp:c,rate | relax:c0,c1,rate | linear:c | power:c,p
curve.b = constant:c=0
curve.atom = 0               # atom of b at 0
lambda = 0
nu = 0
scheme = timechange          # timechange | sde
clock.step = 0               # Brownian clock fine step shared by the ladder and the limit; 0 = auto
clock.depth = 10
limit.reference = auto       # auto | exact | grid
limit.min_jump = 1e-4        # smallest recorded limit jump
limit.grid_points = 1000     # t grid of matched limit paths
ks.alpha = 0.01              # level of the per-point KS thresholds
ks.final = 0.08              # gate on the last ladder point
deviation.final = 0.02       # gate for deterministic limits
deviation.quantile = 0.9
matched_paths = 8            # matched clock/limit pairs for M1 distances
path_rows = 4001             # rows kept in path tables
large_time.branch = auto     # auto | l1 | non_l1
large_time.rescale = false   # c_n = 1/n with f^n(x) = c_n^2 f(x / c_n)
large_time.tail_horizon = 200
large_time.tail_step = 0.01
bursts = false               # decorated burst diagnostics
bursts.paths = 20
bursts.deltas = 0.05,0.02,0.01
bursts.probes = 3
output_dir = vclock-out      # overridden by VCLOCK_OUTPUT_DIR
)";
}

RegimeConfig figure1_config(const TimeChangeFn& f) {
  RegimeConfig c;
  c.regime = Regime::Fast;
  c.ladder = {4, 16, 64};
  c.paths = 5000;
  c.clock.kernel = KernelSpec::fractional(std::sqrt(M_PI), 0.5);
  c.clock.f = f;
  c.clock.curve.a = CurveSpec::constant(1.0);
  c.clock.curve.b = CurveSpec::exp_decay(100.0, 1.0);
  c.clock.lambda = 1.0;
  c.clock.nu = 1.0;
  c.clock.horizon = 0.1;
  c.probes = {0.05, 0.1};
  c.step_factor = 200.0;
  // shared Brownian clock; the quadratic clock runs about ten times further in clock time
  c.clock.clock_step = f.affine() ? 2e-4 : 1e-3;
  c.seed = 7;
  c.output_dir = "figure1";
  return c;
}

// ---------------------------------------------------------------- limit

double LimitModel::marginal_cdf(double t, double x) const {
  if (!affine) throw DomainError("marginal_cdf: limit is not affine");
  const double L = spec.level(t);
  if (!(L > 0.0)) return x >= 0.0 ? 1.0 : 0.0;
  const double a1 = spec.f.a1();
  return ig_cdf(x, L / spec.drift, L * L / (spec.nu * spec.nu * a1));
}

LimitModel limit_model(const RegimeConfig& cfg) {
  cfg.validate();
  const ClockInput& in = cfg.clock;
  const InputCurve curve = in.curve;
  const double T = in.horizon, lambda = in.lambda, nu = in.nu;
  LimitModel m;
  std::optional<TimeChangeFn> fstar = in.f;
  double drift = 1.0, lam_dec = lambda;
  std::function<double(double)> g0s;
  std::ostringstream desc;

  switch (cfg.regime) {
    case Regime::Fast:
      // resolvent form: X^n = G~0^n + (nu / lambda) R^n * W(f(X^n)), G~0^n -> bbar / lambda
      m.kappa = 1.0 / lambda;
      drift = lambda;
      g0s = [curve, lambda](double t) { return (curve.b.integral(t) + curve.atom) / lambda; };
      desc << "inf{s : " << fmt(lambda) << " s - " << fmt(nu) << " W(f(s)) > bbar(t)}";
      break;
    case Regime::LargeTime: {
      if (cfg.rescale) fstar = quadratic_part(in.f);
      if (use_l1_branch(cfg)) {
        const double kappa = l1_norm(in.kernel);
        m.kappa = kappa;
        drift = 1.0 / kappa + lambda;
        if (cfg.rescale) {
          const double slope = curve_tail(curve.a, "a") + kappa * curve_tail(curve.b, "b");
          g0s = [slope](double t) { return slope * t; };
        } else {
          const double g = curve_total(curve.a, "a") + kappa * (curve_total(curve.b, "b") + curve.atom);
          g0s = [g](double) { return g; };
        }
      } else {
        // X = G~0 + (nu / lambda) R_lambda * W(f(X)) with ||R_lambda||_1 = 1
        const double hstep = cfg.tail_step, H = cfg.tail_horizon;
        const auto N = static_cast<std::size_t>(std::ceil(H / hstep - 1e-9));
        const auto nodes = input_nodes(curve, in.kernel, hstep, N);
        auto G0 = [&nodes, hstep, N](double t) {
          const double u = t / hstep;
          const auto k = std::min<std::size_t>(static_cast<std::size_t>(u), N - 1);
          const double w = u - static_cast<double>(k);
          return nodes.G0[k] + w * (nodes.G0[k + 1] - nodes.G0[k]);
        };
        const auto tilde = shifted_input_curve(G0, lambda, in.kernel, hstep, static_cast<double>(N) * hstep);
        const double end = tilde.back(), mid = tilde[tilde.size() / 2];
        const double Hm = static_cast<double>(tilde.size() / 2) * hstep, He = static_cast<double>(N) * hstep;
        m.kappa = 1.0 / lambda;
        drift = lambda;
        lam_dec = 0.0;
        if (cfg.rescale) {
          const double slope = (end - mid) / (He - Hm);
          g0s = [slope](double t) { return slope * t; };
          m.tail_change = std::abs((end - mid) / (He - Hm) - mid / Hm);
        } else {
          g0s = [end](double) { return end; };
          m.tail_change = std::abs(end - mid);
        }
      }
      desc << "large_time " << (use_l1_branch(cfg) ? "l1" : "non_l1") << (cfg.rescale ? " rescaled" : "");
      break;
    }
    case Regime::HyperRough:
      m.kappa = 1.0;
      drift = 1.0 + lambda;
      g0s = [curve](double t) { return dirac_limit_level(curve, t); };
      desc << "inf{s : (1 + " << fmt(lambda) << ") s - " << fmt(nu) << " W(f(s)) > abar(t) + bbar(t)}";
      break;
    case Regime::CustomDirac: {
      const double kappa = l1_norm(in.kernel);
      m.kappa = kappa;
      drift = 1.0 / kappa + lambda;
      g0s = [curve, kappa](double t) { return curve.a.integral(t) + kappa * (curve.b.integral(t) + curve.atom); };
      desc << "dirac limit, kappa = " << fmt(kappa);
      break;
    }
  }
  m.g0_star = g0s;
  const double kappa = m.kappa;
  auto level = [g0s, kappa](double t) { return g0s(t) / kappa; };
  m.deterministic = !fstar.has_value() || nu == 0.0;
  const TimeChangeFn f_lim = fstar.value_or(TimeChangeFn::identity());
  m.affine = !m.deterministic && f_lim.affine();
  if (m.deterministic) {
    // never sampled, so nu = 0 is allowed here
    m.spec.f = f_lim;
    m.spec.lambda = lam_dec;
    m.spec.nu = nu;
    m.spec.drift = drift;
    m.spec.level = level;
    m.spec.level_name = desc.str();
    m.spec.horizon = T;
  } else {
    m.spec = LimitSpec::with_drift(f_lim, lam_dec, nu, drift, level, T, desc.str());
  }
  desc << (m.deterministic ? ", deterministic" : "") << ", drift " << fmt(drift) << ", f* " << f_lim.to_string();
  m.description = desc.str();
  return m;
}

ClockInput ladder_input(const RegimeConfig& cfg, std::size_t i) {
  cfg.validate();
  ClockInput in = raw_input(cfg, i);
  in.clock_step = common_clock_step(cfg);
  return in;
}

CadlagPath limit_cadlag(const JumpPath& p) {
  struct Node {
    double t, left, value;
  };
  std::vector<Node> nodes;
  nodes.reserve(p.t.size() + p.jumps.size());
  for (std::size_t k = 0; k < p.t.size(); ++k) nodes.push_back({p.t[k], k == 0 ? p.x[0] : p.x_left[k], p.x[k]});
  for (const auto& J : p.jumps) nodes.push_back({J.t, J.x_left, J.x_right});
  std::stable_sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.t < b.t; });
  std::vector<double> t, v, l;
  const double tol = 1e-13 * std::max(1.0, p.t.back());
  for (const auto& nd : nodes) {
    if (!t.empty() && nd.t <= t.back() + tol) {
      l.back() = std::min(l.back(), nd.left);
      v.back() = std::max(v.back(), nd.value);
      continue;
    }
    t.push_back(nd.t);
    l.push_back(nd.left);
    v.push_back(nd.value);
  }
  // grid values may sit below a recorded jump in the same cell only by rounding
  for (std::size_t i = 1; i < t.size(); ++i) {
    l[i] = std::max(l[i], v[i - 1]);
    v[i] = std::max(v[i], l[i]);
  }
  l[0] = v[0];
  return CadlagPath(t, v, l);
}

DecoratedPath decorated_limit(const JumpPath& p, const LimitModel& m) {
  const CadlagPath x = limit_cadlag(p);
  const auto& T = x.times();
  std::vector<double> v(T.size()), l(T.size());
  for (std::size_t i = 0; i < T.size(); ++i) {
    const double g = m.g0_star(T[i]);
    v[i] = (x.values()[i] - g) / m.kappa;
    l[i] = (x.lefts()[i] - g) / m.kappa;
  }
  CadlagPath base(T, v, l);
  std::vector<Mark> marks;
  for (const auto& J : p.jumps) {
    const double a = base.left_limit(J.t), b = base(J.t);
    marks.push_back({J.t, std::min({J.dec_lo, a, b}), std::max({J.dec_hi, a, b})});
  }
  return DecoratedPath(std::move(base), std::move(marks), 1e-9);
}

double decoration_record_error(const JumpPath& p, const LimitModel& m) {
  if (p.jumps.empty() || !(p.clock_step > 0.0)) return 0.0;
  const BrownianClock clock(p.seed, p.stream, std::ldexp(p.clock_step, p.clock_depth), p.clock_depth);
  const LimitSpec& s = m.spec;
  const double h = p.clock_step;
  auto F = [&](double x) { return s.decoration_value(x, clock(s.f(x))); };
  double worst = 0.0;
  for (const auto& J : p.jumps) {
    const double g = m.g0_star(J.t);
    const double fl = F(J.x_left), fr = F(J.x_right);
    worst = std::max(worst, std::abs(fl - (J.x_left - g) / m.kappa));
    worst = std::max(worst, std::abs(fr - (J.x_right - g) / m.kappa));
    double lo = std::min(fl, fr), hi = std::max(fl, fr);
    const double u0 = s.f(J.x_left), u1 = s.f(J.x_right);
    for (auto k = static_cast<std::size_t>(std::ceil(u0 / h)); static_cast<double>(k) * h <= u1; ++k) {
      const double x = s.f.inverse(static_cast<double>(k) * h);
      const double v = s.decoration_value(x, clock.node(k));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    worst = std::max(worst, hausdorff_1d({{J.dec_lo, J.dec_hi}}, {{lo, hi}}));
  }
  return worst;
}

// ---------------------------------------------------------------- ladder runs

namespace {

struct PathSlot {
  std::vector<double> probe_x;
  double xT = 0.0, mT = 0.0, fxT = 0.0;
  bool monotone = true;
  std::size_t scanned = 0;
};

RegimeReport run_ladder(const RegimeConfig& cfg) {
  const auto t_start = Clock::now();
  cfg.validate();
  RegimeReport rep;
  rep.config = cfg;
  const LimitModel m = limit_model(cfg);
  rep.limit_description = m.description;
  const std::string ref = reference_kind(cfg, m);
  rep.marginal_kind = m.deterministic ? "deviation" : "ks";
  const double T = cfg.clock.horizon;
  const std::size_t P = cfg.paths, J = cfg.probes.size(), L = cfg.ladder_size();
  const double h = common_clock_step(cfg);
  const bool noisy_limit = !m.deterministic;
  if (noisy_limit && !(h > 0.0))
    throw ConfigError("limit sampling needs the time-change scheme with nu > 0 for a shared Brownian clock");

  // limit marginals on the shared clock
  std::vector<std::vector<double>> lim(J, std::vector<double>(P));
  if (ref == "grid") {
    std::vector<double> g{0.0};
    g.insert(g.end(), cfg.probes.begin(), cfg.probes.end());
    parallel_for(P, [&](std::size_t i) {
      const JumpPath jp = simulate_limit_grid(m.spec, g, grid_options(cfg, h, i, false));
      for (std::size_t j = 0; j < J; ++j) lim[j][i] = jp.x[j + 1];
    });
  }

  // matched limit paths
  const std::size_t n_match = std::min(P, std::max(cfg.matched_paths, cfg.bursts ? cfg.burst_paths : 0));
  const std::size_t n_burst = cfg.bursts ? std::min(P, cfg.burst_paths) : 0;
  std::vector<JumpPath> lim_paths(noisy_limit ? n_match : 0);
  std::vector<CadlagPath> lim_cadlag(n_match);
  const auto tgrid = merged_grid(T, cfg.grid_points, cfg.probes);
  if (noisy_limit) {
    parallel_for(n_match, [&](std::size_t i) {
      lim_paths[i] = simulate_limit_grid(m.spec, tgrid, grid_options(cfg, h, i, false));
      lim_cadlag[i] = limit_cadlag(lim_paths[i]);
    });
  } else {
    const auto det = CadlagPath::sampled([&](double t) { return m.deterministic_value(t); }, 0.0, T, cfg.grid_points);
    for (auto& c : lim_cadlag) c = det;
  }
  std::vector<DecoratedPath> targets;
  if (cfg.bursts) {
    if (!noisy_limit) throw ConfigError("bursts: the limit is deterministic");
    for (std::size_t i = 0; i < n_burst; ++i) targets.push_back(decorated_limit(lim_paths[i], m));
  }

  std::vector<double> final_stats;
  std::vector<std::vector<double>> per_probe(J);
  std::vector<double> m1_mean, dfrak_mean, sup_dev;
  std::vector<CadlagPath> burst_seq;
  for (std::size_t li = 0; li < L; ++li) {
    const auto t_point = Clock::now();
    ClockInput in = raw_input(cfg, li);
    in.clock_step = h;
    const ClockSimulator sim(in);
    LadderPoint pt;
    pt.param = cfg.ladder_value(li);
    pt.step = in.step;
    pt.n_steps = in.n_steps();
    pt.clock_step = sim.clock_step();
    pt.paths = P;

    std::vector<PathSlot> slots(P);
    pt.m1.assign(n_match, 0.0);
    pt.dfrak.assign(n_burst, 0.0);
    CadlagPath burst0;
    parallel_for(P, [&](std::size_t i) {
      const ClockPath p = sim.path(i);
      PathSlot& s = slots[i];
      for (double t : cfg.probes) s.probe_x.push_back(interp(p.X, p.step, t));
      s.xT = p.X.back();
      s.mT = p.M.back();
      s.fxT = in.f(s.xT);
      s.scanned = p.scanned_nodes;
      for (std::size_t k = 1; k < p.X.size(); ++k)
        if (p.X[k] < p.X[k - 1]) s.monotone = false;
      if (i < n_match || i < n_burst) {
        std::vector<double> t(p.X.size());
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = p.t(k);
        t.back() = T;
        if (i < n_match && s.monotone) pt.m1[i] = m1_distance_up(CadlagPath::piecewise_linear(t, p.X), lim_cadlag[i]);
        if (i < n_burst) {
          std::vector<double> ups(p.X.size());
          for (std::size_t k = 0; k < ups.size(); ++k) ups[k] = in.nu * p.M[k] - in.lambda * p.X[k];
          auto up = CadlagPath::piecewise_linear(t, ups);
          pt.dfrak[i] = d_frak(DecoratedPath::embed(up), targets[i]);
          if (i == 0) burst0 = std::move(up);
        }
      }
    });
    if (n_burst > 0) burst_seq.push_back(std::move(burst0));

    // marginals
    std::vector<double> devmax(P, 0.0);
    double worst = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      const double t = cfg.probes[j];
      std::vector<double> x(P);
      for (std::size_t i = 0; i < P; ++i) x[i] = slots[i].probe_x[j];
      ProbeStat ps;
      ps.t = t;
      ps.reference = ref;
      if (ref == "exact") {
        ps.statistic = ks_one_sample(Sample(x), [&](double v) { return m.marginal_cdf(t, v); }).statistic;
        ps.threshold = ks_critical(cfg.ks_alpha) / std::sqrt(static_cast<double>(P));
      } else if (ref == "grid") {
        const auto ks = ks_two_sample(Sample(x), Sample(lim[j]), cfg.ks_alpha);
        ps.statistic = ks.statistic;
        ps.threshold = ks.threshold;
      } else {
        const double target = m.deterministic_value(t);
        std::vector<double> dev(P);
        for (std::size_t i = 0; i < P; ++i) {
          dev[i] = std::abs(x[i] - target) / std::max(std::abs(target), 1e-300);
          devmax[i] = std::max(devmax[i], dev[i]);
        }
        ps.statistic = quantile_of(dev, cfg.deviation_quantile);
        ps.threshold = cfg.deviation_final;
      }
      ps.pass = ps.statistic <= ps.threshold;
      per_probe[j].push_back(ps.statistic);
      worst = std::max(worst, ps.statistic);
      pt.marginals.push_back(ps);
    }
    final_stats.push_back(worst);
    if (m.deterministic) {
      pt.mean_deviation = quantile_of(devmax, cfg.deviation_quantile);
      sup_dev.push_back(pt.mean_deviation);
    }

    // moment gates
    std::vector<double> xs(P), ms(P), fx(P);
    std::size_t non_monotone = 0;
    for (std::size_t i = 0; i < P; ++i) {
      xs[i] = slots[i].xT;
      ms[i] = slots[i].mT;
      fx[i] = slots[i].fxT;
      non_monotone += slots[i].monotone ? 0 : 1;
      pt.scanned_nodes += slots[i].scanned;
    }
    pt.moments.push_back({"monotone", static_cast<double>(non_monotone), 0.0, non_monotone == 0});
    {
      ClockInput det = in;
      det.nu = 0.0;
      const double xdet = ClockSimulator(det).path(0).X.back();
      const auto mx = mc_mean(xs);
      const double gap = std::abs(mx.mean - xdet);
      pt.moments.push_back({"mean", gap, 3 * mx.se, gap <= 3 * mx.se + 1e-9 * std::abs(xdet)});
    }
    if (in.nu > 0.0) {
      const auto mm = mc_mean(ms);
      pt.moments.push_back({"martingale", std::abs(mm.mean), 3 * mm.se, std::abs(mm.mean) <= 3 * mm.se});
      std::vector<double> d(P);
      for (std::size_t i = 0; i < P; ++i) d[i] = (ms[i] - mm.mean) * (ms[i] - mm.mean) - fx[i];
      const auto md = mc_mean(d);
      pt.moments.push_back({"quadratic_variation", std::abs(md.mean), 3 * md.se, std::abs(md.mean) <= 3 * md.se});
    }

    double s1 = 0.0;
    for (double v : pt.m1) s1 += v;
    m1_mean.push_back(n_match ? s1 / static_cast<double>(n_match) : 0.0);
    double s2 = 0.0;
    for (double v : pt.dfrak) s2 += v;
    dfrak_mean.push_back(n_burst ? s2 / static_cast<double>(n_burst) : 0.0);
    pt.seconds = seconds_since(t_point);
    rep.points.push_back(std::move(pt));
  }

  // convergence gates
  if (L > 1) {
    for (std::size_t j = 0; j < J; ++j)
      rep.gates.push_back(strict_decay_gate("marginal.decay.t=" + fmt(cfg.probes[j]), per_probe[j]));
  }
  if (m.deterministic) {
    rep.gates.push_back({"deviation.sup.final", sup_dev.back(), cfg.deviation_final, sup_dev.back() <= cfg.deviation_final});
    if (L > 1) rep.diagnostics.push_back(strict_decay_gate("deviation.sup.decay", sup_dev));
  } else {
    rep.gates.push_back({"marginal.final", final_stats.back(), cfg.ks_final, final_stats.back() <= cfg.ks_final});
  }
  if (L > 1 && n_match > 0) rep.diagnostics.push_back(strict_decay_gate("m1.mean.decay", m1_mean));
  if (m.tail_change > 0.0) rep.diagnostics.push_back({"large_time.tail_change", m.tail_change, 1e-3, m.tail_change <= 1e-3});

  if (cfg.bursts) {
    if (L > 1) rep.gates.push_back(strict_decay_gate("dfrak.decay", dfrak_mean));
    double err = 0.0;
    for (std::size_t i = 0; i < n_burst; ++i) err = std::max(err, decoration_record_error(lim_paths[i], m));
    const double tol = 5.0 * m.spec.nu * std::sqrt(h);
    rep.gates.push_back({"decoration.endpoints", err, tol, err <= tol});
    // decorated check at the largest jumps of matched path 0
    std::vector<LimitJump> js = lim_paths[0].jumps;
    std::sort(js.begin(), js.end(),
              [](const LimitJump& a, const LimitJump& b) { return a.x_right - a.x_left > b.x_right - b.x_left; });
    const double dmax = cfg.burst_deltas.front();
    std::vector<double> probes;
    for (const auto& jj : js) {
      if (probes.size() >= cfg.burst_probes) break;
      if (jj.t - dmax <= 0.0 || jj.t + dmax >= T) continue;
      bool apart = true;
      for (double q : probes)
        if (std::abs(q - jj.t) < 2 * dmax) apart = false;
      if (apart) probes.push_back(jj.t);
    }
    std::sort(probes.begin(), probes.end());
    if (!probes.empty() && L > 0) {
      rep.burst_check = decorated_limit_check(burst_seq, targets[0], probes, cfg.burst_deltas);
      rep.diagnostics.push_back({"decorated_check.flagged", static_cast<double>(rep.burst_check->flagged.size()), 0.0,
                                 rep.burst_check->flagged.empty()});
    }
  }
  rep.seconds = seconds_since(t_start);
  return rep;
}

}  // namespace

RegimeReport run_fast_regime(const RegimeConfig& cfg) {
  if (cfg.regime != Regime::Fast) throw ConfigError("run_fast_regime: regime is " + to_string(cfg.regime));
  return run_ladder(cfg);
}

RegimeReport run_large_time(const RegimeConfig& cfg) {
  if (cfg.regime != Regime::LargeTime) throw ConfigError("run_large_time: regime is " + to_string(cfg.regime));
  return run_ladder(cfg);
}

RegimeReport run_hyper_rough(const RegimeConfig& cfg) {
  if (cfg.regime != Regime::HyperRough) throw ConfigError("run_hyper_rough: regime is " + to_string(cfg.regime));
  return run_ladder(cfg);
}

RegimeReport run_burst_diagnostics(const RegimeConfig& cfg) {
  RegimeConfig c = cfg;
  c.bursts = true;
  return run_ladder(c);
}

RegimeReport run_regime(const RegimeConfig& cfg) { return run_ladder(cfg); }

// ---------------------------------------------------------------- report

bool RegimeReport::pass() const {
  for (const auto& g : gates)
    if (!g.pass) return false;
  return true;
}

std::string RegimeReport::summary() const {
  std::ostringstream os;
  auto b = [](bool v) { return v ? "true" : "false"; };
  os << "regime=" << to_string(config.regime) << '\n';
  os << "seed=" << config.seed << '\n';
  os << "limit=" << limit_description << '\n';
  os << "marginal_kind=" << marginal_kind << '\n';
  os << "paths=" << config.paths << '\n';
  os << "points=" << points.size() << '\n';
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const std::string k = "point." + std::to_string(i) + ".";
    os << k << (config.regime == Regime::HyperRough ? "alpha=" : "n=") << fmt(p.param) << '\n';
    os << k << "step=" << fmt(p.step) << '\n';
    os << k << "n_steps=" << p.n_steps << '\n';
    os << k << "clock_step=" << fmt(p.clock_step) << '\n';
    os << k << "scanned_nodes=" << p.scanned_nodes << '\n';
    for (std::size_t j = 0; j < p.marginals.size(); ++j) {
      const auto& s = p.marginals[j];
      const std::string q = k + "marginal." + std::to_string(j) + ".";
      os << q << "t=" << fmt(s.t) << '\n'
         << q << "reference=" << s.reference << '\n'
         << q << "statistic=" << fmt(s.statistic) << '\n'
         << q << "threshold=" << fmt(s.threshold) << '\n'
         << q << "pass=" << b(s.pass) << '\n';
    }
    if (marginal_kind == "deviation") os << k << "sup_deviation_quantile=" << fmt(p.mean_deviation) << '\n';
    for (const auto& g : p.moments) {
      const std::string q = k + "moment." + g.name + ".";
      os << q << "value=" << fmt(g.value) << '\n' << q << "threshold=" << fmt(g.threshold) << '\n'
         << q << "pass=" << b(g.pass) << '\n';
    }
    if (!p.m1.empty()) {
      double s = 0.0, mx = 0.0;
      for (double v : p.m1) s += v, mx = std::max(mx, v);
      os << k << "m1.mean=" << fmt(s / static_cast<double>(p.m1.size())) << '\n' << k << "m1.max=" << fmt(mx) << '\n';
    }
    if (!p.dfrak.empty()) {
      double s = 0.0, mx = 0.0;
      for (double v : p.dfrak) s += v, mx = std::max(mx, v);
      os << k << "dfrak.mean=" << fmt(s / static_cast<double>(p.dfrak.size())) << '\n'
         << k << "dfrak.max=" << fmt(mx) << '\n';
    }
  }
  for (const auto& g : gates)
    os << "gate." << g.name << ".value=" << fmt(g.value) << '\n'
       << "gate." << g.name << ".threshold=" << fmt(g.threshold) << '\n'
       << "gate." << g.name << ".pass=" << b(g.pass) << '\n';
  for (const auto& g : diagnostics)
    os << "diagnostic." << g.name << ".value=" << fmt(g.value) << '\n'
       << "diagnostic." << g.name << ".threshold=" << fmt(g.threshold) << '\n'
       << "diagnostic." << g.name << ".pass=" << b(g.pass) << '\n';
  if (burst_check) {
    os << "burst_check.probes=" << fmt_list(burst_check->probes) << '\n';
    os << "burst_check.deltas=" << fmt_list(burst_check->deltas) << '\n';
    os << "burst_check.final_max=" << fmt(burst_check->final_max) << '\n';
  }
  os << "pass=" << b(pass()) << '\n';
  return os.str();
}

std::string RegimeReport::marginals_csv() const {
  std::ostringstream os;
  os << "point,param,t,reference,statistic,threshold,pass\n";
  for (std::size_t i = 0; i < points.size(); ++i)
    for (const auto& s : points[i].marginals)
      os << i << ',' << fmt(points[i].param) << ',' << fmt(s.t) << ',' << s.reference << ',' << fmt(s.statistic) << ','
         << fmt(s.threshold) << ',' << (s.pass ? 1 : 0) << '\n';
  return os.str();
}

std::string RegimeReport::moments_csv() const {
  std::ostringstream os;
  os << "point,param,gate,value,threshold,pass\n";
  for (std::size_t i = 0; i < points.size(); ++i)
    for (const auto& g : points[i].moments)
      os << i << ',' << fmt(points[i].param) << ',' << g.name << ',' << fmt(g.value) << ',' << fmt(g.threshold) << ','
         << (g.pass ? 1 : 0) << '\n';
  return os.str();
}

std::string RegimeReport::distances_csv() const {
  std::ostringstream os;
  os << "point,param,path,m1,dfrak\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const std::size_t n = std::max(p.m1.size(), p.dfrak.size());
    for (std::size_t k = 0; k < n; ++k)
      os << i << ',' << fmt(p.param) << ',' << k << ',' << (k < p.m1.size() ? fmt(p.m1[k]) : "") << ','
         << (k < p.dfrak.size() ? fmt(p.dfrak[k]) : "") << '\n';
  }
  return os.str();
}

std::string RegimeReport::timing() const {
  std::ostringstream os;
  os << "seconds=" << fmt(seconds) << '\n';
  os << "threads=" << worker_count() << '\n';
  for (std::size_t i = 0; i < points.size(); ++i) os << "point." << i << ".seconds=" << fmt(points[i].seconds) << '\n';
  return os.str();
}

void RegimeReport::write(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path d(dir);
  write_file(d / "config.txt", config.to_text());
  write_file(d / "summary.txt", summary());
  write_file(d / "marginals.csv", marginals_csv());
  write_file(d / "moments.csv", moments_csv());
  write_file(d / "distances.csv", distances_csv());
  if (burst_check) {
    std::ostringstream os;
    os << "probe,delta,point,distance\n";
    for (std::size_t p = 0; p < burst_check->dist.size(); ++p)
      for (std::size_t q = 0; q < burst_check->dist[p].size(); ++q)
        for (std::size_t n = 0; n < burst_check->dist[p][q].size(); ++n)
          os << fmt(burst_check->probes[p]) << ',' << fmt(burst_check->deltas[q]) << ',' << n << ','
             << fmt(burst_check->dist[p][q][n]) << '\n';
    write_file(d / "burst_check.csv", os.str());
  }
  write_file(d / "timing.txt", timing());
}

void write_matched_paths(const RegimeConfig& cfg, std::uint64_t index, const std::string& dir) {
  namespace fs = std::filesystem;
  cfg.validate();
  fs::create_directories(dir);
  const fs::path d(dir);
  const double h = common_clock_step(cfg);
  for (std::size_t li = 0; li < cfg.ladder_size(); ++li) {
    ClockInput in = raw_input(cfg, li);
    in.clock_step = h;
    const ClockSimulator sim(in);
    const ClockPath p = sim.path(index);
    const std::size_t N = p.X.size() - 1;
    const std::size_t stride = std::max<std::size_t>(1, (N + cfg.path_rows - 2) / (cfg.path_rows - 1));
    std::ostringstream os;
    os.precision(17);
    os << "t,X,M,Upsilon\n";
    for (std::size_t k = 0;; k += stride) {
      if (k > N) k = N;
      os << p.t(k) << ',' << p.X[k] << ',' << p.M[k] << ',' << in.nu * p.M[k] - in.lambda * p.X[k] << '\n';
      if (k == N) break;
    }
    write_file(d / ("prelimit_" + std::to_string(li) + ".csv"), os.str());
  }
  const LimitModel m = limit_model(cfg);
  if (m.deterministic) {
    std::ostringstream os;
    os.precision(17);
    os << "t,x\n";
    for (double t : grid_times(cfg.clock.horizon, cfg.grid_points)) os << t << ',' << m.deterministic_value(t) << '\n';
    write_file(d / "limit.csv", os.str());
    return;
  }
  const auto tgrid = merged_grid(cfg.clock.horizon, cfg.grid_points, cfg.probes);
  const JumpPath jp = simulate_limit_grid(m.spec, tgrid, grid_options(cfg, h, index, false));
  write_file(d / "limit.csv", jump_path_csv(jp));
  write_file(d / "limit_decorations.csv", decorations_csv(jp, m.spec));
}

}  // namespace vclock
