#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vclock/clock_sim.hpp"
#include "vclock/errors.hpp"
#include "vclock/experiments.hpp"
#include "vclock/kernels.hpp"
#include "vclock/parallel.hpp"
#include "vclock/resolvent.hpp"

using namespace vclock;
namespace fs = std::filesystem;

namespace {

constexpr int kGateFailure = 1;
constexpr int kUsageError = 2;

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << text;
}

void print_report(const RegimeReport& r, const std::string& dir) {
  std::cout << r.summary();
  std::cout << "output=" << dir << '\n';
}

struct SimulateArgs {
  std::string config, kernel = "exponential:c=1,b=0", f = "identity", a = "constant:c=0", b = "constant:c=0";
  double atom = 0.0, lambda = 0.0, nu = 1.0, T = 1.0, dt = 1e-3, clock_step = 0.0;
  std::size_t paths = 100, tables = 4;
  std::uint64_t seed = 1;
  std::string scheme = "timechange", out = "vclock-sim";
};

int run_simulate(const SimulateArgs& s) {
  ClockInput in;
  if (!s.config.empty()) {
    in = RegimeConfig::load(s.config).clock;
  } else {
    in.kernel = parse_kernel(s.kernel);
    in.f = TimeChangeFn::parse(s.f);
    in.curve.a = CurveSpec::parse(s.a);
    in.curve.b = CurveSpec::parse(s.b);
    in.curve.atom = s.atom;
    in.lambda = s.lambda;
    in.nu = s.nu;
    in.horizon = s.T;
    in.scheme = parse_scheme(s.scheme);
  }
  in.step = s.dt;
  in.seed = s.seed;
  in.clock_step = s.clock_step;
  const ClockSimulator sim(in);
  std::vector<double> xT(s.paths), mT(s.paths);
  const std::size_t tables = std::min(s.tables, s.paths);
  std::vector<std::string> csv(tables);
  parallel_for(s.paths, [&](std::size_t i) {
    const ClockPath p = sim.path(i);
    xT[i] = p.X.back();
    mT[i] = p.M.back();
    if (i < tables) csv[i] = path_csv(p, sim);
  });
  fs::create_directories(s.out);
  for (std::size_t i = 0; i < tables; ++i) write_text(fs::path(s.out) / ("path_" + std::to_string(i) + ".csv"), csv[i]);
  std::ostringstream os;
  os.precision(17);
  os << "path,X_T,M_T\n";
  for (std::size_t i = 0; i < s.paths; ++i) os << i << ',' << xT[i] << ',' << mT[i] << '\n';
  write_text(fs::path(s.out) / "terminal.csv", os.str());
  std::cout << "paths=" << s.paths << "\nsteps=" << in.n_steps() << "\nclock_step=" << sim.clock_step()
            << "\noutput=" << s.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volterra clock simulation and limit experiments"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Simulate clock paths and write path tables");
  sim->add_option("--config", sim_args.config, "Regime config; its clock input replaces the model options");
  sim->add_option("--kernel", sim_args.kernel, "Kernel, e.g. fractional:alpha=0.5,c=1")->capture_default_str();
  sim->add_option("--f", sim_args.f, "Time change")->capture_default_str();
  sim->add_option("--a", sim_args.a, "Input curve a")->capture_default_str();
  sim->add_option("--b", sim_args.b, "Input curve b")->capture_default_str();
  sim->add_option("--atom", sim_args.atom, "Atom of b at 0")->capture_default_str();
  sim->add_option("--lambda", sim_args.lambda, "Mean reversion")->capture_default_str();
  sim->add_option("--nu", sim_args.nu, "Noise scale")->capture_default_str();
  sim->add_option("--T", sim_args.T, "Horizon")->capture_default_str();
  sim->add_option("--dt", sim_args.dt, "Time step")->capture_default_str();
  sim->add_option("--clock-step", sim_args.clock_step, "Brownian clock fine step, 0 = auto")->capture_default_str();
  sim->add_option("--scheme", sim_args.scheme, "timechange or sde")->capture_default_str();
  sim->add_option("--paths", sim_args.paths, "Number of paths")->capture_default_str();
  sim->add_option("--tables", sim_args.tables, "Path tables to write")->capture_default_str();
  sim->add_option("--seed", sim_args.seed, "Master seed")->capture_default_str();
  sim->add_option("--out", sim_args.out, "Output directory")->capture_default_str();

  std::string res_kernel, res_out;
  double res_T = 1.0, res_dt = 1e-3;
  auto* res = app.add_subcommand("resolvent", "Numeric resolvent table (t, R) at cell midpoints");
  res->add_option("--kernel", res_kernel, "Kernel, e.g. fractional:alpha=0.5,c=1")->required();
  res->add_option("--T", res_T, "Horizon")->capture_default_str();
  res->add_option("--dt", res_dt, "Step")->capture_default_str();
  res->add_option("--out", res_out, "Write to a file instead of stdout");

  std::string conv_config, conv_regime, conv_out;
  std::uint64_t conv_seed = 0;
  bool conv_paths = false;
  auto* conv = app.add_subcommand("converge", "Run a regime ladder and write its report");
  conv->add_option("--config", conv_config, "Config file (key = value)")->required();
  conv->add_option("--regime", conv_regime, "fast | large_time | hyper_rough | custom_dirac; overrides the config");
  conv->add_option("--seed", conv_seed, "Master seed; overrides the config");
  conv->add_option("--out", conv_out, "Output directory; overrides the config and VCLOCK_OUTPUT_DIR");
  conv->add_flag("--path-tables", conv_paths, "Also write matched path tables for path 0");

  auto* topo = app.add_subcommand("topology-selftest", "Run the cadlag property suite");

  std::string fig_out = "figure1";
  std::size_t fig_paths = 5000, fig_index = 0;
  std::uint64_t fig_seed = 7;
  bool fig_paths_only = false;
  auto* fig = app.add_subcommand("figure1", "Figure 1 settings for f = x and f = x + x^2/2");
  fig->add_option("--out", fig_out, "Output directory")->capture_default_str();
  fig->add_option("--paths", fig_paths, "Paths per ladder point")->capture_default_str();
  fig->add_option("--seed", fig_seed, "Master seed")->capture_default_str();
  fig->add_option("--index", fig_index, "Path index of the matched tables")->capture_default_str();
  fig->add_flag("--paths-only", fig_paths_only, "Only write the matched path tables");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return run_simulate(sim_args);

    if (*res) {
      const std::string csv = resolvent_csv(resolvent_numeric(parse_kernel(res_kernel), res_dt, res_T));
      if (res_out.empty())
        std::cout << csv;
      else
        write_text(res_out, csv);
      return 0;
    }

    if (*conv) {
      RegimeConfig cfg;
      try {
        std::ifstream in(conv_config);
        if (!in) throw ConfigError("cannot open config '" + conv_config + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        std::string text = ss.str();
        cfg = RegimeConfig::parse(text);
        if (!conv_regime.empty()) cfg.regime = parse_regime(conv_regime);
        if (conv->count("--seed")) cfg.seed = conv_seed;
        cfg.validate();
      } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << conv->help() << "\nconfig schema:\n" << config_schema();
        return kUsageError;
      }
      const std::string dir = conv_out.empty() ? cfg.resolved_output_dir() : conv_out;
      const RegimeReport r = run_regime(cfg);
      r.write(dir);
      if (conv_paths) write_matched_paths(cfg, 0, (fs::path(dir) / "paths").string());
      print_report(r, dir);
      return r.pass() ? 0 : kGateFailure;
    }

    if (*topo) {
      bool ok = true;
      for (const auto& r : topology_selftest()) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " value=" << r.value << " threshold=" << r.threshold
                  << '\n';
        ok = ok && r.pass;
      }
      return ok ? 0 : kGateFailure;
    }

    if (*fig) {
      bool ok = true;
      const std::pair<const char*, TimeChangeFn> cases[] = {
          {"identity", TimeChangeFn::identity()}, {"quadratic", TimeChangeFn::linear_plus_quadratic(1.0, 0.5)}};
      for (const auto& [name, f] : cases) {
        RegimeConfig cfg = figure1_config(f);
        cfg.paths = fig_paths;
        cfg.seed = fig_seed;
        const fs::path dir = fs::path(fig_out) / name;
        write_matched_paths(cfg, fig_index, (dir / "paths").string());
        if (fig_paths_only) continue;
        const RegimeReport r = run_fast_regime(cfg);
        r.write(dir.string());
        std::cout << "[" << name << "]\n";
        print_report(r, dir.string());
        ok = ok && r.pass();
      }
      return ok ? 0 : kGateFailure;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kGateFailure + 2;
  }
  return 0;
}
