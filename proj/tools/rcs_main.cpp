// rcs: command-line front end for the recursive compressed sensing library.
//
//   rcs gen       sparse stream -> text file (one value per line)
//   rcs run       encode + decode a stream, emission CSV and summary CSV
//   rcs bench     recursive+warm vs direct+cold wall time per window
//   rcs support   TPR/FPR of thresholded LASSO supports vs m
//   rcs debias    repeated-measurement comparison of the three combiners
//   rcs mismatch  expected l1 tail beyond kappa vs n and p
//
// Every subcommand accepts --config FILE with key=value lines; flags given on
// the command line win over the file, the file wins over the defaults.

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rcs/decoder.hpp"
#include "rcs/encoder.hpp"
#include "rcs/errors.hpp"
#include "rcs/experiments.hpp"
#include "rcs/io.hpp"
#include "rcs/metrics.hpp"
#include "rcs/random.hpp"
#include "rcs/sensing.hpp"
#include "rcs/signal.hpp"

namespace {

using namespace rcs;

// Output goes to a file when a path is given, else to stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw IoError("cannot open " + path + " for writing");
    }
  }
  std::ostream& out() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

const std::map<std::string, Ensemble> kEnsembles{
    {"gaussian", Ensemble::gaussian}, {"bernoulli", Ensemble::bernoulli}, {"achlioptas", Ensemble::achlioptas}};

using Action = std::function<void()>;

// --config FILE holds key=value lines naming long options of the subcommand
// (without the dashes). Values fill only options absent from the command line.
void add_config(CLI::App* app, std::string& path) {
  app->add_option("--config", path, "key=value file; command-line flags take precedence");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

void apply_config(CLI::App* app, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    while (!key.empty() && key.front() == '-') key.erase(0, 1);
    std::replace(key.begin(), key.end(), '_', '-');
    CLI::Option* opt = app->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config")
      throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    if (opt->get_type_size() == 0) {
      opt->add_result(opt->get_flag_value("--" + key, value));
    } else {
      opt->add_result(value);
    }
    opt->run_callback();
  }
}

void add_solver(CLI::App* app, FistaOptions& s) {
  app->add_option("--eps", s.eps, "KKT tolerance (0 = 1e-6 * lambda)")->check(CLI::NonNegativeNumber);
  app->add_option("--max-iter", s.max_iter, "FISTA iteration cap")->check(CLI::PositiveNumber);
  app->add_flag("!--plain-fista", s.monotone, "disable the monotone safeguard");
  app->add_flag("!--no-restart", s.restart, "disable momentum restarts");
}

// ------------------------------------------------------------------- gen

struct GenArgs {
  std::string config;
  StreamConfig stream{0.05, 1.0, 2.0, 1, 1000};
  std::string output;
};

Action setup_gen(CLI::App& root, GenArgs& a) {
  auto* c = root.add_subcommand("gen", "generate a sparse stream (text, one value per line)");
  add_config(c, a.config);
  c->add_option("--length", a.stream.length, "number of entries")->capture_default_str();
  c->add_option("--p", a.stream.p, "probability of a nonzero")->capture_default_str();
  c->add_option("--amp-low", a.stream.amp_low, "smallest nonzero magnitude")->capture_default_str();
  c->add_option("--amp-high", a.stream.amp_high, "largest nonzero magnitude")->capture_default_str();
  c->add_option("--seed", a.stream.seed, "RNG seed")->capture_default_str();
  c->add_option("-o,--output", a.output, "output path (default stdout)");
  return [&a] {
    const SparseStream s = gen_stream(a.stream);
    Sink sink(a.output);
    write_stream_text(sink.out(), s.values);
  };
}

// ------------------------------------------------------------------- run

struct RunArgs {
  std::string config;
  std::string input;
  StreamConfig stream{0.05, 1.0, 2.0, 1, 12000};
  std::size_t n = 600, tau = 1, m = 0;
  std::string m_rule = "6pn";
  std::string ensemble = "gaussian";
  double sigma = 0.1, lambda = 0.0, xi1 = 0.1;
  std::size_t xi2 = 0, xi3 = 1;
  std::string detector = "threshold", combiner = "voting", warm_tail = "zeros", encoding = "recursive";
  bool warm = true;
  std::size_t max_windows = 0;
  std::uint64_t seed = 1;
  FistaOptions solver;
  std::string output, summary;
};

Action setup_run(CLI::App& root, RunArgs& a) {
  auto* c = root.add_subcommand(
      "run", "encode and decode a stream; desk-scale default n=600 (m = 6pn = 180)");
  add_config(c, a.config);
  c->add_option("-i,--input", a.input, "stream file; if absent a stream is generated");
  c->add_option("--length", a.stream.length, "generated stream length")->capture_default_str();
  c->add_option("--p", a.stream.p, "nonzero probability (generation and m rules)")->capture_default_str();
  c->add_option("--amp-low", a.stream.amp_low, "generated magnitude band, low")->capture_default_str();
  c->add_option("--amp-high", a.stream.amp_high, "generated magnitude band, high")->capture_default_str();
  c->add_option("--n", a.n, "window length")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--tau", a.tau, "window step")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--m", a.m, "measurements per window (with --m-rule fixed)");
  c->add_option("--m-rule", a.m_rule, "fixed | 6pn | 5kbar")
      ->capture_default_str()
      ->check(CLI::IsMember({"fixed", "6pn", "5kbar"}));
  c->add_option("--ensemble", a.ensemble, "gaussian | bernoulli | achlioptas")
      ->capture_default_str()
      ->check(CLI::IsMember({"gaussian", "bernoulli", "achlioptas"}));
  c->add_option("--sigma", a.sigma, "measurement noise std")->capture_default_str();
  c->add_option("--lambda", a.lambda, "LASSO weight (0 = 4 sigma sqrt(2 log n))");
  c->add_option("--xi1", a.xi1, "vote magnitude threshold")->capture_default_str();
  c->add_option("--xi2", a.xi2, "votes needed for acceptance (0 = ceil(n / 2tau))");
  c->add_option("--xi3", a.xi3, "top-k votes for the annihilation detector")->capture_default_str();
  c->add_option("--detector", a.detector, "threshold | annihilate_topk")
      ->capture_default_str()
      ->check(CLI::IsMember({"threshold", "annihilate_topk"}));
  c->add_option("--combiner", a.combiner, "voting | average_only | debias_no_voting")
      ->capture_default_str()
      ->check(CLI::IsMember({"voting", "average_only", "debias_no_voting"}));
  c->add_option("--warm-tail", a.warm_tail, "zeros | hold")
      ->capture_default_str()
      ->check(CLI::IsMember({"zeros", "hold"}));
  c->add_option("--encoding", a.encoding, "recursive | direct")
      ->capture_default_str()
      ->check(CLI::IsMember({"recursive", "direct"}));
  c->add_flag("!--cold", a.warm, "start every window from zero");
  c->add_option("--max-windows", a.max_windows, "stop after this many windows (0 = all)");
  c->add_option("--seed", a.seed, "seed for matrix, noise and generated stream")->capture_default_str();
  add_solver(c, a.solver);
  c->add_option("-o,--output", a.output, "emission CSV path (default: not written)");
  c->add_option("--summary", a.summary, "summary CSV path (default stdout)");

  return [&a] {
    std::vector<double> values;
    if (!a.input.empty()) {
      values = read_stream_file(a.input);
    } else {
      StreamConfig sc = a.stream;
      sc.seed = derive_seed(a.seed, {0x57});
      values = gen_stream(sc).values;
    }
    const double p = a.stream.p;
    std::size_t m = a.m;
    if (a.m_rule == "6pn") m = m_rule_6pn(p, a.n);
    else if (a.m_rule == "5kbar") m = m_rule_5kbar(p, a.n);
    if (m == 0) throw ConfigError("--m-rule fixed needs --m");

    const SensingMatrix A = generate(kEnsembles.at(a.ensemble), m, a.n, derive_seed(a.seed, {0xA}));
    StreamRunOptions o;
    o.rcs.n = a.n;
    o.rcs.tau = a.tau;
    o.rcs.lambda = a.lambda > 0.0 ? a.lambda : default_lambda(a.sigma, a.n);
    o.rcs.xi1 = a.xi1;
    o.rcs.xi2 = a.xi2;
    o.rcs.xi3 = a.xi3;
    o.rcs.detector = parse_detector(a.detector);
    o.rcs.combiner = parse_combiner(a.combiner);
    o.rcs.warm_tail = parse_warm_tail(a.warm_tail);
    o.rcs.warm_start = a.warm;
    o.rcs.solver = a.solver;
    o.noise = {a.sigma, derive_seed(a.seed, {0x40})};
    o.encoding = a.encoding == "direct" ? EncodingMode::direct : EncodingMode::recursive;
    o.max_windows = a.max_windows;
    if (a.sigma == 0.0 && a.lambda <= 0.0) throw ConfigError("sigma = 0 needs an explicit --lambda");

    const StreamRunResult r = run_stream(A, values, o);
    if (!a.output.empty()) {
      Sink sink(a.output);
      write_emission_header(sink.out());
      for (const auto& e : r.emissions) write_emission(sink.out(), e);
    }
    Sink sink(a.summary);
    write_summary_header(sink.out());
    auto row = [&](const std::string& metric, double v) {
      write_summary_row(sink.out(), {"run", a.n, a.tau, m, a.sigma, a.seed, metric, v});
    };
    row("windows", static_cast<double>(r.iterations.size()));
    row("stream_nev", r.summary.stream_nev);
    row("mean_ne", r.summary.mean_ne());
    row("skipped_windows", static_cast<double>(r.summary.skipped_windows));
    row("tpr", r.summary.tpr);
    row("fpr", r.summary.fpr);
    row("mean_iterations", r.summary.mean_iterations);
    row("unconverged_windows", static_cast<double>(r.unconverged_windows));
  };
}

// ----------------------------------------------------------------- bench

struct BenchArgs {
  std::string config;
  std::vector<std::size_t> n_values{200, 400, 600, 800, 1000};
  BenchOptions base;
  std::string ensemble = "gaussian";
  std::string output;
};

Action setup_bench(CLI::App& root, BenchArgs& a) {
  a.base.windows = 50;
  auto* c = root.add_subcommand(
      "bench", "per-window wall time, recursive sampling + warm start vs direct sampling + cold start");
  add_config(c, a.config);
  c->add_option("--n-values", a.n_values, "window lengths to sweep")->delimiter(',')->capture_default_str();
  c->add_option("--tau", a.base.tau, "window step")->capture_default_str();
  c->add_option("--p", a.base.p, "nonzero probability; m = 6pn")->capture_default_str();
  c->add_option("--sigma", a.base.sigma, "measurement noise std")->capture_default_str();
  c->add_option("--windows", a.base.windows, "windows per arm")->capture_default_str();
  c->add_option("--ensemble", a.ensemble, "gaussian | bernoulli | achlioptas")
      ->capture_default_str()
      ->check(CLI::IsMember({"gaussian", "bernoulli", "achlioptas"}));
  c->add_option("--seed", a.base.seed, "RNG seed")->capture_default_str();
  add_solver(c, a.base.solver);
  c->add_option("-o,--output", a.output, "CSV path (default stdout)");
  return [&a] {
    Sink sink(a.output);
    auto& out = sink.out();
    out << "n,m,windows,recursive_warm_seconds,direct_cold_seconds,speedup,warm_mean_iterations,"
           "cold_mean_iterations,encode_ops_recursive,encode_ops_direct,max_estimate_gap\n";
    for (std::size_t n : a.n_values) {
      BenchOptions o = a.base;
      o.n = n;
      o.ensemble = kEnsembles.at(a.ensemble);
      const BenchResult r = bench_arms(o);
      out << r.n << ',' << r.m << ',' << r.windows << ',' << format_real(r.recursive_warm_seconds) << ','
          << format_real(r.direct_cold_seconds) << ',' << format_real(r.speedup) << ','
          << format_real(r.warm_mean_iterations) << ',' << format_real(r.cold_mean_iterations) << ','
          << format_real(r.encode_ops_recursive) << ',' << format_real(r.encode_ops_direct) << ','
          << format_real(r.max_estimate_gap) << '\n';
    }
  };
}

// --------------------------------------------------------------- support

struct SupportArgs {
  std::string config;
  SupportSweepOptions o;
  std::string ensemble = "gaussian";
  std::string output;
};

Action setup_support(CLI::App& root, SupportArgs& a) {
  a.o.m_values = {12, 24, 36, 48, 60, 90, 120, 180, 240};
  auto* c = root.add_subcommand(
      "support", "TPR/FPR vs m for thresholded LASSO; desk scale n=600, kappa=6 (one tenth of 6000/60)");
  add_config(c, a.config);
  c->add_option("--n", a.o.n, "signal length")->capture_default_str();
  c->add_option("--kappa", a.o.kappa, "nonzeros per signal")->capture_default_str();
  c->add_option("--sigma", a.o.sigma, "noise std")->capture_default_str();
  c->add_option("--amp-low", a.o.amp_low, "smallest magnitude")->capture_default_str();
  c->add_option("--amp-high", a.o.amp_high, "largest magnitude")->capture_default_str();
  c->add_option("--m-values", a.o.m_values, "measurement counts")->delimiter(',')->capture_default_str();
  c->add_option("--xi1-values", a.o.xi1_values, "support thresholds")->delimiter(',')->capture_default_str();
  c->add_option("--trials", a.o.trials, "signals per m")->capture_default_str();
  c->add_option("--ensemble", a.ensemble, "gaussian | bernoulli | achlioptas")
      ->capture_default_str()
      ->check(CLI::IsMember({"gaussian", "bernoulli", "achlioptas"}));
  c->add_option("--seed", a.o.seed, "RNG seed")->capture_default_str();
  add_solver(c, a.o.solver);
  c->add_option("-o,--output", a.output, "CSV path (default stdout)");
  return [&a] {
    a.o.ensemble = kEnsembles.at(a.ensemble);
    const auto pts = support_sweep(a.o);
    Sink sink(a.output);
    sink.out() << "m,xi1,tpr,fpr\n";
    for (const auto& p : pts)
      sink.out() << p.m << ',' << format_real(p.xi1) << ',' << format_real(p.tpr) << ','
                 << format_real(p.fpr) << '\n';
  };
}

// ---------------------------------------------------------------- debias

struct DebiasArgs {
  std::string config;
  DebiasOptions o;
  std::string output;
};

Action setup_debias(CLI::App& root, DebiasArgs& a) {
  auto* c = root.add_subcommand(
      "debias", "fixed window, K noisy measurements: average-only vs voting vs debias without voting");
  add_config(c, a.config);
  c->add_option("--n", a.o.n, "window length")->capture_default_str();
  c->add_option("--kappa", a.o.kappa, "nonzeros")->capture_default_str();
  c->add_option("--m", a.o.m, "measurements (0 = ceil(2 kappa ln n))")->capture_default_str();
  c->add_option("--sigma", a.o.sigma, "noise std")->capture_default_str();
  c->add_option("--lambda", a.o.lambda, "LASSO weight (0 = 4 sigma sqrt(2 log n))");
  c->add_option("--xi1", a.o.xi1, "vote magnitude threshold")->capture_default_str();
  c->add_option("--amp-low", a.o.amp_low, "smallest magnitude")->capture_default_str();
  c->add_option("--amp-high", a.o.amp_high, "largest magnitude")->capture_default_str();
  c->add_option("--k-values", a.o.k_values, "measurement counts K")->delimiter(',')->capture_default_str();
  c->add_option("--seeds", a.o.seeds, "independent signals averaged")->capture_default_str();
  c->add_option("--seed", a.o.seed, "RNG seed")->capture_default_str();
  add_solver(c, a.o.solver);
  c->add_option("-o,--output", a.output, "CSV path (default stdout)");
  return [&a] {
    const auto pts = debias_study(a.o);
    Sink sink(a.output);
    sink.out() << "k,mse_average_only,mse_voting,mse_debias_no_voting\n";
    for (const auto& p : pts)
      sink.out() << p.k << ',' << format_real(p.mse_average_only) << ',' << format_real(p.mse_voting) << ','
                 << format_real(p.mse_debias_no_voting) << '\n';
  };
}

// -------------------------------------------------------------- mismatch

struct MismatchArgs {
  std::string config;
  std::vector<std::size_t> n_values{10, 20, 50, 100, 200, 500, 1000};
  std::vector<double> p_values{0.01, 0.05, 0.1, 0.2, 0.5};
  double amp = 1.0;
  std::string output;
};

Action setup_mismatch(CLI::App& root, MismatchArgs& a) {
  auto* c = root.add_subcommand("mismatch", "expected l1 mass beyond the kappa = ceil(np) largest entries");
  add_config(c, a.config);
  c->add_option("--n-values", a.n_values, "window lengths")->delimiter(',')->capture_default_str();
  c->add_option("--p-values", a.p_values, "nonzero probabilities")->delimiter(',')->capture_default_str();
  c->add_option("--amp", a.amp, "magnitudes uniform on [0, amp]")->capture_default_str();
  c->add_option("-o,--output", a.output, "CSV path (default stdout)");
  return [&a] {
    const auto rows = mismatch_table(a.n_values, a.p_values, a.amp);
    Sink sink(a.output);
    sink.out() << "n,p,kappa,expectation\n";
    for (const auto& r : rows)
      sink.out() << r.n << ',' << format_real(r.p) << ',' << r.kappa << ',' << format_real(r.expectation)
                 << '\n';
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive compressed sensing over sliding windows of a sparse stream.\n"
               "RCS_THREADS caps the worker pool used by bench, support and debias."};
  app.require_subcommand(1);

  GenArgs gen;
  RunArgs run;
  BenchArgs bench;
  SupportArgs support;
  DebiasArgs debias;
  MismatchArgs mismatch;
  const std::vector<std::pair<Action, const std::string*>> actions{
      {setup_gen(app, gen), &gen.config},          {setup_run(app, run), &run.config},
      {setup_bench(app, bench), &bench.config},    {setup_support(app, support), &support.config},
      {setup_debias(app, debias), &debias.config}, {setup_mismatch(app, mismatch), &mismatch.config}};

  try {
    app.parse(argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    const auto all = app.get_subcommands({});
    const auto idx = static_cast<std::size_t>(std::find(all.begin(), all.end(), sub) - all.begin());
    if (!actions[idx].second->empty()) apply_config(sub, *actions[idx].second);
    actions[idx].first();
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const rcs::WindowError& e) {
    std::cerr << "rcs: solver failure at window " << e.window() << ": " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "rcs: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
