// opmap: fit, diagnose and simulate MAP2 operational-loss models.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "opmap/aggregate.hpp"
#include "opmap/counting.hpp"
#include "opmap/error.hpp"
#include "opmap/estimation.hpp"
#include "opmap/io.hpp"
#include "opmap/persistence.hpp"
#include "opmap/published.hpp"
#include "opmap/reproduce.hpp"
#include "opmap/severity.hpp"

namespace {

using namespace opmap;
using io::Cell;
using io::Table;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitAcceptance = 4;

struct Globals {
  std::uint64_t seed = 1;
  std::string out = "out";
  std::string format = "csv";
  unsigned threads = 0;

  io::Format table_format() const { return format == "json" ? io::Format::Json : io::Format::Csv; }
};

void log_stats(const char* what, const std::vector<double>& v) {
  const auto s = io::describe(v);
  std::fprintf(stderr, "%s: n=%zu mean=%.6g median=%.6g CV=%.6g max=%.6g\n", what, v.size(), s.mean, s.median, s.cv,
               s.max);
}

Map2 model_or_default(const std::string& path) {
  return path.empty() ? published::fitted_model() : io::load_model(path);
}

DplnParams severity_or_default(const std::string& path) {
  return path.empty() ? published::severity() : io::load_dpln(path);
}

void print_warnings(const RiskReport& r) {
  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

// fit-map2

struct FitMap2Args {
  std::string input;
  std::string form = "auto";
  int restarts = 8;
  int max_iterations = 2000;
};

int run_fit_map2(const Globals& g, const FitMap2Args& a) {
  const io::Trace trace = io::ingest(a.input);
  log_stats("inter-loss times", trace.times);
  FitOptions opts;
  opts.restarts = a.restarts;
  opts.max_iterations = a.max_iterations;
  opts.seed = g.seed;
  opts.form = a.form == "positive"      ? FormChoice::GammaPositive
              : a.form == "nonpositive" ? FormChoice::GammaNonpositive
                                        : FormChoice::Auto;
  const FitResult fit = fit_mle(trace.times, opts);

  io::OutputSet out(g.out);
  out.write("model.json", io::model_to_json(fit.model));
  out.write("fit.json", io::fit_result_to_json(fit));
  out.commit();
  std::printf("loglik %s\n", io::format_double(fit.loglik).c_str());
  return 0;
}

// fit-severity

int run_fit_severity(const Globals& g, const std::string& input) {
  const auto values = io::read_severities(input);
  log_stats("severities", values);
  const DplnFit fit = dpln_fit_mle(values);
  io::OutputSet out(g.out);
  out.write("severity.json", io::dpln_to_json(fit.params));
  out.write("severity_fit.json", io::dpln_fit_to_json(fit));
  out.commit();
  std::printf("loglik %s\n", io::format_double(fit.loglik).c_str());
  return 0;
}

// diagnose

struct DiagnoseArgs {
  std::string model;
  std::string trace;
  bool counting = false;
  bool persistence = false;
  bool vtm_sweep = false;
  double tau = 365.0;
  double eps = 1e-10;
  std::vector<double> thresholds;
  double short_s = 3.0;
  double long_s = 11.0;
  std::size_t spell_max = 100;
  std::size_t sweep_models = 10'000;
  std::vector<double> sweep_taus{1, 3, 5, 10};
};

Table counting_table(const Map2& m, double tau, double eps) {
  const auto dist = count_distribution(m, tau, eps);
  Table t{{"n", "probability", "tail"}, {}};
  for (std::size_t n = 0; n < dist.mass.size(); ++n)
    t.add({static_cast<std::int64_t>(n), dist.mass[n], dist.tail(n)});
  return t;
}

Table persistence_table(const Map2& m, const std::vector<double>& thresholds, const std::optional<io::Trace>& trace) {
  Table t{{"s", "quantity", "analytic", "empirical", "n_events"}, {}};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double s : thresholds) {
    const auto analytic = transition_probs(m, s);
    PersistenceReport emp{s, nan, nan, 0, 0};
    if (trace) emp = empirical_persistence(trace->times, s);
    t.add({s, std::string("p01"), analytic.p01, emp.p01, static_cast<std::int64_t>(emp.n_short)});
    t.add({s, std::string("p11"), analytic.p11, emp.p11, static_cast<std::int64_t>(emp.n_long)});
  }
  return t;
}

Table spell_table(const SpellDist& d) {
  Table t{{"n", "probability"}, {}};
  for (std::size_t n = 0; n < d.mass.size(); ++n) t.add({static_cast<std::int64_t>(n), d.mass[n]});
  return t;
}

int run_diagnose(const Globals& g, DiagnoseArgs a) {
  if (!a.counting && !a.persistence && !a.vtm_sweep) a.counting = a.persistence = true;
  const Map2 m = model_or_default(a.model);
  std::optional<io::Trace> trace;
  if (!a.trace.empty()) {
    trace = io::ingest(a.trace);
    log_stats("inter-loss times", trace->times);
  }
  const auto fmt = g.table_format();
  const std::string ext = io::extension(fmt);
  io::OutputSet out(g.out);

  if (a.counting) {
    out.write("counting" + ext, io::render(counting_table(m, a.tau, a.eps), fmt));
    const auto cm = count_moments(m, a.tau);
    Table t{{"tau", "mean", "variance", "vtm", "covariance", "adjacent_covariance"}, {}};
    t.add({a.tau, cm.mean, cm.variance, cm.vtm, cm.covariance, adjacent_count_covariance(m, a.tau)});
    out.write("count_moments" + ext, io::render(t, fmt));
  }
  if (a.persistence) {
    if (a.thresholds.empty())
      for (int s = 1; s <= 30; ++s) a.thresholds.push_back(s);
    out.write("persistence" + ext, io::render(persistence_table(m, a.thresholds, trace), fmt));
    out.write("spells_short" + ext,
              io::render(spell_table(spell_distribution(m, a.short_s, SpellKind::Short, a.spell_max)), fmt));
    out.write("spells_long" + ext,
              io::render(spell_table(spell_distribution(m, a.long_s, SpellKind::Long, a.spell_max)), fmt));
    if (trace) {
      out.write("spells_short_empirical" + ext,
                io::render(spell_table(empirical_spells(trace->times, a.short_s, SpellKind::Short)), fmt));
      out.write("spells_long_empirical" + ext,
                io::render(spell_table(empirical_spells(trace->times, a.long_s, SpellKind::Long)), fmt));
    }
  }
  if (a.vtm_sweep) {
    const auto sweep = vtm_sweep(a.sweep_models, a.sweep_taus, g.seed);
    Table t{{"model", "form", "x", "y", "u", "v", "tau", "vtm"}, {}};
    for (const auto& row : sweep.rows) {
      const auto& c = row.params;
      t.add({static_cast<std::int64_t>(row.model),
             std::string(c.form == CanonicalForm::GammaPositive ? "gamma_positive" : "gamma_nonpositive"), c.x, c.y,
             c.u, c.v, row.tau, row.vtm});
    }
    out.write("vtm_sweep" + ext, io::render(t, fmt));
    Table s{{"tau", "fraction_below_one"}, {}};
    for (std::size_t j = 0; j < sweep.taus.size(); ++j) {
      s.add({sweep.taus[j], sweep.fraction_below_one[j]});
      std::printf("tau %g: fraction VtM<1 = %.6g\n", sweep.taus[j], sweep.fraction_below_one[j]);
    }
    out.write("vtm_summary" + ext, io::render(s, fmt));
  }
  out.commit();
  return 0;
}

// aggregate

struct AggregateArgs {
  std::string model;
  std::string severity;
  double poisson = 0.0;
  std::size_t k = 1'000'000;
  std::vector<double> ps{0.99, 0.999};
  std::string losses_format = "bin";
  std::vector<std::size_t> convergence_ks;
  std::size_t repeats = 20;
};

int run_aggregate(const Globals& g, const AggregateArgs& a) {
  const DplnParams sev = severity_or_default(a.severity);
  const FrequencyModel freq =
      a.poisson > 0 ? FrequencyModel::poisson(a.poisson) : FrequencyModel::from_map2(model_or_default(a.model));
  const SimulationOptions sim{g.threads};
  const auto sample = simulate_aggregate(freq, sev, a.k, g.seed, sim);
  const auto report = risk_measures(sample, a.ps, sev.alpha);
  print_warnings(report);

  io::OutputSet out(g.out);
  if (a.losses_format == "csv") {
    Table t{{"loss"}, {}};
    for (double z : sample.losses) t.add({z});
    out.write("losses.csv", io::to_csv(t));
  } else {
    out.write("losses.bin", io::losses_to_binary(sample.losses));
  }
  out.write("risk.json", io::risk_report_to_json(report));
  if (!a.convergence_ks.empty()) {
    const auto study = convergence_study(freq, dpln_severity(sev), a.convergence_ks, a.repeats, g.seed, sim);
    Table t{{"K", "repeat", "var_999"}, {}};
    for (const auto& r : study.rows)
      t.add({static_cast<std::int64_t>(r.k), static_cast<std::int64_t>(r.repeat), r.var_999});
    const auto fmt = g.table_format();
    out.write(std::string("convergence") + io::extension(fmt), io::render(t, fmt));
  }
  out.commit();
  for (const auto& [p, var] : report.var)
    std::printf("p=%g VaR=%s ES=%s\n", p, io::format_double(var).c_str(), io::format_double(report.es.at(p)).c_str());
  return 0;
}

// compare-poisson

struct CompareArgs {
  std::string model;
  std::string severity;
  double rate = published::kAnnualLossRate;
  std::size_t k = 1'000'000;
  std::vector<double> ps{0.99, 0.999};
};

int run_compare(const Globals& g, const CompareArgs& a) {
  const auto cmp = compare_frequencies(model_or_default(a.model), a.rate, severity_or_default(a.severity), a.k, a.ps,
                                       g.seed, {g.threads});
  print_warnings(cmp.map2);
  io::OutputSet out(g.out);
  out.write("compare.json", io::comparison_to_json(cmp));
  out.commit();
  for (double p : a.ps)
    std::printf("p=%g VaR map2=%s poisson=%s  ES map2=%s poisson=%s\n", p,
                io::format_double(cmp.map2.var.at(p)).c_str(), io::format_double(cmp.poisson.var.at(p)).c_str(),
                io::format_double(cmp.map2.es.at(p)).c_str(), io::format_double(cmp.poisson.es.at(p)).c_str());
  return 0;
}

// reproduce-paper

int run_reproduce(const Globals& g, ReproduceOptions opts) {
  opts.seed = g.seed;
  opts.threads = g.threads;
  const auto report = reproduce_paper(opts);
  Table t{{"criterion", "title", "status", "detail"}, {}};
  for (const auto& c : report.criteria) {
    std::printf("%s\n", c.line().c_str());
    t.add({static_cast<std::int64_t>(c.id), c.title, std::string(c.pass ? "PASS" : "FAIL"), c.line()});
  }
  for (const auto& c : report.info) {
    std::printf("INFO %s\n", c.line().c_str());
    t.add({static_cast<std::int64_t>(c.id), c.title, std::string("INFO"), c.line()});
  }
  Table trace{{"time"}, {}};
  for (double x : report.demo_trace) trace.add({x});

  const auto fmt = g.table_format();
  io::OutputSet out(g.out);
  out.write(std::string("acceptance") + io::extension(fmt), io::render(t, fmt));
  out.write("demo_trace.csv", io::to_csv(trace));
  out.commit();
  return report.all_pass() ? 0 : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MAP2 operational-loss modelling"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "master random seed")->capture_default_str();
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--format", g.format, "table format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--threads", g.threads, "simulation threads (0 = all cores)");

  FitMap2Args fit;
  auto* fit_cmd = app.add_subcommand("fit-map2", "fit a canonical MAP2 to an inter-loss trace");
  fit_cmd->add_option("--input,input", fit.input, "trace CSV (days)")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--form", fit.form)->check(CLI::IsMember({"auto", "positive", "nonpositive"}));
  fit_cmd->add_option("--restarts", fit.restarts)->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--max-iterations", fit.max_iterations)->check(CLI::PositiveNumber);

  std::string severity_input;
  auto* sev_cmd = app.add_subcommand("fit-severity", "fit a dPlN law to loss severities");
  sev_cmd->add_option("--input,input", severity_input, "severity CSV")->required()->check(CLI::ExistingFile);

  DiagnoseArgs diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "counting and persistence diagnostics");
  diag_cmd->add_option("--model", diag.model, "model JSON (default: published model)");
  diag_cmd->add_option("--trace", diag.trace, "trace CSV for empirical columns");
  diag_cmd->add_flag("--counting", diag.counting);
  diag_cmd->add_flag("--persistence", diag.persistence);
  diag_cmd->add_flag("--vtm-sweep", diag.vtm_sweep);
  diag_cmd->add_option("--tau", diag.tau)->check(CLI::PositiveNumber);
  diag_cmd->add_option("--eps", diag.eps)->check(CLI::Range(1e-300, 0.5));
  diag_cmd->add_option("--s", diag.thresholds, "persistence thresholds (days)")->delimiter(',');
  diag_cmd->add_option("--short-s", diag.short_s);
  diag_cmd->add_option("--long-s", diag.long_s);
  diag_cmd->add_option("--spell-max", diag.spell_max)->check(CLI::PositiveNumber);
  diag_cmd->add_option("--sweep-models", diag.sweep_models)->check(CLI::PositiveNumber);
  diag_cmd->add_option("--sweep-taus", diag.sweep_taus)->delimiter(',');

  AggregateArgs agg;
  auto* agg_cmd = app.add_subcommand("aggregate", "simulate annual aggregate losses");
  agg_cmd->add_option("--model", agg.model, "model JSON (default: published model)");
  agg_cmd->add_option("--severity", agg.severity, "dPlN params JSON (default: published)");
  agg_cmd->add_option("--poisson", agg.poisson, "use a Poisson frequency with this annual rate instead");
  agg_cmd->add_option("-K,--k", agg.k)->check(CLI::PositiveNumber);
  agg_cmd->add_option("-p,--p", agg.ps)->delimiter(',')->check(CLI::Range(0.0, 0.999999999));
  agg_cmd->add_option("--losses-format", agg.losses_format)->check(CLI::IsMember({"bin", "csv"}));
  agg_cmd->add_option("--convergence", agg.convergence_ks, "replicate counts for a VaR convergence study")
      ->delimiter(',');
  agg_cmd->add_option("--repeats", agg.repeats)->check(CLI::PositiveNumber);

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare-poisson", "MAP2 vs Poisson frequency with common severities");
  cmp_cmd->add_option("--model", cmp.model);
  cmp_cmd->add_option("--severity", cmp.severity);
  cmp_cmd->add_option("--rate", cmp.rate)->check(CLI::PositiveNumber);
  cmp_cmd->add_option("-K,--k", cmp.k)->check(CLI::PositiveNumber);
  cmp_cmd->add_option("-p,--p", cmp.ps)->delimiter(',')->check(CLI::Range(0.0, 0.999999999));

  ReproduceOptions rep;
  auto* rep_cmd = app.add_subcommand("reproduce-paper", "run the published-model checks");
  rep_cmd->add_option("-K,--k", rep.k)->check(CLI::PositiveNumber);
  rep_cmd->add_option("--ordering-seeds", rep.ordering_seeds)->check(CLI::PositiveNumber);
  rep_cmd->add_option("--sweep-models", rep.sweep_models)->check(CLI::PositiveNumber);
  rep_cmd->add_option("--fit-gaps", rep.fit_gaps)->check(CLI::PositiveNumber);
  rep_cmd->add_option("--fit-restarts", rep.fit_restarts)->check(CLI::NonNegativeNumber);
  rep_cmd->add_flag("--long-run", rep.long_run, "also run K=1e7");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*fit_cmd) return run_fit_map2(g, fit);
    if (*sev_cmd) return run_fit_severity(g, severity_input);
    if (*diag_cmd) return run_diagnose(g, diag);
    if (*agg_cmd) return run_aggregate(g, agg);
    if (*cmp_cmd) return run_compare(g, cmp);
    if (*rep_cmd) return run_reproduce(g, rep);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return is_validation_error(e.code()) ? kExitValidation : kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitValidation;
}
