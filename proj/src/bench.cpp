#include "cmio/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cmio/rng.hpp"
#include "cmio/stats.hpp"

namespace cmio {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::cmio: return "cmio";
    case Method::cmio_latent: return "cmio_latent";
    case Method::target_oracle: return "target_oracle";
    case Method::full_z: return "full_z";
    case Method::t_xy_unconstrained: return "t_xy_unconstrained";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  for (Method m : {Method::cmio, Method::cmio_latent, Method::target_oracle, Method::full_z,
                   Method::t_xy_unconstrained})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown method: " + std::string(s));
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class T, class F>
std::vector<double> ok_values(const MethodRun& r, const std::vector<T>& v, F f) {
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!r.failed[i]) out.push_back(f(v[i]));
  return out;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd(const std::vector<double>& v) {
  if (v.size() < 2) return kNaN;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

struct Outcome {
  std::vector<std::string> selected;
  double estimate = kNaN;
};

// Best subset without causal constraints, k picked by BIC. Stops after the
// criterion has risen three times in a row.
Outcome best_subset_bic(const Dataset& d, const CmioOptions& opts) {
  const auto prob = SubsetProblem::from_dataset(d, 0);
  const SubsetSolver solver(prob.design, prob.response, true, std::nullopt, prob.covariate_names);
  const std::size_t n = d.rows();
  const std::size_t kmax = std::min(prob.p(), n > 4 ? n - 4 : 0);
  double best_bic = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best;
  std::vector<std::size_t> prev;
  std::size_t rises = 0;
  for (std::size_t k = 0; k <= kmax; ++k) {
    SolverConfig cfg = opts.solver;
    if (!prev.empty()) cfg.warm_supports.push_back(prev);
    const auto sol = solver.solve(k, cfg);
    const double rss = std::max(2.0 * sol.objective, std::numeric_limits<double>::min());
    const double nn = static_cast<double>(n);
    const double bic = nn * std::log(rss / nn) + static_cast<double>(k + 2) * std::log(nn);
    if (bic < best_bic) {
      best_bic = bic;
      best = sol.support;
      rises = 0;
    } else if (++rises >= 3) {
      break;
    }
    prev = sol.support;
  }
  Outcome o;
  std::vector<std::size_t> cols;
  for (std::size_t s : best) cols.push_back(d.covariates()[s]);
  for (std::size_t c : cols) o.selected.push_back(d.name(c));
  o.estimate = adjusted_effect(d, d.treatment(), d.outcome(), cols);
  return o;
}

Outcome adjust_for(const Dataset& d, std::vector<std::string> names) {
  Outcome o;
  o.estimate = adjusted_effect(d, d.name(d.treatment()), d.name(d.outcome()), names);
  o.selected = std::move(names);
  return o;
}

Outcome run_method(Method m, const Dataset& d, const LinearSem& model, const CmioOptions& opts) {
  switch (m) {
    case Method::cmio: {
      auto rep = cmio_select(d, opts);
      return {rep.selected, rep.effect_estimate};
    }
    case Method::cmio_latent: {
      auto rep = cmio_select_latent(d, opts);
      return {rep.selected, rep.effect_estimate};
    }
    case Method::target_oracle: {
      std::vector<std::string> names;
      for (const auto& v : optimal_adjustment(model.graph, model.treatment_name(), model.outcome_name()))
        if (d.contains(v)) names.push_back(v);
      return adjust_for(d, std::move(names));
    }
    case Method::full_z:
      return adjust_for(d, d.covariate_names());
    case Method::t_xy_unconstrained:
      return best_subset_bic(d, opts);
  }
  throw std::logic_error("unhandled method");
}

}  // namespace

std::size_t MethodRun::failures() const {
  return static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
}
double MethodRun::estimate_mean() const { return mean(ok_values(*this, estimates, [](double x) { return x; })); }
double MethodRun::estimate_sd() const { return sd(ok_values(*this, estimates, [](double x) { return x; })); }
double MethodRun::set_difference_mean() const {
  return mean(ok_values(*this, set_difference, [](std::size_t x) { return static_cast<double>(x); }));
}
double MethodRun::set_difference_sd() const {
  return sd(ok_values(*this, set_difference, [](std::size_t x) { return static_cast<double>(x); }));
}
double MethodRun::containment_pct() const {
  return 100.0 * mean(ok_values(*this, contains_target, [](char c) { return c ? 1.0 : 0.0; }));
}
double MethodRun::validity_pct() const {
  return 100.0 * mean(ok_values(*this, valid, [](char c) { return c ? 1.0 : 0.0; }));
}
double MethodRun::mean_seconds() const { return mean(seconds); }

const MethodRun& BenchReport::run(Method m) const {
  for (const auto& r : runs)
    if (r.method == m) return r;
  throw std::invalid_argument("method not in report: " + std::string(to_string(m)));
}

BenchReport run_bench(const BenchSpec& spec) {
  if (spec.replicates < 1) throw std::invalid_argument("bench: replicates must be >= 1");
  if (spec.methods.empty()) throw std::invalid_argument("bench: no methods");
  const LinearSem model = spec.model ? *spec.model : case_model(spec.case_id);
  model.validate();

  BenchReport rep;
  rep.n = spec.n;
  rep.replicates = spec.replicates;
  rep.seed = spec.seed;
  if (spec.model) {
    rep.label = "custom";
    rep.true_effect = true_total_effect(model, model.treatment_name(), model.outcome_name());
  } else {
    rep.label = "case" + std::to_string(spec.case_id);
    rep.true_effect = case_true_effect(spec.case_id);
  }
  const std::size_t reps = spec.replicates;
  for (Method m : spec.methods) {
    MethodRun r;
    r.method = m;
    r.estimates.assign(reps, kNaN);
    r.set_difference.assign(reps, 0);
    r.contains_target.assign(reps, 0);
    r.valid.assign(reps, 0);
    r.failed.assign(reps, 0);
    r.seconds.assign(reps, 0.0);
    r.selections.assign(reps, {});
    rep.runs.push_back(std::move(r));
  }

  const auto count = static_cast<long>(reps);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    const auto ri = static_cast<std::size_t>(i);
    const Dataset d = sample(model, spec.n, child_seed(spec.seed, ri));
    for (auto& run : rep.runs) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        Outcome o = run_method(run.method, d, model, spec.options);
        const NodeSet sel(o.selected.begin(), o.selected.end());
        const auto ev = evaluate_selection(model.graph, model.treatment_name(), model.outcome_name(), sel);
        run.estimates[ri] = o.estimate;
        run.set_difference[ri] = ev.set_difference;
        run.contains_target[ri] = ev.contains_target;
        run.valid[ri] = ev.valid;
        run.selections[ri] = std::move(o.selected);
      } catch (const std::exception&) {
        run.failed[ri] = 1;
      }
      run.seconds[ri] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  }
  return rep;
}

double quantile_type7(std::vector<double> values, double prob) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("quantile probability outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<BoxplotRow> boxplot_data(const BenchReport& report) {
  std::vector<BoxplotRow> rows;
  for (const auto& r : report.runs) {
    auto v = ok_values(r, r.estimates, [](double x) { return x; });
    if (v.size() < 5) continue;
    BoxplotRow b;
    b.method = r.method;
    std::sort(v.begin(), v.end());
    b.min = v.front();
    b.max = v.back();
    b.q1 = quantile_type7(v, 0.25);
    b.median = quantile_type7(v, 0.5);
    b.q3 = quantile_type7(v, 0.75);
    b.mean = mean(v);
    b.true_effect = report.true_effect;
    rows.push_back(b);
  }
  if (rows.empty()) throw std::invalid_argument("boxplot needs a method with at least 5 successful replicates");
  return rows;
}

void write_bench_csv(std::ostream& out, const BenchReport& report, bool timings) {
  out << "scenario,n,method,metric,value\n";
  const std::string prefix = report.label + "," + std::to_string(report.n) + ",";
  for (const auto& r : report.runs) {
    const std::string m = prefix + std::string(to_string(r.method)) + ",";
    out << m << "replicates," << r.estimates.size() << '\n';
    out << m << "failures," << r.failures() << '\n';
    out << m << "effect_mean," << format_double(r.estimate_mean()) << '\n';
    out << m << "effect_sd," << format_double(r.estimate_sd()) << '\n';
    out << m << "set_difference_mean," << format_double(r.set_difference_mean()) << '\n';
    out << m << "set_difference_sd," << format_double(r.set_difference_sd()) << '\n';
    out << m << "containment_pct," << format_double(r.containment_pct()) << '\n';
    out << m << "validity_pct," << format_double(r.validity_pct()) << '\n';
    if (timings) out << m << "seconds_per_replicate," << format_double(r.mean_seconds()) << '\n';
  }
  for (const auto& p : report.placeholders) out << prefix << p << ",not_implemented,NA\n";
}

void write_boxplot_csv(std::ostream& out, const std::vector<BoxplotRow>& rows) {
  out << "method,min,q1,median,q3,max,mean,true_effect\n";
  for (const auto& b : rows) {
    out << to_string(b.method);
    for (double v : {b.min, b.q1, b.median, b.q3, b.max, b.mean, b.true_effect}) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_bench_table(std::ostream& out, const std::vector<BenchReport>& reports) {
  auto pm = [](double m, double s) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << m << " +- " << (std::isnan(s) ? 0.0 : s);
    return os.str();
  };
  auto pct = [](double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(0) << v;
    return os.str();
  };
  out << std::left << std::setw(10) << "scenario" << std::setw(7) << "n" << std::setw(20) << "method"
      << std::setw(16) << "set difference" << std::setw(13) << "containment" << std::setw(10) << "validity"
      << std::setw(16) << "effect" << "failures\n";
  for (const auto& rep : reports) {
    for (const auto& r : rep.runs) {
      out << std::left << std::setw(10) << rep.label << std::setw(7) << rep.n << std::setw(20) << to_string(r.method)
          << std::setw(16) << pm(r.set_difference_mean(), r.set_difference_sd()) << std::setw(13)
          << pct(r.containment_pct()) << std::setw(10) << pct(r.validity_pct()) << std::setw(16)
          << pm(r.estimate_mean(), r.estimate_sd()) << r.failures() << '\n';
    }
  }
  out << "true effects:";
  for (const auto& rep : reports) out << ' ' << rep.label << '=' << format_double(rep.true_effect);
  out << "\nBCEE, OLA: not implemented (external methods)\n";
}

}  // namespace cmio
