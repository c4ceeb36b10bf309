#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cmio/cmio.hpp"
#include "cmio/sem.hpp"

namespace cmio {

enum class Method { cmio, cmio_latent, target_oracle, full_z, t_xy_unconstrained };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);

/// Default seed for every command that does not receive one.
inline constexpr std::uint64_t kDefaultSeed = 20240607;

struct BenchSpec {
  /// Simulation design 1..3, ignored when `model` is set.
  int case_id = 1;
  std::optional<LinearSem> model;
  std::size_t n = 200;
  std::size_t replicates = 100;
  std::vector<Method> methods{Method::cmio};
  CmioOptions options;
  std::uint64_t seed = kDefaultSeed;
};

struct MethodRun {
  Method method = Method::cmio;
  /// One entry per replicate; failed replicates hold NaN / false.
  std::vector<double> estimates;
  std::vector<std::size_t> set_difference;
  std::vector<char> contains_target;
  std::vector<char> valid;
  std::vector<char> failed;
  std::vector<double> seconds;
  std::vector<std::vector<std::string>> selections;

  std::size_t failures() const;
  double estimate_mean() const;
  double estimate_sd() const;
  double set_difference_mean() const;
  double set_difference_sd() const;
  /// Percentages over successful replicates.
  double containment_pct() const;
  double validity_pct() const;
  double mean_seconds() const;
};

struct BenchReport {
  std::string label;
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  double true_effect = 0.0;
  std::vector<MethodRun> runs;
  /// Comparison methods that are not implemented here; listed so report
  /// consumers keep a column for them.
  std::vector<std::string> placeholders{"BCEE", "OLA"};

  const MethodRun& run(Method m) const;
};

/// Runs every method on `replicates` independent samples. Replicate r draws
/// its data with child_seed(seed, r), so results do not depend on thread
/// count or scheduling. Failures are recorded per replicate, never thrown.
BenchReport run_bench(const BenchSpec& spec);

struct BoxplotRow {
  Method method = Method::cmio;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
  double true_effect = 0;
};

/// Five-number summaries of the effect estimates (type-7 quantiles).
/// Needs at least 5 successful replicates per method.
std::vector<BoxplotRow> boxplot_data(const BenchReport& report);

/// Linear interpolation between order statistics (R's default, type 7).
double quantile_type7(std::vector<double> values, double prob);

/// `method,metric,value` rows. Timings are left out unless requested because
/// they change from run to run.
void write_bench_csv(std::ostream& out, const BenchReport& report, bool timings = false);
void write_boxplot_csv(std::ostream& out, const std::vector<BoxplotRow>& rows);

/// Human-readable table: set difference mean (sd), containment and validity
/// percentages, mean effect (sd), failures.
void write_bench_table(std::ostream& out, const std::vector<BenchReport>& reports);

}  // namespace cmio
