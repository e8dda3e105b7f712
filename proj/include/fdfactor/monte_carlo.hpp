#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fdf::synth {

enum class Dgp { kRough, kSpline, kNoise };
enum class Method { kPca, kBspline, kRaw };
enum class Statistic { kFin, kInf };

struct Setting {
  std::size_t p = 0;
  std::size_t T = 0;
  double sigma2 = 0.0;  // innovation variance of the noise
  double theta = 0.0;   // AR(1) coefficient of the noise
};

struct LPolicy {
  enum class Kind { kFixed, kPlateau } kind = Kind::kFixed;
  std::size_t L = 3;
  std::size_t l_max = 10;
  double rel_tol = 0.1;
  double cutoff = 0.1;
};

struct TestOptions {
  bool enabled = false;
  double cutoff = 0.1;
  std::optional<std::size_t> thinning;  // nullopt: smallest m with f/T <= 0.3
  Statistic statistic = Statistic::kFin;
  bool oracle_sigma2 = false;  // use the true marginal noise variance
};

/// Everything a Monte Carlo study needs. Results depend only on this value,
/// never on `threads`.
struct SimulationSpec {
  Dgp dgp = Dgp::kRough;
  std::vector<Setting> settings;
  std::size_t replications = 100;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::kPca};
  LPolicy l_policy;
  TestOptions test;
  std::optional<std::size_t> bspline_K;  // default floor(p / 3)
  std::size_t spline_K = 21;
  double signal_variance = 25.0;
  std::size_t threads = 0;  // 0: FDFACTOR_THREADS or hardware concurrency
};

/// Parses the JSON study description:
///   {"dgp": "rough"|"spline"|"noise",
///    "settings": [{"p":..,"T":..,"sigma2"|"sigma":..,"theta":..}, ...]
///      or "grid": {"p":[..],"T":[..],"sigma2"|"sigma":[..],"theta":[..]},
///    "R": 200, "seed": 42, "methods": ["PCA","B","RAW"],
///    "L_policy": {"kind":"fixed","L":3} | {"kind":"plateau","l_max":10,...},
///    "test": {"cutoff":0.1,"thin":3|"auto","statistic":"fin"|"inf","oracle_sigma2":false}}
SimulationSpec parse_simulation_spec(std::string_view json_text);

struct ReplicationRecord {
  std::size_t setting = 0;
  std::size_t replication = 0;
  Method method = Method::kPca;
  bool failed = false;
  std::string error;
  std::size_t L = 0;
  double sse = 0.0;  // NaN for RAW
  double lambda_fin = 0.0;
  double lambda_inf = 0.0;
  double p_fin = 1.0;
  double p_inf = 1.0;
};

struct SummaryRow {
  Setting setting;
  Method method = Method::kPca;
  std::size_t replications = 0;
  std::size_t failed = 0;
  double median_L = 0.0;
  double median_sse = 0.0;
  double mean_sse = 0.0;
  std::optional<std::array<double, 3>> rejection;  // levels 0.01, 0.05, 0.10
  double median_lambda_fin = 0.0;
  double median_lambda_inf = 0.0;
};

struct SimulationSummary {
  Dgp dgp = Dgp::kRough;
  std::vector<SummaryRow> rows;            // setting-major, then method
  std::vector<ReplicationRecord> records;  // setting, replication, method order
};

SimulationSummary run_monte_carlo(const SimulationSpec& spec);

/// One row per setting x method (Table-style layout).
void write_summary_csv(std::ostream& out, const SimulationSummary& summary);

std::string to_string(Dgp dgp);
std::string to_string(Method method);

double median(std::vector<double> values);

/// Worker count: explicit > FDFACTOR_THREADS > hardware concurrency.
std::size_t resolve_threads(std::size_t requested);

}  // namespace fdf::synth
