#include "fdfactor/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "fdfactor/errors.hpp"
#include "fdfactor/factor_fit.hpp"
#include "fdfactor/io.hpp"
#include "fdfactor/noise_test.hpp"
#include "fdfactor/order_selection.hpp"
#include "fdfactor/rng.hpp"
#include "fdfactor/synth.hpp"

namespace fdf::synth {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::array<double, 3> kLevels{0.01, 0.05, 0.10};

Dgp parse_dgp(const std::string& s) {
  if (s == "rough") return Dgp::kRough;
  if (s == "spline") return Dgp::kSpline;
  if (s == "noise") return Dgp::kNoise;
  throw FormatError("unknown dgp '" + s + "' (expected rough, spline or noise)");
}

Method parse_method(const std::string& s) {
  if (s == "PCA") return Method::kPca;
  if (s == "B") return Method::kBspline;
  if (s == "RAW") return Method::kRaw;
  throw FormatError("unknown method '" + s + "' (expected PCA, B or RAW)");
}

double noise_variance(const json& j) {
  if (j.contains("sigma2")) return j.at("sigma2").get<double>();
  if (j.contains("sigma")) {
    const double s = j.at("sigma").get<double>();
    return s * s;
  }
  return 0.0;
}

std::vector<double> noise_variances(const json& grid) {
  std::vector<double> out;
  if (grid.contains("sigma2")) return grid.at("sigma2").get<std::vector<double>>();
  if (grid.contains("sigma")) {
    for (double s : grid.at("sigma").get<std::vector<double>>()) out.push_back(s * s);
    return out;
  }
  return {0.0};
}

}  // namespace

std::string to_string(Dgp dgp) {
  switch (dgp) {
    case Dgp::kRough: return "rough";
    case Dgp::kSpline: return "spline";
    case Dgp::kNoise: return "noise";
  }
  return "?";
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kPca: return "PCA";
    case Method::kBspline: return "B";
    case Method::kRaw: return "RAW";
  }
  return "?";
}

SimulationSpec parse_simulation_spec(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("simulation spec is not valid JSON: ") + e.what());
  }
  try {
    SimulationSpec spec;
    spec.dgp = parse_dgp(j.value("dgp", std::string("rough")));
    if (j.contains("settings")) {
      for (const auto& s : j.at("settings")) {
        spec.settings.push_back({s.at("p").get<std::size_t>(), s.at("T").get<std::size_t>(),
                                 noise_variance(s), s.value("theta", 0.0)});
      }
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      const auto ps = g.at("p").get<std::vector<std::size_t>>();
      const auto ts = g.at("T").get<std::vector<std::size_t>>();
      const auto vs = noise_variances(g);
      const auto thetas = g.contains("theta") ? g.at("theta").get<std::vector<double>>()
                                              : std::vector<double>{0.0};
      for (auto p : ps)
        for (auto T : ts)
          for (double v : vs)
            for (double th : thetas) spec.settings.push_back({p, T, v, th});
    }
    if (spec.settings.empty()) throw FormatError("simulation spec lists no settings");
    spec.replications = j.value("R", spec.replications);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("methods")) {
      spec.methods.clear();
      for (const auto& m : j.at("methods")) spec.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("L_policy")) {
      const auto& lp = j.at("L_policy");
      const auto kind = lp.value("kind", std::string("fixed"));
      if (kind == "fixed") {
        spec.l_policy.kind = LPolicy::Kind::kFixed;
      } else if (kind == "plateau") {
        spec.l_policy.kind = LPolicy::Kind::kPlateau;
      } else {
        throw FormatError("unknown L_policy kind '" + kind + "'");
      }
      spec.l_policy.L = lp.value("L", spec.l_policy.L);
      spec.l_policy.l_max = lp.value("l_max", spec.l_policy.l_max);
      spec.l_policy.rel_tol = lp.value("rel_tol", spec.l_policy.rel_tol);
      spec.l_policy.cutoff = lp.value("cutoff", spec.l_policy.cutoff);
    }
    if (j.contains("test")) {
      const auto& t = j.at("test");
      spec.test.enabled = true;
      spec.test.cutoff = t.value("cutoff", spec.test.cutoff);
      if (t.contains("thin") && !(t.at("thin").is_string() && t.at("thin") == "auto")) {
        spec.test.thinning = t.at("thin").get<std::size_t>();
      }
      const auto stat = t.value("statistic", std::string("fin"));
      if (stat != "fin" && stat != "inf") throw FormatError("test statistic must be fin or inf");
      spec.test.statistic = stat == "fin" ? Statistic::kFin : Statistic::kInf;
      spec.test.oracle_sigma2 = t.value("oracle_sigma2", false);
    }
    if (j.contains("bspline_K")) spec.bspline_K = j.at("bspline_K").get<std::size_t>();
    spec.spline_K = j.value("spline_K", spec.spline_K);
    spec.signal_variance = j.value("signal_variance", spec.signal_variance);
    spec.threads = j.value("threads", spec.threads);
    if (spec.replications < 1) throw FormatError("R must be at least 1");
    return spec;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed simulation spec: ") + e.what());
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
  const double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2));
  return 0.5 * (lo + hi);
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FDFACTOR_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct Replicate {
  ObservationPanel signals;
  ObservationPanel noise;
  ObservationPanel observed;
};

Replicate generate(const SimulationSpec& spec, const Setting& s, std::uint64_t signal_seed,
                   std::uint64_t noise_seed) {
  const double sigma = std::sqrt(s.sigma2);
  ObservationPanel noise = gen_ar1_noise(s.p, s.T, s.theta, sigma, noise_seed);
  ObservationPanel signals = [&] {
    switch (spec.dgp) {
      case Dgp::kRough:
        return gen_rough_signals({s.p, s.T, s.sigma2, signal_seed}).signals;
      case Dgp::kSpline: {
        SmoothDgpConfig cfg;
        cfg.p = s.p;
        cfg.T = s.T;
        cfg.K = spec.spline_K;
        cfg.theta_ar = s.theta;
        cfg.sigma = sigma;
        cfg.signal_variance = spec.signal_variance;
        cfg.seed = signal_seed;
        return gen_spline_signals(cfg);
      }
      case Dgp::kNoise:
        break;
    }
    return ObservationPanel(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.T),
                                                  static_cast<Eigen::Index>(s.p)));
  }();
  ObservationPanel observed = add_noise(signals, noise);
  return {std::move(signals), std::move(noise), std::move(observed)};
}

struct Estimate {
  std::size_t L = 0;
  Eigen::MatrixXd signals;
};

Estimate estimate_pca(const LPolicy& policy, const ObservationPanel& y) {
  if (policy.kind == LPolicy::Kind::kFixed) {
    auto f = fit(y, policy.L);
    return {f.order, std::move(f.signals)};
  }
  const GramDecomposition d = decompose(y);
  const auto sel = select_frequencies_auto(y.points(), y.curves(), policy.cutoff);
  const auto curve = lambda_scree(d, std::min(policy.l_max, d.max_order()), sel);
  const auto choice = suggest_plateau_L(curve, policy.rel_tol);
  auto f = fit(d, choice.order);
  return {f.order, std::move(f.signals)};
}

std::vector<ReplicationRecord> run_replication(const SimulationSpec& spec, std::size_t si,
                                               std::size_t rep) {
  const Setting& s = spec.settings[si];
  std::vector<ReplicationRecord> out;
  std::optional<Replicate> data;
  std::string generation_error;
  try {
    data = generate(spec, s, derive_seed(spec.seed, si, rep, 0), derive_seed(spec.seed, si, rep, 1));
  } catch (const Error& e) {
    generation_error = e.what();
  }
  for (Method m : spec.methods) {
    ReplicationRecord r;
    r.setting = si;
    r.replication = rep;
    r.method = m;
    if (!data) {
      r.failed = true;
      r.error = generation_error;
      out.push_back(std::move(r));
      continue;
    }
    try {
      Eigen::MatrixXd residuals;
      switch (m) {
        case Method::kPca: {
          auto est = estimate_pca(spec.l_policy, data->observed);
          r.L = est.L;
          r.sse = sse_appr(data->signals.values(), est.signals);
          residuals = data->observed.values() - est.signals;
          break;
        }
        case Method::kBspline: {
          const std::size_t K = spec.bspline_K.value_or(s.p / 3);
          const auto est = bspline_ls_fit(data->observed, K);
          r.L = K;
          r.sse = sse_appr(data->signals, est);
          residuals = data->observed.values() - est.values();
          break;
        }
        case Method::kRaw:
          r.sse = kNaN;
          residuals = data->noise.values();
          break;
      }
      if (spec.test.enabled) {
        const auto sel = spec.test.thinning
                             ? select_frequencies(s.p, spec.test.cutoff, *spec.test.thinning)
                             : select_frequencies_auto(s.p, s.T, spec.test.cutoff);
        std::optional<double> sigma2;
        if (spec.test.oracle_sigma2) sigma2 = s.sigma2 / (1.0 - s.theta * s.theta);
        const auto report = iid_noise_test(residuals, sel, sigma2);
        r.lambda_fin = report.lambda_fin;
        r.lambda_inf = report.lambda_inf;
        r.p_fin = report.p_fin;
        r.p_inf = report.p_inf;
      }
    } catch (const Error& e) {
      r.failed = true;
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

SimulationSummary run_monte_carlo(const SimulationSpec& spec) {
  if (spec.settings.empty()) throw DomainError("simulation has no settings");
  if (spec.methods.empty()) throw DomainError("simulation has no methods");
  const std::size_t jobs = spec.settings.size() * spec.replications;
  std::vector<std::vector<ReplicationRecord>> results(jobs);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      results[job] = run_replication(spec, job / spec.replications, job % spec.replications);
    }
  };
  const std::size_t n_threads = std::min(resolve_threads(spec.threads), jobs);
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
  }

  SimulationSummary summary;
  summary.dgp = spec.dgp;
  for (auto& job : results)
    for (auto& r : job) summary.records.push_back(std::move(r));

  const std::size_t n_methods = spec.methods.size();
  for (std::size_t si = 0; si < spec.settings.size(); ++si) {
    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      SummaryRow row;
      row.setting = spec.settings[si];
      row.method = spec.methods[mi];
      std::vector<double> sse, ls, lf, li;
      std::array<std::size_t, 3> rejected{};
      for (std::size_t rep = 0; rep < spec.replications; ++rep) {
        const auto& r = summary.records[(si * spec.replications + rep) * n_methods + mi];
        if (r.failed) {
          ++row.failed;
          continue;
        }
        ++row.replications;
        sse.push_back(r.sse);
        ls.push_back(static_cast<double>(r.L));
        lf.push_back(r.lambda_fin);
        li.push_back(r.lambda_inf);
        const double pv = spec.test.statistic == Statistic::kFin ? r.p_fin : r.p_inf;
        for (std::size_t k = 0; k < kLevels.size(); ++k)
          if (pv < kLevels[k]) ++rejected[k];
      }
      row.median_L = median(ls);
      row.median_sse = median(sse);
      row.mean_sse = sse.empty() ? kNaN : [&] {
        double sum = 0.0;
        for (double v : sse) sum += v;
        return sum / static_cast<double>(sse.size());
      }();
      if (spec.test.enabled && row.replications > 0) {
        std::array<double, 3> rates{};
        for (std::size_t k = 0; k < 3; ++k)
          rates[k] = static_cast<double>(rejected[k]) / static_cast<double>(row.replications);
        row.rejection = rates;
        row.median_lambda_fin = median(lf);
        row.median_lambda_inf = median(li);
      } else {
        row.median_lambda_fin = kNaN;
        row.median_lambda_inf = kNaN;
      }
      summary.rows.push_back(row);
    }
  }
  return summary;
}

void write_summary_csv(std::ostream& out, const SimulationSummary& summary) {
  auto num = [](double v) { return std::isnan(v) ? std::string("NA") : io::format_double(v); };
  out << "dgp,p,T,sigma2,theta,method,median_L,replications,failed,median_sse,mean_sse,"
         "reject_01,reject_05,reject_10,median_lambda_fin,median_lambda_inf\n";
  for (const auto& r : summary.rows) {
    out << to_string(summary.dgp) << ',' << r.setting.p << ',' << r.setting.T << ','
        << num(r.setting.sigma2) << ',' << num(r.setting.theta) << ',' << to_string(r.method) << ','
        << num(r.median_L) << ',' << r.replications << ',' << r.failed << ',' << num(r.median_sse)
        << ',' << num(r.mean_sse);
    for (std::size_t k = 0; k < 3; ++k) out << ',' << (r.rejection ? num((*r.rejection)[k]) : "NA");
    out << ',' << num(r.median_lambda_fin) << ',' << num(r.median_lambda_inf) << '\n';
  }
}

}  // namespace fdf::synth
