#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdfactor/curve.hpp"
#include "fdfactor/errors.hpp"
#include "fdfactor/factor_fit.hpp"
#include "fdfactor/io.hpp"
#include "fdfactor/monte_carlo.hpp"
#include "fdfactor/noise_test.hpp"
#include "fdfactor/order_selection.hpp"
#include "fdfactor/panel.hpp"
#include "fdfactor/rng.hpp"
#include "fdfactor/spectral.hpp"
#include "fdfactor/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kSchemaVersion = 1;

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& argv) {
    doc_["schema_version"] = kSchemaVersion;
    doc_["command"] = std::move(command);
    doc_["argv"] = argv;
    doc_["software_version"] = FDFACTOR_VERSION;
    doc_["created_utc"] = utc_now();
    doc_["inputs"] = json::object();
    doc_["parameters"] = json::object();
    doc_["outputs"] = json::array();
  }
  void input(const std::string& path) { doc_["inputs"][path] = fdf::io::hash_file(path); }
  json& parameters() { return doc_["parameters"]; }
  json& operator[](const char* key) { return doc_[key]; }
  void output(const std::string& name) { doc_["outputs"].push_back(name); }
  void write(const fs::path& dir) const {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw fdf::FormatError("cannot write " + (dir / "manifest.json").string());
    out << doc_.dump(2) << '\n';
  }

 private:
  json doc_;
};

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw fdf::FormatError("cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

void write_matrix(const fs::path& dir, const std::string& name, const Eigen::MatrixXd& m,
                  Manifest& manifest, const std::vector<std::string>& header = {}) {
  fdf::io::write_matrix_file((dir / name).string(), m, header);
  manifest.output(name);
}

fdf::ObservationPanel load_input(const std::string& path, bool header) {
  return fdf::load_panel_file(path, header ? fdf::HeaderMode::kGridRow : fdf::HeaderMode::kNone);
}

/// Residuals either from a CSV panel or from a fit directory.
Eigen::MatrixXd load_residuals(const std::string& input, const std::string& from_fit, bool header,
                               Manifest& manifest) {
  if (!from_fit.empty()) {
    const std::string path = (fs::path(from_fit) / "residuals.csv").string();
    manifest.input(path);
    return fdf::io::read_matrix_file(path);
  }
  manifest.input(input);
  return load_input(input, header).values();
}

fdf::FrequencySelection selection_for(std::size_t p, std::size_t T, double cutoff,
                                      const std::string& thin) {
  if (thin == "auto") return fdf::select_frequencies_auto(p, T, cutoff);
  std::size_t m = 0;
  try {
    std::size_t used = 0;
    m = std::stoul(thin, &used);
    if (used != thin.size()) throw std::invalid_argument(thin);
  } catch (const std::exception&) {
    throw fdf::DomainError("--thin must be a positive integer or 'auto', got '" + thin + "'");
  }
  return fdf::select_frequencies(p, cutoff, m);
}

json selection_json(const fdf::FrequencySelection& sel) {
  return {{"cutoff", sel.cutoff}, {"thinning", sel.thinning}, {"f", sel.size()}};
}

void write_xi(const std::string& path, const fdf::FrequencySelection& sel, const Eigen::VectorXd& xi) {
  std::ofstream out(path);
  if (!out) throw fdf::FormatError("cannot write " + path);
  out << "l,theta,xi\n";
  for (std::size_t j = 0; j < sel.size(); ++j) {
    out << sel.indices[j] << ',' << fdf::io::format_double(sel.theta(j)) << ','
        << fdf::io::format_double(xi(static_cast<Eigen::Index>(j))) << '\n';
  }
}

std::vector<std::string> args_of(int argc, char** argv) { return {argv, argv + argc}; }

// fit ----------------------------------------------------------------------

struct FitOptions {
  std::string input;
  std::string out;
  bool header = false;
  std::optional<std::size_t> L;
  bool scree_auto = false;
  bool mean_only = false;
  std::size_t l_max = 10;
  double cutoff = 0.1;
  double rel_tol = 0.1;
};

int run_fit(const FitOptions& o, const std::vector<std::string>& argv) {
  Manifest manifest("fit", argv);
  manifest.input(o.input);
  const auto panel = load_input(o.input, o.header);
  const int modes = o.L.has_value() + o.scree_auto + o.mean_only;
  if (modes != 1) {
    throw fdf::OrderError("choose exactly one of --L, --scree-auto or --mean-only");
  }
  auto& params = manifest.parameters();
  fdf::FactorFit result = [&] {
    if (o.mean_only) {
      params["policy"] = "mean-only";
      return fdf::mean_only_fit(panel);
    }
    const auto d = fdf::decompose(panel);
    if (!o.scree_auto) {
      params["policy"] = "fixed";
      return fdf::fit(d, *o.L);
    }
    const auto sel = fdf::select_frequencies_auto(panel.points(), panel.curves(), o.cutoff);
    const auto curve = fdf::lambda_scree(d, std::min(o.l_max, d.max_order()), sel);
    const auto choice = fdf::suggest_plateau_L(curve, o.rel_tol);
    params["policy"] = "scree-auto";
    params["l_max"] = o.l_max;
    params["rel_tol"] = o.rel_tol;
    params["selection"] = selection_json(sel);
    params["plateau_found"] = choice.plateau_found;
    std::cerr << "scree-auto: L = " << choice.order
              << (choice.plateau_found ? "" : " (no plateau found; using l_max)") << '\n';
    return fdf::fit(d, choice.order);
  }();
  params["L"] = result.order;

  const auto dir = prepare_dir(o.out);
  write_matrix(dir, "muhat.csv", result.mean.values.transpose(), manifest);
  write_matrix(dir, "loadings.csv", result.loadings, manifest);
  write_matrix(dir, "scores.csv", result.scores, manifest);
  write_matrix(dir, "signals.csv", result.signals, manifest);
  write_matrix(dir, "residuals.csv", result.residuals, manifest);
  write_matrix(dir, "eigenvalues.csv", result.gram_eigenvalues, manifest);
  std::vector<double> grid(result.grid.points().begin(), result.grid.points().end());
  write_matrix(dir, "grid.csv", Eigen::Map<const Eigen::RowVectorXd>(grid.data(), static_cast<Eigen::Index>(grid.size())), manifest);
  manifest["L"] = result.order;
  manifest["T"] = panel.curves();
  manifest["p"] = panel.points();
  manifest["grid_hash"] = panel.grid().hash();
  manifest["warnings"] = result.warnings;
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  manifest.write(dir);
  return 0;
}

// test ---------------------------------------------------------------------

struct TestOptions {
  std::string input;
  std::string from_fit;
  bool header = false;
  double cutoff = 0.1;
  std::string thin = "auto";
  std::optional<double> sigma2;
  std::string xi;
  std::string out;
};

int run_test(const TestOptions& o, const std::vector<std::string>& argv) {
  if (o.input.empty() == o.from_fit.empty()) throw fdf::InputError("give exactly one of --input or --from-fit");
  Manifest manifest("test", argv);
  const Eigen::MatrixXd u = load_residuals(o.input, o.from_fit, o.header, manifest);
  const auto sel = selection_for(static_cast<std::size_t>(u.cols()), static_cast<std::size_t>(u.rows()), o.cutoff, o.thin);
  const auto r = fdf::iid_noise_test(u, sel, o.sigma2);
  const json report = {{"sigma2_hat", r.sigma2_hat}, {"f", r.f},         {"T", r.T},
                       {"lambda_fin", r.lambda_fin}, {"p_fin", r.p_fin}, {"lambda_inf", r.lambda_inf},
                       {"p_inf", r.p_inf},           {"cutoff", sel.cutoff}, {"thinning", sel.thinning}};
  std::cout << report.dump(2) << '\n';
  if (!o.xi.empty()) write_xi(o.xi, sel, r.xi);
  if (!o.out.empty()) {
    const auto dir = prepare_dir(o.out);
    std::ofstream(dir / "report.json") << report.dump(2) << '\n';
    manifest.output("report.json");
    write_xi((dir / "xi.csv").string(), sel, r.xi);
    manifest.output("xi.csv");
    manifest.parameters() = selection_json(sel);
    if (o.sigma2) manifest.parameters()["sigma2"] = *o.sigma2;
    manifest.write(dir);
  }
  return 0;
}

// scree --------------------------------------------------------------------

struct ScreeOptions {
  std::string input;
  std::string out;
  bool header = false;
  std::size_t l_max = 10;
  double cutoff = 0.1;
  std::string thin = "auto";
  double rel_tol = 0.1;
};

int run_scree(const ScreeOptions& o, const std::vector<std::string>& argv) {
  Manifest manifest("scree", argv);
  manifest.input(o.input);
  const auto panel = load_input(o.input, o.header);
  const auto d = fdf::decompose(panel);
  if (o.l_max < 1 || o.l_max > d.max_order()) {
    throw fdf::OrderError("--l-max " + std::to_string(o.l_max) + " outside [1, " + std::to_string(d.max_order()) + "]");
  }
  const auto sel = selection_for(panel.points(), panel.curves(), o.cutoff, o.thin);
  const auto lambda = fdf::lambda_scree(d, o.l_max, sel);
  const auto dir = prepare_dir(o.out);
  {
    std::ofstream out(dir / "scree.csv");
    out << "l,gamma,lambda_inf\n";
    for (std::size_t l = 0; l < o.l_max; ++l) {
      out << l + 1 << ',' << fdf::io::format_double(d.eigenvalues(static_cast<Eigen::Index>(l))) << ','
          << fdf::io::format_double(lambda.values[l]) << '\n';
    }
  }
  manifest.output("scree.csv");
  json summary = {{"l_max", o.l_max}};
  if (o.l_max >= 4) {
    const auto choice = fdf::suggest_plateau_L(lambda, o.rel_tol);
    summary["suggested_L"] = choice.order;
    summary["plateau_found"] = choice.plateau_found;
  }
  std::cout << summary.dump(2) << '\n';
  manifest.parameters() = selection_json(sel);
  manifest.parameters()["l_max"] = o.l_max;
  manifest.parameters()["rel_tol"] = o.rel_tol;
  manifest["result"] = summary;
  manifest.write(dir);
  return 0;
}

// diagnose -----------------------------------------------------------------

struct DiagnoseOptions {
  std::string input;
  std::string from_fit;
  std::string out;
  bool header = false;
  std::optional<std::size_t> h_max;
  bool heatmap = false;
  std::string columns;
};

std::pair<std::size_t, std::size_t> parse_columns(const std::string& spec, std::size_t p) {
  if (spec.empty()) return {0, p};
  const auto colon = spec.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(spec);
    const std::size_t a = std::stoul(spec.substr(0, colon));
    const std::size_t b = std::stoul(spec.substr(colon + 1));
    if (a < 1 || b < a || b > p) throw std::out_of_range(spec);
    return {a - 1, b};
  } catch (const std::exception&) {
    throw fdf::DomainError("--columns expects a:b with 1 <= a <= b <= " + std::to_string(p) + ", got '" + spec + "'");
  }
}

int run_diagnose(const DiagnoseOptions& o, const std::vector<std::string>& argv) {
  if (o.input.empty() == o.from_fit.empty()) throw fdf::InputError("give exactly one of --input or --from-fit");
  Manifest manifest("diagnose", argv);
  const Eigen::MatrixXd u = load_residuals(o.input, o.from_fit, o.header, manifest);
  const auto p = static_cast<std::size_t>(u.cols());
  const std::size_t h_max = o.h_max.value_or(std::min<std::size_t>(20, p - 1));
  const auto dir = prepare_dir(o.out);

  // Average autocovariance over curves, normalized by its lag-0 value.
  Eigen::VectorXd acvf = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(h_max + 1));
  for (Eigen::Index t = 0; t < u.rows(); ++t) {
    const Eigen::RowVectorXd row = u.row(t);
    const auto a = fdf::residual_acf(std::span<const double>(row.data(), p), h_max);
    for (std::size_t h = 0; h <= h_max; ++h) acvf(static_cast<Eigen::Index>(h)) += a.acvf[h];
  }
  acvf /= static_cast<double>(u.rows());
  {
    std::ofstream out(dir / "acf.csv");
    out << "h,acvf,acf\n";
    for (std::size_t h = 0; h <= h_max; ++h) {
      const double g = acvf(static_cast<Eigen::Index>(h));
      out << h << ',' << fdf::io::format_double(g) << ','
          << (acvf(0) > 0.0 ? fdf::io::format_double(g / acvf(0)) : "NA") << '\n';
    }
  }
  manifest.output("acf.csv");

  const auto all = fdf::select_frequencies(p, 0.0, 1);
  write_xi((dir / "periodogram.csv").string(), all, fdf::averaged_periodogram(u, all));
  manifest.output("periodogram.csv");

  const auto [first, last] = parse_columns(o.columns, p);
  if (o.heatmap) {
    const Eigen::MatrixXd window = u.middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(last - first));
    const auto cov = fdf::residual_covariance(fdf::ObservationPanel(window));
    write_matrix(dir, "covariance.csv", cov.covariance, manifest);
    write_matrix(dir, "correlation.csv", cov.correlation, manifest);
    if (!cov.zero_variance_columns.empty()) {
      std::cerr << "warning: " << cov.zero_variance_columns.size()
                << " zero-variance columns; their correlations are NA\n";
    }
  }
  manifest.parameters() = {{"h_max", h_max}, {"heatmap", o.heatmap}, {"columns", {first + 1, last}}};
  manifest.write(dir);
  return 0;
}

// simulate -----------------------------------------------------------------

struct SimulateOptions {
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

int run_simulate(const SimulateOptions& o, const std::vector<std::string>& argv) {
  Manifest manifest("simulate", argv);
  manifest.input(o.spec);
  std::ifstream in(o.spec);
  if (!in) throw fdf::FormatError("cannot open " + o.spec);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto spec = fdf::synth::parse_simulation_spec(text);
  const json doc = json::parse(text);
  if (o.seed) {
    spec.seed = *o.seed;
  } else if (!doc.contains("seed")) {
    spec.seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) | std::random_device{}();
  }
  if (o.threads) spec.threads = *o.threads;
  std::cerr << "seed: " << spec.seed << '\n';

  const auto summary = fdf::synth::run_monte_carlo(spec);
  const auto dir = prepare_dir(o.out);
  {
    std::ofstream out(dir / "summary.csv");
    fdf::synth::write_summary_csv(out, summary);
  }
  manifest.output("summary.csv");
  {
    auto num = [](double v) { return std::isnan(v) ? std::string("NA") : fdf::io::format_double(v); };
    std::ofstream out(dir / "replications.csv");
    out << "setting,replication,method,failed,L,sse,lambda_fin,lambda_inf,p_fin,p_inf,error\n";
    for (const auto& r : summary.records) {
      std::string err = r.error;
      for (char& c : err)
        if (c == ',' || c == '\n') c = ';';
      out << r.setting << ',' << r.replication << ',' << fdf::synth::to_string(r.method) << ','
          << (r.failed ? 1 : 0) << ',' << r.L << ',' << num(r.sse) << ',' << num(r.lambda_fin) << ','
          << num(r.lambda_inf) << ',' << num(r.p_fin) << ',' << num(r.p_inf) << ',' << err << '\n';
    }
  }
  manifest.output("replications.csv");
  manifest.parameters() = doc;
  manifest.parameters()["seed"] = spec.seed;
  manifest["rng"] = {{"engine", "mt19937_64"},
                     {"normals", "Marsaglia polar"},
                     {"stream_seed", "splitmix64(master, setting, replication, stream)"}};
  // Thread count is deliberately absent: results do not depend on it.
  manifest.write(dir);
  std::size_t failed = 0;
  for (const auto& row : summary.rows) failed += row.failed;
  if (failed > 0) std::cerr << "warning: " << failed << " failed replications recorded in summary.csv\n";
  return 0;
}

// impute -------------------------------------------------------------------

int run_impute(const std::string& input, const std::string& out_path, bool header) {
  std::ifstream in(input);
  if (!in) throw fdf::FormatError("cannot open " + input);
  const auto panel = fdf::impute_panel(in, header ? fdf::HeaderMode::kGridRow : fdf::HeaderMode::kNone);
  std::ofstream out(out_path);
  if (!out) throw fdf::FormatError("cannot write " + out_path);
  if (header) {
    fdf::write_panel(out, panel);
  } else {
    fdf::io::write_matrix(out, panel.values());
  }
  return 0;
}

// eigen --------------------------------------------------------------------

struct EigenOptions {
  std::string input;
  std::string out;
  bool header = false;
  std::optional<std::size_t> count;
  bool no_center = false;
};

int run_eigen(const EigenOptions& o, const std::vector<std::string>& argv) {
  Manifest manifest("eigen", argv);
  manifest.input(o.input);
  const auto panel = load_input(o.input, o.header);
  const auto sys = fdf::empirical_eigensystem(panel, !o.no_center);
  const auto avail = static_cast<std::size_t>(sys.gram_eigenvalues.size());
  const std::size_t k = o.count.value_or(avail);
  if (k < 1 || k > avail) throw fdf::DomainError("--count must lie in [1, " + std::to_string(avail) + "]");
  const auto dir = prepare_dir(o.out);

  std::vector<std::string> header;
  for (std::size_t l = 0; l < k; ++l) header.push_back(fdf::io::format_double(sys.gram_eigenvalues(static_cast<Eigen::Index>(l))));
  write_matrix(dir, "eigenvectors.csv", sys.eigvecs.leftCols(static_cast<Eigen::Index>(k)), manifest, header);

  Eigen::MatrixXd functions(static_cast<Eigen::Index>(panel.points()), static_cast<Eigen::Index>(k + 1));
  std::vector<std::string> fheader{"s"};
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < panel.points(); ++i) functions(static_cast<Eigen::Index>(i), 0) = panel.grid()[i];
  for (std::size_t l = 1; l <= k; ++l) {
    auto est = fdf::eigenfunction_estimate(sys, l);
    for (std::size_t i = 0; i < panel.points(); ++i)
      functions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = est.function.levels()[i];
    fheader.push_back("phi_" + std::to_string(l));
    if (l == 1) warnings = est.warnings;
  }
  write_matrix(dir, "eigenfunctions.csv", functions, manifest, fheader);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

  std::vector<double> kernel(sys.kernel_eigenvalues.data(), sys.kernel_eigenvalues.data() + k);
  manifest["kernel_eigenvalues"] = kernel;
  manifest["warnings"] = warnings;
  manifest.parameters() = {{"count", k}, {"center", !o.no_center}};
  manifest.write(dir);
  return 0;
}

// curves -------------------------------------------------------------------

struct CurvesOptions {
  std::string input;
  std::string from_fit;
  std::string out;
  bool header = false;
  std::size_t L = 0;
  std::size_t resolution = 1000;
};

int run_curves(const CurvesOptions& o, const std::vector<std::string>& argv) {
  if (o.input.empty() == o.from_fit.empty()) throw fdf::InputError("give exactly one of --input or --from-fit");
  if (o.resolution < 2) throw fdf::DomainError("--resolution must be at least 2");
  Manifest manifest("curves", argv);
  Eigen::MatrixXd traces;
  if (!o.from_fit.empty()) {
    const auto signals_path = (fs::path(o.from_fit) / "signals.csv").string();
    const auto grid_path = (fs::path(o.from_fit) / "grid.csv").string();
    manifest.input(signals_path);
    manifest.input(grid_path);
    const Eigen::MatrixXd x = fdf::io::read_matrix_file(signals_path);
    const Eigen::MatrixXd g = fdf::io::read_matrix_file(grid_path);
    const fdf::SampleGrid grid(std::vector<double>(g.data(), g.data() + g.size()));
    traces.resize(x.rows() + 1, static_cast<Eigen::Index>(o.resolution));
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
      const Eigen::RowVectorXd row = x.row(t);
      const fdf::PiecewiseLinearCurve c(grid, std::vector<double>(row.data(), row.data() + row.size()));
      const auto trace = c.dense_trace(o.resolution);
      for (std::size_t k = 0; k < o.resolution; ++k) traces(t + 1, static_cast<Eigen::Index>(k)) = trace[k];
    }
    for (std::size_t k = 0; k < o.resolution; ++k)
      traces(0, static_cast<Eigen::Index>(k)) = static_cast<double>(k) / static_cast<double>(o.resolution - 1);
  } else {
    if (o.L < 1) throw fdf::OrderError("--L must be at least 1 when fitting from --input");
    manifest.input(o.input);
    traces = fdf::dense_traces(fdf::fit(load_input(o.input, o.header), o.L), o.resolution);
  }
  std::ofstream out(o.out);
  if (!out) throw fdf::FormatError("cannot write " + o.out);
  fdf::io::write_matrix(out, traces);
  return 0;
}

// generate -----------------------------------------------------------------

struct GenerateOptions {
  std::string dgp = "rough";
  std::size_t p = 50;
  std::size_t T = 200;
  double sigma2 = 0.05;
  double theta = 0.0;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_generate(const GenerateOptions& o, const std::vector<std::string>& argv) {
  namespace synth = fdf::synth;
  const std::uint64_t seed =
      o.seed.value_or((static_cast<std::uint64_t>(std::random_device{}()) << 32) | std::random_device{}());
  std::cerr << "seed: " << seed << '\n';
  const auto signal_seed = synth::derive_seed(seed, 0, 0, 0);
  const auto noise_seed = synth::derive_seed(seed, 0, 0, 1);
  const auto noise = synth::gen_ar1_noise(o.p, o.T, o.theta, std::sqrt(o.sigma2), noise_seed);
  fdf::ObservationPanel signals = [&] {
    if (o.dgp == "rough") return synth::gen_rough_signals({o.p, o.T, o.sigma2, signal_seed}).signals;
    if (o.dgp == "spline") {
      synth::SmoothDgpConfig cfg;
      cfg.p = o.p;
      cfg.T = o.T;
      cfg.theta_ar = o.theta;
      cfg.sigma = std::sqrt(o.sigma2);
      cfg.seed = signal_seed;
      return synth::gen_spline_signals(cfg);
    }
    if (o.dgp == "noise") return fdf::ObservationPanel(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(o.T), static_cast<Eigen::Index>(o.p)));
    throw fdf::DomainError("--dgp must be rough, spline or noise");
  }();
  Manifest manifest("generate", argv);
  const auto dir = prepare_dir(o.out);
  write_matrix(dir, "observations.csv", synth::add_noise(signals, noise).values(), manifest);
  write_matrix(dir, "signals.csv", signals.values(), manifest);
  write_matrix(dir, "noise.csv", noise.values(), manifest);
  manifest.parameters() = {{"dgp", o.dgp}, {"p", o.p}, {"T", o.T}, {"sigma2", o.sigma2}, {"theta", o.theta}, {"seed", seed}};
  manifest.write(dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const auto args = args_of(argc, argv);
  CLI::App app{"Denoise discretely observed functional data with an approximate factor model"};
  app.set_version_flag("--version", std::string(FDFACTOR_VERSION));
  app.require_subcommand(1);

  FitOptions fit_o;
  auto* fit = app.add_subcommand("fit", "Estimate common components with an L-factor model");
  fit->add_option("--input", fit_o.input, "Panel CSV, one curve per row")->required()->check(CLI::ExistingFile);
  fit->add_flag("--header", fit_o.header, "First row holds the grid points");
  fit->add_option("--L", fit_o.L, "Number of factors");
  fit->add_flag("--scree-auto", fit_o.scree_auto, "Choose L by the plateau rule on the test-statistic scree");
  fit->add_flag("--mean-only", fit_o.mean_only, "L = 0: signals are the column mean");
  fit->add_option("--l-max", fit_o.l_max, "Largest order tried by --scree-auto");
  fit->add_option("--cutoff", fit_o.cutoff, "Low-frequency cutoff c for --scree-auto");
  fit->add_option("--rel-tol", fit_o.rel_tol, "Plateau tolerance for --scree-auto");
  fit->add_option("--out", fit_o.out, "Output directory")->required();

  TestOptions test_o;
  auto* test = app.add_subcommand("test", "Periodogram test of iid residual components");
  test->add_option("--input", test_o.input, "Residual panel CSV")->check(CLI::ExistingFile);
  test->add_option("--from-fit", test_o.from_fit, "Fit directory holding residuals.csv")->check(CLI::ExistingDirectory);
  test->add_flag("--header", test_o.header, "First row holds the grid points");
  test->add_option("--cutoff", test_o.cutoff, "Fraction c of low frequencies dropped");
  test->add_option("--thin", test_o.thin, "Keep every m-th frequency, or 'auto'");
  test->add_option("--sigma2", test_o.sigma2, "Known error variance (default: difference estimator)");
  test->add_option("--xi", test_o.xi, "Write averaged periodogram values to this CSV");
  test->add_option("--out", test_o.out, "Also write report.json, xi.csv and a manifest here");

  ScreeOptions scree_o;
  auto* scree = app.add_subcommand("scree", "Eigenvalue and test-statistic scree curves");
  scree->add_option("--input", scree_o.input, "Panel CSV")->required()->check(CLI::ExistingFile);
  scree->add_flag("--header", scree_o.header, "First row holds the grid points");
  scree->add_option("--l-max", scree_o.l_max, "Largest order");
  scree->add_option("--cutoff", scree_o.cutoff, "Low-frequency cutoff c");
  scree->add_option("--thin", scree_o.thin, "Keep every m-th frequency, or 'auto'");
  scree->add_option("--rel-tol", scree_o.rel_tol, "Plateau tolerance");
  scree->add_option("--out", scree_o.out, "Output directory")->required();

  DiagnoseOptions diag_o;
  auto* diag = app.add_subcommand("diagnose", "Residual acf, periodogram and covariance exports");
  diag->add_option("--input", diag_o.input, "Residual panel CSV")->check(CLI::ExistingFile);
  diag->add_option("--from-fit", diag_o.from_fit, "Fit directory holding residuals.csv")->check(CLI::ExistingDirectory);
  diag->add_flag("--header", diag_o.header, "First row holds the grid points");
  diag->add_option("--h-max", diag_o.h_max, "Largest acf lag (default min(20, p - 1))");
  diag->add_flag("--heatmap", diag_o.heatmap, "Write covariance.csv and correlation.csv");
  diag->add_option("--columns", diag_o.columns, "Restrict the heatmap to grid columns a:b (1-based)");
  diag->add_option("--out", diag_o.out, "Output directory")->required();

  SimulateOptions sim_o;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo study from a JSON spec");
  sim->add_option("--spec", sim_o.spec, "JSON simulation spec")->required()->check(CLI::ExistingFile);
  sim->add_option("--seed", sim_o.seed, "Master seed (overrides the spec)");
  sim->add_option("--threads", sim_o.threads, "Worker threads (default FDFACTOR_THREADS or all cores)");
  sim->add_option("--out", sim_o.out, "Output directory")->required();

  std::string imp_in, imp_out;
  bool imp_header = false;
  auto* imp = app.add_subcommand("impute", "Fill missing values by in-row linear interpolation");
  imp->add_option("--input", imp_in, "Panel CSV with NA or empty cells")->required()->check(CLI::ExistingFile);
  imp->add_flag("--header", imp_header, "First row holds the grid points");
  imp->add_option("--out", imp_out, "Output CSV")->required();

  EigenOptions eig_o;
  auto* eig = app.add_subcommand("eigen", "Empirical eigenvalues, eigenvectors and eigenfunctions");
  eig->add_option("--input", eig_o.input, "Panel CSV")->required()->check(CLI::ExistingFile);
  eig->add_flag("--header", eig_o.header, "First row holds the grid points");
  eig->add_option("--count", eig_o.count, "Number of eigenpairs (default all)");
  eig->add_flag("--no-center", eig_o.no_center, "Skip centering");
  eig->add_option("--out", eig_o.out, "Output directory")->required();

  CurvesOptions cur_o;
  auto* cur = app.add_subcommand("curves", "Dense traces of the interpolated denoised curves");
  cur->add_option("--input", cur_o.input, "Panel CSV (fitted with --L)")->check(CLI::ExistingFile);
  cur->add_option("--from-fit", cur_o.from_fit, "Fit directory holding signals.csv and grid.csv")->check(CLI::ExistingDirectory);
  cur->add_flag("--header", cur_o.header, "First row holds the grid points");
  cur->add_option("--L", cur_o.L, "Number of factors");
  cur->add_option("--resolution", cur_o.resolution, "Points per trace");
  cur->add_option("--out", cur_o.out, "Output CSV")->required();

  GenerateOptions gen_o;
  auto* gen = app.add_subcommand("generate", "Write a synthetic panel with its true signals and noise");
  gen->add_option("--dgp", gen_o.dgp, "rough, spline or noise");
  gen->add_option("--p", gen_o.p, "Grid points per curve");
  gen->add_option("--T", gen_o.T, "Number of curves");
  gen->add_option("--sigma2", gen_o.sigma2, "Noise innovation variance");
  gen->add_option("--theta", gen_o.theta, "AR(1) coefficient of the noise");
  gen->add_option("--seed", gen_o.seed, "Master seed (random and printed when omitted)");
  gen->add_option("--out", gen_o.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*fit) return run_fit(fit_o, args);
    if (*test) return run_test(test_o, args);
    if (*scree) return run_scree(scree_o, args);
    if (*diag) return run_diagnose(diag_o, args);
    if (*sim) return run_simulate(sim_o, args);
    if (*imp) return run_impute(imp_in, imp_out, imp_header);
    if (*eig) return run_eigen(eig_o, args);
    if (*cur) return run_curves(cur_o, args);
    if (*gen) return run_generate(gen_o, args);
  } catch (const fdf::ParseError& e) {
    std::cerr << "error: " << e.what() << " (row " << e.row() << ", column " << e.column() << ")\n";
    return kExitInput;
  } catch (const fdf::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fdf::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitInput;
}
