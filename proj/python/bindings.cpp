#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fdfactor/curve.hpp"
#include "fdfactor/errors.hpp"
#include "fdfactor/factor_fit.hpp"
#include "fdfactor/monte_carlo.hpp"
#include "fdfactor/noise_test.hpp"
#include "fdfactor/order_selection.hpp"
#include "fdfactor/panel.hpp"
#include "fdfactor/rng.hpp"
#include "fdfactor/spectral.hpp"
#include "fdfactor/synth.hpp"

namespace py = pybind11;

namespace {

fdf::ObservationPanel make_panel(const Eigen::MatrixXd& y, const std::optional<std::vector<double>>& grid) {
  if (grid) return fdf::ObservationPanel(y, fdf::SampleGrid(*grid));
  return fdf::ObservationPanel(y);
}

std::vector<double> grid_points(const fdf::SampleGrid& g) { return {g.points().begin(), g.points().end()}; }

fdf::FrequencySelection selection(std::size_t p, std::size_t T, double cutoff, std::optional<std::size_t> thin) {
  return thin ? fdf::select_frequencies(p, cutoff, *thin) : fdf::select_frequencies_auto(p, T, cutoff);
}

py::dict report_dict(const fdf::NoiseTestReport& r) {
  py::dict d;
  d["sigma2_hat"] = r.sigma2_hat;
  d["f"] = r.f;
  d["T"] = r.T;
  d["s2_xi"] = r.s2_xi;
  d["lambda_fin"] = r.lambda_fin;
  d["p_fin"] = r.p_fin;
  d["lambda_inf"] = r.lambda_inf;
  d["p_inf"] = r.p_inf;
  d["xi"] = r.xi;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Factor-model denoising of discretely observed functional data";
  m.attr("__version__") = FDFACTOR_VERSION;

  static py::exception<fdf::InputError> input_error(m, "InputError", PyExc_ValueError);
  static py::exception<fdf::NumericalError> numerical_error(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const fdf::InputError& e) {
      py::set_error(input_error, e.what());
    } catch (const fdf::NumericalError& e) {
      py::set_error(numerical_error, e.what());
    }
  });

  py::class_<fdf::FactorFit>(m, "FactorFit")
      .def_readonly("order", &fdf::FactorFit::order)
      .def_readonly("eigvecs", &fdf::FactorFit::eigvecs)
      .def_readonly("scores", &fdf::FactorFit::scores)
      .def_readonly("loadings", &fdf::FactorFit::loadings)
      .def_readonly("gram_eigenvalues", &fdf::FactorFit::gram_eigenvalues)
      .def_readonly("signals", &fdf::FactorFit::signals)
      .def_readonly("residuals", &fdf::FactorFit::residuals)
      .def_property_readonly("mean", [](const fdf::FactorFit& f) { return f.mean.values; })
      .def_property_readonly("grid", [](const fdf::FactorFit& f) { return grid_points(f.grid); })
      .def_readonly("warnings", &fdf::FactorFit::warnings)
      .def("residual_sum_of_squares", &fdf::FactorFit::residual_sum_of_squares)
      .def("curve", [](const fdf::FactorFit& f, std::size_t t, const Eigen::VectorXd& s) {
             const auto c = fdf::interpolate(f, t);
             Eigen::VectorXd out(s.size());
             for (Eigen::Index i = 0; i < s.size(); ++i) out(i) = c.evaluate(s(i));
             return out;
           },
           py::arg("t"), py::arg("s"), "Piecewise-linear interpolant of curve t (1-based) at points s")
      .def("dense_traces", &fdf::dense_traces, py::arg("resolution") = 1000);

  m.def("fit",
        [](const Eigen::MatrixXd& y, std::size_t L, std::optional<std::vector<double>> grid) {
          return fdf::fit(make_panel(y, grid), L);
        },
        py::arg("y"), py::arg("L"), py::arg("grid") = py::none(),
        "L-factor fit of a T x p panel (one curve per row)");
  m.def("mean_only_fit",
        [](const Eigen::MatrixXd& y, std::optional<std::vector<double>> grid) {
          return fdf::mean_only_fit(make_panel(y, grid));
        },
        py::arg("y"), py::arg("grid") = py::none());

  m.def("eigensystem",
        [](const Eigen::MatrixXd& y, bool center, std::optional<std::vector<double>> grid) {
          const auto s = fdf::empirical_eigensystem(make_panel(y, grid), center);
          py::dict d;
          d["gram_eigenvalues"] = s.gram_eigenvalues;
          d["kernel_eigenvalues"] = s.kernel_eigenvalues;
          d["eigvecs"] = s.eigvecs;
          return d;
        },
        py::arg("y"), py::arg("center") = true, py::arg("grid") = py::none());
  m.def("eigenfunction",
        [](const Eigen::MatrixXd& y, std::size_t index, std::optional<std::vector<double>> grid) {
          const auto est = fdf::eigenfunction_estimate(fdf::empirical_eigensystem(make_panel(y, grid)), index);
          return py::make_tuple(est.function.levels(), est.warnings);
        },
        py::arg("y"), py::arg("index"), py::arg("grid") = py::none(),
        "Step-function levels sqrt(p) * psi_index and any warnings");

  m.def("periodogram", [](const std::vector<double>& z, double theta) { return fdf::periodogram(z, theta); },
        py::arg("z"), py::arg("theta"));
  m.def("frequencies",
        [](std::size_t p, std::size_t T, double cutoff, std::optional<std::size_t> thin) {
          return selection(p, T, cutoff, thin).indices;
        },
        py::arg("p"), py::arg("T"), py::arg("cutoff") = 0.1, py::arg("thin") = py::none(),
        "Retained Fourier indices l (theta = 2 pi l / p)");
  m.def("gasser_variance", [](const Eigen::MatrixXd& u) { return fdf::gasser_variance(u); }, py::arg("u"));
  m.def("noise_test",
        [](const Eigen::MatrixXd& u, double cutoff, std::optional<std::size_t> thin, std::optional<double> sigma2) {
          const auto sel = selection(static_cast<std::size_t>(u.cols()), static_cast<std::size_t>(u.rows()), cutoff, thin);
          return report_dict(fdf::iid_noise_test(u, sel, sigma2));
        },
        py::arg("u"), py::arg("cutoff") = 0.1, py::arg("thin") = py::none(), py::arg("sigma2") = py::none());

  m.def("scree",
        [](const Eigen::MatrixXd& y, std::size_t l_max, double cutoff, std::optional<std::size_t> thin) {
          const auto d = fdf::decompose(fdf::ObservationPanel(y));
          const auto sel = selection(static_cast<std::size_t>(y.cols()), static_cast<std::size_t>(y.rows()), cutoff, thin);
          const auto c = fdf::lambda_scree(d, l_max, sel);
          py::dict out;
          out["gamma"] = Eigen::VectorXd(d.eigenvalues.head(static_cast<Eigen::Index>(l_max)));
          out["lambda_inf"] = c.values;
          out["residual_ss"] = c.residual_ss;
          return out;
        },
        py::arg("y"), py::arg("l_max") = 10, py::arg("cutoff") = 0.1, py::arg("thin") = py::none());
  m.def("suggest_L",
        [](const std::vector<double>& values, double rel_tol) {
          fdf::ScreeCurve c;
          c.kind = fdf::ScreeKind::kTestStatistic;
          for (std::size_t l = 1; l <= values.size(); ++l) c.orders.push_back(l);
          c.values = values;
          const auto choice = fdf::suggest_plateau_L(c, rel_tol);
          return py::make_tuple(choice.order, choice.plateau_found);
        },
        py::arg("values"), py::arg("rel_tol") = 0.1, "Plateau rule on a test-statistic scree curve");

  m.def("rough_signals",
        [](std::size_t p, std::size_t T, std::uint64_t seed) {
          const auto s = fdf::synth::gen_rough_signals({p, T, 0.0, seed});
          return py::make_tuple(s.signals.values(), s.scores);
        },
        py::arg("p"), py::arg("T"), py::arg("seed"));
  m.def("spline_signals",
        [](std::size_t p, std::size_t T, std::uint64_t seed, std::size_t K, double signal_variance) {
          fdf::synth::SmoothDgpConfig cfg;
          cfg.p = p;
          cfg.T = T;
          cfg.seed = seed;
          cfg.K = K;
          cfg.signal_variance = signal_variance;
          return fdf::synth::gen_spline_signals(cfg).values();
        },
        py::arg("p"), py::arg("T"), py::arg("seed"), py::arg("K") = 21, py::arg("signal_variance") = 25.0);
  m.def("ar1_noise",
        [](std::size_t p, std::size_t T, double theta, double sigma, std::uint64_t seed) {
          return fdf::synth::gen_ar1_noise(p, T, theta, sigma, seed).values();
        },
        py::arg("p"), py::arg("T"), py::arg("theta"), py::arg("sigma"), py::arg("seed"));
  m.def("bspline_fit",
        [](const Eigen::MatrixXd& y, std::size_t K) { return fdf::synth::bspline_ls_fit(fdf::ObservationPanel(y), K).values(); },
        py::arg("y"), py::arg("K"));
  m.def("sse_appr",
        [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return fdf::synth::sse_appr(a, b); });
  m.def("derive_seed", &fdf::synth::derive_seed, py::arg("master"), py::arg("setting"), py::arg("replication"),
        py::arg("stream") = 0);
  m.def("simulate",
        [](const std::string& spec_json) {
          const auto summary = fdf::synth::run_monte_carlo(fdf::synth::parse_simulation_spec(spec_json));
          std::ostringstream out;
          fdf::synth::write_summary_csv(out, summary);
          return out.str();
        },
        py::arg("spec_json"), py::call_guard<py::gil_scoped_release>(),
        "Run a Monte Carlo study from a JSON spec and return summary.csv text");
}
