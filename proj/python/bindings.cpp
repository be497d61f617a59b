#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "evsurprise/classical.hpp"
#include "evsurprise/cli.hpp"
#include "evsurprise/datagen.hpp"
#include "evsurprise/error.hpp"
#include "evsurprise/gpd.hpp"
#include "evsurprise/spectral.hpp"
#include "evsurprise/surprise.hpp"
#include "evsurprise/sweep.hpp"

namespace py = pybind11;
using namespace evsurprise;

namespace {

TestStatisticSpec parse_stat(const std::string& s, std::optional<double>& fraction) {
  if (s == "negloglik") return TestStatisticSpec::neg_log_likelihood();
  if (s == "max") return TestStatisticSpec::maximum();
  if (s.rfind("quantile:", 0) == 0) {
    const double v = std::stod(s.substr(9));
    if (s.find('.') != std::string::npos && v > 0.0 && v <= 1.0) {
      fraction = v;
      return {StatisticKind::empirical_quantile, std::nullopt};
    }
    if (v >= 1.0) return TestStatisticSpec::empirical_quantile(static_cast<std::size_t>(v));
  }
  throw UsageError("unknown statistic '" + s + "'");
}

SweepConfig make_config(const std::vector<double>& thresholds, const std::string& stat,
                        const std::string& pvalue, std::size_t n_keep, std::size_t n_burn,
                        std::size_t min_exceedances, std::uint64_t seed, std::size_t workers) {
  SweepConfig cfg;
  cfg.thresholds = thresholds;
  std::sort(cfg.thresholds.begin(), cfg.thresholds.end(), std::greater<>());
  cfg.stat = parse_stat(stat, cfg.quantile_fraction);
  if (pvalue == "posterior") cfg.pvalue_kind = PValueKind::posterior;
  else if (pvalue == "partial") cfg.pvalue_kind = PValueKind::partial;
  else throw UsageError("pvalue must be 'posterior' or 'partial'");
  cfg.mcmc.n_keep = n_keep;
  cfg.mcmc.n_burn = n_burn;
  cfg.min_exceedances = min_exceedances;
  cfg.seed = seed;
  cfg.workers = workers;
  return cfg;
}

py::dict curve_dict(const SurpriseCurve& curve, const ThresholdRecommendation& rec) {
  py::list entries;
  for (const auto& e : curve.entries) {
    py::dict d;
    d["fit_threshold"] = e.fit_threshold;
    d["eval_threshold"] = e.eval_threshold;
    d["status"] = to_string(e.status);
    d["reason"] = e.reason;
    d["n_exceed"] = e.n_exceed;
    d["p"] = e.ok() ? py::cast(e.pvalue.p) : py::none();
    d["mc_se"] = e.ok() ? py::cast(e.pvalue.mc_se) : py::none();
    d["acceptance_rate"] = e.chain.acceptance_rate;
    d["ess"] = e.chain.ess;
    d["mean"] = e.chain.mean;
    entries.append(d);
  }
  py::dict out;
  out["kind"] = curve.kind == CurveKind::univariate ? "univariate" : "multivariate";
  out["entries"] = entries;
  out["recommendation"] = rec.threshold ? py::cast(*rec.threshold) : py::none();
  out["note"] = rec.note;
  return out;
}

ThresholdRecommendation safe_recommend(const SurpriseCurve& curve) {
  const bool enough = curve.kind == CurveKind::univariate ? curve.entries.size() >= 5 : curve.anchors().size() >= 2;
  if (!enough) return {std::nullopt, "not enough thresholds for a recommendation"};
  return recommend_threshold(curve);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bayesian threshold selection for extreme value models";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<EmptyResultError>(m, "EmptyResultError", base.ptr());

  m.def("gpd_cdf", [](double y, double xi, double sigma, double u) { return gpd_cdf(y, {xi, sigma, u}); },
        py::arg("y"), py::arg("xi"), py::arg("sigma"), py::arg("u") = 0.0);
  m.def("gpd_log_density",
        [](double y, double xi, double sigma, double u) { return gpd_log_density(y, {xi, sigma, u}); },
        py::arg("y"), py::arg("xi"), py::arg("sigma"), py::arg("u") = 0.0);
  m.def("gpd_quantile",
        [](double q, double xi, double sigma, double u) { return gpd_quantile(q, {xi, sigma, u}); },
        py::arg("q"), py::arg("xi"), py::arg("sigma"), py::arg("u") = 0.0);
  m.def("gpd_sample",
        [](std::size_t n, double xi, double sigma, double u, std::uint64_t seed) {
          Rng rng(seed);
          return gpd_sample(n, {xi, sigma, u}, rng);
        },
        py::arg("n"), py::arg("xi"), py::arg("sigma"), py::arg("u") = 0.0, py::arg("seed") = 1);
  m.def("gpd_mle",
        [](const std::vector<double>& y, double u) {
          const auto p = gpd_mle(ExceedanceSet(y, u));
          return py::make_tuple(p.xi, p.sigma);
        },
        py::arg("y"), py::arg("u"), "Maximum-likelihood (xi, sigma) for the exceedances of y over u.");

  m.def("posterior_predictive_pvalue_gpd",
        [](const std::vector<double>& y, double u, const std::string& stat, std::size_t n_keep,
           std::size_t n_burn, std::uint64_t seed) {
          std::optional<double> fraction;
          const TestStatisticSpec spec = parse_stat(stat, fraction);
          const ExceedanceSet data(y, u);
          McmcConfig mc;
          mc.n_keep = n_keep;
          mc.n_burn = n_burn;
          mc.seed = derive_seed(seed, 1);
          const auto draws = fit_gpd_posterior(data, mc);
          const auto est =
              posterior_predictive_pvalue(draws, PointSet(1, data.values()), spec, GpdModel(u), Rng(derive_seed(seed, 2)));
          return py::make_tuple(est.p, est.mc_se);
        },
        py::arg("y"), py::arg("u"), py::arg("stat") = "negloglik", py::arg("n_keep") = 9000,
        py::arg("n_burn") = 1000, py::arg("seed") = 1);

  m.def("gen_univariate",
        [](int design, std::uint64_t seed, std::optional<std::size_t> n) {
          auto d = UnivariateDesign::standard(design);
          if (n) d.n = *n;
          return gen_univariate(d, seed);
        },
        py::arg("design"), py::arg("seed"), py::arg("n") = py::none());
  m.def("gen_bivariate",
        [](const std::string& design, std::uint64_t seed, std::optional<std::size_t> n) {
          BivariateDesign d;
          if (design == "logistic") d = BivariateDesign::logistic();
          else if (design == "dirichlet") d = BivariateDesign::dirichlet();
          else throw UsageError("design must be 'logistic' or 'dirichlet'");
          if (n) d.n = *n;
          const auto polar = gen_bivariate(d, seed);
          std::vector<double> w(polar.size());
          for (std::size_t i = 0; i < w.size(); ++i) w[i] = polar.w.at(i, 0);
          return py::make_tuple(polar.r, w);
        },
        py::arg("design"), py::arg("seed"), py::arg("n") = py::none(),
        "Returns (r, w) with w the first angular coordinate.");

  m.def("frechet_transform",
        [](const std::vector<std::vector<double>>& rows) {
          if (rows.empty()) throw UsageError("no rows");
          PointSet data(rows.front().size(), {});
          for (const auto& r : rows) {
            if (r.size() != data.dim) throw UsageError("ragged rows");
            data.push_row(r);
          }
          const PointSet z = frechet_transform(data);
          std::vector<std::vector<double>> out(z.rows());
          for (std::size_t i = 0; i < z.rows(); ++i) out[i].assign(z.row(i).begin(), z.row(i).end());
          return out;
        },
        py::arg("rows"));
  m.def("to_pseudo_polar",
        [](const std::vector<std::vector<double>>& rows) {
          if (rows.empty()) throw UsageError("no rows");
          PointSet z(rows.front().size(), {});
          for (const auto& r : rows) z.push_row(r);
          const auto polar = to_pseudo_polar(z);
          std::vector<std::vector<double>> w(polar.size());
          for (std::size_t i = 0; i < w.size(); ++i) w[i].assign(polar.w.row(i).begin(), polar.w.row(i).end());
          return py::make_tuple(polar.r, w);
        },
        py::arg("rows"));

  m.def("univariate_sweep",
        [](const std::vector<double>& y, const std::vector<double>& thresholds, const std::string& stat,
           const std::string& pvalue, std::size_t n_keep, std::size_t n_burn, std::size_t min_exceedances,
           std::uint64_t seed, std::size_t workers) {
          const auto cfg = make_config(thresholds, stat, pvalue, n_keep, n_burn, min_exceedances, seed, workers);
          SurpriseCurve curve;
          {
            py::gil_scoped_release release;
            curve = univariate_sweep(y, cfg);
          }
          return curve_dict(curve, safe_recommend(curve));
        },
        py::arg("y"), py::arg("thresholds"), py::arg("stat") = "negloglik", py::arg("pvalue") = "posterior",
        py::arg("n_keep") = 9000, py::arg("n_burn") = 1000, py::arg("min_exceedances") = 30,
        py::arg("seed") = 1, py::arg("workers") = 1);

  m.def("multivariate_sweep",
        [](const std::vector<double>& r, const std::vector<double>& w, const std::vector<double>& thresholds,
           const std::string& model, std::size_t components, std::size_t n_keep, std::size_t n_burn,
           std::size_t min_exceedances, std::uint64_t seed, std::size_t workers) {
          if (r.size() != w.size()) throw UsageError("r and w differ in length");
          PolarDataset polar;
          polar.r = r;
          polar.w = PointSet(2, {});
          for (double x : w) polar.w.push_row(std::vector<double>{x, 1.0 - x});
          auto cfg = make_config(thresholds, "negloglik", "posterior", n_keep, n_burn, min_exceedances, seed, workers);
          cfg.model = SpectralModelChoice{parse_spectral_family(model), components};
          SurpriseCurve curve;
          {
            py::gil_scoped_release release;
            curve = multivariate_sweep(polar, cfg);
          }
          return curve_dict(curve, safe_recommend(curve));
        },
        py::arg("r"), py::arg("w"), py::arg("thresholds"), py::arg("model") = "logistic",
        py::arg("components") = 2, py::arg("n_keep") = 9000, py::arg("n_burn") = 1000,
        py::arg("min_exceedances") = 30, py::arg("seed") = 1, py::arg("workers") = 1,
        "Bivariate sweep on pseudo-polar data; w is the first angular coordinate.");

  m.def("mean_residual_life",
        [](const std::vector<double>& y, const std::vector<double>& thresholds) {
          const auto table = mean_residual_life(y, thresholds);
          py::list out;
          for (const auto& p : table.points) {
            py::dict d;
            d["u"] = p.u;
            d["mean_excess"] = p.mean_excess;
            d["ci_low"] = p.ci_low;
            d["ci_high"] = p.ci_high;
            d["n_exc"] = p.n_exc;
            out.append(d);
          }
          return out;
        },
        py::arg("y"), py::arg("thresholds"));
  m.def("classical_threshold_select",
        [](const std::vector<double>& y, const std::vector<double>& thresholds, std::uint64_t seed,
           std::size_t n_boot, std::size_t min_exceedances) {
          ClassicalSelection sel;
          {
            py::gil_scoped_release release;
            sel = classical_threshold_select(y, thresholds, seed, n_boot, min_exceedances);
          }
          py::dict out;
          out["w2"] = sel.u_w2 ? py::cast(*sel.u_w2) : py::none();
          out["a2"] = sel.u_a2 ? py::cast(*sel.u_a2) : py::none();
          out["note"] = sel.note;
          return out;
        },
        py::arg("y"), py::arg("thresholds"), py::arg("seed") = 1, py::arg("n_boot") = 500,
        py::arg("min_exceedances") = 30);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          const int code = run_cli(args, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs one CLI command; returns (exit_code, stdout, stderr).");
}
