#include "evsurprise/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "evsurprise/classical.hpp"
#include "evsurprise/datagen.hpp"
#include "evsurprise/error.hpp"
#include "evsurprise/io.hpp"
#include "evsurprise/report.hpp"
#include "evsurprise/spectral.hpp"
#include "evsurprise/sweep.hpp"

namespace evsurprise {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::string input;
  std::string output_dir = ".";
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::string config;
  bool drop_incomplete = false;
};

struct SimulateArgs {
  std::string design;
  std::size_t n = 0;
  std::string gamma = "shape_scale";
};

struct SweepArgs {
  std::string thresholds;
  std::string stat = "negloglik";
  std::string pvalue = "posterior";
  std::string model = "gpd";
  std::size_t keep = 9000;
  std::size_t burn = 1000;
  std::size_t min_exceedances = 30;
  bool polar = false;
  double delta = 0.15;
  std::size_t window = 3;
};

struct TransformArgs {
  std::string outputs = "both";
};

struct ClassicalArgs {
  std::string thresholds;
  std::size_t n_boot = 500;
  std::size_t min_exceedances = 30;
};

// Reads --config <file> from the argument list and returns the equivalent
// flag tokens. They are placed before the explicit arguments so the latter win.
std::vector<std::string> config_tokens(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return {};
  json cfg;
  try {
    cfg = json::parse(read_text_file(*path));
  } catch (const json::parse_error& e) {
    throw ParseError(0, "config file '" + *path + "': " + e.what());
  }
  if (!cfg.is_object()) throw ParseError(0, "config file '" + *path + "' must hold a JSON object");
  std::vector<std::string> out;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config" || key == "command") continue;
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_string()) {
      out.insert(out.end(), {flag, value.get<std::string>()});
    } else if (value.is_number()) {
      out.insert(out.end(), {flag, value.dump()});
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
      out.insert(out.end(), {flag, joined});
    } else if (!value.is_null()) {
      throw ParseError(0, "config key '" + key + "' has an unsupported value type");
    }
  }
  return out;
}

double parse_number(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size() || !std::isfinite(v)) throw UsageError("invalid " + what + ": '" + s + "'");
  return v;
}

std::vector<double> parse_thresholds(const std::string& spec) {
  if (spec.empty()) throw UsageError("--thresholds is required");
  if (std::count(spec.begin(), spec.end(), ':') == 2) {
    const auto a = spec.find(':');
    const auto b = spec.find(':', a + 1);
    return stepped_thresholds(parse_number(spec.substr(0, a), "threshold"),
                              parse_number(spec.substr(a + 1, b - a - 1), "threshold"),
                              parse_number(spec.substr(b + 1), "threshold step"));
  }
  std::vector<double> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = spec.find(',', start);
    out.push_back(parse_number(spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start),
                               "threshold"));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void parse_stat(const std::string& s, SweepConfig& cfg) {
  if (s == "negloglik") {
    cfg.stat = TestStatisticSpec::neg_log_likelihood();
  } else if (s == "max") {
    cfg.stat = TestStatisticSpec::maximum();
  } else if (s.rfind("quantile:", 0) == 0) {
    const std::string arg = s.substr(9);
    const double v = parse_number(arg, "quantile index");
    if (arg.find('.') != std::string::npos && v > 0.0 && v <= 1.0) {
      cfg.stat = TestStatisticSpec{StatisticKind::empirical_quantile, std::nullopt};
      cfg.quantile_fraction = v;
    } else if (v >= 1.0 && v == std::floor(v)) {
      cfg.stat = TestStatisticSpec::empirical_quantile(static_cast<std::size_t>(v));
    } else {
      throw UsageError("quantile:J needs an integer J >= 1 or a fraction in (0, 1]");
    }
  } else {
    throw UsageError("unknown statistic '" + s + "' (negloglik | max | quantile:J)");
  }
}

SweepModel parse_model(const std::string& s) {
  if (s == "gpd") return GpdModelChoice{};
  if (s == "logistic") return SpectralModelChoice{SpectralFamily::logistic, 1};
  if (s == "bilogistic") return SpectralModelChoice{SpectralFamily::bilogistic, 1};
  if (s == "dirichlet") return SpectralModelChoice{SpectralFamily::dirichlet_mixture, 2};
  if (s.rfind("dirichlet:", 0) == 0) {
    const double v = parse_number(s.substr(10), "mixture size");
    if (v < 1.0 || v != std::floor(v)) throw UsageError("dirichlet:I needs an integer I >= 1");
    return SpectralModelChoice{SpectralFamily::dirichlet_mixture, static_cast<std::size_t>(v)};
  }
  throw UsageError("unknown model '" + s + "' (gpd | logistic | bilogistic | dirichlet:I)");
}

json common_json(const Common& c, bool with_input) {
  json j{{"output-dir", c.output_dir}, {"seed", c.seed}, {"workers", c.workers}};
  if (with_input) {
    j["input"] = c.input;
    j["drop-incomplete-rows"] = c.drop_incomplete;
  }
  return j;
}

std::string with_command(json cfg, const std::string& command) {
  cfg["command"] = command;
  return cfg.dump();
}

// Polar dataset from either raw margins or an (r, w1..w_{d-1}) table.
PolarDataset load_polar(const CsvTable& table, bool already_polar) {
  if (!already_polar) {
    if (table.data.dim < 2) throw UsageError("multivariate models need at least two columns");
    return to_pseudo_polar(frechet_transform(table.data));
  }
  if (table.data.dim < 2) throw UsageError("a polar CSV has the radius plus at least one angle column");
  const std::size_t d = table.data.dim;
  PolarDataset polar;
  polar.w = PointSet(d, {});
  std::vector<double> w(d);
  for (std::size_t i = 0; i < table.data.rows(); ++i) {
    const auto row = table.data.row(i);
    polar.r.push_back(row[0]);
    double last = 1.0;
    for (std::size_t k = 1; k < d; ++k) {
      w[k - 1] = row[k];
      last -= row[k];
    }
    w[d - 1] = last;
    polar.w.push_row(w);
  }
  polar.validate();
  return polar;
}

void cmd_simulate(const Common& c, const SimulateArgs& a, std::ostream& out) {
  json cfg = common_json(c, false);
  cfg["design"] = a.design;
  if (a.n) cfg["n"] = a.n;
  cfg["gamma"] = a.gamma;
  const std::string line = with_command(cfg, "simulate");
  const fs::path dir(c.output_dir);

  json meta{{"schema_version", kResultsSchemaVersion}, {"config", json::parse(line)}, {"seed", c.seed},
            {"design", a.design}};
  std::string csv;
  std::size_t rows = 0;
  if (a.design == "uni1" || a.design == "uni2" || a.design == "uni3") {
    GammaParameterization g;
    if (a.gamma == "shape_scale") g = GammaParameterization::shape_scale;
    else if (a.gamma == "shape_rate") g = GammaParameterization::shape_rate;
    else throw UsageError("--gamma must be shape_scale or shape_rate");
    auto design = UnivariateDesign::standard(a.design[3] - '0', g);
    if (a.n) design.n = a.n;
    const auto y = gen_univariate(design, c.seed);
    rows = y.size();
    csv = csv_text({"y"}, PointSet(1, y), {line});
    meta["true_u"] = design.true_threshold;
    meta["n"] = design.n;
  } else if (a.design == "logistic" || a.design == "dirichlet") {
    auto design = a.design == "logistic" ? BivariateDesign::logistic() : BivariateDesign::dirichlet();
    if (a.n) design.n = a.n;
    const auto polar = gen_bivariate(design, c.seed);
    PointSet table(2, {});
    for (std::size_t i = 0; i < polar.size(); ++i) table.push_row(std::vector<double>{polar.r[i], polar.w.at(i, 0)});
    rows = polar.size();
    csv = csv_text({"r", "w"}, table, {line});
    meta["true_u"] = design.true_threshold();
    meta["n"] = design.n;
    meta["r_a"] = design.r_a;
    meta["r_b"] = design.r_b;
  } else {
    throw UsageError("unknown design '" + a.design + "' (uni1 | uni2 | uni3 | logistic | dirichlet)");
  }
  write_text_file(dir / "data.csv", csv);
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");
  out << "wrote " << rows << " rows to " << (dir / "data.csv").string() << "\n";
}

void cmd_sweep(const Common& c, const SweepArgs& a, std::ostream& out) {
  if (c.input.empty()) throw UsageError("--input is required");
  SweepConfig cfg;
  cfg.thresholds = parse_thresholds(a.thresholds);
  parse_stat(a.stat, cfg);
  if (a.pvalue == "posterior") cfg.pvalue_kind = PValueKind::posterior;
  else if (a.pvalue == "partial") cfg.pvalue_kind = PValueKind::partial;
  else throw UsageError("--pvalue must be posterior or partial");
  cfg.model = parse_model(a.model);
  cfg.mcmc.n_keep = a.keep;
  cfg.mcmc.n_burn = a.burn;
  cfg.min_exceedances = a.min_exceedances;
  cfg.seed = c.seed;
  cfg.workers = c.workers;

  json jcfg = common_json(c, true);
  jcfg.update({{"thresholds", a.thresholds}, {"stat", a.stat}, {"pvalue", a.pvalue}, {"model", a.model},
               {"mcmc-keep", a.keep}, {"mcmc-burn", a.burn}, {"min-exceedances", a.min_exceedances},
               {"polar", a.polar}, {"delta", a.delta}, {"window", a.window}});
  const std::string line = with_command(jcfg, "sweep");

  const CsvTable table = read_csv(c.input, c.drop_incomplete);
  SurpriseCurve curve;
  if (std::holds_alternative<GpdModelChoice>(cfg.model)) {
    if (table.data.dim != 1) throw UsageError("the GPD model needs a single-column CSV");
    curve = univariate_sweep(table.data.values, cfg);
  } else {
    curve = multivariate_sweep(load_polar(table, a.polar), cfg);
  }

  ThresholdRecommendation rec{std::nullopt, "not enough thresholds for a recommendation"};
  const bool enough = curve.kind == CurveKind::univariate ? curve.entries.size() >= a.window + 2
                                                          : curve.anchors().size() >= 2;
  if (enough) rec = recommend_threshold(curve, a.delta, a.window);

  const fs::path dir(c.output_dir);
  json doc{{"schema_version", kResultsSchemaVersion},
           {"config", json::parse(line)},
           {"seed", c.seed},
           {"thresholds", cfg.thresholds},
           {"curve", curve_to_json(curve)},
           {"recommendation", recommendation_to_json(rec)}};
  write_text_file(dir / "curve.csv", curve_csv(curve, line));
  write_text_file(dir / "results.json", doc.dump(2) + "\n");
  write_text_file(dir / "curve.svg", curve_svg(curve, rec, line));
  out << "recommended threshold: " << (rec.threshold ? format_double(*rec.threshold) : std::string("none"))
      << " (" << rec.note << ")\n";
}

void cmd_transform(const Common& c, const TransformArgs& a, std::ostream& out) {
  if (c.input.empty()) throw UsageError("--input is required");
  if (a.outputs != "both" && a.outputs != "frechet" && a.outputs != "polar")
    throw UsageError("--outputs must be both, frechet or polar");
  json jcfg = common_json(c, true);
  jcfg["outputs"] = a.outputs;
  const std::string line = with_command(jcfg, "transform");

  const CsvTable table = read_csv(c.input, c.drop_incomplete);
  if (table.data.dim < 2) throw UsageError("transform needs at least two columns");
  PointSet z;
  try {
    z = frechet_transform(table.data);
  } catch (const DegenerateMarginError& e) {
    const std::size_t col = e.column();
    throw DegenerateMarginError(col, "column '" + (col < table.header.size() ? table.header[col] : std::to_string(col)) +
                                         "' is constant");
  }
  const fs::path dir(c.output_dir);
  if (a.outputs != "polar") write_text_file(dir / "frechet.csv", csv_text(table.header, z, {line}));
  if (a.outputs != "frechet") {
    const PolarDataset polar = to_pseudo_polar(z);
    const std::size_t d = z.dim;
    std::vector<std::string> header{"r"};
    for (std::size_t k = 1; k < d; ++k) header.push_back(d == 2 ? "w" : "w" + std::to_string(k));
    PointSet rows(d, {});
    std::vector<double> row(d);
    for (std::size_t i = 0; i < polar.size(); ++i) {
      row[0] = polar.r[i];
      for (std::size_t k = 1; k < d; ++k) row[k] = polar.w.at(i, k - 1);
      rows.push_row(row);
    }
    write_text_file(dir / "polar.csv", csv_text(header, rows, {line}));
  }
  out << "transformed " << z.rows() << " rows\n";
}

void cmd_classical(const Common& c, const ClassicalArgs& a, std::ostream& out) {
  if (c.input.empty()) throw UsageError("--input is required");
  const auto thresholds = parse_thresholds(a.thresholds);
  json jcfg = common_json(c, true);
  jcfg.update({{"thresholds", a.thresholds}, {"n-boot", a.n_boot}, {"min-exceedances", a.min_exceedances}});
  const std::string line = with_command(jcfg, "classical");

  const CsvTable table = read_csv(c.input, c.drop_incomplete);
  if (table.data.dim != 1) throw UsageError("classical selection needs a single-column CSV");
  const auto& y = table.data.values;
  const MrlTable mrl = mean_residual_life(y, thresholds);
  const ClassicalSelection sel =
      classical_threshold_select(y, thresholds, c.seed, a.n_boot, a.min_exceedances, c.workers);
  if (std::none_of(sel.rows.begin(), sel.rows.end(), [](const auto& r) { return r.ok; }))
    throw EmptyResultError("no threshold could be fitted");

  const fs::path dir(c.output_dir);
  json doc = classical_to_json(sel, mrl);
  doc["schema_version"] = kResultsSchemaVersion;
  doc["config"] = json::parse(line);
  doc["seed"] = c.seed;
  write_text_file(dir / "mrl.csv", mrl_csv(mrl, line));
  write_text_file(dir / "gof.csv", gof_csv(sel, line));
  write_text_file(dir / "classical.json", doc.dump(2) + "\n");
  auto show = [](const std::optional<double>& u) { return u ? format_double(*u) : std::string("none"); };
  out << "selected threshold W2: " << show(sel.u_w2) << ", A2: " << show(sel.u_a2) << "\n";
}

void add_common(CLI::App* sub, Common& c, bool with_input) {
  if (with_input) {
    sub->add_option("--input", c.input, "input CSV (header row required)");
    sub->add_flag("--drop-incomplete-rows", c.drop_incomplete, "skip rows with missing values");
  }
  sub->add_option("--output-dir", c.output_dir, "directory for output files");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--config", c.config, "JSON file of default flag values");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian threshold selection for extreme value models", "evsurprise"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  Common common;
  SimulateArgs sim;
  SweepArgs sw;
  TransformArgs tr;
  ClassicalArgs cl;

  auto* simulate = app.add_subcommand("simulate", "generate a seeded synthetic dataset");
  add_common(simulate, common, false);
  simulate->add_option("--design", sim.design, "uni1 | uni2 | uni3 | logistic | dirichlet")->required();
  simulate->add_option("--n", sim.n, "sample size (default: the design's)");
  simulate->add_option("--gamma", sim.gamma, "shape_scale | shape_rate reading of Gamma(3, 8)");

  auto* sweep = app.add_subcommand("sweep", "surprise p-values over candidate thresholds");
  add_common(sweep, common, true);
  sweep->add_option("--thresholds", sw.thresholds, "list a,b,c or min:max:step")->required();
  sweep->add_option("--stat", sw.stat, "negloglik | max | quantile:J");
  sweep->add_option("--pvalue", sw.pvalue, "posterior | partial");
  sweep->add_option("--model", sw.model, "gpd | logistic | bilogistic | dirichlet:I");
  sweep->add_option("--mcmc-keep", sw.keep, "kept MCMC iterations")->check(CLI::PositiveNumber);
  sweep->add_option("--mcmc-burn", sw.burn, "burn-in iterations");
  sweep->add_option("--min-exceedances", sw.min_exceedances, "skip thresholds with fewer exceedances");
  sweep->add_flag("--polar", sw.polar, "input is an (r, w) table instead of raw margins");
  sweep->add_option("--delta", sw.delta, "tolerance of the recommendation rule");
  sweep->add_option("--window", sw.window, "top thresholds used as the reference level");

  auto* transform = app.add_subcommand("transform", "unit Frechet margins and pseudo-polar coordinates");
  add_common(transform, common, true);
  transform->add_option("--outputs", tr.outputs, "both | frechet | polar");

  auto* classical = app.add_subcommand("classical", "MRL and goodness-of-fit threshold selection");
  add_common(classical, common, true);
  classical->add_option("--thresholds", cl.thresholds, "list a,b,c or min:max:step")->required();
  classical->add_option("--n-boot", cl.n_boot, "bootstrap replicates")->check(CLI::PositiveNumber);
  classical->add_option("--min-exceedances", cl.min_exceedances, "skip thresholds with fewer exceedances");

  try {
    std::vector<std::string> tokens = args;
    if (!tokens.empty()) {
      const auto extra = config_tokens(tokens);
      tokens.insert(tokens.begin() + 1, extra.begin(), extra.end());
    }
    std::reverse(tokens.begin(), tokens.end());
    try {
      app.parse(tokens);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << "\n";
      return kExitParse;
    }

    if (simulate->parsed()) cmd_simulate(common, sim, out);
    else if (sweep->parsed()) cmd_sweep(common, sw, out);
    else if (transform->parsed()) cmd_transform(common, tr, out);
    else if (classical->parsed()) cmd_classical(common, cl, out);
    return kExitOk;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitParse;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const EmptyResultError& e) {
    err << "empty result: " << e.what() << "\n";
    return kExitEmpty;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitOther;
  }
}

}  // namespace evsurprise
