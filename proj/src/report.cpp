#include "evsurprise/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "evsurprise/io.hpp"

namespace evsurprise {
namespace {

using nlohmann::json;

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vector_json(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(number_or_null(x));
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string num(double x) { return std::isfinite(x) ? format_double(x) : "NA"; }

std::string fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double min_ess(const ChainSummary& c) {
  if (c.ess.empty()) return std::numeric_limits<double>::quiet_NaN();
  return *std::min_element(c.ess.begin(), c.ess.end());
}

}  // namespace

json curve_to_json(const SurpriseCurve& curve) {
  json entries = json::array();
  for (const auto& e : curve.entries) {
    json j;
    j["fit_threshold"] = e.fit_threshold;
    j["eval_threshold"] = e.eval_threshold;
    j["status"] = to_string(e.status);
    j["reason"] = e.reason;
    j["n_exceed"] = e.n_exceed;
    if (e.ok()) {
      j["p"] = e.pvalue.p;
      j["mc_se"] = e.pvalue.mc_se;
      j["n_rep"] = e.pvalue.n_rep;
      // small in either tail counts as surprise for order statistics
      j["min_tail"] = std::min(e.pvalue.p, 1.0 - e.pvalue.p);
    } else {
      j["p"] = nullptr;
      j["mc_se"] = nullptr;
      j["min_tail"] = nullptr;
      j["n_rep"] = 0;
    }
    j["chain"] = {{"acceptance_rate", number_or_null(e.chain.acceptance_rate)},
                  {"ess", vector_json(e.chain.ess)},
                  {"mean", vector_json(e.chain.mean)},
                  {"sd", vector_json(e.chain.sd)}};
    entries.push_back(std::move(j));
  }
  return {{"kind", curve.kind == CurveKind::univariate ? "univariate" : "multivariate"},
          {"entries", std::move(entries)}};
}

json recommendation_to_json(const ThresholdRecommendation& rec) {
  return {{"threshold", rec.threshold ? json(*rec.threshold) : json(nullptr)}, {"note", rec.note}};
}

json classical_to_json(const ClassicalSelection& sel, const MrlTable& mrl) {
  json rows = json::array();
  for (const auto& r : sel.rows) {
    json j{{"u", r.u}, {"n_exc", r.n_exc}, {"ok", r.ok}, {"reason", r.reason}};
    if (r.ok) {
      j["fit"] = {{"xi", r.gof.fit.xi}, {"sigma", r.gof.fit.sigma}};
      j["w2"] = r.gof.observed.w2;
      j["a2"] = r.gof.observed.a2;
      j["clipped"] = r.gof.observed.clipped;
      j["p_w2"] = r.gof.p_w2;
      j["p_a2"] = r.gof.p_a2;
      j["n_boot"] = r.gof.n_boot;
      j["n_failed"] = r.gof.n_failed;
    }
    rows.push_back(std::move(j));
  }
  json points = json::array();
  for (const auto& p : mrl.points)
    points.push_back({{"u", p.u}, {"mean_excess", p.mean_excess}, {"ci_low", p.ci_low},
                      {"ci_high", p.ci_high}, {"n_exc", p.n_exc}});
  return {{"gof", std::move(rows)},
          {"selected", {{"w2", sel.u_w2 ? json(*sel.u_w2) : json(nullptr)},
                        {"a2", sel.u_a2 ? json(*sel.u_a2) : json(nullptr)},
                        {"note", sel.note}}},
          {"mrl", {{"points", std::move(points)}, {"skipped", mrl.skipped}}}};
}

std::string curve_csv(const SurpriseCurve& curve, const std::string& config_line) {
  std::string out = "# " + config_line + "\n";
  out += "fit_threshold,eval_threshold,status,p,mc_se,n_exc,acceptance_rate,ess_min\n";
  for (const auto& e : curve.entries) {
    out += num(e.fit_threshold) + "," + num(e.eval_threshold) + "," + to_string(e.status) + ",";
    out += (e.ok() ? num(e.pvalue.p) + "," + num(e.pvalue.mc_se) : std::string("NA,NA")) + ",";
    out += std::to_string(e.n_exceed) + ",";
    out += (e.chain.ess.empty() ? std::string("NA,NA")
                                : num(e.chain.acceptance_rate) + "," + num(min_ess(e.chain)));
    out += "\n";
  }
  return out;
}

std::string mrl_csv(const MrlTable& mrl, const std::string& config_line) {
  std::string out = "# " + config_line + "\n";
  out += "u,mean_excess,ci_low,ci_high,n_exc\n";
  for (const auto& p : mrl.points)
    out += num(p.u) + "," + num(p.mean_excess) + "," + num(p.ci_low) + "," + num(p.ci_high) + "," +
           std::to_string(p.n_exc) + "\n";
  return out;
}

std::string gof_csv(const ClassicalSelection& sel, const std::string& config_line) {
  std::string out = "# " + config_line + "\n";
  out += "u,n_exc,status,xi,sigma,w2,a2,p_w2,p_a2\n";
  for (const auto& r : sel.rows) {
    out += num(r.u) + "," + std::to_string(r.n_exc) + "," + (r.ok ? "ok" : csv_field(r.reason)) + ",";
    if (r.ok)
      out += num(r.gof.fit.xi) + "," + num(r.gof.fit.sigma) + "," + num(r.gof.observed.w2) + "," +
             num(r.gof.observed.a2) + "," + num(r.gof.p_w2) + "," + num(r.gof.p_a2);
    else
      out += "NA,NA,NA,NA,NA,NA";
    out += "\n";
  }
  return out;
}

std::string curve_svg(const SurpriseCurve& curve, const ThresholdRecommendation& rec,
                      const std::string& config_line) {
  constexpr double width = 640, height = 400, left = 60, right = 20, top = 20, bottom = 50;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& e : curve.entries) {
    lo = std::min({lo, e.fit_threshold, e.eval_threshold});
    hi = std::max({hi, e.fit_threshold, e.eval_threshold});
  }
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  auto sx = [&](double u) { return left + (u - lo) / (hi - lo) * (width - left - right); };
  auto sy = [&](double p) { return top + (1.0 - p) * (height - top - bottom); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  s += "<metadata>" + xml_escape(config_line) + "</metadata>\n";
  s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  // axes
  s += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(sy(0)) + "\" x2=\"" + fixed(width - right) +
       "\" y2=\"" + fixed(sy(0)) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(sy(0)) + "\" x2=\"" + fixed(left) + "\" y2=\"" +
       fixed(sy(1)) + "\" stroke=\"black\"/>\n";
  for (double p : {0.0, 0.25, 0.5, 0.75, 1.0})
    s += "<text x=\"" + fixed(left - 8) + "\" y=\"" + fixed(sy(p) + 4) +
         "\" font-size=\"11\" text-anchor=\"end\">" + fixed(p) + "</text>\n";
  for (int k = 0; k <= 5; ++k) {
    const double u = lo + (hi - lo) * k / 5.0;
    s += "<text x=\"" + fixed(sx(u)) + "\" y=\"" + fixed(sy(0) + 16) +
         "\" font-size=\"11\" text-anchor=\"middle\">" + fixed(u) + "</text>\n";
  }
  s += "<text x=\"" + fixed((left + width - right) / 2) + "\" y=\"" + fixed(height - 8) +
       "\" font-size=\"12\" text-anchor=\"middle\">threshold</text>\n";
  s += "<text x=\"14\" y=\"" + fixed((top + sy(0)) / 2) +
       "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " + fixed((top + sy(0)) / 2) +
       ")\">p-value</text>\n";
  s += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(sy(0.5)) + "\" x2=\"" + fixed(width - right) +
       "\" y2=\"" + fixed(sy(0.5)) + "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";

  auto polyline = [&](const std::vector<CurveEntry>& pts, const std::string& colour) {
    std::string path;
    for (const auto& e : pts) {
      if (!e.ok()) continue;
      path += (path.empty() ? "" : " ") + fixed(sx(e.eval_threshold)) + "," + fixed(sy(e.pvalue.p));
    }
    if (!path.empty())
      s += "<polyline points=\"" + path + "\" fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"1.5\"/>\n";
  };

  if (curve.kind == CurveKind::univariate) {
    polyline(curve.entries, "black");
    for (const auto& e : curve.entries)
      if (e.ok())
        s += "<circle cx=\"" + fixed(sx(e.eval_threshold)) + "\" cy=\"" + fixed(sy(e.pvalue.p)) +
             "\" r=\"2.5\" fill=\"black\"/>\n";
  } else {
    for (double anchor : curve.anchors()) {
      auto line = curve.line(anchor);
      const bool accepted = rec.threshold && anchor >= *rec.threshold;
      const std::string colour = accepted ? "#1f4e9c" : "#b0b0b0";
      polyline(line, colour);
      if (!line.empty() && line.front().ok())
        s += "<circle cx=\"" + fixed(sx(anchor)) + "\" cy=\"" + fixed(sy(line.front().pvalue.p)) +
             "\" r=\"3\" fill=\"" + colour + "\"/>\n";
    }
  }
  if (rec.threshold)
    s += "<line x1=\"" + fixed(sx(*rec.threshold)) + "\" y1=\"" + fixed(sy(0)) + "\" x2=\"" +
         fixed(sx(*rec.threshold)) + "\" y2=\"" + fixed(sy(1)) +
         "\" stroke=\"#c0392b\" stroke-dasharray=\"2,3\"/>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace evsurprise
