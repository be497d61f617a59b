#include <algorithm>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "evsurprise/cli.hpp"
#include "evsurprise/io.hpp"

using namespace evsurprise;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {
struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("evsurprise_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) { return read_text_file(p); }

std::size_t data_rows(const fs::path& csv) { return parse_csv(slurp(csv)).data.rows(); }

// rows after the header, for tables with text columns
std::size_t text_rows(const fs::path& csv) {
  std::istringstream in(slurp(csv));
  std::string line;
  std::size_t n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    ++n;
  }
  return n;
}

std::vector<std::size_t> ranks(const PointSet& t, std::size_t k) {
  std::vector<std::size_t> idx(t.rows());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return t.at(a, k) < t.at(b, k); });
  return idx;
}
}  // namespace

TEST_CASE("simulate writes data and metadata") {
  const auto dir = scratch("sim");
  auto r = run({"simulate", "--design", "uni1", "--seed", "42", "--output-dir", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(data_rows(dir / "data.csv") == 500);
  const auto meta = json::parse(slurp(dir / "meta.json"));
  CHECK(meta["true_u"] == 20.0);
  CHECK(meta["seed"] == 42);
  CHECK(meta["schema_version"] == 1);
  CHECK(meta["config"]["command"] == "simulate");

  const auto first = slurp(dir / "data.csv");
  REQUIRE(run({"simulate", "--design", "uni1", "--seed", "42", "--output-dir", dir.string()}).code == 0);
  CHECK(slurp(dir / "data.csv") == first);

  r = run({"simulate", "--design", "dirichlet", "--seed", "1", "--output-dir", dir.string()});
  REQUIRE(r.code == 0);
  const auto t = parse_csv(slurp(dir / "data.csv"));
  CHECK(t.data.rows() == 3000);
  CHECK(t.header == std::vector<std::string>{"r", "w"});
}

TEST_CASE("usage and parse failures") {
  CHECK(run({"frobnicate"}).code == kExitParse);
  CHECK(run({"simulate"}).code == kExitParse);
  CHECK(run({"simulate", "--design", "uni9"}).code == kExitParse);
  CHECK(run({"classical", "--input", "x.csv", "--thresholds", "1:2:1", "--n-boot", "0"}).code == kExitParse);
  CHECK(run({"sweep", "--thresholds", "30"}).code == kExitParse);
}

TEST_CASE("malformed input CSV reports the line") {
  const auto dir = scratch("bad");
  write_text_file(dir / "bad.csv", "y\n21\n22\nfoo\n");
  const auto r = run({"sweep", "--input", (dir / "bad.csv").string(), "--thresholds", "20",
                      "--output-dir", dir.string()});
  CHECK(r.code == kExitParse);
  CHECK(r.err.find("line 4") != std::string::npos);
}

TEST_CASE("missing input file is an I/O error") {
  const auto dir = scratch("io");
  const auto r = run({"sweep", "--input", (dir / "nope.csv").string(), "--thresholds", "20"});
  CHECK(r.code == kExitIo);
  CHECK(r.err.find("nope.csv") != std::string::npos);
  write_text_file(dir / "blocker", "x");
  const auto w = run({"simulate", "--design", "uni1", "--output-dir", (dir / "blocker" / "sub").string()});
  CHECK(w.code == kExitIo);
}

TEST_CASE("sweep outputs") {
  const auto dir = scratch("sweep");
  REQUIRE(run({"simulate", "--design", "uni1", "--seed", "11", "--output-dir", dir.string()}).code == 0);
  const auto input = (dir / "data.csv").string();
  auto r = run({"sweep", "--input", input, "--thresholds", "30", "--mcmc-keep", "200", "--mcmc-burn",
                "100", "--output-dir", (dir / "one").string()});
  REQUIRE(r.code == 0);
  CHECK(text_rows(dir / "one" / "curve.csv") == 1);
  const auto doc = json::parse(slurp(dir / "one" / "results.json"));
  CHECK(doc["curve"]["entries"].size() == 1);
  CHECK(doc["seed"] == 1);
  CHECK(doc["config"]["thresholds"] == "30");
  CHECK(slurp(dir / "one" / "curve.svg").rfind("<svg", 0) == 0);
  CHECK(r.out.find("recommended threshold") != std::string::npos);

  // too few exceedances everywhere
  r = run({"sweep", "--input", input, "--thresholds", "1000,900", "--output-dir", (dir / "empty").string()});
  CHECK(r.code == kExitEmpty);

  r = run({"sweep", "--input", input, "--thresholds", "20:40:4", "--stat", "quantile:0.9", "--mcmc-keep",
           "200", "--mcmc-burn", "100", "--output-dir", (dir / "q").string()});
  CHECK(r.code == 0);
  r = run({"sweep", "--input", input, "--thresholds", "20:40:4", "--stat", "max", "--pvalue", "partial",
           "--mcmc-keep", "200", "--mcmc-burn", "100", "--output-dir", (dir / "p").string()});
  CHECK(r.code == 0);
  r = run({"sweep", "--input", input, "--thresholds", "30", "--pvalue", "partial",
           "--output-dir", (dir / "bad").string()});
  CHECK(r.code == kExitParse);
}

TEST_CASE("config file precedence and round trip") {
  const auto dir = scratch("cfg");
  write_text_file(dir / "c.json", R"({"design": "uni1", "seed": 5, "n": 50})");
  auto r = run({"simulate", "--config", (dir / "c.json").string(), "--output-dir", (dir / "a").string()});
  REQUIRE(r.code == 0);
  CHECK(json::parse(slurp(dir / "a" / "meta.json"))["seed"] == 5);
  CHECK(data_rows(dir / "a" / "data.csv") == 50);

  r = run({"simulate", "--config", (dir / "c.json").string(), "--seed", "7", "--output-dir",
           (dir / "b").string()});
  REQUIRE(r.code == 0);
  CHECK(json::parse(slurp(dir / "b" / "meta.json"))["seed"] == 7);

  // the embedded config reproduces the run
  const auto embedded = json::parse(slurp(dir / "b" / "meta.json"))["config"];
  write_text_file(dir / "again.json", embedded.dump());
  const auto before = slurp(dir / "b" / "data.csv");
  fs::remove(dir / "b" / "data.csv");
  r = run({"simulate", "--config", (dir / "again.json").string()});
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "b" / "data.csv") == before);
  CHECK(data_rows(dir / "b" / "data.csv") == 50);

  write_text_file(dir / "broken.json", "{nope");
  CHECK(run({"simulate", "--config", (dir / "broken.json").string()}).code == kExitParse);
}

TEST_CASE("transform") {
  const auto dir = scratch("tr");
  write_text_file(dir / "x.csv", "a,b\n1,10\n5,3\n2,8\n9,1\n4,4\n");
  auto r = run({"transform", "--input", (dir / "x.csv").string(), "--output-dir", dir.string()});
  REQUIRE(r.code == 0);
  const auto in = parse_csv(slurp(dir / "x.csv"));
  const auto fr = parse_csv(slurp(dir / "frechet.csv"));
  CHECK(fr.data.dim == 2);
  CHECK(fr.data.rows() == 5);
  CHECK(ranks(fr.data, 0) == ranks(in.data, 0));
  CHECK(ranks(fr.data, 1) == ranks(in.data, 1));
  const auto pol = parse_csv(slurp(dir / "polar.csv"));
  CHECK(pol.header == std::vector<std::string>{"r", "w"});
  // reconstruct z from (r, w) to 1e-12
  for (std::size_t i = 0; i < pol.data.rows(); ++i) {
    const double r0 = pol.data.at(i, 0), w = pol.data.at(i, 1);
    CHECK(std::fabs(2.0 * r0 * w - fr.data.at(i, 0)) < 1e-12 * std::max(1.0, fr.data.at(i, 0)));
    CHECK(std::fabs(2.0 * r0 * (1.0 - w) - fr.data.at(i, 1)) < 1e-12 * std::max(1.0, fr.data.at(i, 1)));
  }

  write_text_file(dir / "const.csv", "a,flat\n1,2\n3,2\n5,2\n");
  r = run({"transform", "--input", (dir / "const.csv").string(), "--output-dir", dir.string()});
  CHECK(r.code == kExitDomain);
  CHECK(r.err.find("flat") != std::string::npos);
}

TEST_CASE("classical command") {
  const auto dir = scratch("cl");
  REQUIRE(run({"simulate", "--design", "uni1", "--seed", "3", "--output-dir", dir.string()}).code == 0);
  const std::vector<std::string> args{"classical", "--input", (dir / "data.csv").string(), "--thresholds",
                                      "10:30:10", "--n-boot", "50", "--output-dir", (dir / "o").string()};
  auto r = run(args);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("selected threshold") != std::string::npos);
  const auto doc = json::parse(slurp(dir / "o" / "classical.json"));
  CHECK(doc.contains("selected"));
  CHECK(text_rows(dir / "o" / "mrl.csv") == 3);
  const auto gof = slurp(dir / "o" / "gof.csv");
  REQUIRE(run(args).code == 0);
  CHECK(slurp(dir / "o" / "gof.csv") == gof);
}
