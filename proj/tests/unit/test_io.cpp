#include <cmath>
#include <filesystem>
#include <limits>
#include <string>

#include "doctest.h"
#include "evsurprise/error.hpp"
#include "evsurprise/io.hpp"
#include "evsurprise/rng.hpp"

using namespace evsurprise;
namespace fs = std::filesystem;

namespace {
std::size_t parse_error_line(std::string_view text, bool drop = false) {
  try {
    (void)parse_csv(text, drop);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}
}  // namespace

TEST_CASE("basic parsing") {
  const auto t = parse_csv("\xEF\xBB\xBF# comment\nx, y\n1,2\n\n3.5,-4e2\r\n");
  CHECK(t.header == std::vector<std::string>{"x", "y"});
  CHECK(t.data.dim == 2);
  CHECK(t.data.values == std::vector<double>{1, 2, 3.5, -400});
}

TEST_CASE("parse errors carry line numbers") {
  CHECK(parse_error_line("x,y\n1,2\n3\n") == 3);
  CHECK(parse_error_line("x\n1\nabc\n") == 3);
  CHECK(parse_error_line("x\n1\n\n#c\nNA\n") == 5);
  CHECK(parse_error_line("x\n1\ninf\n") == 3);
  CHECK(parse_error_line("x\n") != 0);
  CHECK(parse_error_line("") != 0);
  CHECK(parse_error_line("x,,z\n1,2,3\n") == 1);
}

TEST_CASE("dropping incomplete rows") {
  const auto t = parse_csv("a,b\n1,2\nNA,3\n4,\n5,6\n", true);
  CHECK(t.data.rows() == 2);
  CHECK(t.data.values == std::vector<double>{1, 2, 5, 6});
  // malformed numbers still fail
  CHECK(parse_error_line("a,b\n1,x\n", true) == 2);
}

TEST_CASE("shortest round trip formatting") {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double x = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.uniform() * 40) - 20);
    REQUIRE(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(20.0) == "20");
}

TEST_CASE("csv writer and reader round trip") {
  Rng rng(2);
  PointSet rows;
  rows.dim = 3;
  for (int i = 0; i < 200; ++i) rows.push_row(std::vector<double>{rng.normal(), 1.0 / rng.uniform(), rng.uniform() * 1e-9});
  const auto text = csv_text({"a", "b", "c"}, rows, {"config {\"seed\":1}"});
  CHECK(text.rfind("# config", 0) == 0);
  const auto back = parse_csv(text);
  CHECK(back.header == std::vector<std::string>{"a", "b", "c"});
  CHECK(back.data == rows);
}

TEST_CASE("file helpers") {
  const fs::path dir = fs::temp_directory_path() / "evsurprise_io_test";
  fs::remove_all(dir);
  write_text_file(dir / "nested" / "f.csv", "x\n1\n");
  CHECK(read_text_file(dir / "nested" / "f.csv") == "x\n1\n");
  CHECK(read_csv(dir / "nested" / "f.csv").data.values == std::vector<double>{1});
  CHECK_THROWS_AS(read_text_file(dir / "missing.csv"), IoError);
  // a regular file where a directory is needed
  try {
    write_text_file(dir / "nested" / "f.csv" / "out.csv", "x");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("f.csv") != std::string::npos);
  }
  fs::remove_all(dir);
}
