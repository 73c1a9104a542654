#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <limits>

#include "mdpboot/errors.h"
#include "mdpboot/io.h"

using namespace mdpboot;

namespace {
const std::filesystem::path kData = MDPBOOT_TEST_DATA;
}

TEST_CASE("real formatting round-trips") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(std::stod(format_real(x)) == x);
  }
  CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_real(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_real(std::nan("")) == "nan");
  CHECK(format_real(0.5) == "0.5");
}

TEST_CASE("distribution files") {
  const FiniteProbabilityMeasure p = read_distribution(kData / "coin.json");
  CHECK(p.size() == 2);
  CHECK(p.prob(1) == 0.5);

  const FiniteProbabilityMeasure bi = parse_distribution(R"({"points": [[0, 0], [1, 2]], "probs": [0.25, 0.75]})");
  CHECK(bi.dimension() == 2);
  CHECK(bi.point(1).y == 2.0);

  CHECK_THROWS_AS(read_distribution(kData / "bad_probs.json"), InputError);
  CHECK_THROWS_AS(read_distribution(kData / "missing.json"), InputError);
  CHECK_THROWS_AS(parse_distribution(R"({"points": [0, 1]})"), InputError);
  CHECK_THROWS_AS(parse_distribution(R"({"points": [0, "x"], "probs": [0.5, 0.5]})"), InputError);
  CHECK_THROWS_AS(parse_distribution("[1, 2"), InputError);
}

TEST_CASE("constraint files") {
  const auto cs = read_constraints(kData / "halfspace.json");
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].kind() == ConstraintKind::at_least);
  CHECK(cs[0].c() == 1.0);
  CHECK(cs[0].f()[1] == 1.0);

  const auto eq = parse_constraints(R"([{"f": [1, 2], "kind": "equality", "c": 0.5}])");
  CHECK(eq[0].kind() == ConstraintKind::equality);
  CHECK_THROWS_AS(parse_constraints("[]"), InputError);
  CHECK_THROWS_AS(parse_constraints(R"([{"f": [1, 2], "kind": "less", "c": 0.5}])"), InputError);
  CHECK_THROWS_AS(parse_constraints(R"([{"f": [1, 2]}])"), InputError);
}

TEST_CASE("number lists") {
  CHECK(parse_real_list("1, 2.5,-3") == std::vector<double>{1.0, 2.5, -3.0});
  CHECK(parse_real_list("[0.25, 0.75]") == std::vector<double>{0.25, 0.75});
  CHECK_THROWS_AS(parse_real_list("1, x"), InputError);
  CHECK_THROWS_AS(parse_real_list("1, 2abc"), InputError);
  CHECK_THROWS_AS(parse_real_list(""), InputError);
}

TEST_CASE("CSV tables and text files") {
  CsvTable t;
  t.header = {"n", "p_hat"};
  t.rows = {{"8", "0.5"}, {"16", "inf"}};
  CHECK(t.str() == "n,p_hat\n8,0.5\n16,inf\n");

  const auto dir = std::filesystem::temp_directory_path() / "mdpboot_io_test";
  std::filesystem::remove_all(dir);
  write_text_file(dir / "nested" / "t.csv", t.str());
  CHECK(read_text_file(dir / "nested" / "t.csv") == t.str());
  std::filesystem::remove_all(dir);
}
