#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>

#include "magfiber/config.hpp"
#include "magfiber/error.hpp"
#include "magfiber/io.hpp"

using namespace magfiber;
namespace fs = std::filesystem;

TEST_CASE("doubles round-trip through text") {
  for (double x : {0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 0.0, std::numbers::pi})
    CHECK(parse_double(format_double(x)) == x);
  CHECK_THROWS_AS(parse_double("1.5x"), ParseError);
  CHECK_THROWS_AS(parse_double(""), ParseError);
}

TEST_CASE("csv tables") {
  const CsvTable t{{"tau", "sigma"}, {{0.5, 1.25}, {-1.0, 2.0 / 3.0}}};
  const auto back = parse_csv(to_csv(t));
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  try {
    parse_csv("a,b\n1,2\n3,oops\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("atomic writes and hashes") {
  const fs::path dir = fs::temp_directory_path() / "magfiber_io_test";
  fs::remove_all(dir);
  const fs::path p = dir / "nested" / "x.txt";
  write_file_atomic(p, "first");
  write_file_atomic(p, "second");
  CHECK(read_file(p) == "second");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(p.parent_path())) {
    (void)e;
    ++files;
  }
  CHECK(files == 1);
  fs::remove_all(dir);
  // FNV-1a test vectors
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("config parsing") {
  SUBCASE("valid cell") {
    auto cfg = parse_config("a=-0.5\nalpha=1.5708\ngamma=0.7854\n");
    CHECK_NOTHROW(finalize_config(cfg));
    REQUIRE(cfg.a.size() == 1);
    CHECK(cfg.a[0] == -0.5);
    CHECK(cfg.alpha[0] == 1.5708);
  }
  SUBCASE("comments, blanks and lists") {
    auto cfg = parse_config("# sweep\n\nalpha = 0.5, 1.0 ,1.5  # three\nh1=0.05\nout=run7\n");
    CHECK(cfg.alpha == std::vector<double>{0.5, 1.0, 1.5});
    CHECK(cfg.disc.h1 == 0.05);
    CHECK(cfg.out == "run7");
  }
  SUBCASE("excluded field ratio") {
    auto cfg = parse_config("a=0\n");
    try {
      finalize_config(cfg);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(e.parameter() == "a");
      CHECK(std::string(e.what()).find("[-1, 1)") != std::string::npos);
    }
  }
  SUBCASE("gamma above pi/2") {
    auto cfg = parse_config("gamma=2.0\n");
    try {
      finalize_config(cfg);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(e.parameter() == "gamma");
    }
  }
  SUBCASE("degrees") {
    auto cfg = parse_config("alpha=90\ngamma=45\n");
    cfg.degrees = true;
    finalize_config(cfg);
    CHECK(cfg.alpha[0] == doctest::Approx(std::numbers::pi / 2.0));
    CHECK(cfg.gamma[0] == doctest::Approx(std::numbers::pi / 4.0));
  }
  SUBCASE("parse errors carry the line") {
    try {
      parse_config("a=0.5\n\nbogus=1\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_config("a 0.5\n"), ParseError);
    CHECK_THROWS_AS(parse_config("h1=fast\n"), ParseError);
  }
  SUBCASE("canonical text reads back") {
    auto cfg = parse_config("alpha=0.1,0.2\na=-1\nL2=25\nseed=7\n");
    const auto again = parse_config(cfg.to_text());
    CHECK(again.to_text() == cfg.to_text());
    CHECK(again.disc.L2 == 25.0);
    CHECK(again.disc.seed == 7u);
  }
  SUBCASE("other range checks") {
    auto c1 = parse_config("xi_min=3\nxi_max=1\n");
    CHECK_THROWS_AS(finalize_config(c1), ValidationError);
    auto c2 = parse_config("xi_steps=4\n");
    CHECK_THROWS_AS(finalize_config(c2), ValidationError);
    auto c3 = parse_config("alpha=0\n");
    CHECK_THROWS_AS(finalize_config(c3), ValidationError);
    auto c4 = parse_config("h1=-0.1\n");
    CHECK_THROWS_AS(finalize_config(c4), ValidationError);
  }
}
