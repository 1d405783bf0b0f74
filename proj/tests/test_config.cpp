#include <doctest.h>

#include <sstream>

#include "brw/config.hpp"
#include "brw/error.hpp"

using namespace brw;

TEST_CASE("parsing and overrides") {
  auto cfg = Config::from_string(
      "# heavy tail\n"
      "kernel = heavy\n"
      "alpha = 1.5   # exponent\n"
      "radius=2\n"
      "\n"
      "law = 0.5, -1, 0.5\n");
  CHECK(cfg.text("kernel", "") == "heavy");
  CHECK(cfg.number("alpha", 0.0) == 1.5);
  CHECK(cfg.integer("radius", 0) == 2);
  CHECK(cfg.numbers("law", {}) == std::vector<double>{0.5, -1.0, 0.5});
  const auto before = cfg.hash();
  cfg.apply_override("radius=3");
  CHECK(cfg.integer("radius", 0) == 3);
  CHECK(cfg.hash() != before);
  CHECK(cfg.hash_hex().size() == 16);
  CHECK_NOTHROW(cfg.check_known_keys());
  cfg.set("radios", "3");
  CHECK_THROWS_AS(cfg.check_known_keys(), ValidationError);
  CHECK_THROWS_AS(Config::from_string("kernel heavy\n"), ValidationError);
  CHECK_THROWS_AS(cfg.apply_override("radius"), ValidationError);
  CHECK_THROWS_AS(Config::from_string("alpha = x\n").number("alpha", 0.0), ValidationError);
  CHECK_THROWS_AS(Config::from_string("radius = 2.5\n").integer("radius", 0), ValidationError);
  CHECK(Config::from_string("cap = 1e6\n").integer("cap", 0) == 1'000'000);
}

TEST_CASE("hash depends only on resolved content") {
  const auto a = Config::from_string("a = 1\nb = 2\n");
  const auto b = Config::from_string("b = 2\n  a=1  \n");
  CHECK(a.hash() == b.hash());
  // FNV-1a of the empty string
  CHECK(Config{}.hash() == 0xcbf29ce484222325ull);
}

TEST_CASE("kernels from config") {
  CHECK(make_kernel(Config::from_string("dimension = 3\n")).support().size() == 6);
  const auto w = make_kernel(Config::from_string("kernel = weights\nweights = 1:0.25; -1:0.25; 2:0.1; -2:0.1\n"));
  CHECK(w.diagonal() == doctest::Approx(-0.7));
  const auto w2 = make_kernel(Config::from_string("kernel = finite-variance\ndimension = 2\n"
                                                  "weights = 1,0:1; -1,0:1; 0,1:2; 0,-1:2\n"));
  CHECK(w2.rate({0, -1}) == 2.0);
  const auto h = make_kernel(Config::from_string("kernel = heavy-tail\nalpha = 1.5\nradius = 2\n"));
  CHECK(h.diagonal() == doctest::Approx(-2.353553).epsilon(1e-6));
  const auto e = make_kernel(Config::from_string("kernel = heavy\nalpha = 1.5\ntail = exact\n"));
  CHECK(e.tail_mode() == TailMode::exact);
  CHECK(e.truncation_radius() == 64);
  const auto t = make_kernel(Config::from_string("kernel = heavy\ndimension = 2\nalpha = 1\nradius = 4\n"
                                                 "H.table = 1,0:1; 0,1:2; -1,0:1; 0,-1:2; 1,1:1.5; -1,1:1.5; -1,-1:1.5; 1,-1:1.5\n"));
  CHECK(t.rate({0, 3}) == doctest::Approx(2.0 / 27.0));
  CHECK(t.rate({3, 0}) == doctest::Approx(1.0 / 27.0));

  CHECK_THROWS_AS(make_kernel(Config::from_string("kernel = weights\nweights = 1:0.5\n")), ValidationError);
  CHECK_THROWS_AS(make_kernel(Config::from_string("kernel = heavy\nalpha = 2\n")), ValidationError);
  CHECK_THROWS_AS(make_kernel(Config::from_string("kernel = heavy\n")), ValidationError);
  CHECK_THROWS_AS(make_kernel(Config::from_string("kernel = cubic\n")), ValidationError);
  CHECK_THROWS_AS(make_kernel(Config::from_string("kernel = heavy\nalpha=1\ntail = maybe\n")), ValidationError);
}

TEST_CASE("laws, grids, points and simulation settings") {
  CHECK(beta(make_law(Config{})) == -1.0);
  CHECK(beta(make_law(Config::from_string("law = 0:0.1; 1:-1.1; 2:1\n"))) == doctest::Approx(0.9));
  CHECK_THROWS_AS(make_law(Config::from_string("law = 1, 1\n")), ValidationError);
  CHECK(make_grid(Config::from_string("T = 1\nh = 0.25\n")).size() == 5);
  CHECK(make_grid(Config::from_string("grid = geometric\nT = 100\n")).scheme() == GridScheme::geometric_after_warmup);
  CHECK_THROWS_AS(make_grid(Config::from_string("grid = log\n")), ValidationError);

  const auto pts = Config::from_string("x = 0,0; 1,2\n").points("x", 2, {});
  REQUIRE(pts.size() == 2);
  CHECK(pts[1] == LatticePoint{1, 2});
  CHECK_THROWS_AS(Config::from_string("x = 1\n").points("x", 2, {}), ValidationError);

  const auto cfg = Config::from_string("seed = 9\ncap = 500\ncheckpoints = 0, 2, 4\nx0 = 3\n");
  const auto sim = make_sim_config(cfg, std::make_shared<const WalkKernel>(build_nearest_neighbor_kernel(1)));
  CHECK(sim.seed == 9);
  CHECK(sim.population_cap == 500);
  CHECK(sim.checkpoints == std::vector<double>{0.0, 2.0, 4.0});
  CHECK(sim.x0 == LatticePoint{3});
}

TEST_CASE("CSV preamble") {
  const auto cfg = Config::from_string("alpha = 1\n");
  std::ostringstream os;
  write_csv_preamble(os, cfg, {"t", "Q"});
  CHECK(os.str() == "# config_hash=" + cfg.hash_hex() + " alpha=1\nt,Q\n");
}
