#include <doctest.h>

#include <cmath>

#include "floq/config.hpp"
#include "floq/errors.hpp"

using floq::parse_config_text;
using floq::RunConfig;

TEST_CASE("minimal config gets defaults") {
  const RunConfig cfg = parse_config_text(R"({"potential":[0]})");
  CHECK(cfg.potential.size() == 1);
  CHECK(cfg.effective_k_grid() == 1024);
  CHECK(cfg.boundary == floq::Boundary::ring);
  CHECK(cfg.sigma == 6.0);
  CHECK(cfg.nonlinearity_sign == +1);
  CHECK(cfg.times.count == 50);
  CHECK_FALSE(cfg.digest.empty());
}

TEST_CASE("defective configs are rejected with the field path") {
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"potential":[]})"),
                       doctest::Contains("potential"), floq::Error);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({})"), doctest::Contains("potential"), floq::Error);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"potential":[1],"bogus":3})"),
                       doctest::Contains("bogus"), floq::Error);
  CHECK_THROWS_WITH_AS(
      parse_config_text(R"({"potential":[1],"times":{"start":0,"stop":1,"count":1}})"),
      doctest::Contains("count"), floq::Error);
  CHECK_THROWS_WITH_AS(
      parse_config_text(R"({"potential":[1],"times":{"spacing":"cubic"}})"),
      doctest::Contains("spacing"), floq::Error);
  CHECK_THROWS_WITH_AS(
      parse_config_text(R"({"potential":[1],"times":{"start":0,"stop":9,"spacing":"log"}})"),
      doctest::Contains("start"), floq::Error);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"potential":[1,2,3],"k_grid":12})"),
                       doctest::Contains("k_grid"), floq::Error);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"potential":[1],"boundary":"moebius"})"),
                       doctest::Contains("boundary"), floq::Error);
  CHECK_THROWS_AS(parse_config_text("not json at all"), floq::Error);

  try {
    parse_config_text(R"({"potential":[]})");
  } catch (const floq::Error& e) {
    CHECK(e.code() == floq::errc::config_error);
  }
}

TEST_CASE("log-spaced times from the documented example") {
  const RunConfig cfg = parse_config_text(
      R"({"potential":[1,0],"times":{"start":0.1,"stop":100,"count":50,"spacing":"log"}})");
  CHECK(cfg.potential.size() == 2);
  const auto t = cfg.times.materialize();
  REQUIRE(t.size() == 50);
  CHECK(t.front() == doctest::Approx(0.1));
  CHECK(t.back() == doctest::Approx(100.0));
  // Geometric progression: constant ratio.
  const double r0 = t[1] / t[0], r1 = t[25] / t[24];
  CHECK(r0 == doctest::Approx(r1).epsilon(1e-12));
}

TEST_CASE("linear time grids hit both endpoints") {
  const RunConfig cfg = parse_config_text(
      R"({"potential":[0],"times":{"start":0,"stop":10,"count":5,"spacing":"linear"}})");
  const auto t = cfg.times.materialize();
  CHECK(t == std::vector<double>{0.0, 2.5, 5.0, 7.5, 10.0});
}

TEST_CASE("initial state construction") {
  const RunConfig d = parse_config_text(
      R"({"potential":[0],"initial":{"type":"delta","site":3,"l1":0.01}})");
  const floq::WavePacket wd = d.make_initial();
  CHECK(wd.l1() == doctest::Approx(0.01));
  CHECK(std::abs(wd.at(3)) == doctest::Approx(0.01));

  const RunConfig g = parse_config_text(
      R"({"potential":[0],"initial":{"type":"gaussian","site":0,"width":4,"l1":2.0}})");
  const floq::WavePacket wg = g.make_initial();
  CHECK(wg.l1() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(wg.at(0)) > std::abs(wg.at(5)));

  CHECK_THROWS_WITH_AS(
      parse_config_text(R"({"potential":[0],"initial":{"type":"file"}})"),
      doctest::Contains("path"), floq::Error);
}

TEST_CASE("tolerances map and seed round-trip") {
  const RunConfig cfg = parse_config_text(
      R"({"potential":[1,0],"tolerances":{"dnls_dt":0.01},"seed":99,"output_dir":"/tmp/x"})");
  CHECK(cfg.tolerances.at("dnls_dt") == 0.01);
  CHECK(cfg.seed == 99);
  CHECK(cfg.output_dir == "/tmp/x");
}
