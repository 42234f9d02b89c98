#include <doctest.h>

#include <string>

#include "flatcam/config.hpp"
#include "flatcam/errors.hpp"

using namespace flatcam;

TEST_CASE("empty config gives the defaults") {
  const ExperimentConfig cfg = parse_config("");
  CHECK(cfg == ExperimentConfig{});
  CHECK(cfg.geometry.mask_distance == 1.0);
  CHECK(cfg.geometry.sensor_pixels == 256);
  CHECK(cfg.scene.n_pixels == 128);
  CHECK(cfg.depth.count == 10);
  CHECK(cfg.depth.min_mm == 100.0);
  CHECK(cfg.depth.max_mm == 3000.0);
  CHECK(parse_config("# only a comment\n\n   \n") == cfg);
}

TEST_CASE("zero depth planes is a validation error") {
  try {
    parse_config("depth.K = 0\n");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("K >= 1") != std::string::npos);
  }
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parse_config("depth.K = 5\nscene.n_pixels 12\n");
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("nope.key = 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("depth.K = 1.5\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("mask.symmetric = 2\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("depth.min_mm = 4000\n"), ValidationError);
}

TEST_CASE("serialize and parse round trip") {
  const std::string text =
      "geometry.sensor_pixels = 64\n"
      "geometry.sensor_pitch_mm = 0.05\n"
      "mask.features = 300\n"
      "mask.symmetric = 1\n"
      "depth.K = 4  # trailing comment\n"
      "noise.snr_db = inf\n"
      "solver.center = 0\n"
      "rig.yaw_deg = 0, 15, -15\n"
      "sweep.K = 4,5\n"
      "output.dir = /tmp/out\n";
  const ExperimentConfig cfg = parse_config(text);
  CHECK(cfg.geometry.sensor_pitch == 0.05);
  CHECK(cfg.mask.features == 300);
  CHECK(cfg.mask.symmetric);
  CHECK_FALSE(cfg.pursuit().center);
  CHECK(cfg.rig.yaw_deg == std::vector<double>{0.0, 15.0, -15.0});
  CHECK(cfg.output_dir == "/tmp/out");
  CHECK(parse_config(serialize_config(cfg)) == cfg);
  CHECK(parse_config(serialize_config(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("derived geometry") {
  ExperimentConfig cfg;
  const ExperimentConfig resolved = resolve_defaults(cfg);
  REQUIRE(resolved.geometry.sensor_pitch);
  CHECK(*resolved.geometry.sensor_pitch * 256 == doctest::Approx(6.0));
  REQUIRE(resolved.mask.features);
  REQUIRE(resolved.mask.pitch);
  CHECK(*resolved.mask.features * *resolved.mask.pitch >= 6.0);

  const Experiment e = make_experiment(cfg);
  CHECK(e.grid.n_angles == 128);
  CHECK(e.depths.size() == 10);
  CHECK(e.poses.size() == 1);
  CHECK(e.mask.bits.size() == static_cast<std::size_t>(*resolved.mask.features));
}

TEST_CASE("convex rig alternates around the reference camera") {
  const auto rig = convex_rig(3, 20.0);
  REQUIRE(rig.size() == 3);
  CHECK(rig[0].yaw == 0.0);
  CHECK(rig[1].yaw == doctest::Approx(20.0 * 3.14159265358979 / 180.0));
  CHECK(rig[2].yaw == doctest::Approx(-rig[1].yaw));
}

TEST_CASE("set_config_value") {
  ExperimentConfig cfg;
  set_config_value(cfg, "scene.seed", "123");
  CHECK(cfg.scene.seed == 123);
  CHECK_THROWS_AS(set_config_value(cfg, "scene.seed", "-1"), ValidationError);
  CHECK_THROWS_AS(set_config_value(cfg, "scene.bogus", "1"), ValidationError);
}
