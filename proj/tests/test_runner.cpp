#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "hwb/checkpoint.hpp"
#include "hwb/config.hpp"
#include "hwb/error.hpp"
#include "hwb/runner.hpp"
#include "support.hpp"

using namespace hwb;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({"K": 1, "omega": 1.0, "centers": [0.0], "thetas": [0.0], "t_start": -0.4, "t_stop": -0.1})";

std::string with(const std::string& extra) {
  std::string s = kMinimal;
  s.pop_back();
  return s + ", " + extra + "}";
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("hwb_test_runner_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Short backward run on a modest grid: omega = 2 keeps the bubble at 25+ cells.
RunConfig small_run(const fs::path& out) {
  auto c = parse_config_json(R"({"K": 1, "omega": 2.0, "centers": [0.0], "thetas": [0.0],
      "t_start": -0.2, "t_stop": -0.26, "grid": {"n_points": 16384, "length": 25.6},
      "observations": 9, "checkpoint_every": 4})");
  c.output_dir = out.string();
  return c;
}

std::string message_of(const std::string& json) {
  try {
    parse_config_json(json);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config defaults") {
  auto c = parse_config_json(kMinimal);
  CHECK(c.n_points == 4096);
  CHECK(c.length == 200.0);
  CHECK(c.delta == 0.1);
  CHECK(c.varsigma == 0.2);
  CHECK(c.A_virial == 50.0);
  CHECK(c.nonlinearity == "focusing");
  CHECK_FALSE(c.backward());
  CHECK(parse_config_json(R"({"K": 1, "omega": 1.0, "centers": [0.0], "thetas": [0.0], "t_start": -0.1, "t_stop": -0.4})")
            .backward());
}

TEST_CASE("config rejections name the field") {
  CHECK(message_of(with(R"("colour": 3)")).find("'colour'") != std::string::npos);
  CHECK(message_of(with(R"("grid": {"n_points": 4096, "spacing": 1})")).find("'grid.spacing'") != std::string::npos);
  CHECK(message_of(with(R"("delta": 0.4, "varsigma": 0.35)")).find("delta") != std::string::npos);
  CHECK(message_of(with(R"("grid": {"n_points": 1000})")).find("grid.n_points") != std::string::npos);
  CHECK(message_of(R"({"K": 1, "omega": 1.0, "centers": [0.0], "thetas": [0.0], "t_start": -0.4})")
            .find("t_stop") != std::string::npos);
  CHECK(message_of(R"({"K": 2, "omega": 1.0, "centers": [5.0, -5.0], "thetas": [0, 0], "t_start": -0.4, "t_stop": -0.1})")
            .find("centers") != std::string::npos);
  CHECK(message_of(R"({"K": 2, "omega": 1.0, "centers": [0.0, 0.001], "thetas": [0, 0], "t_start": -0.4, "t_stop": -0.1, "ball_radius": 0.0001})")
            .find("centers") != std::string::npos);
  CHECK(message_of(R"({"K": 2, "omega": 1.0, "centers": [0.0], "thetas": [0, 0], "t_start": -0.4, "t_stop": -0.1})")
            .find("centers") != std::string::npos);
  CHECK(message_of(with(R"("omega": -1)")).find("omega") != std::string::npos);
  CHECK_THROWS_AS(parse_config_json(R"({"K": 1, "omega": 1.0, "centers": [0.0], "thetas": [0.0], "t_start": 0.1, "t_stop": 0.2})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config_json("{not json"), ValidationError);
  CHECK_THROWS_AS(parse_config_json(with(R"("nonlinearity": "cubic")")), ValidationError);
  CHECK_THROWS_AS(parse_config(fs::path("/nonexistent/config.json")), ValidationError);
}

TEST_CASE("config echo and hash") {
  auto c = parse_config_json(kMinimal);
  auto back = parse_config_json(config_echo(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 64);
  auto moved = c;
  moved.output_dir = "/somewhere/else";
  CHECK(config_hash(moved) == config_hash(c));
  auto other = c;
  other.omega = 1.5;
  CHECK(config_hash(other) != config_hash(c));
}

TEST_CASE("checkpoint format") {
  Grid1D g(64, 12.5);
  std::mt19937_64 rng(2);
  SimulationState s{-0.3125, testing::random_band_limited(g, rng, 20)};
  auto dir = scratch("ckpt");
  auto path = dir / "a.bin";
  checkpoint_save(s, path);
  CHECK_FALSE(fs::exists(dir / "a.bin.tmp"));

  const std::string bytes = slurp(path);
  REQUIRE(bytes.size() == 16 + 4 + 8 + 8 + 64 * 16);
  CHECK(std::memcmp(bytes.data(), kCheckpointMagic.data(), 16) == 0);
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[16 + i])) << (8 * i);
  CHECK(n == 64);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[20 + i])) << (8 * i);
  CHECK(std::bit_cast<double>(bits) == 12.5);

  auto back = checkpoint_load(path, g);
  CHECK(back.t == s.t);
  for (std::size_t j = 0; j < g.size(); ++j) CHECK(back.u[j] == s.u[j]);
  CHECK(checkpoint_load(path).u.grid() == g);

  CHECK_THROWS_AS(checkpoint_load(path, Grid1D(128, 12.5)), ValidationError);
  CHECK_THROWS_AS(checkpoint_load(path, Grid1D(64, 25.0)), ValidationError);

  std::ofstream(dir / "short.bin", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  CHECK_THROWS_AS(checkpoint_load(dir / "short.bin"), ValidationError);
  std::ofstream(dir / "head.bin", std::ios::binary) << bytes.substr(0, 10);
  CHECK_THROWS_AS(checkpoint_load(dir / "head.bin"), ValidationError);
  std::string wrong = bytes;
  wrong[15] = 2;
  std::ofstream(dir / "magic.bin", std::ios::binary) << wrong;
  CHECK_THROWS_AS(checkpoint_load(dir / "magic.bin"), ValidationError);
  CHECK_THROWS_AS(checkpoint_load(dir / "missing.bin"), ValidationError);
  fs::remove_all(dir);
}

TEST_CASE("trajectory columns") {
  auto h = trajectory_header(2);
  const std::string lead =
      "t,lambda_1,b_1,v_1,alpha_1,gamma_1,lambda_2,b_2,v_2,alpha_2,gamma_2,R_l2,R_h12,X,I,E_part,L_part,Mod,mass,"
      "energy,momentum,ball_mass_1,ball_mass_2,corridor_";
  CHECK(h.rfind(lead, 0) == 0);
}

TEST_CASE("small run is deterministic and round-trips") {
  auto a_dir = scratch("run_a"), b_dir = scratch("run_b");
  auto ca = small_run(a_dir), cb = small_run(b_dir);
  auto ra = run_experiment(ca);
  auto rb = run_experiment(cb);
  CHECK(ra.termination == "reached_t_stop");
  CHECK(ra.hash == rb.hash);
  REQUIRE(ra.rows.size() == 9);
  CHECK(ra.rows.front().t == -0.2);
  CHECK(ra.rows.back().t == -0.26);
  for (const char* f : {"trajectory.csv", "summary.json", "checkpoints/final.bin"}) {
    INFO(f);
    CHECK(fs::exists(ra.dir / f));
    CHECK(slurp(ra.dir / f) == slurp(rb.dir / f));
  }
  CHECK(fs::exists(ra.dir / "timing.json"));
  CHECK(fs::exists(ra.dir / "checkpoints"));

  // Parameters follow the closed form at this scale.
  CHECK(ra.lambda_rel_err_max <= 0.05);
  CHECK(ra.mass_drift <= 1e-8);

  auto rows = read_trajectory(ra.dir / "trajectory.csv", 1);
  REQUIRE(rows.size() == ra.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].t == ra.rows[i].t);
    CHECK(rows[i].params[0].lambda == ra.rows[i].params[0].lambda);
    CHECK(rows[i].mod == ra.rows[i].mod);
  }

  // The final checkpoint restarts the run at its end time on the same grid only.
  auto fin = checkpoint_load(ra.dir / "checkpoints" / "final.bin", Grid1D(ca.n_points, ca.length));
  CHECK(fin.t == -0.26);
  CHECK_THROWS_AS(checkpoint_load(ra.dir / "checkpoints" / "final.bin", Grid1D(8192, ca.length)), ValidationError);
  fs::remove_all(a_dir);
  fs::remove_all(b_dir);
}

TEST_CASE("run rejects an unresolvable window") {
  auto dir = scratch("unresolved");
  auto c = small_run(dir);
  c.t_start = -0.02;
  CHECK_THROWS_AS(run_experiment(c), ValidationError);
  fs::remove_all(dir);
}
