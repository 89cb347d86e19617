#include "hwb/config.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "hwb/bubbles.hpp"
#include "hwb/diagnostics.hpp"
#include "hwb/error.hpp"
#include "json.hpp"

namespace hwb {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ValidationError("config field '" + field + "': " + what);
}

double as_real(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(field, "must be finite");
  return v;
}

long long as_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  return j.get<long long>();
}

std::vector<double> as_reals(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_real(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

using Setter = std::function<void(const json&, const std::string&)>;

void apply(const json& obj, const std::string& where, const std::map<std::string, Setter>& fields) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    const std::string name = where.empty() ? key : where + "." + key;
    auto it = fields.find(key);
    if (it == fields.end()) fail(name, "unknown key");
    it->second(value, name);
  }
}

json tolerances_json(const Tolerances& t) {
  return {{"ground_state", t.ground_state}, {"chain", t.chain}, {"newton", t.newton},
          {"lambda_rel", t.lambda_rel}, {"alpha_abs", t.alpha_abs}, {"slope_min", t.slope_min},
          {"v_ratio_slope_min", t.v_ratio_slope_min}, {"ball_mass_rel", t.ball_mass_rel},
          {"mass_drift", t.mass_drift}, {"energy_drift", t.energy_drift},
          {"monotonicity_fraction", t.monotonicity_fraction}, {"corridor_fraction", t.corridor_fraction}};
}

json to_json(const RunConfig& c) {
  return {{"K", c.K},
          {"omega", c.omega},
          {"centers", c.centers},
          {"thetas", c.thetas},
          {"t_start", c.t_start},
          {"t_stop", c.t_stop},
          {"grid", {{"n_points", c.n_points}, {"length", c.length}}},
          {"dt_factor", c.dt_factor},
          {"dt_max", c.dt_max},
          {"observer_stride", c.observer_stride},
          {"observations", c.observations},
          {"checkpoint_every", c.checkpoint_every},
          {"trust_trim", c.trust_trim},
          {"A_virial", c.A_virial},
          {"delta", c.delta},
          {"varsigma", c.varsigma},
          {"ball_radius", c.ball_radius},
          {"min_points_per_scale", c.min_points_per_scale},
          {"reference", {{"points", c.reference_points}, {"scale", c.reference_scale}}},
          {"monotonicity", {{"c_mono", c.mono_c}, {"c_env", c.mono_env}}},
          {"nonlinearity", c.nonlinearity},
          {"tolerances", tolerances_json(c.tolerances)},
          {"output_dir", c.output_dir},
          {"seed", c.seed}};
}

}  // namespace

RunConfig parse_config_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  auto& t = c.tolerances;
  auto real = [](double& dst) { return Setter([&dst](const json& j, const std::string& n) { dst = as_real(j, n); }); };
  auto integer = [](auto& dst) {
    return Setter([&dst](const json& j, const std::string& n) {
      dst = static_cast<std::remove_reference_t<decltype(dst)>>(as_int(j, n));
    });
  };
  bool has_k = false, has_omega = false, has_centers = false, has_thetas = false, has_start = false,
       has_stop = false;
  auto mark = [](bool& flag, Setter s) {
    return Setter([&flag, s](const json& j, const std::string& n) {
      flag = true;
      s(j, n);
    });
  };

  std::map<std::string, Setter> fields = {
      {"K", mark(has_k, [&](const json& j, const std::string& n) {
         const auto k = as_int(j, n);
         if (k < 1) fail(n, "must be at least 1");
         c.K = static_cast<int>(k);
       })},
      {"omega", mark(has_omega, real(c.omega))},
      {"centers", mark(has_centers, [&](const json& j, const std::string& n) { c.centers = as_reals(j, n); })},
      {"thetas", mark(has_thetas, [&](const json& j, const std::string& n) { c.thetas = as_reals(j, n); })},
      {"t_start", mark(has_start, real(c.t_start))},
      {"t_stop", mark(has_stop, real(c.t_stop))},
      {"grid", [&](const json& j, const std::string& n) {
         apply(j, n, {{"n_points", [&](const json& v, const std::string& m) {
                         const auto np = as_int(v, m);
                         if (np < 1) fail(m, "must be positive");
                         c.n_points = static_cast<std::size_t>(np);
                       }},
                      {"length", real(c.length)}});
       }},
      {"dt_factor", real(c.dt_factor)},
      {"dt_max", real(c.dt_max)},
      {"observer_stride", integer(c.observer_stride)},
      {"observations", integer(c.observations)},
      {"checkpoint_every", integer(c.checkpoint_every)},
      {"trust_trim", integer(c.trust_trim)},
      {"A_virial", real(c.A_virial)},
      {"delta", real(c.delta)},
      {"varsigma", real(c.varsigma)},
      {"ball_radius", real(c.ball_radius)},
      {"min_points_per_scale", real(c.min_points_per_scale)},
      {"reference", [&](const json& j, const std::string& n) {
         apply(j, n, {{"points", [&](const json& v, const std::string& m) {
                         const auto np = as_int(v, m);
                         if (np < 1) fail(m, "must be positive");
                         c.reference_points = static_cast<std::size_t>(np);
                       }},
                      {"scale", real(c.reference_scale)}});
       }},
      {"monotonicity", [&](const json& j, const std::string& n) {
         apply(j, n, {{"c_mono", real(c.mono_c)}, {"c_env", real(c.mono_env)}});
       }},
      {"nonlinearity", [&](const json& j, const std::string& n) {
         if (!j.is_string()) fail(n, "expected a string");
         c.nonlinearity = j.get<std::string>();
       }},
      {"tolerances", [&](const json& j, const std::string& n) {
         apply(j, n, {{"ground_state", real(t.ground_state)}, {"chain", real(t.chain)},
                      {"newton", real(t.newton)}, {"lambda_rel", real(t.lambda_rel)},
                      {"alpha_abs", real(t.alpha_abs)}, {"slope_min", real(t.slope_min)},
                      {"v_ratio_slope_min", real(t.v_ratio_slope_min)},
                      {"ball_mass_rel", real(t.ball_mass_rel)}, {"mass_drift", real(t.mass_drift)},
                      {"energy_drift", real(t.energy_drift)},
                      {"monotonicity_fraction", real(t.monotonicity_fraction)},
                      {"corridor_fraction", real(t.corridor_fraction)}});
       }},
      {"output_dir", [&](const json& j, const std::string& n) {
         if (!j.is_string()) fail(n, "expected a string");
         c.output_dir = j.get<std::string>();
       }},
      {"seed", [&](const json& j, const std::string& n) {
         if (!j.is_number_unsigned()) fail(n, "expected a non-negative integer");
         c.seed = j.get<std::uint64_t>();
       }},
  };
  apply(root, "", fields);
  if (!has_k) fail("K", "required");
  if (!has_omega) fail("omega", "required");
  if (!has_centers) fail("centers", "required");
  if (!has_thetas) fail("thetas", "required");
  if (!has_start) fail("t_start", "required");
  if (!has_stop) fail("t_stop", "required");
  validate(c);
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_json(ss.str());
}

void validate(const RunConfig& c) {
  if (c.K < 1) fail("K", "must be at least 1");
  if (!(c.omega > 0.0)) fail("omega", "must be positive");
  if (c.centers.size() != static_cast<std::size_t>(c.K)) fail("centers", "needs exactly K entries");
  if (c.thetas.size() != static_cast<std::size_t>(c.K)) fail("thetas", "needs exactly K entries");
  for (std::size_t k = 1; k < c.centers.size(); ++k) {
    if (!(c.centers[k] > c.centers[k - 1])) fail("centers", "must be strictly increasing");
  }
  if (!(c.t_start < 0.0)) fail("t_start", "must be negative");
  if (!(c.t_stop < 0.0)) fail("t_stop", "must be negative");
  if (c.t_start == c.t_stop) fail("t_stop", "must differ from t_start");
  if (c.n_points < 16 || (c.n_points & (c.n_points - 1)) != 0) fail("grid.n_points", "must be a power of two >= 16");
  if (!(c.length > 0.0)) fail("grid.length", "must be positive");
  for (double x : c.centers) {
    if (std::abs(x) > 0.4 * c.length) fail("centers", "must stay out of the outer 10% of the domain");
  }
  if (!(c.dt_factor > 0.0 && c.dt_factor <= 1.0)) fail("dt_factor", "must lie in (0, 1]");
  if (!(c.dt_max > 0.0)) fail("dt_max", "must be positive");
  if (c.observer_stride < 1) fail("observer_stride", "must be positive");
  if (c.observations < 5) fail("observations", "must be at least 5");
  if (c.checkpoint_every < 0) fail("checkpoint_every", "must be non-negative");
  if (c.trust_trim < 0 || 2 * c.trust_trim + 5 > c.observations) fail("trust_trim", "leaves fewer than 5 samples");
  if (!(c.A_virial > 0.0)) fail("A_virial", "must be positive");
  try {
    validate_corridor_exponents(c.delta, c.varsigma);
  } catch (const ValidationError& e) {
    fail("delta/varsigma", e.what());
  }
  if (!(c.ball_radius > 0.0)) fail("ball_radius", "must be positive");
  for (std::size_t k = 1; k < c.centers.size(); ++k) {
    if (!(c.centers[k] - c.centers[k - 1] > 2.0 * c.ball_radius)) fail("ball_radius", "balls would overlap");
  }
  if (!(c.min_points_per_scale >= 1.0)) fail("min_points_per_scale", "must be at least 1");
  if (c.reference_points < 64 || (c.reference_points & (c.reference_points - 1)) != 0) {
    fail("reference.points", "must be a power of two >= 64");
  }
  if (!(c.reference_scale > 0.0)) fail("reference.scale", "must be positive");
  if (!(c.mono_c >= 0.0)) fail("monotonicity.c_mono", "must be non-negative");
  if (!(c.mono_env >= 0.0)) fail("monotonicity.c_env", "must be non-negative");
  if (c.nonlinearity != "focusing" && c.nonlinearity != "defocusing" && c.nonlinearity != "linear") {
    fail("nonlinearity", "must be focusing, defocusing or linear");
  }
  if (!(c.tolerances.ground_state > 0.0 && c.tolerances.ground_state <= 1e-4)) {
    fail("tolerances.ground_state", "must lie in (0, 1e-4]");
  }
  // The partition of unity needs its transition layer to span a few cells.
  try {
    localization_set(Grid1D(c.n_points, c.length), c.centers);
  } catch (const ValidationError&) {
    fail("centers", "too close together for the grid (localization scale sigma below the spacing)");
  }
}

std::string config_echo(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

std::string config_hash(const RunConfig& c) {
  json j = to_json(c);
  j.erase("output_dir");
  const std::string text = j.dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("config hash: SHA-256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

}  // namespace hwb
