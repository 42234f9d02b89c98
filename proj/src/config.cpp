#include "flatcam/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "flatcam/errors.hpp"

namespace flatcam {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  text = trim(text);
  T value{};
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars does not accept a leading '+'.
    if (!text.empty() && text.front() == '+') ++begin;
  }
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (text.empty() || ec != std::errc{} || ptr != end)
    throw ValidationError(std::string(key) + ": cannot parse '" + std::string(text) + "'");
  return value;
}

bool parse_flag(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "0") return false;
  if (text == "1") return true;
  throw ValidationError(std::string(key) + ": expected 0 or 1, got '" + std::string(text) + "'");
}

template <typename T>
std::vector<T> parse_list(std::string_view key, std::string_view text) {
  std::vector<T> out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_number<T>(key, text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
std::string format_number(T value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

template <typename T>
std::string format_list(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_number(values[i]);
  }
  return out;
}

struct Field {
  std::string_view key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

#define FC_NUMBER(KEY, MEMBER, TYPE)                                                           \
  Field {                                                                                      \
    KEY, [](ExperimentConfig& c, std::string_view v) { c.MEMBER = parse_number<TYPE>(KEY, v); }, \
        [](const ExperimentConfig& c) -> std::optional<std::string> { return format_number<TYPE>(c.MEMBER); } \
  }
#define FC_OPTIONAL(KEY, MEMBER, TYPE)                                                         \
  Field {                                                                                      \
    KEY, [](ExperimentConfig& c, std::string_view v) { c.MEMBER = parse_number<TYPE>(KEY, v); }, \
        [](const ExperimentConfig& c) -> std::optional<std::string> {                          \
          if (!c.MEMBER) return std::nullopt;                                                  \
          return format_number<TYPE>(*c.MEMBER);                                               \
        }                                                                                      \
  }
#define FC_FLAG(KEY, MEMBER)                                                                   \
  Field {                                                                                      \
    KEY, [](ExperimentConfig& c, std::string_view v) { c.MEMBER = parse_flag(KEY, v); },       \
        [](const ExperimentConfig& c) -> std::optional<std::string> { return c.MEMBER ? "1" : "0"; } \
  }
#define FC_LIST(KEY, MEMBER, TYPE)                                                             \
  Field {                                                                                      \
    KEY, [](ExperimentConfig& c, std::string_view v) { c.MEMBER = parse_list<TYPE>(KEY, v); }, \
        [](const ExperimentConfig& c) -> std::optional<std::string> { return format_list(c.MEMBER); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      FC_NUMBER("geometry.mask_distance_mm", geometry.mask_distance, double),
      FC_NUMBER("geometry.sensor_pixels", geometry.sensor_pixels, int),
      FC_OPTIONAL("geometry.sensor_pitch_mm", geometry.sensor_pitch, double),
      FC_NUMBER("geometry.theta_min_deg", geometry.theta_min_deg, double),
      FC_NUMBER("geometry.theta_max_deg", geometry.theta_max_deg, double),
      FC_OPTIONAL("mask.features", mask.features, int),
      FC_OPTIONAL("mask.pitch_mm", mask.pitch, double),
      FC_NUMBER("mask.seed", mask.seed, std::uint64_t),
      FC_FLAG("mask.symmetric", mask.symmetric),
      FC_NUMBER("depth.min_mm", depth.min_mm, double),
      FC_NUMBER("depth.max_mm", depth.max_mm, double),
      FC_NUMBER("depth.K", depth.count, int),
      FC_NUMBER("scene.n_pixels", scene.n_pixels, int),
      FC_NUMBER("scene.n_cards", scene.n_cards, int),
      FC_NUMBER("scene.card_min", scene.card_min, double),
      FC_NUMBER("scene.card_max", scene.card_max, double),
      FC_NUMBER("scene.intensity_min", scene.intensity_min, double),
      FC_NUMBER("scene.intensity_max", scene.intensity_max, double),
      FC_NUMBER("scene.seed", scene.seed, std::uint64_t),
      FC_NUMBER("noise.snr_db", noise.snr_db, double),
      FC_NUMBER("noise.seed", noise.seed, std::uint64_t),
      FC_NUMBER("solver.max_outer_iters", solver.max_outer_iters, int),
      FC_NUMBER("solver.residual_rel_tol", solver.residual_rel_tol, double),
      FC_NUMBER("solver.cg_max_iters", solver.cg_max_iters, int),
      FC_NUMBER("solver.cg_tol", solver.cg_tol, double),
      FC_FLAG("solver.nonneg_clamp", solver.nonneg_clamp),
      FC_FLAG("solver.center", solver.center),
      FC_LIST("rig.yaw_deg", rig.yaw_deg, double),
      FC_LIST("rig.x_mm", rig.x_mm, double),
      FC_LIST("rig.z_mm", rig.z_mm, double),
      FC_LIST("sweep.K", sweep.k_values, int),
      FC_LIST("sweep.cameras", sweep.cameras, int),
      FC_NUMBER("sweep.trials", sweep.trials, int),
      FC_NUMBER("sweep.seed", sweep.seed, std::uint64_t),
      FC_NUMBER("sweep.yaw_step_deg", sweep.yaw_step_deg, double),
      Field{"output.dir", [](ExperimentConfig& c, std::string_view v) { c.output_dir = std::string(trim(v)); },
            [](const ExperimentConfig& c) -> std::optional<std::string> { return c.output_dir; }},
  };
  return table;
}

#undef FC_NUMBER
#undef FC_OPTIONAL
#undef FC_FLAG
#undef FC_LIST

double radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

}  // namespace

void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& f : fields())
    if (f.key == key) {
      f.set(cfg, value);
      return;
    }
  throw ValidationError("unknown config key '" + std::string(key) + "'");
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    ++line_no;
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      const auto col = line.find_first_not_of(" \t") + 1;
      throw ValidationError("syntax error at line " + std::to_string(line_no) + ", column " + std::to_string(col) +
                            ": expected 'section.key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty() || key.find('.') == std::string_view::npos)
      throw ValidationError("syntax error at line " + std::to_string(line_no) + ", column 1: expected 'section.key'");
    try {
      set_config_value(cfg, key, line.substr(eq + 1));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ", column " + std::to_string(eq + 2) + ": " +
                            e.what());
    }
  }
  cfg.validate();
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& f : fields())
    if (auto value = f.get(cfg)) out += std::string(f.key) + " = " + *value + "\n";
  return out;
}

PursuitConfig ExperimentConfig::pursuit() const {
  return {solver.max_outer_iters, solver.residual_rel_tol, solver.cg_max_iters, solver.cg_tol, solver.nonneg_clamp,
          solver.center};
}

SceneSpec ExperimentConfig::scene_spec() const {
  return {scene.n_pixels, scene.n_cards, scene.card_min, scene.card_max, scene.intensity_min, scene.intensity_max,
          scene.seed};
}

NoiseSpec ExperimentConfig::noise_spec() const { return {noise.snr_db, noise.seed}; }

std::vector<CameraPose> ExperimentConfig::poses() const {
  std::vector<CameraPose> out;
  for (std::size_t i = 0; i < rig.yaw_deg.size(); ++i)
    out.push_back({radians(rig.yaw_deg[i]), rig.x_mm.empty() ? 0.0 : rig.x_mm[i],
                   rig.z_mm.empty() ? 0.0 : rig.z_mm[i]});
  return out;
}

void ExperimentConfig::validate() const {
  require(geometry.mask_distance > 0.0 && std::isfinite(geometry.mask_distance),
          "geometry.mask_distance_mm must be > 0");
  require(geometry.sensor_pixels >= 1, "geometry.sensor_pixels must be >= 1");
  require(!geometry.sensor_pitch || *geometry.sensor_pitch > 0.0, "geometry.sensor_pitch_mm must be > 0");
  require(-90.0 < geometry.theta_min_deg && geometry.theta_min_deg < geometry.theta_max_deg &&
              geometry.theta_max_deg < 90.0,
          "geometry.theta range must satisfy -90 < theta_min_deg < theta_max_deg < 90");

  require(!mask.features || *mask.features >= 1, "mask.features must be >= 1");
  require(!mask.pitch || *mask.pitch > 0.0, "mask.pitch_mm must be > 0");

  require(depth.count >= 1, "depth.K must satisfy K >= 1");
  require(geometry.mask_distance < depth.min_mm && depth.min_mm < depth.max_mm && std::isfinite(depth.max_mm),
          "depth range must satisfy mask_distance < depth.min_mm < depth.max_mm");

  require(scene.n_pixels >= 2, "scene.n_pixels must be >= 2");
  scene_spec().validate(depth.count);

  require(!std::isnan(noise.snr_db) && noise.snr_db != -std::numeric_limits<double>::infinity(),
          "noise.snr_db must be a number or inf");

  pursuit().validate();

  require(!rig.yaw_deg.empty(), "rig.yaw_deg must list at least one camera");
  require(rig.x_mm.empty() || rig.x_mm.size() == rig.yaw_deg.size(), "rig.x_mm must match rig.yaw_deg in length");
  require(rig.z_mm.empty() || rig.z_mm.size() == rig.yaw_deg.size(), "rig.z_mm must match rig.yaw_deg in length");
  for (double yaw : rig.yaw_deg) require(std::abs(yaw) < 90.0, "rig.yaw_deg entries must satisfy |yaw| < 90");

  for (int k : sweep.k_values) {
    require(k >= 1, "sweep.K entries must be >= 1");
    require(scene.n_cards <= k, "scene.n_cards exceeds a sweep.K entry");
  }
  for (int c : sweep.cameras) {
    require(c >= 1, "sweep.cameras entries must be >= 1");
    require(std::abs(sweep.yaw_step_deg) * (c / 2) < 90.0, "sweep rig yaw would reach 90 degrees");
  }
  require(sweep.trials >= 0, "sweep.trials must be >= 0");
}

double default_mask_pitch(const ExperimentConfig& cfg) {
  // kMaskFeaturesPerAngle features per angular step of the shadow shift d*sin(theta).
  const double span = std::sin(radians(cfg.geometry.theta_max_deg)) - std::sin(radians(cfg.geometry.theta_min_deg));
  return cfg.geometry.mask_distance * span / static_cast<double>(cfg.scene.n_pixels - 1) / kMaskFeaturesPerAngle;
}

double default_sensor_pitch(const ExperimentConfig& cfg) {
  return kDefaultSensorWidthPerD * cfg.geometry.mask_distance / static_cast<double>(cfg.geometry.sensor_pixels);
}

int default_mask_features(const ExperimentConfig& cfg, double mask_pitch, double sensor_pitch) {
  // Wide enough that every sensor pixel looks through the mask for any angle.
  const double width = sensor_pitch * cfg.geometry.sensor_pixels + 2.0 * cfg.geometry.mask_distance;
  return static_cast<int>(std::ceil(width / mask_pitch));
}

ExperimentConfig resolve_defaults(const ExperimentConfig& cfg) {
  ExperimentConfig out = cfg;
  if (!out.geometry.sensor_pitch) out.geometry.sensor_pitch = default_sensor_pitch(out);
  if (!out.mask.pitch) out.mask.pitch = default_mask_pitch(out);
  if (!out.mask.features) out.mask.features = default_mask_features(out, *out.mask.pitch, *out.geometry.sensor_pitch);
  return out;
}

std::vector<RigCamera> Experiment::rig() const {
  std::vector<RigCamera> out;
  for (const auto& pose : poses) out.push_back({camera, pose});
  return out;
}

Experiment make_experiment(const ExperimentConfig& input) {
  input.validate();
  const ExperimentConfig cfg = resolve_defaults(input);
  Experiment e;
  e.camera = {cfg.geometry.sensor_pixels, *cfg.geometry.sensor_pitch, cfg.geometry.mask_distance};
  e.grid = {cfg.scene.n_pixels, radians(cfg.geometry.theta_min_deg), radians(cfg.geometry.theta_max_deg)};
  e.mask = generate_mask(*cfg.mask.features, *cfg.mask.pitch, cfg.mask.seed, cfg.mask.symmetric);
  e.depths = sample_depth_planes(cfg.geometry.mask_distance, cfg.depth.min_mm, cfg.depth.max_mm, cfg.depth.count);
  e.poses = cfg.poses();
  return e;
}

std::vector<CameraPose> convex_rig(int n_cameras, double yaw_step_deg) {
  std::vector<CameraPose> poses;
  for (int i = 0; i < n_cameras; ++i) {
    const int ring = (i + 1) / 2;
    const double sign = (i % 2 == 1) ? 1.0 : -1.0;
    poses.push_back({i == 0 ? 0.0 : sign * ring * radians(yaw_step_deg), 0.0, 0.0});
  }
  return poses;
}

}  // namespace flatcam
