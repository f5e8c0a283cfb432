#include "tnt/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>

namespace tnt {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  fail(ErrorKind::kConfig, "key '" + std::string(key) + "': expected " + expected + ", got '" +
                               std::string(value) + "'");
}

double parse_real(std::string_view key, std::string_view v) {
  double x = 0.0;
  const char* b = v.data();
  if (!v.empty() && v.front() == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, v.data() + v.size(), x);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x)) {
    bad_value(key, v, "a number");
  }
  return x;
}

long long parse_integer(std::string_view key, std::string_view v) {
  long long x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return x;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "true or false");
}

std::vector<OcclusionEvent> parse_occlusions(std::string_view key, std::string_view v) {
  // "target:start:end" items separated by ';' or ','.
  std::vector<OcclusionEvent> out;
  std::size_t start = 0;
  while (start < v.size()) {
    auto end = v.find_first_of(";,", start);
    if (end == std::string_view::npos) end = v.size();
    const std::string_view item = trim(v.substr(start, end - start));
    start = end + 1;
    if (item.empty()) continue;
    const auto c1 = item.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : item.find(':', c1 + 1);
    if (c2 == std::string_view::npos) bad_value(key, item, "target:start:end");
    OcclusionEvent e;
    e.target = static_cast<int>(parse_integer(key, trim(item.substr(0, c1))));
    e.start = static_cast<int>(parse_integer(key, trim(item.substr(c1 + 1, c2 - c1 - 1))));
    e.end = static_cast<int>(parse_integer(key, trim(item.substr(c2 + 1))));
    out.push_back(e);
  }
  return out;
}

std::string format_occlusions(const std::vector<OcclusionEvent>& events) {
  std::string out;
  for (const OcclusionEvent& e : events) {
    out += (out.empty() ? "" : ";") + std::to_string(e.target) + ":" + std::to_string(e.start) +
           ":" + std::to_string(e.end);
  }
  return out;
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
using Access = T& (*)(RunConfig&);

Field real(std::string key, Access<double> at) {
  return {key, [at, key](RunConfig& c, std::string_view v) { at(c) = parse_real(key, v); },
          [at](const RunConfig& c) { return format_real(at(const_cast<RunConfig&>(c))); }};
}

Field integer(std::string key, Access<int> at) {
  return {key,
          [at, key](RunConfig& c, std::string_view v) {
            const long long x = parse_integer(key, v);
            if (x < -2147483647LL || x > 2147483647LL) bad_value(key, v, "a 32-bit integer");
            at(c) = static_cast<int>(x);
          },
          [at](const RunConfig& c) { return std::to_string(at(const_cast<RunConfig&>(c))); }};
}

Field boolean(std::string key, Access<bool> at) {
  return {key, [at, key](RunConfig& c, std::string_view v) { at(c) = parse_bool(key, v); },
          [at](const RunConfig& c) {
            return std::string(at(const_cast<RunConfig&>(c)) ? "true" : "false");
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"seed",
                 [](RunConfig& c, std::string_view v) {
                   const long long x = parse_integer("seed", v);
                   if (x < 0) bad_value("seed", v, "a non-negative integer");
                   c.seed = static_cast<std::uint64_t>(x);
                 },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});

    f.push_back(integer("scene.n_targets", [](RunConfig& c) -> int& { return c.scene.n_targets; }));
    f.push_back(integer("scene.n_frames", [](RunConfig& c) -> int& { return c.scene.n_frames; }));
    f.push_back(integer("scene.width", [](RunConfig& c) -> int& { return c.scene.frame.width; }));
    f.push_back(integer("scene.height", [](RunConfig& c) -> int& { return c.scene.frame.height; }));
    f.push_back(real("scene.fps", [](RunConfig& c) -> double& { return c.scene.frame.fps; }));
    f.push_back(real("scene.target_speed_px", [](RunConfig& c) -> double& { return c.scene.target_speed_px; }));
    f.push_back(real("scene.detection_drop_prob", [](RunConfig& c) -> double& { return c.scene.detection_drop_prob; }));
    f.push_back(real("scene.false_positive_rate", [](RunConfig& c) -> double& { return c.scene.false_positive_rate; }));
    f.push_back(real("scene.box_jitter_sigma", [](RunConfig& c) -> double& { return c.scene.box_jitter_sigma; }));
    f.push_back(integer("scene.feature_dim", [](RunConfig& c) -> int& { return c.scene.feature_dim; }));
    f.push_back(real("scene.feature_noise_sigma", [](RunConfig& c) -> double& { return c.scene.feature_noise_sigma; }));
    f.push_back({"scene.camera_mode",
                 [](RunConfig& c, std::string_view v) { c.scene.camera_mode = camera_mode_from_string(v); },
                 [](const RunConfig& c) { return std::string(to_string(c.scene.camera_mode)); }});
    f.push_back(integer("scene.n_background_points", [](RunConfig& c) -> int& { return c.scene.n_background_points; }));
    f.push_back({"scene.occlusion_events",
                 [](RunConfig& c, std::string_view v) {
                   c.scene.occlusion_events = parse_occlusions("scene.occlusion_events", v);
                 },
                 [](const RunConfig& c) { return format_occlusions(c.scene.occlusion_events); }});
    f.push_back(real("scene.camera_step", [](RunConfig& c) -> double& { return c.scene.camera_step; }));
    f.push_back(real("scene.camera_pan_amplitude", [](RunConfig& c) -> double& { return c.scene.camera_pan_amplitude; }));
    f.push_back(real("scene.camera_pan_period", [](RunConfig& c) -> double& { return c.scene.camera_pan_period; }));
    f.push_back(real("scene.orbit_step", [](RunConfig& c) -> double& { return c.scene.orbit_step; }));

    f.push_back(real("assoc.theta_assoc", [](RunConfig& c) -> double& { return c.assoc.theta_assoc; }));
    f.push_back(real("assoc.lambda_iou", [](RunConfig& c) -> double& { return c.assoc.lambda_iou; }));
    f.push_back(real("assoc.theta_app", [](RunConfig& c) -> double& { return c.assoc.theta_app; }));
    f.push_back(boolean("assoc.use_eg", [](RunConfig& c) -> bool& { return c.assoc.use_eg; }));
    f.push_back(real("assoc.reg_weight", [](RunConfig& c) -> double& { return c.assoc.reg_weight; }));

    f.push_back(integer("ransac.max_iterations", [](RunConfig& c) -> int& { return c.ransac.max_iterations; }));
    f.push_back(real("ransac.inlier_threshold", [](RunConfig& c) -> double& { return c.ransac.inlier_threshold; }));
    f.push_back(real("ransac.min_inlier_fraction", [](RunConfig& c) -> double& { return c.ransac.min_inlier_fraction; }));

    f.push_back(integer("net.T", [](RunConfig& c) -> int& { return c.net.T; }));
    f.push_back(integer("net.d_ap", [](RunConfig& c) -> int& { return c.net.d_ap; }));
    f.push_back(integer("net.channels", [](RunConfig& c) -> int& { return c.net.channels; }));
    f.push_back(integer("net.fc_hidden", [](RunConfig& c) -> int& { return c.net.fc_hidden; }));

    f.push_back(integer("train.batch_size", [](RunConfig& c) -> int& { return c.train.batch_size; }));
    f.push_back(real("train.lr_initial", [](RunConfig& c) -> double& { return c.train.lr_initial; }));
    f.push_back(integer("train.lr_decay_every", [](RunConfig& c) -> int& { return c.train.lr_decay_every; }));
    f.push_back(real("train.lr_decay_factor", [](RunConfig& c) -> double& { return c.train.lr_decay_factor; }));
    f.push_back(real("train.lr_floor", [](RunConfig& c) -> double& { return c.train.lr_floor; }));
    f.push_back(real("train.adam_beta1", [](RunConfig& c) -> double& { return c.train.adam_beta1; }));
    f.push_back(real("train.adam_beta2", [](RunConfig& c) -> double& { return c.train.adam_beta2; }));
    f.push_back(real("train.adam_eps", [](RunConfig& c) -> double& { return c.train.adam_eps; }));
    f.push_back(integer("train.steps", [](RunConfig& c) -> int& { return c.train.steps; }));

    f.push_back(real("augment.box_noise_sigma", [](RunConfig& c) -> double& { return c.augment.box_noise_sigma; }));
    f.push_back(real("augment.break_prob", [](RunConfig& c) -> double& { return c.augment.break_prob; }));
    f.push_back(real("augment.feature_noise_sigma",
                     [](RunConfig& c) -> double& { return c.augment.feature_noise_sigma; }));

    f.push_back(real("eval.iou_match_threshold", [](RunConfig& c) -> double& { return c.eval.iou_match_threshold; }));

    f.push_back({"graph.delta_t",
                 [](RunConfig& c, std::string_view v) {
                   const long long x = parse_integer("graph.delta_t", v);
                   if (x < 0 || x > 1000000) bad_value("graph.delta_t", v, "an integer >= 0");
                   c.delta_t = static_cast<int>(x);
                 },
                 [](const RunConfig& c) { return std::to_string(c.graph_delta_t()); }});
    f.push_back({"track.scorer",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "net") {
                     c.scorer = ScorerKind::kNetwork;
                   } else if (v == "bhattacharyya") {
                     c.scorer = ScorerKind::kBhattacharyya;
                   } else {
                     bad_value("track.scorer", v, "net or bhattacharyya");
                   }
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.scorer)); }});
    return f;
  }();
  return table;
}

const Field* find_field(std::string_view key) {
  for (const Field& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

}  // namespace

std::string_view to_string(ScorerKind kind) {
  return kind == ScorerKind::kNetwork ? "net" : "bhattacharyya";
}

void RunConfig::propagate_seed() {
  scene.seed = seed;
  ransac.seed = seed;
  net.seed = seed;
  train.seed = seed;
  augment.seed = seed;
}

void RunConfig::validate() const {
  scene.validate();
  assoc.validate();
  ransac.validate();
  net.validate();
  train.validate();
  augment.validate();
  eval.validate();
  if (graph_delta_t() < 0) fail(ErrorKind::kConfig, "graph.delta_t must be >= 0");
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.get(*this) + "\n";
  return out;
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  const Field* f = find_field(key);
  if (!f) fail(ErrorKind::kConfig, "unknown config key '" + std::string(key) + "'");
  f->set(cfg, value);
  cfg.propagate_seed();
}

RunConfig parse_config_text(std::string_view text, const std::string& source) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find('\n', start);
    std::string_view line =
        text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    ++number;
    start = pos == std::string_view::npos ? text.size() + 1 : pos + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(number) + ": ";
    if (eq == std::string_view::npos) fail(ErrorKind::kConfig, where + "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!find_field(key)) fail(ErrorKind::kConfig, where + "unknown config key '" + std::string(key) + "'");
    if (!seen.emplace(key).second) {
      fail(ErrorKind::kConfig, where + "key '" + std::string(key) + "' given twice");
    }
    try {
      set_config_value(cfg, key, value);
    } catch (const Error& e) {
      fail(ErrorKind::kConfig, where + e.what());
    }
  }
  cfg.propagate_seed();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open config file " + path.string());
  const std::string text(std::istreambuf_iterator<char>(in), {});
  return parse_config_text(text, path.string());
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Field& f : fields()) out.push_back(f.key);
  return out;
}

}  // namespace tnt
