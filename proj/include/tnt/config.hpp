#pragma once

// Run configuration file: one `key = value` per line, `#` starts a comment,
// dotted keys per module (scene.*, assoc.*, ransac.*, net.*, train.*,
// augment.*, eval.*, graph.*, track.*) plus the top-level `seed`. Unknown or
// repeated keys are errors.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tnt/association.hpp"
#include "tnt/geometry.hpp"
#include "tnt/metrics.hpp"
#include "tnt/synth.hpp"
#include "tnt/trackletnet.hpp"
#include "tnt/training.hpp"

namespace tnt {

enum class ScorerKind { kNetwork, kBhattacharyya };

std::string_view to_string(ScorerKind kind);

struct RunConfig {
  std::uint64_t seed = 0;
  SceneConfig scene;
  AssociationConfig assoc;
  RansacConfig ransac;
  NetConfig net;
  TrainConfig train;
  AugmentConfig augment;
  EvalConfig eval;
  std::optional<int> delta_t;  // defaults to net.T
  ScorerKind scorer = ScorerKind::kNetwork;

  int graph_delta_t() const { return delta_t.value_or(net.T); }

  // Copies seed into every module config that takes one.
  void propagate_seed();
  void validate() const;
  // Every key with its resolved value, in a fixed order; parses back to an
  // equal configuration.
  std::string to_text() const;
};

// Throws kConfig naming the key (and line) on unknown keys, duplicates or bad
// values.
RunConfig parse_config_text(std::string_view text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

// Applies one `key=value` override.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

std::vector<std::string> config_keys();

}  // namespace tnt
