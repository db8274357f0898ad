#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "boxcouple/controls.hpp"
#include "boxcouple/serialize.hpp"

namespace boxcouple::pipeline {

struct Budgets {
  std::size_t elements = 1'000'000;
  std::uint64_t nodes = 100'000'000;
  std::uint64_t gh_nodes = 20'000'000;
  /// Largest map-space snapshot handed to the GH and measure stages.
  std::size_t snapshot_cap = 256;
};

struct ExperimentConfig {
  std::string name;
  std::string g_family;
  std::string h_family;
  coarse::ControlData controls;
  /// Chain levels compared, strictly increasing and 1-based.
  std::vector<std::size_t> levels;
  /// Net radii, nondecreasing.
  std::vector<std::int64_t> net_radii{1, 2, 3};
  std::int64_t limit_radius = 3;
  std::size_t word_length = 2;
  bool basepointed = true;
  Budgets budgets;
  std::uint64_t seed = 1;

  void validate() const;
  static ExperimentConfig from_json(const io::json& j);
  io::json to_json() const;
};

struct StageRecord {
  std::string name;
  /// "ok", "degraded", "truncated" or "skipped".
  std::string status;
  std::string note;
};

struct EvidenceReport {
  io::json document;
  std::vector<StageRecord> stages;
  bool truncated = false;
  std::optional<std::size_t> truncated_at;
  std::string truncation_reason;
  /// Human-readable digest of `document`.
  std::string summary;
};

/// Runs every stage in order. When `run_dir` is given, each stage's artifact
/// is written there together with report.json, summary.txt and manifest.json.
/// Stages read the previous stages' artifacts back from their JSON form.
EvidenceReport run(const ExperimentConfig& config, const std::optional<std::filesystem::path>& run_dir = std::nullopt);

std::string summarize(const io::json& report);

}  // namespace boxcouple::pipeline
