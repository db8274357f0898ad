#include <omp.h>

#include <filesystem>

#include "doctest.h"

#include "boxcouple/errors.hpp"
#include "boxcouple/pipeline.hpp"

using namespace boxcouple;
using io::json;

namespace {

pipeline::ExperimentConfig bundled(const std::string& name) {
  return pipeline::ExperimentConfig::from_json(io::read_file(std::filesystem::path(BOXCOUPLE_SOURCE_DIR) / "configs" /
                                                             (name + ".json")));
}

std::vector<std::int64_t> sizes(const json& doc) {
  std::vector<std::int64_t> out;
  for (const auto& m : doc["map_spaces"]) out.push_back(m["members"].get<std::int64_t>());
  return out;
}

std::string status_of(const json& doc, const std::string& stage) {
  for (const auto& s : doc["stages"]) {
    if (s["stage"] == stage) return s["status"].get<std::string>();
  }
  return "";
}

}  // namespace

TEST_CASE("identity experiment yields the identity and zero defects") {
  auto rep = pipeline::run(bundled("identity_cyclic"));
  const auto& doc = rep.document;
  CHECK_FALSE(rep.truncated);
  CHECK(sizes(doc) == std::vector<std::int64_t>{2, 2, 2, 2});
  const auto& limit = doc["diagonal_limit"];
  CHECK(limit["radius"] == 4);
  CHECK(limit["verification"]["passed"] == true);
  CHECK(limit["radius_within_liftable"] == true);
  for (const auto& e : limit["partial_map"]["entries"]) CHECK(e["element"] == e["image"]);
  CHECK(limit["partial_map"]["provenance"][4] == json::array({4, 5}));
  for (const auto& eps : doc["gh"]["epsilon_trend"]) CHECK(eps == 0);
  for (const auto& m : doc["measures"]["levels"]) {
    CHECK(m["xi"] == 0);
    CHECK(m["snapshot_max_prokhorov"] == 0);
    CHECK(m["pushforward_max_prokhorov"] == 0);
    CHECK(m["max_equivariance_defect"] == 0);
  }
  for (const auto& s : doc["stages"]) CHECK(s["status"] == "ok");
}

TEST_CASE("doubling experiment finds the doubling maps") {
  auto rep = pipeline::run(bundled("doubling_cyclic"));
  const auto& doc = rep.document;
  CHECK_FALSE(rep.truncated);
  CHECK(sizes(doc) == std::vector<std::int64_t>{3, 2, 2, 2});
  const auto& limit = doc["diagonal_limit"];
  CHECK(limit["radius"] == 3);
  CHECK(limit["verification"]["passed"] == true);
  for (const auto& e : limit["partial_map"]["entries"]) CHECK(e["image"][0] == 2 * e["element"][0].get<std::int64_t>());
  CHECK(doc["gh"]["epsilon_trend"] == json::array({1, 0, 0, 0}));
  CHECK(doc["gh"]["nonincreasing"] == true);
  CHECK(doc["nets"]["corrected_bound_violations"] == 0);
  CHECK(doc["measures"]["transport_within_bound"] == true);
  std::vector<std::int64_t> xi;
  for (const auto& m : doc["measures"]["levels"]) xi.push_back(m["xi"].get<std::int64_t>());
  CHECK(xi == std::vector<std::int64_t>{2, 2, 4, 8});
}

TEST_CASE("sl2 against a cyclic tower truncates at level 1") {
  auto rep = pipeline::run(bundled("sl2_vs_cyclic"));
  CHECK(rep.truncated);
  REQUIRE(rep.truncated_at.has_value());
  CHECK(*rep.truncated_at == 1);
  CHECK(rep.document["truncated_at_level"] == 1);
  CHECK(sizes(rep.document) == std::vector<std::int64_t>{0});
  CHECK(status_of(rep.document, "map_spaces") == "truncated");
  for (const char* s : {"diagonal_limit", "nets", "gh_evidence", "measures"}) CHECK(status_of(rep.document, s) == "skipped");
  CHECK(rep.document["diagonal_limit"].is_null());
  // The expander diagnostics of both chains are still reported.
  CHECK(rep.document["expanders"]["G"]["levels"].size() == 2);
}

TEST_CASE("reports are byte-identical across thread counts") {
  for (const char* name : {"identity_cyclic", "doubling_cyclic", "sl2_vs_cyclic"}) {
    CAPTURE(name);
    auto config = bundled(name);
    omp_set_num_threads(1);
    auto one = io::dump(pipeline::run(config).document);
    omp_set_num_threads(4);
    auto four = io::dump(pipeline::run(config).document);
    CHECK(one == four);
  }
}

TEST_CASE("run directory holds every artifact and a manifest") {
  auto dir = std::filesystem::temp_directory_path() / "boxcouple_pipeline_test";
  std::filesystem::remove_all(dir);
  auto rep = pipeline::run(bundled("identity_cyclic"), dir);
  for (const char* f : {"config.json", "chain_G.json", "chain_H.json", "diagnostics_G.json", "maps_level_2.json",
                        "maps_level_5.json", "diagonal_limit.json", "nets.json", "gh_evidence.json", "measures.json",
                        "report.json", "summary.txt", "manifest.json"}) {
    CHECK_MESSAGE(std::filesystem::exists(dir / f), f);
  }
  CHECK(io::read_file(dir / "report.json") == rep.document);
  auto manifest = io::read_file(dir / "manifest.json");
  CHECK(manifest["artifacts"].size() == 13);
  // Stage artifacts reload into the in-memory types.
  auto space = io::parse<coarse::MapSpace>(io::read_file(dir / "maps_level_3.json"));
  CHECK(space.members.size() == 2);
  auto config = pipeline::ExperimentConfig::from_json(io::read_file(dir / "config.json"));
  CHECK(config.to_json() == bundled("identity_cyclic").to_json());
  std::filesystem::remove_all(dir);
}

TEST_CASE("config validation") {
  auto base = bundled("identity_cyclic").to_json();
  auto bad = base;
  bad["levels"] = json::array({3, 2});
  CHECK_THROWS_AS(pipeline::ExperimentConfig::from_json(bad), ValidationError);
  bad = base;
  bad["net_radii"] = json::array({2, 1});
  CHECK_THROWS_AS(pipeline::ExperimentConfig::from_json(bad), ValidationError);
  bad = base;
  bad["budgets"]["nodes"] = 0;
  CHECK_THROWS_AS(pipeline::ExperimentConfig::from_json(bad), ValidationError);
  bad = base;
  bad.erase("G");
  CHECK_THROWS_AS(pipeline::ExperimentConfig::from_json(bad), ValidationError);
  bad = base;
  bad["controls"] = "affine:1,0/affine:2,0/0";
  CHECK_THROWS_AS(pipeline::ExperimentConfig::from_json(bad), ValidationError);
}

TEST_CASE("budget exhaustion is marked, not hidden") {
  auto config = bundled("doubling_cyclic");
  config.budgets.nodes = 3;
  auto rep = pipeline::run(config);
  bool marked = rep.truncated || status_of(rep.document, "map_spaces") == "degraded";
  CHECK(marked);
  for (const auto& m : rep.document["map_spaces"]) {
    if (m["complete"] == false) CHECK(status_of(rep.document, "map_spaces") != "ok");
  }
}

TEST_CASE("summary mentions every stage") {
  auto rep = pipeline::run(bundled("doubling_cyclic"));
  for (const char* s : {"chains", "diagnostics", "map_spaces", "diagonal_limit", "nets", "gh_evidence", "measures"}) {
    CHECK(rep.summary.find(s) != std::string::npos);
  }
  CHECK(rep.summary == pipeline::summarize(rep.document));
}
