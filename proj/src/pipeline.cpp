#include "boxcouple/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>
#include <fstream>
#include <sstream>

#include "boxcouple/boxspace.hpp"
#include "boxcouple/coarse.hpp"
#include "boxcouple/coupling.hpp"
#include "boxcouple/errors.hpp"
#include "boxcouple/ghmetric.hpp"
#include "boxcouple/limits.hpp"
#include "boxcouple/measures.hpp"
#include "boxcouple/version.hpp"

namespace boxcouple::pipeline {

using io::json;

void ExperimentConfig::validate() const {
  if (g_family.empty() || h_family.empty()) throw ValidationError("config needs both chain families");
  if (levels.empty()) throw ValidationError("config needs at least one level");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == 0) throw ValidationError("levels are 1-based");
    if (i > 0 && levels[i] <= levels[i - 1]) throw ValidationError("levels must be strictly increasing");
  }
  if (net_radii.empty()) throw ValidationError("config needs at least one net radius");
  for (std::size_t i = 0; i < net_radii.size(); ++i) {
    if (net_radii[i] < 0) throw ValidationError("net radii must be nonnegative");
    if (i > 0 && net_radii[i] < net_radii[i - 1]) throw ValidationError("net radii must be nondecreasing");
  }
  if (limit_radius < 0) throw ValidationError("limit radius must be nonnegative");
  if (budgets.elements == 0 || budgets.nodes == 0 || budgets.gh_nodes == 0 || budgets.snapshot_cap == 0) {
    throw ValidationError("budgets must be positive");
  }
  controls.validate(std::max<std::int64_t>(limit_radius, net_radii.back()) + 1);
  groups::FamilySpec::parse(g_family);
  groups::FamilySpec::parse(h_family);
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  try {
    c.name = j.value("name", std::string("experiment"));
    c.g_family = j.at("G").get<std::string>();
    c.h_family = j.at("H").get<std::string>();
    c.controls = coarse::ControlData::parse(j.at("controls").get<std::string>());
    c.levels = j.at("levels").get<std::vector<std::size_t>>();
    if (j.contains("net_radii")) c.net_radii = j.at("net_radii").get<std::vector<std::int64_t>>();
    c.limit_radius = j.value("limit_radius", c.limit_radius);
    c.word_length = j.value("word_length", c.word_length);
    c.basepointed = j.value("basepointed", c.basepointed);
    c.seed = j.value("seed", c.seed);
    if (j.contains("budgets")) {
      const auto& b = j.at("budgets");
      c.budgets.elements = b.value("elements", c.budgets.elements);
      c.budgets.nodes = b.value("nodes", c.budgets.nodes);
      c.budgets.gh_nodes = b.value("gh_nodes", c.budgets.gh_nodes);
      c.budgets.snapshot_cap = b.value("snapshot_cap", c.budgets.snapshot_cap);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  json j;
  j["format"] = "boxcouple.experiment";
  j["name"] = name;
  j["G"] = g_family;
  j["H"] = h_family;
  j["controls"] = controls.to_string();
  j["levels"] = levels;
  j["net_radii"] = net_radii;
  j["limit_radius"] = limit_radius;
  j["word_length"] = word_length;
  j["basepointed"] = basepointed;
  j["budgets"] = {{"elements", budgets.elements},
                  {"nodes", budgets.nodes},
                  {"gh_nodes", budgets.gh_nodes},
                  {"snapshot_cap", budgets.snapshot_cap}};
  j["seed"] = seed;
  return j;
}

namespace {

std::string level_key(std::size_t level) { return "maps_level_" + std::to_string(level); }

/// 64-bit FNV-1a, used only to fingerprint artifacts in the manifest.
std::string fingerprint(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Artifacts keyed by name. Stages exchange data only through this store, in
/// serialized form, and it mirrors the run directory when one is given.
class ArtifactStore {
 public:
  explicit ArtifactStore(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {
    if (dir_) std::filesystem::create_directories(*dir_);
  }

  void put(const std::string& name, json value) {
    auto text = io::dump(value);
    if (dir_) io::write_file(*dir_ / (name + ".json"), value);
    order_.push_back(name);
    digests_[name] = {fingerprint(text), text.size()};
    items_[name] = std::move(value);
  }

  const json& get(const std::string& name) const {
    auto it = items_.find(name);
    if (it == items_.end()) throw ValidationError("missing artifact '" + name + "'");
    return it->second;
  }

  bool has(const std::string& name) const { return items_.count(name) > 0; }

  json manifest() const {
    json files = json::array();
    for (const auto& name : order_) {
      const auto& [digest, bytes] = digests_.at(name);
      files.push_back({{"file", name + ".json"}, {"bytes", bytes}, {"fnv1a64", digest}});
    }
    return files;
  }

  const std::optional<std::filesystem::path>& dir() const { return dir_; }

 private:
  std::optional<std::filesystem::path> dir_;
  std::vector<std::string> order_;
  std::map<std::string, json> items_;
  std::map<std::string, std::pair<std::string, std::size_t>> digests_;
};

struct Context {
  const ExperimentConfig& config;
  ArtifactStore& store;
  EvidenceReport& report;
  std::vector<std::size_t> surviving;  // levels with a nonempty map space

  void stage(std::string name, std::string status, std::string note = {}) {
    report.stages.push_back({std::move(name), std::move(status), std::move(note)});
  }
};

// ---- stage: chains and expander diagnostics ----

void chains_stage(Context& ctx) {
  auto depth = ctx.config.levels.back();
  for (const auto& [side, family] : {std::pair{"G", ctx.config.g_family}, {"H", ctx.config.h_family}}) {
    auto chain = groups::build_family(groups::FamilySpec::parse(family), depth, ctx.config.budgets.elements);
    ctx.store.put(std::string("chain_") + side, io::to_json(chain));
  }
  ctx.stage("chains", "ok");
}

void diagnostics_stage(Context& ctx) {
  bool degraded = false;
  for (const char* side : {"G", "H"}) {
    auto chain = io::parse<groups::NormalChain>(ctx.store.get(std::string("chain_") + side));
    auto rep = box::expander_report(chain);
    for (const auto& d : rep.levels) degraded = degraded || d.degraded;
    ctx.store.put(std::string("diagnostics_") + side, io::to_json(rep));
  }
  ctx.stage("diagnostics", degraded ? "degraded" : "ok", degraded ? "some levels were reduced to spectral bounds" : "");
}

// ---- stage: map spaces ----

void map_space_stage(Context& ctx) {
  auto g = io::parse<groups::NormalChain>(ctx.store.get("chain_G"));
  auto h = io::parse<groups::NormalChain>(ctx.store.get("chain_H"));
  bool degraded = false;
  for (auto level : ctx.config.levels) {
    auto x = coarse::GroupSpace::from_quotient(g.level_ptr(level));
    auto y = coarse::GroupSpace::from_quotient(h.level_ptr(level));
    auto space = coarse::enumerate_map_space(x, y, ctx.config.controls, ctx.config.basepointed, false,
                                             ctx.config.budgets.nodes);
    space.domain_ref = "chain_G.json:" + std::to_string(level);
    space.codomain_ref = "chain_H.json:" + std::to_string(level);
    ctx.store.put(level_key(level), io::to_json(space));
    if (space.members.empty()) {
      ctx.report.truncated = true;
      ctx.report.truncated_at = level;
      ctx.report.truncation_reason =
          space.complete ? "empty map space at level " + std::to_string(level) + " under controls " +
                               ctx.config.controls.to_string()
                         : "node budget exhausted before any map was found at level " + std::to_string(level);
      break;
    }
    degraded = degraded || !space.complete;
    ctx.surviving.push_back(level);
  }
  if (ctx.report.truncated) {
    ctx.stage("map_spaces", "truncated", ctx.report.truncation_reason);
  } else {
    ctx.stage("map_spaces", degraded ? "degraded" : "ok", degraded ? "node budget reached; canonical prefixes kept" : "");
  }
}

std::vector<coarse::MapSpace> load_spaces(const Context& ctx) {
  std::vector<coarse::MapSpace> out;
  for (auto level : ctx.surviving) out.push_back(io::parse<coarse::MapSpace>(ctx.store.get(level_key(level))));
  return out;
}

// ---- stage: diagonal limit ----

void limit_stage(Context& ctx) {
  auto spaces = load_spaces(ctx);
  const auto& controls = ctx.config.controls;
  std::vector<limits::LevelMap> maps;
  json liftable = json::array();
  std::int64_t reach = -1;
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    // The canonical-least member stands in for the level's map.
    auto record = spaces[i].record(0);
    auto r = limits::liftable_radius(record, ctx.config.limit_radius, controls, ctx.config.budgets.elements);
    reach = std::max(reach, r);
    liftable.push_back({{"level", ctx.surviving[i]}, {"radius", r}});
    maps.push_back({ctx.surviving[i], std::move(record)});
  }
  auto radius = std::min(ctx.config.limit_radius, reach);
  auto pm = limits::diagonal_limit(maps, controls, radius, ctx.config.budgets.elements);
  auto verification = limits::verify_partial(pm, controls, ctx.config.budgets.elements);

  std::int64_t min_surviving = radius;
  for (auto level : pm.provenance.back()) {
    for (const auto& entry : liftable) {
      if (entry["level"].get<std::size_t>() == level) min_surviving = std::min(min_surviving, entry["radius"].get<std::int64_t>());
    }
  }

  json j;
  j["requested_radius"] = ctx.config.limit_radius;
  j["radius"] = radius;
  j["liftable"] = std::move(liftable);
  j["radius_within_liftable"] = radius <= min_surviving;
  j["partial_map"] = io::to_json(pm);
  j["verification"] = io::to_json(verification);
  ctx.store.put("diagonal_limit", std::move(j));

  std::string note;
  if (radius < ctx.config.limit_radius) {
    note = "radius lowered to " + std::to_string(radius) + ", the largest liftable radius";
  }
  ctx.stage("diagonal_limit", verification.passed && note.empty() ? "ok" : "degraded",
            verification.passed ? note : "partial map fails the declared controls");
}

// ---- stage: nets ----

void net_stage(Context& ctx) {
  auto spaces = load_spaces(ctx);
  json rows = json::array();
  std::size_t stated_violations = 0;
  std::size_t corrected_violations = 0;
  bool net_ok = true;
  bool sizes_ok = true;
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    for (auto r : ctx.config.net_radii) {
      auto net = coarse::eps_net(spaces[i], r);
      const auto& c = net.certificate;
      if (!c.cardinality_ok) ++stated_violations;
      if (!c.corrected_ok) ++corrected_violations;
      net_ok = net_ok && c.net_property;
      sizes_ok = sizes_ok && c.net_size <= c.members;
      auto row = io::to_json(net);
      row["level"] = ctx.surviving[i];
      rows.push_back(std::move(row));
    }
  }
  json j;
  j["nets"] = std::move(rows);
  j["net_property"] = net_ok;
  j["net_sizes_within_members"] = sizes_ok;
  j["stated_bound_violations"] = stated_violations;
  j["corrected_bound_violations"] = corrected_violations;
  ctx.store.put("nets", std::move(j));
  ctx.stage("nets", net_ok && sizes_ok && corrected_violations == 0 ? "ok" : "degraded",
            stated_violations ? std::to_string(stated_violations) + " net(s) exceed the generator-count bound" : "");
}

// ---- stage: map-space snapshots and GH evidence ----

struct Snapshot {
  std::vector<std::size_t> members;  // member indices of the map space
  std::string kind;                  // "full", "net" or "prefix"
  std::optional<std::int64_t> net_radius;
};

Snapshot choose_snapshot(const coarse::MapSpace& space, const std::vector<std::int64_t>& radii, std::size_t cap) {
  Snapshot s;
  if (space.members.size() <= cap) {
    s.kind = "full";
    s.members.resize(space.members.size());
    for (std::size_t i = 0; i < s.members.size(); ++i) s.members[i] = i;
    return s;
  }
  // Finest net that still fits under the cap.
  for (auto it = radii.rbegin(); it != radii.rend(); ++it) {
    auto net = coarse::eps_net(space, *it);
    if (net.net.size() <= cap) {
      s.kind = "net";
      s.net_radius = *it;
      s.members = net.net;
      return s;
    }
  }
  s.kind = "prefix";
  s.members.resize(cap);
  for (std::size_t i = 0; i < cap; ++i) s.members[i] = i;
  return s;
}

void gh_stage(Context& ctx) {
  auto spaces = load_spaces(ctx);
  std::vector<FiniteMetricSpace> sequence;
  json snapshots = json::array();
  bool reduced = false;
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    auto snap = choose_snapshot(spaces[i], ctx.config.net_radii, ctx.config.budgets.snapshot_cap);
    reduced = reduced || snap.kind != "full";
    sequence.push_back(coarse::map_space_metric(spaces[i], snap.members));
    snapshots.push_back({{"level", ctx.surviving[i]},
                         {"kind", snap.kind},
                         {"net_radius", snap.net_radius ? json(*snap.net_radius) : json(nullptr)},
                         {"members", snap.members}});
  }
  auto target = sequence.back();
  auto evidence = gh::convergence_evidence(sequence, target, ctx.config.budgets.gh_nodes);
  bool exact = std::all_of(evidence.items.begin(), evidence.items.end(), [](const auto& it) { return it.exact; });

  json j;
  j["snapshots"] = std::move(snapshots);
  j["target_level"] = ctx.surviving.back();
  j["evidence"] = io::to_json(evidence);
  json trend = json::array();
  for (const auto& item : evidence.items) trend.push_back(io::number(item.epsilon));
  j["epsilon_trend"] = std::move(trend);
  ctx.store.put("gh_evidence", std::move(j));

  std::string note;
  if (reduced) note = "some snapshots were reduced to fit the snapshot cap";
  if (!exact) note += std::string(note.empty() ? "" : "; ") + "GH budget reached, epsilons are upper bounds";
  ctx.stage("gh_evidence", note.empty() ? "ok" : "degraded", note);
}

// ---- stage: measures and couplings ----

/// Action of the domain generators on the snapshot by [g.phi]. Nullopt when
/// the snapshot is not closed under it.
std::optional<measures::GroupAction> snapshot_action(const coarse::MapSpace& space,
                                                     const std::vector<std::size_t>& members) {
  const auto& q = space.domain->base();
  const auto& gens = q.parent().generators();
  std::vector<std::size_t> position(space.members.size(), members.size());
  for (std::size_t i = 0; i < members.size(); ++i) position[members[i]] = i;
  std::vector<std::string> symbols;
  std::vector<std::size_t> inverse;
  std::vector<std::vector<std::uint32_t>> perms;
  for (std::size_t s = 0; s < gens.size(); ++s) {
    symbols.push_back(gens[s].symbol);
    inverse.push_back(gens[s].inverse);
    auto g = space.domain->point(q.generator_image(s), 0);
    std::vector<std::uint32_t> perm(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      auto moved = coarse::act_table(*space.domain, *space.codomain, g, space.members[members[i]]);
      auto found = space.find(moved);
      if (!found || position[*found] == members.size()) return std::nullopt;
      perm[i] = static_cast<std::uint32_t>(position[*found]);
    }
    perms.push_back(std::move(perm));
  }
  return measures::GroupAction(members.size(), std::move(symbols), std::move(inverse), std::move(perms));
}

/// Domain generators acting on the codomain quotient by left multiplication
/// with the images of the generators under `table`.
measures::GroupAction induced_action(const coarse::GroupSpace& x, const coarse::GroupSpace& y,
                                     const coarse::Table& table) {
  const auto& q = x.base();
  const auto& gens = q.parent().generators();
  std::vector<std::vector<std::uint32_t>> perms(gens.size());
  std::vector<std::string> symbols;
  std::vector<std::size_t> inverse;
  for (std::size_t s = 0; s < gens.size(); ++s) {
    symbols.push_back(gens[s].symbol);
    inverse.push_back(gens[s].inverse);
  }
  for (std::size_t s = 0; s < gens.size(); ++s) {
    if (!perms[s].empty()) continue;
    auto h = table[x.point(q.generator_image(s), 0)];
    std::vector<std::uint32_t> perm(y.size());
    std::vector<std::uint32_t> inv(y.size());
    for (std::size_t b = 0; b < y.size(); ++b) {
      perm[b] = static_cast<std::uint32_t>(y.multiply(h, b));
      inv[perm[b]] = static_cast<std::uint32_t>(b);
    }
    perms[s] = std::move(perm);
    if (gens[s].inverse != s) perms[gens[s].inverse] = std::move(inv);
  }
  return measures::GroupAction(y.size(), std::move(symbols), std::move(inverse), std::move(perms));
}

void measure_stage(Context& ctx) {
  auto spaces = load_spaces(ctx);
  const auto& gh = ctx.store.get("gh_evidence");
  std::mt19937_64 rng(ctx.config.seed);
  json rows = json::array();
  bool degraded = false;
  bool transport_ok = true;
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    const auto& space = spaces[i];
    auto level = ctx.surviving[i];
    json row;
    row["level"] = level;

    // Invariance of the uniform measure on the map-space snapshot.
    const auto& snap = gh["snapshots"][i];
    auto members = snap["members"].get<std::vector<std::size_t>>();
    auto snapshot_space = std::make_shared<const FiniteMetricSpace>(coarse::map_space_metric(space, members));
    std::optional<measures::GroupAction> action;
    if (snap["kind"] == "full") action = snapshot_action(space, members);
    if (action) {
      auto defect = measures::invariance_defect(measures::uniform(snapshot_space), *action, ctx.config.word_length);
      row["snapshot_invariance"] = io::to_json(defect);
    } else {
      degraded = true;
      row["snapshot_invariance"] = nullptr;
      row["snapshot_note"] = snap["kind"] == "full" ? "snapshot is not closed under the action"
                                                    : "action is undefined on a reduced snapshot";
    }

    // The level map as an almost-equivariant coarse map and its pushforward.
    auto record = space.record(0);
    coupling::GSpace x{std::make_shared<const FiniteMetricSpace>(record.domain->metric_space()),
                       measures::GroupAction::regular(record.domain->base())};
    coupling::GSpace y{std::make_shared<const FiniteMetricSpace>(record.codomain->metric_space()),
                       induced_action(*record.domain, *record.codomain, record.table)};
    auto eq = coupling::equivariant_report(x, y, record.table, ctx.config.word_length);
    auto xi = std::max({eq.distortion, eq.density, eq.max_defect});
    auto pushed = measures::pushforward(measures::uniform(x.space), record.table, y.space);
    auto pushed_defect = measures::invariance_defect(pushed, y.action, ctx.config.word_length);
    auto bound = std::min(xi, 1.0);
    bool ok = pushed_defect.max_prokhorov <= bound + 1e-12;
    transport_ok = transport_ok && ok;

    // Preimage comparison on a seeded subset of the codomain.
    std::vector<std::size_t> subset;
    for (std::size_t b = 0; b < y.space->size(); ++b) {
      if (std::uniform_int_distribution<int>(0, 1)(rng) == 1) subset.push_back(b);
    }
    if (subset.empty()) subset.push_back(0);
    std::vector<std::size_t> word{std::uniform_int_distribution<std::size_t>(0, x.action.generator_count() - 1)(rng)};
    auto preimage = coupling::preimage_hausdorff_check(x, y, record.table, word, subset, xi);

    row["map"] = record.table;
    row["equivariance"] = io::to_json(eq);
    row["xi"] = io::number(xi);
    row["pushforward"] = io::to_json(pushed);
    row["pushforward_invariance"] = io::to_json(pushed_defect);
    row["transport_bound"] = io::number(bound);
    row["transport_within_bound"] = ok;
    row["preimage"] = {{"word", x.action.format_word(word)}, {"subset", subset}, {"report", io::to_json(preimage)}};
    rows.push_back(std::move(row));
  }
  json j;
  j["levels"] = std::move(rows);
  j["transport_within_bound"] = transport_ok;
  ctx.store.put("measures", std::move(j));
  std::string note;
  if (degraded) note = "uniform-measure invariance skipped on reduced snapshots";
  if (!transport_ok) note += std::string(note.empty() ? "" : "; ") + "pushforward defect exceeds min(xi, 1)";
  ctx.stage("measures", note.empty() ? "ok" : "degraded", note);
}

json level_sizes(const Context& ctx) {
  json out = json::array();
  for (auto level : ctx.config.levels) {
    if (!ctx.store.has(level_key(level))) break;
    const auto& m = ctx.store.get(level_key(level));
    out.push_back({{"level", level}, {"members", m["count"]}, {"complete", m["complete"]}, {"nodes", m["nodes"]}});
  }
  return out;
}

json diagnostics_digest(const json& rep) {
  json levels = json::array();
  for (const auto& d : rep["levels"]) {
    levels.push_back({{"level", d["level"]},
                      {"order", d["order"]},
                      {"diameter", d["diameter"]},
                      {"girth", d["girth"]},
                      {"lambda1", d["lambda1"]},
                      {"degraded", d["degraded"]}});
  }
  return {{"family", rep["family"]}, {"min_lambda1", rep["min_lambda1"]}, {"levels", levels}, {"caveat", rep["caveat"]}};
}

json assemble(const Context& ctx) {
  const auto& st = ctx.store;
  json doc;
  doc["format"] = "boxcouple.evidence";
  doc["tool"] = std::string("boxcouple ") + kVersion;
  doc["config"] = ctx.config.to_json();
  json stages = json::array();
  for (const auto& s : ctx.report.stages) stages.push_back({{"stage", s.name}, {"status", s.status}, {"note", s.note}});
  doc["stages"] = std::move(stages);
  doc["truncated"] = ctx.report.truncated;
  doc["truncated_at_level"] = ctx.report.truncated_at ? json(*ctx.report.truncated_at) : json(nullptr);
  doc["truncation_reason"] = ctx.report.truncation_reason;
  doc["expanders"] = {{"G", diagnostics_digest(st.get("diagnostics_G"))}, {"H", diagnostics_digest(st.get("diagnostics_H"))}};
  doc["map_spaces"] = level_sizes(ctx);
  doc["diagonal_limit"] = st.has("diagonal_limit") ? st.get("diagonal_limit") : json(nullptr);
  if (st.has("nets")) {
    const auto& nets = st.get("nets");
    json rows = json::array();
    for (const auto& n : nets["nets"]) {
      const auto& c = n["certificate"];
      rows.push_back({{"level", n["level"]},
                      {"radius", c["radius"]},
                      {"members", c["members"]},
                      {"net_size", c["net_size"]},
                      {"net_property", c["net_property"]},
                      {"stated_bound", c["stated_bound"]},
                      {"stated_bound_ok", c["stated_bound_ok"]},
                      {"corrected_bound", c["corrected_bound"]},
                      {"corrected_bound_ok", c["corrected_bound_ok"]}});
    }
    doc["nets"] = {{"rows", rows},
                   {"net_property", nets["net_property"]},
                   {"net_sizes_within_members", nets["net_sizes_within_members"]},
                   {"stated_bound_violations", nets["stated_bound_violations"]},
                   {"corrected_bound_violations", nets["corrected_bound_violations"]}};
  } else {
    doc["nets"] = nullptr;
  }
  if (st.has("gh_evidence")) {
    const auto& gh = st.get("gh_evidence");
    json snaps = json::array();
    for (const auto& s : gh["snapshots"]) {
      snaps.push_back({{"level", s["level"]}, {"kind", s["kind"]}, {"points", s["members"].size()}});
    }
    doc["gh"] = {{"target_level", gh["target_level"]},
                 {"snapshots", snaps},
                 {"epsilon_trend", gh["epsilon_trend"]},
                 {"nonincreasing", gh["evidence"]["nonincreasing"]},
                 {"caveat", gh["evidence"]["caveat"]}};
  } else {
    doc["gh"] = nullptr;
  }
  if (st.has("measures")) {
    const auto& m = st.get("measures");
    json rows = json::array();
    for (const auto& r : m["levels"]) {
      rows.push_back({{"level", r["level"]},
                      {"snapshot_max_prokhorov", r["snapshot_invariance"].is_null()
                                                     ? json(nullptr)
                                                     : r["snapshot_invariance"]["max_prokhorov"]},
                      {"distortion", r["equivariance"]["distortion"]},
                      {"density", r["equivariance"]["density"]},
                      {"max_equivariance_defect", r["equivariance"]["max_defect"]},
                      {"xi", r["xi"]},
                      {"pushforward_max_prokhorov", r["pushforward_invariance"]["max_prokhorov"]},
                      {"pushforward_max_tv", r["pushforward_invariance"]["max_tv"]},
                      {"transport_bound", r["transport_bound"]},
                      {"preimage_status", r["preimage"]["report"]["status"]},
                      {"preimage_measured", r["preimage"]["report"]["measured"]}});
    }
    doc["measures"] = {{"levels", rows}, {"transport_within_bound", m["transport_within_bound"]}};
  } else {
    doc["measures"] = nullptr;
  }
  return doc;
}

std::string fmt_value(const json& v) {
  if (v.is_null()) return "-";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

std::string summarize(const json& doc) {
  std::ostringstream out;
  const auto& cfg = doc["config"];
  out << "experiment " << fmt_value(cfg["name"]) << ": G = " << fmt_value(cfg["G"]) << ", H = " << fmt_value(cfg["H"])
      << ", controls " << fmt_value(cfg["controls"]) << "\n";
  out << "stages:\n";
  for (const auto& s : doc["stages"]) {
    out << "  " << fmt_value(s["stage"]) << ": " << fmt_value(s["status"]);
    if (!s["note"].get<std::string>().empty()) out << " (" << fmt_value(s["note"]) << ")";
    out << "\n";
  }
  if (doc["truncated"].get<bool>()) out << "truncated: " << fmt_value(doc["truncation_reason"]) << "\n";
  for (const char* side : {"G", "H"}) {
    const auto& e = doc["expanders"][side];
    out << "spectral gaps of " << side << " (" << fmt_value(e["family"]) << "):";
    for (const auto& l : e["levels"]) out << " " << fmt_value(l["lambda1"]);
    out << "\n";
  }
  out << "map-space sizes:";
  for (const auto& m : doc["map_spaces"]) out << " level " << fmt_value(m["level"]) << "=" << fmt_value(m["members"]);
  out << "\n";
  if (!doc["diagonal_limit"].is_null()) {
    const auto& d = doc["diagonal_limit"];
    const auto& pm = d["partial_map"];
    out << "diagonal limit: radius " << fmt_value(d["radius"]) << ", " << pm["entries"].size() << " points, verification "
        << (d["verification"]["passed"].get<bool>() ? "passed" : "failed") << "\n";
    out << "  survival by radius:";
    const auto& prov = pm["provenance"];
    for (std::size_t r = 0; r < prov.size(); ++r) out << " r" << r << "=" << prov[r].dump();
    out << "\n";
  }
  if (!doc["nets"].is_null()) {
    out << "nets:\n";
    for (const auto& n : doc["nets"]["rows"]) {
      out << "  level " << fmt_value(n["level"]) << " R=" << fmt_value(n["radius"]) << ": " << fmt_value(n["net_size"])
          << " of " << fmt_value(n["members"]) << " (bound " << fmt_value(n["stated_bound"])
          << (n["stated_bound_ok"].get<bool>() ? "" : " exceeded") << ", corrected " << fmt_value(n["corrected_bound"])
          << ")\n";
    }
  }
  if (!doc["gh"].is_null()) {
    out << "GH epsilon trend toward level " << fmt_value(doc["gh"]["target_level"]) << ":";
    for (const auto& e : doc["gh"]["epsilon_trend"]) out << " " << fmt_value(e);
    out << "\n";
  }
  if (!doc["measures"].is_null()) {
    out << "measures:\n";
    for (const auto& m : doc["measures"]["levels"]) {
      out << "  level " << fmt_value(m["level"]) << ": xi " << fmt_value(m["xi"]) << ", snapshot defect "
          << fmt_value(m["snapshot_max_prokhorov"]) << ", pushforward defect " << fmt_value(m["pushforward_max_prokhorov"])
          << " (bound " << fmt_value(m["transport_bound"]) << "), preimage " << fmt_value(m["preimage_status"]) << "\n";
    }
  }
  return out.str();
}

EvidenceReport run(const ExperimentConfig& config, const std::optional<std::filesystem::path>& run_dir) {
  config.validate();
  EvidenceReport report;
  ArtifactStore store(run_dir);
  Context ctx{config, store, report, {}};
  store.put("config", config.to_json());

  chains_stage(ctx);
  diagnostics_stage(ctx);
  map_space_stage(ctx);
  if (ctx.surviving.empty()) {
    for (const char* name : {"diagonal_limit", "nets", "gh_evidence", "measures"}) {
      ctx.stage(name, "skipped", "no level has a nonempty map space");
    }
  } else {
    limit_stage(ctx);
    net_stage(ctx);
    gh_stage(ctx);
    measure_stage(ctx);
  }

  report.document = assemble(ctx);
  report.summary = summarize(report.document);
  if (run_dir) {
    io::write_file(*run_dir / "report.json", report.document);
    {
      std::ofstream out(*run_dir / "summary.txt", std::ios::binary);
      out << report.summary;
    }
    json manifest;
    manifest["format"] = "boxcouple.manifest";
    manifest["tool"] = std::string("boxcouple ") + kVersion;
    manifest["artifacts"] = store.manifest();
    auto report_text = io::dump(report.document);
    manifest["report"] = {{"file", "report.json"}, {"bytes", report_text.size()}, {"fnv1a64", fingerprint(report_text)}};
    manifest["summary"] = {{"file", "summary.txt"}, {"bytes", report.summary.size()}, {"fnv1a64", fingerprint(report.summary)}};
    io::write_file(*run_dir / "manifest.json", manifest);
  }
  return report;
}

}  // namespace boxcouple::pipeline
