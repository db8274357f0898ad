#include <omp.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "boxcouple/boxspace.hpp"
#include "boxcouple/coarse.hpp"
#include "boxcouple/coupling.hpp"
#include "boxcouple/errors.hpp"
#include "boxcouple/ghmetric.hpp"
#include "boxcouple/limits.hpp"
#include "boxcouple/measures.hpp"
#include "boxcouple/pipeline.hpp"
#include "boxcouple/serialize.hpp"
#include "boxcouple/version.hpp"

using namespace boxcouple;
using io::json;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kValidation = 2, kBudget = 3, kInfeasible = 4 };

struct Globals {
  std::optional<std::uint64_t> budget;
  int threads = 0;
  std::uint64_t seed = 1;
  std::string format = "json";
  bool error_json = false;
};

Globals globals;

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

void emit_json(const json& j, const std::string& path) { emit(io::dump(j), path); }

void require_format(std::initializer_list<const char*> allowed) {
  for (const char* f : allowed) {
    if (globals.format == f) return;
  }
  throw ValidationError("--format " + globals.format + " is not available for this command");
}

std::uint64_t budget_or(std::uint64_t fallback) { return globals.budget.value_or(fallback); }

/// "chain.json:3" -> (path, 3); nullopt when there is no level suffix.
std::optional<std::pair<std::string, std::size_t>> split_level_ref(const std::string& ref) {
  auto pos = ref.rfind(':');
  if (pos == std::string::npos || pos + 1 == ref.size()) return std::nullopt;
  std::size_t level = 0;
  auto tail = std::string_view(ref).substr(pos + 1);
  auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), level);
  if (ec != std::errc() || ptr != tail.data() + tail.size()) return std::nullopt;
  return std::pair{ref.substr(0, pos), level};
}

std::shared_ptr<const groups::FiniteQuotient> load_level(const std::string& ref) {
  auto split = split_level_ref(ref);
  if (!split) throw ValidationError("expected CHAIN.json:LEVEL, got '" + ref + "'");
  auto chain = io::parse<groups::NormalChain>(io::read_file(split->first));
  if (split->second == 0 || split->second > chain.depth()) {
    throw ValidationError("level " + std::to_string(split->second) + " is outside the chain (depth " +
                          std::to_string(chain.depth()) + ")");
  }
  return chain.level_ptr(split->second);
}

std::shared_ptr<const coarse::GroupSpace> load_group_space(const std::string& ref, std::size_t tags) {
  auto q = load_level(ref);
  return tags <= 1 ? coarse::GroupSpace::from_quotient(q) : coarse::GroupSpace::tag_product(q, tags);
}

/// A metric space file, or CHAIN.json:LEVEL for the word metric of a quotient.
std::shared_ptr<const FiniteMetricSpace> load_metric(const std::string& ref) {
  if (split_level_ref(ref)) return std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_quotient(*load_level(ref)));
  auto j = io::read_file(ref);
  if (j.contains("space") && j.contains("action")) j = j.at("space");
  return std::make_shared<const FiniteMetricSpace>(io::parse<FiniteMetricSpace>(j));
}

/// A G-space file, or CHAIN.json:LEVEL for a quotient acting on itself.
coupling::GSpace load_gspace(const std::string& ref) {
  if (split_level_ref(ref)) {
    auto q = load_level(ref);
    coupling::GSpace s{std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_quotient(*q)),
                       measures::GroupAction::regular(*q)};
    return s;
  }
  return io::parse<coupling::GSpace>(io::read_file(ref));
}

std::vector<std::uint32_t> parse_index_list(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) throw ValidationError("bad index '" + item + "'");
    out.push_back(v);
  }
  return out;
}

/// Table from "--table 0,2,1" or from a JSON file holding {"table": [...]}.
std::vector<std::uint32_t> load_table(const std::string& inline_table, const std::string& file) {
  if (!inline_table.empty() && !file.empty()) throw ValidationError("give either --table or --map, not both");
  if (!inline_table.empty()) return parse_index_list(inline_table);
  if (file.empty()) throw ValidationError("a map is required (--table or --map)");
  auto j = io::read_file(file);
  try {
    return j.at("table").get<std::vector<std::uint32_t>>();
  } catch (const json::exception& e) {
    throw ValidationError("map file has no table: " + std::string(e.what()));
  }
}

std::vector<std::size_t> as_sizes(const std::vector<std::uint32_t>& v) { return {v.begin(), v.end()}; }

std::string csv_table_rows(const std::vector<coarse::Table>& rows) {
  std::ostringstream out;
  out << "member,table\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << i << ",\"";
    for (std::size_t k = 0; k < rows[i].size(); ++k) out << (k ? "," : "") << rows[i][k];
    out << "\"\n";
  }
  return out.str();
}

// ---- subcommand registration ----

void add_chain(CLI::App& app) {
  auto* chain = app.add_subcommand("chain", "Normal chains of finite quotients")->require_subcommand(1);
  auto* build = chain->add_subcommand("build", "Build a chain: cyclic:K[@S], sl2:P1,P2,..., free:RANK:IMAGES");
  static std::string family, output;
  static std::size_t depth = 0, level = 0;
  build->add_option("--family", family, "Chain family")->required();
  build->add_option("--depth", depth, "Number of levels")->required();
  build->add_option("--level", level, "Level drawn by --format dot (default: deepest)");
  build->add_option("-o,--output", output, "Output file (default stdout)");
  build->callback([] {
    require_format({"json", "dot"});
    auto c = groups::build_family(groups::FamilySpec::parse(family), depth, budget_or(groups::kDefaultElementBudget));
    if (globals.format == "dot") {
      emit(groups::to_dot(c.level(level ? level : c.depth())), output);
    } else {
      emit_json(io::to_json(c), output);
    }
  });
}

void add_box(CLI::App& app) {
  auto* box = app.add_subcommand("box", "Box-space diagnostics")->require_subcommand(1);
  auto* diag = box->add_subcommand("diagnostics", "Per-level diameter, girth, spectral gap and Cheeger constant");
  static std::string chain_file, output;
  diag->add_option("--chain", chain_file, "Chain file")->required();
  diag->add_option("-o,--output", output, "Output file");
  diag->callback([] {
    require_format({"json", "csv"});
    auto chain = io::parse<groups::NormalChain>(io::read_file(chain_file));
    box::DiagnosticsOptions options;
    if (globals.budget) options.eigen_budget = *globals.budget;
    auto rep = box::expander_report(chain, options);
    if (globals.format == "csv") {
      emit(box::to_csv(rep), output);
    } else {
      emit_json(io::to_json(rep), output);
    }
  });
}

void add_maps(CLI::App& app) {
  auto* maps = app.add_subcommand("maps", "Coarse maps between quotient spaces")->require_subcommand(1);

  static std::string dom, cod, controls, table, map_file, mode = "equivalence", output;
  static std::size_t dom_tags = 1, cod_tags = 1;
  auto* verify = maps->add_subcommand("verify", "Check a map against (rho_plus, rho_minus, c) controls");
  verify->add_option("--domain", dom, "CHAIN.json:LEVEL")->required();
  verify->add_option("--codomain", cod, "CHAIN.json:LEVEL")->required();
  verify->add_option("--controls", controls, "RHO_PLUS/RHO_MINUS/C, e.g. affine:1,0/affine:1,0/0")->required();
  verify->add_option("--table", table, "Comma-separated image indices");
  verify->add_option("--map", map_file, "JSON file with a \"table\" field");
  verify->add_option("--mode", mode, "embedding or equivalence")->check(CLI::IsMember({"embedding", "equivalence"}));
  verify->add_option("--domain-tags", dom_tags, "Tag multiplicity of the domain");
  verify->add_option("--codomain-tags", cod_tags, "Tag multiplicity of the codomain");
  verify->add_option("-o,--output", output, "Output file");
  verify->callback([] {
    require_format({"json"});
    coarse::MapRecord f{load_group_space(dom, dom_tags), load_group_space(cod, cod_tags), load_table(table, map_file)};
    f.check();
    auto rep = coarse::verify(f, coarse::ControlData::parse(controls),
                              mode == "embedding" ? coarse::Mode::embedding : coarse::Mode::equivalence);
    emit_json(io::to_json(rep), output);
  });

  static bool basepointed = false, injective = false;
  auto* enumerate = maps->add_subcommand("enumerate", "All maps satisfying the controls, in canonical order");
  enumerate->add_option("--domain", dom, "CHAIN.json:LEVEL")->required();
  enumerate->add_option("--codomain", cod, "CHAIN.json:LEVEL")->required();
  enumerate->add_option("--controls", controls, "RHO_PLUS/RHO_MINUS/C")->required();
  enumerate->add_flag("--basepointed", basepointed, "Require phi(1) = 1");
  enumerate->add_flag("--injective", injective, "Require injective maps");
  enumerate->add_option("--domain-tags", dom_tags, "Tag multiplicity of the domain");
  enumerate->add_option("--codomain-tags", cod_tags, "Tag multiplicity of the codomain");
  enumerate->add_option("-o,--output", output, "Output file");
  enumerate->callback([] {
    require_format({"json", "csv"});
    auto space = coarse::enumerate_map_space(load_group_space(dom, dom_tags), load_group_space(cod, cod_tags),
                                             coarse::ControlData::parse(controls), basepointed, injective,
                                             budget_or(coarse::kDefaultNodeBudget));
    space.domain_ref = dom;
    space.codomain_ref = cod;
    if (globals.format == "csv") {
      emit(csv_table_rows(space.members), output);
    } else {
      emit_json(io::to_json(space), output);
    }
    if (!space.complete) std::cerr << "warning: node budget reached; the member list is a canonical prefix\n";
  });

  static std::string space_file;
  static std::int64_t radius = 1;
  auto* net = maps->add_subcommand("net", "Fiber net of a map space at radius R");
  net->add_option("--space", space_file, "Map-space file")->required();
  net->add_option("--radius", radius, "Ball radius R (net radius 2^-R)")->required();
  net->add_option("-o,--output", output, "Output file");
  net->callback([] {
    require_format({"json"});
    auto space = io::parse<coarse::MapSpace>(io::read_file(space_file));
    emit_json(io::to_json(coarse::eps_net(space, radius)), output);
  });

  static std::string word;
  static std::optional<std::size_t> member;
  auto* act = maps->add_subcommand("act", "Apply [g.phi](x) = phi(g^-1)^-1 phi(g^-1 x) to a member");
  act->add_option("--space", space_file, "Map-space file")->required();
  act->add_option("--word", word, "Word in the domain generators, e.g. \"t t\"")->required();
  act->add_option("--member", member, "Member index");
  act->add_option("--table", table, "Comma-separated table instead of a member");
  act->add_option("-o,--output", output, "Output file");
  act->callback([] {
    require_format({"json"});
    auto space = io::parse<coarse::MapSpace>(io::read_file(space_file));
    coarse::Table phi;
    if (member) {
      if (!table.empty()) throw ValidationError("give either --member or --table, not both");
      if (*member >= space.members.size()) throw ValidationError("member index out of range");
      phi = space.members[*member];
    } else {
      phi = load_table(table, "");
    }
    auto w = space.domain->base().parent().parse_word(word);
    emit_json(io::to_json(coarse::act(space, w, phi)), output);
  });
}

void add_limit(CLI::App& app) {
  auto* limit = app.add_subcommand("limit", "Diagonal extraction of a partial map on the parent groups")
                    ->require_subcommand(1);
  auto* run = limit->add_subcommand("run", "Extract from the canonical-least member of each map-space file");
  static std::vector<std::string> spaces;
  static std::string controls, output;
  static std::int64_t radius = 1;
  run->add_option("spaces", spaces, "Map-space files, one per level")->required();
  run->add_option("--radius", radius, "Radius R of the partial map")->required();
  run->add_option("--controls", controls, "Override the controls stored in the map spaces");
  run->add_option("-o,--output", output, "Output file");
  run->callback([] {
    require_format({"json", "csv"});
    std::vector<limits::LevelMap> maps;
    std::optional<coarse::ControlData> data;
    if (!controls.empty()) data = coarse::ControlData::parse(controls);
    for (const auto& file : spaces) {
      auto space = io::parse<coarse::MapSpace>(io::read_file(file));
      if (space.members.empty()) throw InfeasibleStage("map space in " + file + " is empty");
      if (!data) data = space.controls;
      maps.push_back({space.domain->base().level(), space.record(0)});
    }
    auto budget = budget_or(groups::kDefaultElementBudget);
    auto pm = limits::diagonal_limit(maps, *data, radius, budget);
    auto rep = limits::verify_partial(pm, *data, budget);
    if (globals.format == "csv") {
      std::ostringstream out;
      out << "radius,surviving_levels\n";
      for (std::size_t r = 0; r < pm.provenance.size(); ++r) {
        out << r << ",\"";
        for (std::size_t k = 0; k < pm.provenance[r].size(); ++k) out << (k ? "," : "") << pm.provenance[r][k];
        out << "\"\n";
      }
      emit(out.str(), output);
    } else {
      emit_json({{"partial_map", io::to_json(pm)}, {"verification", io::to_json(rep)}}, output);
    }
  });
}

void add_gh(CLI::App& app) {
  auto* gh = app.add_subcommand("gh", "Gromov-Hausdorff bounds and epsilon-isometries")->require_subcommand(1);
  static std::string a, b, output;
  static bool witness = false;
  auto* bounds = gh->add_subcommand("bounds", "Lower and upper bounds on d_GH(A, B)");
  bounds->add_option("a", a, "Metric-space file or CHAIN.json:LEVEL")->required();
  bounds->add_option("b", b, "Metric-space file or CHAIN.json:LEVEL")->required();
  bounds->add_flag("--witness", witness, "Include the optimal correspondence");
  bounds->add_option("-o,--output", output, "Output file");
  bounds->callback([] {
    require_format({"json"});
    auto r = gh::gh_bounds(*load_metric(a), *load_metric(b), budget_or(gh::kDefaultGhBudget));
    json j = {{"lower", io::number(r.lower)}, {"upper", io::number(r.upper)}, {"exact", r.exact}};
    if (witness) j = io::to_json(r);
    emit_json(j, output);
  });

  static std::vector<std::string> sequence;
  static std::string target;
  auto* evidence = gh->add_subcommand("evidence", "Best epsilon-isometry from each space onto a target");
  evidence->add_option("spaces", sequence, "Metric-space files in order")->required();
  evidence->add_option("--target", target, "Target space")->required();
  evidence->add_option("-o,--output", output, "Output file");
  evidence->callback([] {
    require_format({"json", "csv"});
    std::vector<FiniteMetricSpace> seq;
    for (const auto& s : sequence) seq.push_back(*load_metric(s));
    auto ev = gh::convergence_evidence(seq, *load_metric(target), budget_or(gh::kDefaultGhBudget));
    if (globals.format == "csv") {
      std::ostringstream out;
      out << "index,epsilon,distortion,density,exact\n";
      for (std::size_t i = 0; i < ev.items.size(); ++i) {
        const auto& it = ev.items[i];
        out << i << "," << io::number(it.epsilon).dump() << "," << io::number(it.distortion).dump() << ","
            << io::number(it.density).dump() << "," << (it.exact ? "true" : "false") << "\n";
      }
      emit(out.str(), output);
    } else {
      emit_json(io::to_json(ev), output);
    }
  });
}

measures::ProkhorovMethod parse_method(const std::string& m) {
  if (m == "sweep") return measures::ProkhorovMethod::sweep;
  if (m == "flow") return measures::ProkhorovMethod::flow;
  return measures::ProkhorovMethod::automatic;
}

void add_measure(CLI::App& app) {
  auto* measure = app.add_subcommand("measure", "Probability measures on finite metric spaces")->require_subcommand(1);
  static std::string space, mu_file, nu_file, codomain, table, map_file, action_file, method = "auto", output;
  static std::size_t length = 2;

  auto* uniform = measure->add_subcommand("uniform", "Uniform measure on a space");
  uniform->add_option("--space", space, "Metric-space file or CHAIN.json:LEVEL")->required();
  uniform->add_option("-o,--output", output, "Output file");
  uniform->callback([] {
    require_format({"json"});
    emit_json(io::to_json(measures::uniform(load_metric(space))), output);
  });

  auto* push = measure->add_subcommand("push", "Pushforward along a map");
  push->add_option("--measure", mu_file, "Measure file")->required();
  push->add_option("--codomain", codomain, "Codomain metric space")->required();
  push->add_option("--table", table, "Comma-separated image indices");
  push->add_option("--map", map_file, "JSON file with a \"table\" field");
  push->add_option("-o,--output", output, "Output file");
  push->callback([] {
    require_format({"json"});
    auto mu = io::parse<measures::FiniteMeasure>(io::read_file(mu_file));
    emit_json(io::to_json(measures::pushforward(mu, load_table(table, map_file), load_metric(codomain))), output);
  });

  auto* prok = measure->add_subcommand("prokhorov", "Prokhorov distance between two measures on one space");
  prok->add_option("a", mu_file, "Measure file")->required();
  prok->add_option("b", nu_file, "Measure file")->required();
  prok->add_option("--method", method, "auto, sweep or flow")->check(CLI::IsMember({"auto", "sweep", "flow"}));
  prok->add_option("-o,--output", output, "Output file");
  prok->callback([] {
    require_format({"json"});
    auto a = io::parse<measures::FiniteMeasure>(io::read_file(mu_file));
    auto b = io::parse<measures::FiniteMeasure>(io::read_file(nu_file));
    auto r = measures::prokhorov(a, b, parse_method(method));
    emit_json({{"prokhorov", io::to_json(r)}, {"total_variation", io::number(measures::total_variation(a, b))}}, output);
  });

  auto* defect = measure->add_subcommand("defect", "Invariance defect of a measure under words of length <= L");
  defect->add_option("--measure", mu_file, "Measure file")->required();
  defect->add_option("--action", action_file, "Action file, G-space file, or CHAIN.json:LEVEL")->required();
  defect->add_option("--length", length, "Maximal word length");
  defect->add_option("--method", method, "auto, sweep or flow")->check(CLI::IsMember({"auto", "sweep", "flow"}));
  defect->add_option("-o,--output", output, "Output file");
  defect->callback([] {
    require_format({"json", "csv"});
    auto mu = io::parse<measures::FiniteMeasure>(io::read_file(mu_file));
    measures::GroupAction action;
    if (split_level_ref(action_file)) {
      action = measures::GroupAction::regular(*load_level(action_file));
    } else {
      auto j = io::read_file(action_file);
      action = io::parse<measures::GroupAction>(j.contains("action") ? j.at("action") : j);
    }
    auto rep = measures::invariance_defect(mu, action, length, parse_method(method));
    if (globals.format == "csv") {
      emit(measures::to_csv(rep), output);
    } else {
      emit_json(io::to_json(rep), output);
    }
  });
}

void add_couple(CLI::App& app) {
  auto* couple = app.add_subcommand("couple", "Almost-equivariant maps between G-spaces")->require_subcommand(1);
  static std::string x_ref, y_ref, table, map_file, net_list, f_net, word, subset, suite, output;
  static std::size_t length = 2, count = 1000;
  static double net_radius = 0, epsilon = 0, xi = 0;

  auto* defect = couple->add_subcommand("defect", "Distortion, density and per-word equivariance defect");
  defect->add_option("--x", x_ref, "G-space file or CHAIN.json:LEVEL")->required();
  defect->add_option("--y", y_ref, "G-space file or CHAIN.json:LEVEL")->required();
  defect->add_option("--table", table, "Comma-separated image indices");
  defect->add_option("--map", map_file, "JSON file with a \"table\" field");
  defect->add_option("--length", length, "Maximal word length");
  defect->add_option("-o,--output", output, "Output file");
  defect->callback([] {
    require_format({"json"});
    auto x = load_gspace(x_ref);
    auto y = load_gspace(y_ref);
    emit_json(io::to_json(coupling::equivariant_report(x, y, load_table(table, map_file), length)), output);
  });

  auto* extend = couple->add_subcommand("extend", "Extend a map on a net to the whole space");
  extend->add_option("--x", x_ref, "Domain metric space")->required();
  extend->add_option("--y", y_ref, "Codomain metric space")->required();
  extend->add_option("--net", net_list, "Comma-separated net points")->required();
  extend->add_option("--f-net", f_net, "Comma-separated images of the net points")->required();
  extend->add_option("--net-radius", net_radius, "Covering radius of the net")->required();
  extend->add_option("--epsilon", epsilon, "Isometry constant on the net")->required();
  extend->add_option("-o,--output", output, "Output file");
  extend->callback([] {
    require_format({"json"});
    auto x = load_metric(x_ref);
    auto y = load_metric(y_ref);
    auto e = coupling::extend_from_net(*x, as_sizes(parse_index_list(net_list)), parse_index_list(f_net), *y,
                                       net_radius, epsilon);
    emit_json(io::to_json(e), output);
  });

  auto* check = couple->add_subcommand("check", "Preimage Hausdorff check, or a seeded property suite");
  check->add_option("--x", x_ref, "G-space file or CHAIN.json:LEVEL");
  check->add_option("--y", y_ref, "G-space file or CHAIN.json:LEVEL");
  check->add_option("--table", table, "Comma-separated image indices");
  check->add_option("--map", map_file, "JSON file with a \"table\" field");
  check->add_option("--word", word, "Word g");
  check->add_option("--subset", subset, "Comma-separated subset A of Y");
  check->add_option("--xi", xi, "Isometry and defect constant");
  check->add_option("--suite", suite, "Run a seeded suite instead: preimage or net")
      ->check(CLI::IsMember({"preimage", "net"}));
  check->add_option("--count", count, "Suite size");
  check->add_option("-o,--output", output, "Output file");
  check->callback([] {
    require_format({"json"});
    if (!suite.empty()) {
      auto s = suite == "preimage" ? coupling::preimage_suite(count, globals.seed)
                                   : coupling::net_extension_suite(count, globals.seed);
      emit_json(io::to_json(s), output);
      return;
    }
    if (x_ref.empty() || y_ref.empty() || word.empty() || subset.empty()) {
      throw ValidationError("couple check needs --x, --y, a map, --word and --subset (or --suite)");
    }
    auto x = load_gspace(x_ref);
    auto y = load_gspace(y_ref);
    auto w = x.action.parse_word(word);
    auto rep = coupling::preimage_hausdorff_check(x, y, load_table(table, map_file), w,
                                                  as_sizes(parse_index_list(subset)), xi);
    emit_json(io::to_json(rep), output);
  });
}

void add_pipeline(CLI::App& app) {
  auto* pipe = app.add_subcommand("pipeline", "End-to-end experiments")->require_subcommand(1);
  auto* run = pipe->add_subcommand("run", "Run an experiment config and write its evidence report");
  static std::string config_file, run_dir, output;
  static bool summary = false;
  run->add_option("--config", config_file, "Experiment config (JSON)")->required();
  run->add_option("--run-dir", run_dir, "Directory for intermediate artifacts, report and manifest");
  run->add_option("-o,--output", output, "Report file (default stdout)");
  run->add_flag("--summary", summary, "Print the human-readable summary instead of the JSON report");
  run->callback([] {
    require_format({"json"});
    auto config = pipeline::ExperimentConfig::from_json(io::read_file(config_file));
    if (globals.budget) config.budgets.nodes = *globals.budget;
    std::optional<std::filesystem::path> dir;
    if (!run_dir.empty()) dir = run_dir;
    auto rep = pipeline::run(config, dir);
    emit(summary ? rep.summary : io::dump(rep.document), output);
    if (rep.truncated) throw InfeasibleStage("report truncated: " + rep.truncation_reason);
  });
}

int report_error(const char* kind, const std::string& message, int code) {
  if (globals.error_json) {
    std::cout << io::dump({{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}});
  }
  std::cerr << "boxcouple: " << kind << " error: " << message << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"boxcouple: box spaces, coarse maps and measured couplings at finite scale"};
  app.set_version_flag("--version", std::string("boxcouple ") + kVersion + " (" + kGitRevision + ")");
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--budget", globals.budget, "Override the main search or element budget of the command");
  app.add_option("--threads", globals.threads, "OpenMP worker threads (default: runtime choice)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", globals.seed, "Seed for generated instances");
  app.add_option("--format", globals.format, "Output format: json, csv or dot")
      ->check(CLI::IsMember({"json", "csv", "dot"}));
  app.add_flag("--error-json", globals.error_json, "Also print errors as JSON on stdout");
  app.parse_complete_callback([] {
    if (globals.threads > 0) omp_set_num_threads(globals.threads);
  });

  add_chain(app);
  add_box(app);
  add_maps(app);
  add_limit(app);
  add_gh(app);
  add_measure(app);
  add_couple(app);
  add_pipeline(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return report_error("validation", e.what(), kValidation);
  } catch (const BudgetExceeded& e) {
    return report_error(e.kind(), e.what(), kBudget);
  } catch (const InfeasibleStage& e) {
    return report_error(e.kind(), e.what(), kInfeasible);
  } catch (const ValidationError& e) {
    return report_error(e.kind(), e.what(), kValidation);
  } catch (const json::exception& e) {
    return report_error("validation", e.what(), kValidation);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kInternal);
  }
  return kOk;
}
