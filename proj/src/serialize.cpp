#include "boxcouple/serialize.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "boxcouple/errors.hpp"

namespace boxcouple::io {

namespace {

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed ") + what + ": " + e.what());
  }
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json optional_number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

template <class T>
std::optional<T> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

std::vector<double> flatten_rows(const json& rows, std::size_t n) {
  std::vector<double> out;
  if (rows.size() != n) throw ValidationError("matrix row count does not match the labels");
  for (const auto& row : rows) {
    if (row.size() != n) throw ValidationError("matrix is not square");
    for (const auto& v : row) out.push_back(v.get<double>());
  }
  return out;
}

json rows_of(const std::vector<double>& flat, std::size_t n) {
  json rows = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < n; ++j) row.push_back(number(flat[i * n + j]));
    rows.push_back(std::move(row));
  }
  return rows;
}

json table_json(const std::vector<std::uint32_t>& t) { return json(t); }

}  // namespace

json number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e15) return json(static_cast<std::int64_t>(v));
  return json(v);
}

json read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

std::string dump(const json& value) { return value.dump(2) + "\n"; }

void write_file(const std::filesystem::path& path, const json& value) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << dump(value);
}

// ---- groups ----

json to_json(const groups::MarkedGroup& g) {
  json j;
  switch (g.kind()) {
    case groups::CarrierKind::integers:
      j["kind"] = "integers";
      j["steps"] = g.steps();
      break;
    case groups::CarrierKind::free:
      j["kind"] = "free";
      j["rank"] = g.rank();
      break;
    case groups::CarrierKind::special_linear:
      j["kind"] = "special_linear";
      j["dimension"] = g.dimension();
      break;
  }
  return j;
}

template <>
std::shared_ptr<const groups::MarkedGroup> parse(const json& j) {
  return guarded("group", [&] {
    auto kind = j.at("kind").get<std::string>();
    if (kind == "integers") {
      return std::make_shared<const groups::MarkedGroup>(
          groups::MarkedGroup::integers(j.at("steps").get<std::vector<std::int64_t>>()));
    }
    if (kind == "free") {
      return std::make_shared<const groups::MarkedGroup>(groups::MarkedGroup::free_group(j.at("rank").get<std::size_t>()));
    }
    if (kind == "special_linear") {
      return std::make_shared<const groups::MarkedGroup>(
          groups::MarkedGroup::special_linear(j.at("dimension").get<std::size_t>()));
    }
    throw ValidationError("unknown group kind '" + kind + "'");
  });
}

json to_json(const groups::QuotientCarrier& c) {
  json j;
  using K = groups::QuotientCarrier::Kind;
  switch (c.kind) {
    case K::residues:
      j["kind"] = "residues";
      j["modulus"] = c.modulus;
      break;
    case K::matrices:
      j["kind"] = "matrices";
      j["dimension"] = c.dimension;
      j["modulus"] = c.modulus;
      break;
    case K::permutations:
      j["kind"] = "permutations";
      j["letter_images"] = c.letter_images;
      break;
  }
  return j;
}

template <>
groups::QuotientCarrier parse(const json& j) {
  return guarded("carrier", [&] {
    auto kind = j.at("kind").get<std::string>();
    if (kind == "residues") return groups::QuotientCarrier::residues(j.at("modulus").get<std::int64_t>());
    if (kind == "matrices") {
      return groups::QuotientCarrier::matrices(j.at("dimension").get<std::size_t>(), j.at("modulus").get<std::int64_t>());
    }
    if (kind == "permutations") {
      return groups::QuotientCarrier::permutations(
          j.at("letter_images").get<std::vector<std::vector<std::vector<std::int32_t>>>>());
    }
    throw ValidationError("unknown carrier kind '" + kind + "'");
  });
}

json to_json(const groups::FiniteQuotient& q) {
  json j;
  j["group"] = to_json(q.parent());
  j["level"] = q.level();
  j["carrier"] = to_json(q.carrier());
  j["order"] = q.order();
  json elements = json::array();
  for (std::size_t i = 0; i < q.order(); ++i) {
    auto k = q.key(i);
    elements.push_back(std::vector<std::int32_t>(k.begin(), k.end()));
  }
  j["elements"] = std::move(elements);
  return j;
}

namespace {

std::shared_ptr<const groups::FiniteQuotient> quotient_with(const json& j,
                                                           std::shared_ptr<const groups::MarkedGroup> group) {
  return guarded("quotient", [&] {
    auto carrier = parse<groups::QuotientCarrier>(j.at("carrier"));
    auto elements = j.at("elements").get<std::vector<groups::Key>>();
    if (j.contains("order") && j.at("order").get<std::size_t>() != elements.size()) {
      throw ValidationError("stored order does not match the element list");
    }
    return std::make_shared<const groups::FiniteQuotient>(
        groups::FiniteQuotient::from_elements(std::move(group), j.at("level").get<std::size_t>(), carrier, elements));
  });
}

}  // namespace

template <>
std::shared_ptr<const groups::FiniteQuotient> parse(const json& j) {
  return quotient_with(j, parse<std::shared_ptr<const groups::MarkedGroup>>(j.at("group")));
}

json to_json(const groups::NormalChain& chain) {
  json j;
  j["format"] = "boxcouple.chain";
  j["family"] = chain.family;
  j["group"] = to_json(*chain.group);
  j["depth"] = chain.depth();
  json levels = json::array();
  for (const auto& q : chain.quotients) {
    auto lj = to_json(*q);
    lj.erase("group");
    levels.push_back(std::move(lj));
  }
  j["quotients"] = std::move(levels);
  return j;
}

template <>
groups::NormalChain parse(const json& j) {
  return guarded("chain", [&] {
    groups::NormalChain chain;
    chain.family = j.at("family").get<std::string>();
    chain.group = parse<std::shared_ptr<const groups::MarkedGroup>>(j.at("group"));
    for (const auto& lj : j.at("quotients")) chain.quotients.push_back(quotient_with(lj, chain.group));
    if (j.contains("depth") && j.at("depth").get<std::size_t>() != chain.quotients.size()) {
      throw ValidationError("chain depth does not match the stored levels");
    }
    for (std::size_t i = 1; i < chain.quotients.size(); ++i) {
      chain.connecting_maps.push_back(groups::connecting_map(*chain.quotients[i], *chain.quotients[i - 1]));
    }
    groups::validate_chain(chain);
    return chain;
  });
}

namespace {

bool same_quotient(const groups::FiniteQuotient& a, const groups::FiniteQuotient& b) {
  if (!(a.parent() == b.parent()) || a.level() != b.level() || !(a.carrier() == b.carrier()) || a.order() != b.order()) {
    return false;
  }
  for (std::size_t i = 0; i < a.order(); ++i) {
    auto ka = a.key(i);
    auto kb = b.key(i);
    if (!std::equal(ka.begin(), ka.end(), kb.begin(), kb.end())) return false;
  }
  return a.generator_images() == b.generator_images();
}

}  // namespace

bool same_chain(const groups::NormalChain& a, const groups::NormalChain& b) {
  if (a.family != b.family || !(*a.group == *b.group) || a.depth() != b.depth()) return false;
  for (std::size_t i = 0; i < a.depth(); ++i) {
    if (!same_quotient(*a.quotients[i], *b.quotients[i])) return false;
  }
  return a.connecting_maps == b.connecting_maps;
}

bool same_space(const coarse::GroupSpace& a, const coarse::GroupSpace& b) {
  return a.tags() == b.tags() && same_quotient(a.base(), b.base());
}

// ---- metric spaces and coarse ----

json to_json(const FiniteMetricSpace& space) {
  json j;
  j["labels"] = space.labels();
  j["matrix"] = rows_of(space.matrix(), space.size());
  return j;
}

template <>
FiniteMetricSpace parse(const json& j) {
  return guarded("metric space", [&] {
    auto labels = j.at("labels").get<std::vector<std::string>>();
    auto flat = flatten_rows(j.at("matrix"), labels.size());
    return FiniteMetricSpace(std::move(labels), std::move(flat));
  });
}

json to_json(const coarse::GroupSpace& space) {
  json j;
  j["quotient"] = to_json(space.base());
  j["tags"] = space.tags();
  return j;
}

template <>
std::shared_ptr<const coarse::GroupSpace> parse(const json& j) {
  return guarded("group space", [&] {
    auto q = parse<std::shared_ptr<const groups::FiniteQuotient>>(j.at("quotient"));
    auto tags = j.value("tags", std::size_t{1});
    return tags == 1 ? coarse::GroupSpace::from_quotient(q) : coarse::GroupSpace::tag_product(q, tags);
  });
}

json to_json(const coarse::MapRecord& f) {
  json j;
  j["domain"] = to_json(*f.domain);
  j["codomain"] = to_json(*f.codomain);
  j["table"] = table_json(f.table);
  return j;
}

template <>
coarse::MapRecord parse(const json& j) {
  return guarded("map", [&] {
    coarse::MapRecord f{parse<std::shared_ptr<const coarse::GroupSpace>>(j.at("domain")),
                        parse<std::shared_ptr<const coarse::GroupSpace>>(j.at("codomain")),
                        j.at("table").get<coarse::Table>()};
    f.check();
    return f;
  });
}

json to_json(const coarse::MapSpace& space) {
  json j;
  j["format"] = "boxcouple.map_space";
  j["domain_ref"] = space.domain_ref;
  j["codomain_ref"] = space.codomain_ref;
  j["controls"] = space.controls.to_string();
  j["basepointed"] = space.basepointed;
  j["injective_required"] = space.injective_required;
  j["complete"] = space.complete;
  j["nodes"] = space.nodes;
  j["budget"] = space.budget;
  j["count"] = space.members.size();
  j["members"] = space.members;
  j["domain"] = to_json(*space.domain);
  j["codomain"] = to_json(*space.codomain);
  return j;
}

template <>
coarse::MapSpace parse(const json& j) {
  return guarded("map space", [&] {
    coarse::MapSpace s;
    s.domain = parse<std::shared_ptr<const coarse::GroupSpace>>(j.at("domain"));
    s.codomain = parse<std::shared_ptr<const coarse::GroupSpace>>(j.at("codomain"));
    s.controls = coarse::ControlData::parse(j.at("controls").get<std::string>());
    s.basepointed = j.at("basepointed").get<bool>();
    s.injective_required = j.at("injective_required").get<bool>();
    s.complete = j.at("complete").get<bool>();
    s.nodes = j.at("nodes").get<std::uint64_t>();
    s.budget = j.at("budget").get<std::uint64_t>();
    s.domain_ref = j.value("domain_ref", std::string());
    s.codomain_ref = j.value("codomain_ref", std::string());
    s.members = j.at("members").get<std::vector<coarse::Table>>();
    for (const auto& t : s.members) coarse::MapRecord{s.domain, s.codomain, t}.check();
    if (!std::is_sorted(s.members.begin(), s.members.end())) throw ValidationError("members are not in canonical order");
    return s;
  });
}

json to_json(const coarse::VerifyReport& r) {
  json j;
  j["mode"] = r.mode == coarse::Mode::embedding ? "embedding" : "equivalence";
  j["passed"] = r.passed();
  j["embedding"] = r.embedding;
  j["equivalence"] = r.equivalence;
  if (r.violation) {
    j["violation"] = {{"x1", r.violation->x1},
                      {"x2", r.violation->x2},
                      {"domain_distance", r.violation->domain_distance},
                      {"image_distance", r.violation->image_distance},
                      {"side", r.violation->lower_bound ? "rho_minus" : "rho_plus"}};
  } else {
    j["violation"] = nullptr;
  }
  j["uncovered"] = optional_json(r.uncovered);
  j["distortion"] = r.distortion;
  j["density_radius"] = r.density_radius;
  return j;
}

template <>
coarse::VerifyReport parse(const json& j) {
  return guarded("verify report", [&] {
    coarse::VerifyReport r;
    r.mode = j.at("mode").get<std::string>() == "embedding" ? coarse::Mode::embedding : coarse::Mode::equivalence;
    r.embedding = j.at("embedding").get<bool>();
    r.equivalence = j.at("equivalence").get<bool>();
    if (!j.at("violation").is_null()) {
      const auto& v = j.at("violation");
      r.violation = coarse::PairWitness{v.at("x1").get<std::size_t>(), v.at("x2").get<std::size_t>(),
                                        v.at("domain_distance").get<std::int64_t>(),
                                        v.at("image_distance").get<std::int64_t>(),
                                        v.at("side").get<std::string>() == "rho_minus"};
    }
    r.uncovered = optional_from<std::size_t>(j, "uncovered");
    r.distortion = j.at("distortion").get<std::int64_t>();
    r.density_radius = j.at("density_radius").get<std::int64_t>();
    return r;
  });
}

json to_json(const coarse::EpsNet& net) {
  const auto& c = net.certificate;
  json cert;
  cert["radius"] = c.radius;
  cert["members"] = c.members;
  cert["net_size"] = c.net_size;
  cert["net_property"] = c.net_property;
  cert["max_distance_to_net"] = number(c.max_distance_to_net);
  cert["generators_domain"] = c.generators_domain;
  cert["generators_codomain"] = c.generators_codomain;
  cert["rho_plus_ceiling"] = c.rho_plus_ceiling;
  cert["stated_bound"] = c.bound;
  cert["stated_bound_saturated"] = c.bound_saturated;
  cert["stated_bound_ok"] = c.cardinality_ok;
  cert["corrected_bound"] = c.corrected_bound;
  cert["corrected_bound_saturated"] = c.corrected_saturated;
  cert["corrected_bound_ok"] = c.corrected_ok;
  json j;
  j["certificate"] = std::move(cert);
  j["net"] = net.net;
  j["fiber_of"] = net.fiber_of;
  return j;
}

template <>
coarse::EpsNet parse(const json& j) {
  return guarded("net", [&] {
    coarse::EpsNet net;
    net.net = j.at("net").get<std::vector<std::size_t>>();
    net.fiber_of = j.at("fiber_of").get<std::vector<std::size_t>>();
    const auto& c = j.at("certificate");
    auto& out = net.certificate;
    out.radius = c.at("radius").get<std::int64_t>();
    out.members = c.at("members").get<std::size_t>();
    out.net_size = c.at("net_size").get<std::size_t>();
    out.net_property = c.at("net_property").get<bool>();
    out.max_distance_to_net = c.at("max_distance_to_net").get<double>();
    out.generators_domain = c.at("generators_domain").get<std::size_t>();
    out.generators_codomain = c.at("generators_codomain").get<std::size_t>();
    out.rho_plus_ceiling = c.at("rho_plus_ceiling").get<std::int64_t>();
    out.bound = c.at("stated_bound").get<std::uint64_t>();
    out.bound_saturated = c.at("stated_bound_saturated").get<bool>();
    out.cardinality_ok = c.at("stated_bound_ok").get<bool>();
    out.corrected_bound = c.at("corrected_bound").get<std::uint64_t>();
    out.corrected_saturated = c.at("corrected_bound_saturated").get<bool>();
    out.corrected_ok = c.at("corrected_bound_ok").get<bool>();
    return net;
  });
}

json to_json(const coarse::ActResult& r) {
  json j;
  j["table"] = table_json(r.table);
  j["member"] = optional_json(r.member);
  j["report"] = to_json(r.report);
  return j;
}

// ---- limits ----

json to_json(const limits::PartialMap& pm) {
  json j;
  j["format"] = "boxcouple.partial_map";
  j["source"] = to_json(*pm.source);
  j["target"] = to_json(*pm.target);
  j["radius"] = pm.radius;
  json entries = json::array();
  for (std::size_t i = 0; i < pm.domain.size(); ++i) {
    entries.push_back({{"element", pm.domain[i].element},
                       {"distance", pm.domain[i].distance},
                       {"image", pm.images[i]},
                       {"element_text", pm.source->format(pm.domain[i].element)},
                       {"image_text", pm.target->format(pm.images[i])}});
  }
  j["entries"] = std::move(entries);
  j["provenance"] = pm.provenance;
  return j;
}

template <>
limits::PartialMap parse(const json& j) {
  return guarded("partial map", [&] {
    limits::PartialMap pm;
    pm.source = parse<std::shared_ptr<const groups::MarkedGroup>>(j.at("source"));
    pm.target = parse<std::shared_ptr<const groups::MarkedGroup>>(j.at("target"));
    pm.radius = j.at("radius").get<std::int64_t>();
    for (const auto& e : j.at("entries")) {
      pm.domain.push_back({e.at("element").get<groups::Element>(), e.at("distance").get<std::int64_t>()});
      pm.images.push_back(e.at("image").get<groups::Element>());
    }
    pm.provenance = j.at("provenance").get<std::vector<std::vector<std::size_t>>>();
    return pm;
  });
}

json to_json(const limits::PartialReport& r) {
  json j;
  j["passed"] = r.passed;
  if (r.violation) {
    j["violation"] = {{"first", r.violation->first},
                      {"second", r.violation->second},
                      {"domain_distance", r.domain_distance},
                      {"image_distance", r.image_distance}};
  } else {
    j["violation"] = nullptr;
  }
  j["density_radius"] = r.density_radius;
  j["target_radius"] = r.target_radius;
  return j;
}

template <>
limits::PartialReport parse(const json& j) {
  return guarded("partial map report", [&] {
    limits::PartialReport r;
    r.passed = j.at("passed").get<bool>();
    if (!j.at("violation").is_null()) {
      const auto& v = j.at("violation");
      r.violation = std::pair{v.at("first").get<std::size_t>(), v.at("second").get<std::size_t>()};
      r.domain_distance = v.at("domain_distance").get<std::int64_t>();
      r.image_distance = v.at("image_distance").get<std::int64_t>();
    }
    r.density_radius = j.at("density_radius").get<std::int64_t>();
    r.target_radius = j.at("target_radius").get<std::int64_t>();
    return r;
  });
}

// ---- ghmetric ----

json to_json(const gh::GHResult& r) {
  json j;
  j["lower"] = number(r.lower);
  j["upper"] = number(r.upper);
  j["exact"] = r.exact;
  j["nodes"] = r.nodes;
  if (r.witness) {
    j["witness"] = {{"forward", r.witness->forward}, {"backward", r.witness->backward}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

template <>
gh::GHResult parse(const json& j) {
  return guarded("GH result", [&] {
    gh::GHResult r;
    r.lower = j.at("lower").get<double>();
    r.upper = j.at("upper").get<double>();
    r.exact = j.at("exact").get<bool>();
    r.nodes = j.value("nodes", std::uint64_t{0});
    if (j.contains("witness") && !j.at("witness").is_null()) {
      r.witness = gh::Correspondence{j.at("witness").at("forward").get<std::vector<std::uint32_t>>(),
                                     j.at("witness").at("backward").get<std::vector<std::uint32_t>>()};
    }
    if (r.lower > r.upper) throw ValidationError("GH result has lower > upper");
    return r;
  });
}

json to_json(const gh::IsometryReport& r) {
  json j;
  j["passed"] = r.passed;
  j["epsilon"] = number(r.epsilon);
  j["distortion"] = number(r.distortion);
  j["density"] = number(r.density);
  j["witness"] = r.witness ? json::array({r.witness->first, r.witness->second}) : json(nullptr);
  j["uncovered"] = optional_json(r.uncovered);
  return j;
}

json to_json(const gh::EvidenceItem& item) {
  json j;
  j["epsilon"] = number(item.epsilon);
  j["distortion"] = number(item.distortion);
  j["density"] = number(item.density);
  j["exact"] = item.exact;
  j["map"] = item.map;
  return j;
}

template <>
gh::EvidenceItem parse(const json& j) {
  return guarded("evidence item", [&] {
    gh::EvidenceItem item;
    item.epsilon = j.at("epsilon").get<double>();
    item.distortion = j.at("distortion").get<double>();
    item.density = j.at("density").get<double>();
    item.exact = j.at("exact").get<bool>();
    item.map = j.at("map").get<std::vector<std::uint32_t>>();
    return item;
  });
}

json to_json(const gh::ConvergenceEvidence& ev) {
  json j;
  json items = json::array();
  for (const auto& item : ev.items) items.push_back(to_json(item));
  j["items"] = std::move(items);
  j["nonincreasing"] = ev.nonincreasing;
  j["caveat"] = ev.caveat;
  return j;
}

template <>
gh::ConvergenceEvidence parse(const json& j) {
  return guarded("convergence evidence", [&] {
    gh::ConvergenceEvidence ev;
    for (const auto& item : j.at("items")) ev.items.push_back(parse<gh::EvidenceItem>(item));
    ev.nonincreasing = j.at("nonincreasing").get<bool>();
    ev.caveat = j.at("caveat").get<std::string>();
    return ev;
  });
}

// ---- measures ----

json to_json(const measures::GroupAction& action) {
  json j;
  j["size"] = action.size();
  json gens = json::array();
  for (std::size_t i = 0; i < action.generator_count(); ++i) {
    gens.push_back({{"symbol", action.symbols()[i]},
                    {"inverse", action.inverse_of(i)},
                    {"permutation", action.permutation(i)}});
  }
  j["generators"] = std::move(gens);
  return j;
}

template <>
measures::GroupAction parse(const json& j) {
  return guarded("group action", [&] {
    std::vector<std::string> symbols;
    std::vector<std::size_t> inverse;
    std::vector<std::vector<std::uint32_t>> perms;
    for (const auto& g : j.at("generators")) {
      symbols.push_back(g.at("symbol").get<std::string>());
      inverse.push_back(g.at("inverse").get<std::size_t>());
      perms.push_back(g.at("permutation").get<std::vector<std::uint32_t>>());
    }
    return measures::GroupAction(j.at("size").get<std::size_t>(), std::move(symbols), std::move(inverse),
                                 std::move(perms));
  });
}

json to_json(const measures::FiniteMeasure& mu) {
  json j;
  j["space"] = to_json(mu.space());
  json weights = json::object();
  for (std::size_t i = 0; i < mu.size(); ++i) weights[mu.space().labels()[i]] = number(mu[i]);
  j["weights"] = std::move(weights);
  return j;
}

template <>
measures::FiniteMeasure parse(const json& j) {
  return guarded("measure", [&] {
    auto space = std::make_shared<const FiniteMetricSpace>(parse<FiniteMetricSpace>(j.at("space")));
    const auto& wj = j.at("weights");
    std::vector<double> w(space->size(), 0);
    if (wj.is_array()) {
      w = wj.get<std::vector<double>>();
    } else {
      if (wj.size() != space->size()) throw ValidationError("weights must name every point exactly once");
      for (std::size_t i = 0; i < space->size(); ++i) {
        const auto& label = space->labels()[i];
        if (!wj.contains(label)) throw ValidationError("no weight for point '" + label + "'");
        w[i] = wj.at(label).get<double>();
      }
    }
    return measures::FiniteMeasure(space, std::move(w));
  });
}

json to_json(const measures::ProkhorovResult& r) {
  json j;
  j["value"] = number(r.value);
  j["exact"] = r.exact;
  j["method"] = r.method;
  return j;
}

json to_json(const measures::DefectReport& r) {
  json j;
  j["max_tv"] = number(r.max_tv);
  j["max_prokhorov"] = number(r.max_prokhorov);
  j["worst_word"] = r.worst_word;
  j["exact"] = r.exact;
  json rows = json::array();
  for (const auto& row : r.rows) rows.push_back({{"word", row.word}, {"tv", number(row.tv)}, {"prokhorov", number(row.prokhorov)}});
  j["rows"] = std::move(rows);
  return j;
}

template <>
measures::DefectReport parse(const json& j) {
  return guarded("defect report", [&] {
    measures::DefectReport r;
    r.max_tv = j.at("max_tv").get<double>();
    r.max_prokhorov = j.at("max_prokhorov").get<double>();
    r.worst_word = j.at("worst_word").get<std::string>();
    r.exact = j.at("exact").get<bool>();
    for (const auto& row : j.at("rows")) {
      r.rows.push_back({row.at("word").get<std::string>(), row.at("tv").get<double>(), row.at("prokhorov").get<double>()});
    }
    return r;
  });
}

json to_json(const measures::WeakStarEvidence& ev) {
  json j;
  j["limit"] = to_json(ev.limit);
  json table = json::array();
  for (const auto& row : ev.table) {
    json r = json::array();
    for (double v : row) r.push_back(number(v));
    table.push_back(std::move(r));
  }
  j["table"] = std::move(table);
  json env = json::array();
  for (double v : ev.envelope) env.push_back(number(v));
  j["envelope"] = std::move(env);
  j["cauchy"] = ev.cauchy;
  j["exact"] = ev.exact;
  return j;
}

// ---- coupling ----

json to_json(const coupling::GSpace& space) {
  json j;
  j["space"] = to_json(*space.space);
  j["action"] = to_json(space.action);
  return j;
}

template <>
coupling::GSpace parse(const json& j) {
  return guarded("G-space", [&] {
    coupling::GSpace s{std::make_shared<const FiniteMetricSpace>(parse<FiniteMetricSpace>(j.at("space"))),
                       parse<measures::GroupAction>(j.at("action"))};
    s.check();
    return s;
  });
}

json to_json(const coupling::EquivariantMapReport& r) {
  json j;
  j["epsilon"] = number(r.epsilon);
  j["distortion"] = number(r.distortion);
  j["density"] = number(r.density);
  j["max_defect"] = number(r.max_defect);
  json rows = json::array();
  for (const auto& row : r.xi_per_word) rows.push_back({{"word", row.word}, {"defect", number(row.defect)}});
  j["xi_per_word"] = std::move(rows);
  return j;
}

json to_json(const coupling::Extension& e) {
  json j;
  j["table"] = e.table;
  j["anchor"] = e.anchor;
  j["net_radius"] = number(e.net_radius);
  j["epsilon"] = number(e.epsilon);
  j["distortion"] = number(e.distortion);
  j["density"] = number(e.density);
  j["bound"] = number(e.bound);
  j["within_bound"] = e.within_bound;
  return j;
}

template <>
coupling::Extension parse(const json& j) {
  return guarded("extension", [&] {
    coupling::Extension e;
    e.table = j.at("table").get<coupling::Table>();
    e.anchor = j.at("anchor").get<std::vector<std::size_t>>();
    e.net_radius = j.at("net_radius").get<double>();
    e.epsilon = j.at("epsilon").get<double>();
    e.distortion = j.at("distortion").get<double>();
    e.density = j.at("density").get<double>();
    e.bound = j.at("bound").get<double>();
    e.within_bound = j.at("within_bound").get<bool>();
    return e;
  });
}

json to_json(const coupling::PreimageReport& r) {
  json j;
  j["status"] = coupling::to_string(r.status);
  j["measured"] = number(r.measured);
  j["bound"] = number(r.bound);
  j["xi"] = number(r.xi);
  j["distortion"] = number(r.distortion);
  j["density"] = number(r.density);
  j["defect"] = number(r.defect);
  j["image_compatible"] = r.image_compatible;
  j["reason"] = r.reason;
  return j;
}

template <>
coupling::PreimageReport parse(const json& j) {
  return guarded("preimage report", [&] {
    coupling::PreimageReport r;
    auto status = j.at("status").get<std::string>();
    using S = coupling::PreimageStatus;
    if (status == "pass") {
      r.status = S::pass;
    } else if (status == "fail") {
      r.status = S::fail;
    } else if (status == "vacuous") {
      r.status = S::vacuous;
    } else if (status == "inapplicable") {
      r.status = S::inapplicable;
    } else {
      throw ValidationError("unknown preimage status '" + status + "'");
    }
    r.measured = j.at("measured").get<double>();
    r.bound = j.at("bound").get<double>();
    r.xi = j.at("xi").get<double>();
    r.distortion = j.at("distortion").get<double>();
    r.density = j.at("density").get<double>();
    r.defect = j.at("defect").get<double>();
    r.image_compatible = j.at("image_compatible").get<bool>();
    r.reason = j.at("reason").get<std::string>();
    return r;
  });
}

json to_json(const coupling::SuiteSummary& s) {
  json j;
  j["instances"] = s.instances;
  j["passed"] = s.passed;
  j["violations"] = s.violations;
  j["skipped"] = s.skipped;
  j["worst_ratio"] = number(s.worst_ratio);
  j["first_violation_seed"] = optional_json(s.first_violation_seed);
  return j;
}

// ---- boxspace ----

json to_json(const box::GraphDiagnostics& d) {
  json j;
  j["level"] = d.level;
  j["order"] = d.order;
  j["degree"] = d.degree;
  j["diameter"] = d.diameter;
  j["girth"] = d.girth_infinite ? json("inf") : json(d.girth);
  j["lambda1"] = optional_number(d.lambda1);
  j["lambda1_lo"] = number(d.lambda1_lo);
  j["lambda1_hi"] = number(d.lambda1_hi);
  j["lambda_method"] = d.lambda_method;
  j["residual"] = number(d.residual);
  j["cheeger_exact"] = d.cheeger_exact;
  j["cheeger"] = d.cheeger_exact ? json::array({d.cheeger_num, d.cheeger_den}) : json(nullptr);
  j["cheeger_lo"] = number(d.cheeger_lo);
  j["cheeger_hi"] = number(d.cheeger_hi);
  j["degraded"] = d.degraded;
  j["multi_edges_collapsed"] = d.multi_edges_collapsed;
  j["note"] = d.note;
  return j;
}

template <>
box::GraphDiagnostics parse(const json& j) {
  return guarded("diagnostics", [&] {
    box::GraphDiagnostics d;
    d.level = j.at("level").get<std::size_t>();
    d.order = j.at("order").get<std::size_t>();
    d.degree = j.at("degree").get<std::size_t>();
    d.diameter = j.at("diameter").get<std::int32_t>();
    if (j.at("girth").is_string()) {
      d.girth_infinite = true;
    } else {
      d.girth = j.at("girth").get<std::int64_t>();
    }
    d.lambda1 = optional_from<double>(j, "lambda1");
    d.lambda1_lo = j.at("lambda1_lo").get<double>();
    d.lambda1_hi = j.at("lambda1_hi").get<double>();
    d.lambda_method = j.at("lambda_method").get<std::string>();
    d.residual = j.at("residual").get<double>();
    d.cheeger_exact = j.at("cheeger_exact").get<bool>();
    if (d.cheeger_exact) {
      d.cheeger_num = j.at("cheeger").at(0).get<std::int64_t>();
      d.cheeger_den = j.at("cheeger").at(1).get<std::int64_t>();
    }
    d.cheeger_lo = j.at("cheeger_lo").get<double>();
    d.cheeger_hi = j.at("cheeger_hi").get<double>();
    d.degraded = j.at("degraded").get<bool>();
    d.multi_edges_collapsed = j.at("multi_edges_collapsed").get<bool>();
    d.note = j.at("note").get<std::string>();
    return d;
  });
}

json to_json(const box::ExpanderReport& r) {
  json j;
  j["family"] = r.family;
  j["caveat"] = r.caveat;
  j["min_lambda1"] = optional_number(r.min_lambda1);
  j["min_level"] = r.min_level;
  json levels = json::array();
  for (const auto& d : r.levels) levels.push_back(to_json(d));
  j["levels"] = std::move(levels);
  return j;
}

template <>
box::ExpanderReport parse(const json& j) {
  return guarded("expander report", [&] {
    box::ExpanderReport r;
    r.family = j.at("family").get<std::string>();
    r.caveat = j.at("caveat").get<std::string>();
    r.min_lambda1 = optional_from<double>(j, "min_lambda1");
    r.min_level = j.at("min_level").get<std::size_t>();
    for (const auto& d : j.at("levels")) r.levels.push_back(parse<box::GraphDiagnostics>(d));
    return r;
  });
}

}  // namespace boxcouple::io
