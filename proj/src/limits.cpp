#include "boxcouple/limits.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <unordered_map>

#include "boxcouple/errors.hpp"

namespace boxcouple::limits {

namespace {

using groups::Element;
using groups::ElementHash;

struct Radii {
  std::int64_t source = 0;
  std::int64_t target = 0;
};

Radii radii(const coarse::MapRecord& phi, std::int64_t source_max, std::int64_t target_max, std::size_t budget) {
  const auto& gq = phi.domain->base();
  const auto& hq = phi.codomain->base();
  return {groups::injectivity_radius(gq.parent(), gq, source_max, budget).radius,
          groups::injectivity_radius(hq.parent(), hq, target_max, budget).radius};
}

void check_map(const coarse::MapRecord& phi) {
  phi.check();
  if (phi.domain->tags() != 1 || phi.codomain->tags() != 1) {
    throw ValidationError("lifting needs untagged quotient spaces on both sides");
  }
  if (phi.table[0] != 0) throw ValidationError("lifting needs a basepointed map");
}

}  // namespace

std::optional<std::size_t> PartialMap::index_of(const Element& x) const {
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (domain[i].element == x) return i;
  }
  return std::nullopt;
}

PartialMap PartialMap::restrict(std::int64_t r) const {
  if (r < 0 || r > radius) throw ValidationError("restriction radius out of range");
  PartialMap out;
  out.source = source;
  out.target = target;
  out.radius = r;
  for (std::size_t i = 0; i < domain.size() && domain[i].distance <= r; ++i) {
    out.domain.push_back(domain[i]);
    out.images.push_back(images[i]);
  }
  out.provenance.assign(provenance.begin(), provenance.begin() + std::min<std::ptrdiff_t>(r + 1, static_cast<std::ptrdiff_t>(provenance.size())));
  return out;
}

std::int64_t index_shift(std::int64_t r, std::int64_t inverse_length, const coarse::ControlFunction& rho_plus) {
  std::int64_t base = r + inverse_length;
  return std::max(base, rho_plus(Rational(base)).ceil());
}

Lift lift(const coarse::MapRecord& phi, std::int64_t r, const coarse::ControlData& controls, std::size_t budget) {
  check_map(phi);
  if (r < 0) throw ValidationError("lift radius must be nonnegative");
  const std::int64_t target_r = std::max<std::int64_t>(controls.rho_plus(Rational(r)).ceil(), 0);
  auto achieved = radii(phi, r, target_r, budget);
  if (achieved.source < r) {
    throw ValidationError("source injectivity radius " + std::to_string(achieved.source) + " at level " +
                          std::to_string(phi.domain->base().level()) + " is below the lift radius " + std::to_string(r));
  }
  if (achieved.target < target_r) {
    throw ValidationError("target injectivity radius " + std::to_string(achieved.target) + " at level " +
                          std::to_string(phi.codomain->base().level()) + " is below ceil(rho_plus(" +
                          std::to_string(r) + ")) = " + std::to_string(target_r));
  }
  const auto& gq = phi.domain->base();
  const auto& hq = phi.codomain->base();
  Lift out;
  out.ball = groups::ball_in_group(gq.parent(), r, budget);
  auto target_ball = groups::ball_in_group(hq.parent(), target_r, budget);
  std::unordered_map<std::size_t, std::size_t> preimage;
  for (std::size_t i = 0; i < target_ball.size(); ++i) preimage.emplace(hq.project(target_ball[i].element), i);
  for (const auto& entry : out.ball) {
    std::size_t y = phi.table[gq.project(entry.element)];
    auto it = preimage.find(y);
    if (it == preimage.end()) {
      throw ValidationError("image of " + gq.parent().format(entry.element) + " escapes the target ball of radius " +
                            std::to_string(target_r) + " (the level map violates rho_plus)");
    }
    out.images.push_back(target_ball[it->second].element);
  }
  return out;
}

std::int64_t liftable_radius(const coarse::MapRecord& phi, std::int64_t r_max, const coarse::ControlData& controls,
                             std::size_t budget) {
  check_map(phi);
  const std::int64_t target_max = std::max<std::int64_t>(controls.rho_plus(Rational(r_max)).ceil(), 0);
  auto achieved = radii(phi, r_max, target_max, budget);
  std::int64_t r = std::min(r_max, achieved.source);
  while (r > 0 && controls.rho_plus(Rational(r)).ceil() > achieved.target) --r;
  return r;
}

PartialMap diagonal_limit(const std::vector<LevelMap>& maps, const coarse::ControlData& controls, std::int64_t radius,
                          std::size_t budget) {
  if (maps.empty()) throw ValidationError("diagonal limit needs at least one level map");
  if (radius < 0) throw ValidationError("radius must be nonnegative");
  const std::size_t count = maps.size();
  std::vector<std::int64_t> reach(count, 0);
  std::vector<Lift> lifts(count);
  std::vector<std::string> failures(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < count; ++i) {
    try {
      reach[i] = liftable_radius(maps[i].map, radius, controls, budget);
      lifts[i] = lift(maps[i].map, reach[i], controls, budget);
    } catch (const Error& e) {
      failures[i] = e.what();
      reach[i] = -1;
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!failures[i].empty()) throw ValidationError("level " + std::to_string(maps[i].level) + ": " + failures[i]);
  }
  if (*std::max_element(reach.begin(), reach.end()) < radius) {
    throw InfeasibleStage("radius " + std::to_string(radius) + " exceeds every level's liftable radius (best " +
                          std::to_string(*std::max_element(reach.begin(), reach.end())) + ")");
  }

  PartialMap out;
  out.source = maps.front().map.domain->base().parent_ptr();
  out.target = maps.front().map.codomain->base().parent_ptr();
  std::vector<std::size_t> surviving(count);
  for (std::size_t i = 0; i < count; ++i) surviving[i] = i;
  auto levels_of = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::size_t> lv;
    for (auto i : idx) lv.push_back(maps[i].level);
    return lv;
  };
  out.provenance.push_back(levels_of(surviving));

  for (std::int64_t r = 1; r <= radius; ++r) {
    // Group liftable survivors by their restriction to B_r, keeping first-seen order.
    std::vector<std::vector<std::size_t>> classes;
    std::vector<const Lift*> representative;
    for (auto i : surviving) {
      if (reach[i] < r) continue;
      const Lift& li = lifts[i];
      std::size_t ball = 0;
      while (ball < li.ball.size() && li.ball[ball].distance <= r) ++ball;
      bool placed = false;
      for (std::size_t c = 0; c < classes.size() && !placed; ++c) {
        const Lift& rep = *representative[c];
        if (std::equal(li.images.begin(), li.images.begin() + static_cast<std::ptrdiff_t>(ball), rep.images.begin())) {
          classes[c].push_back(i);
          placed = true;
        }
      }
      if (!placed) {
        classes.push_back({i});
        representative.push_back(&li);
      }
    }
    if (classes.empty()) {
      throw InfeasibleStage("no surviving level is liftable at radius " + std::to_string(r));
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes.size(); ++c) {
      if (classes[c].size() > classes[best].size()) best = c;
    }
    surviving = classes[best];
    out.provenance.push_back(levels_of(surviving));
  }

  const Lift& chosen = lifts[surviving.front()];
  out.radius = radius;
  for (std::size_t i = 0; i < chosen.ball.size() && chosen.ball[i].distance <= radius; ++i) {
    out.domain.push_back(chosen.ball[i]);
    out.images.push_back(chosen.images[i]);
  }
  return out;
}

PartialReport verify_partial(const PartialMap& pm, const coarse::ControlData& controls, std::size_t budget) {
  const auto& G = *pm.source;
  const auto& H = *pm.target;
  const std::size_t n = pm.domain.size();
  const std::int64_t search = 4 * std::max<std::int64_t>(pm.radius, 1) + 4;
  PartialReport report;
  std::vector<std::optional<std::pair<std::size_t, std::int64_t>>> first(n);
  std::vector<std::pair<std::int64_t, std::int64_t>> witness(n);
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic, 2)
  for (std::size_t a = 0; a < n; ++a) {
    try {
      auto ga = G.inverse(pm.domain[a].element);
      auto ha = H.inverse(pm.images[a]);
      for (std::size_t b = a + 1; b < n && !first[a]; ++b) {
        std::int64_t t = groups::word_length(G, G.multiply(ga, pm.domain[b].element), search, budget);
        std::int64_t s = groups::word_length(H, H.multiply(ha, pm.images[b]), 4 * search, budget);
        Rational rs(s);
        if (rs < controls.rho_minus(Rational(t)) || rs > controls.rho_plus(Rational(t))) {
          first[a] = std::pair{b, t};
          witness[a] = {t, s};
        }
      }
    } catch (const Error& e) {
      errors[a] = e.what();
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    if (!errors[a].empty()) throw BudgetExceeded(errors[a]);
    if (!report.violation && first[a]) {
      report.violation = std::pair{a, first[a]->first};
      report.domain_distance = witness[a].first;
      report.image_distance = witness[a].second;
    }
  }
  report.passed = !report.violation && !pm.images.empty() && pm.images.front() == H.identity();

  report.target_radius = std::max<std::int64_t>(controls.rho_plus(Rational(pm.radius)).ceil(), 0);
  auto target_ball = groups::ball_in_group(H, report.target_radius, budget);
  for (const auto& h : target_ball) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    auto hinv = H.inverse(h.element);
    for (const auto& img : pm.images) {
      best = std::min(best, groups::word_length(H, H.multiply(hinv, img), 2 * report.target_radius + search, budget));
      if (best == 0) break;
    }
    report.density_radius = std::max(report.density_radius, best);
  }
  return report;
}

PartialMap act_on_partial(std::span<const std::size_t> word, const PartialMap& pm) {
  const auto& G = *pm.source;
  const auto& H = *pm.target;
  Element g = G.evaluate(word);
  std::int64_t length = groups::word_length(G, g, pm.radius + 1);
  if (length > pm.radius) {
    throw ValidationError("|g| = " + std::to_string(length) + " exceeds the partial map radius " +
                          std::to_string(pm.radius));
  }
  Element ginv = G.inverse(g);
  auto lookup = [&](const Element& x) -> const Element& {
    auto i = pm.index_of(x);
    if (!i) throw ValidationError("element outside the partial map's ball");
    return pm.images[*i];
  };
  Element shift = H.inverse(lookup(ginv));
  PartialMap out;
  out.source = pm.source;
  out.target = pm.target;
  out.radius = pm.radius - length;
  for (const auto& entry : pm.domain) {
    if (entry.distance > out.radius) break;
    out.domain.push_back(entry);
    out.images.push_back(H.multiply(shift, lookup(G.multiply(ginv, entry.element))));
  }
  out.provenance.assign(pm.provenance.begin(),
                        pm.provenance.begin() + std::min<std::ptrdiff_t>(out.radius + 1, static_cast<std::ptrdiff_t>(pm.provenance.size())));
  return out;
}

}  // namespace boxcouple::limits
