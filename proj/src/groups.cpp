#include "boxcouple/groups.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "boxcouple/errors.hpp"

namespace boxcouple::groups {

namespace {

constexpr std::uint32_t kEmptySlot = std::numeric_limits<std::uint32_t>::max();

std::uint64_t mix(std::uint64_t h) {
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  return h;
}

std::int64_t checked(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw BudgetExceeded("integer matrix entries overflowed 64 bits");
  }
  return static_cast<std::int64_t>(v);
}

std::int64_t mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

// Determinant of a square matrix given row-major, reduced mod m (m == 0: exact).
std::int64_t determinant(const std::vector<std::int64_t>& a, std::size_t n, std::int64_t m) {
  if (n == 1) return m ? mod(a[0], m) : a[0];
  if (n == 2) {
    __int128 d = __int128{a[0]} * a[3] - __int128{a[1]} * a[2];
    return m ? static_cast<std::int64_t>(((d % m) + m) % m) : checked(d);
  }
  __int128 total = 0;
  std::vector<std::int64_t> minor((n - 1) * (n - 1));
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t k = 0;
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j != col) minor[k++] = a[i * n + j];
      }
    }
    __int128 term = __int128{a[col]} * determinant(minor, n - 1, m);
    total += (col % 2 == 0) ? term : -term;
    if (m) total %= m;
  }
  return m ? static_cast<std::int64_t>(((total % m) + m) % m) : checked(total);
}

// Adjugate, which is the inverse for determinant-one matrices.
std::vector<std::int64_t> adjugate(const std::vector<std::int64_t>& a, std::size_t n, std::int64_t m) {
  std::vector<std::int64_t> out(n * n);
  if (n == 1) {
    out[0] = 1;
    return out;
  }
  std::vector<std::int64_t> minor((n - 1) * (n - 1));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t k = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == r) continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (j != c) minor[k++] = a[i * n + j];
        }
      }
      std::int64_t cof = determinant(minor, n - 1, m);
      if ((r + c) % 2 == 1) cof = -cof;
      out[c * n + r] = m ? mod(cof, m) : cof;
    }
  }
  return out;
}

std::int64_t factorial(std::size_t d) {
  std::int64_t f = 1;
  for (std::size_t i = 2; i <= d; ++i) f *= static_cast<std::int64_t>(i);
  return f;
}

bool is_prime(std::int64_t p) {
  if (p < 2) return false;
  for (std::int64_t q = 2; q * q <= p; ++q) {
    if (p % q == 0) return false;
  }
  return true;
}

void check_permutation(const std::vector<std::int32_t>& p) {
  std::vector<char> seen(p.size(), 0);
  for (std::int32_t v : p) {
    if (v < 0 || static_cast<std::size_t>(v) >= p.size() || seen[static_cast<std::size_t>(v)]) {
      throw ValidationError("letter image is not a permutation");
    }
    seen[static_cast<std::size_t>(v)] = 1;
  }
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

std::int64_t parse_int(std::string_view s) {
  std::string t = trim(s);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ValidationError("expected an integer, got '" + t + "'");
  }
  return v;
}

}  // namespace

std::size_t ElementHash::operator()(const Element& e) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ e.size();
  for (std::int64_t v : e) h = mix(h ^ static_cast<std::uint64_t>(v)) + 0x9e3779b97f4a7c15ULL;
  return static_cast<std::size_t>(h);
}

// ---------------------------------------------------------------------------
// MarkedGroup

MarkedGroup MarkedGroup::integers(std::vector<std::int64_t> steps) {
  if (steps.empty()) throw ValidationError("Z needs at least one step");
  std::sort(steps.begin(), steps.end());
  if (std::adjacent_find(steps.begin(), steps.end()) != steps.end() || steps.front() <= 0) {
    throw ValidationError("Z steps must be distinct positive integers");
  }
  MarkedGroup g;
  g.kind_ = CarrierKind::integers;
  g.steps_ = steps;
  bool unit = steps == std::vector<std::int64_t>{1};
  g.name_ = "Z";
  if (!unit) {
    g.name_ += "[";
    for (std::size_t i = 0; i < steps.size(); ++i) g.name_ += (i ? "," : "") + std::to_string(steps[i]);
    g.name_ += "]";
  }
  for (std::int64_t s : steps) {
    std::string sym = unit ? "t" : "t" + std::to_string(s);
    std::size_t at = g.generators_.size();
    g.generators_.push_back({sym, at + 1, {s}});
    g.generators_.push_back({sym + "^-1", at, {-s}});
  }
  g.validate();
  return g;
}

MarkedGroup MarkedGroup::free_group(std::size_t rank) {
  if (rank == 0 || rank > 26) throw ValidationError("free group rank must be in 1..26");
  MarkedGroup g;
  g.kind_ = CarrierKind::free;
  g.rank_ = rank;
  g.name_ = "F" + std::to_string(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    std::string sym(1, static_cast<char>('a' + i));
    std::int64_t code = static_cast<std::int64_t>(i) + 1;
    std::size_t at = g.generators_.size();
    g.generators_.push_back({sym, at + 1, {code}});
    g.generators_.push_back({sym + "^-1", at, {-code}});
  }
  g.validate();
  return g;
}

MarkedGroup MarkedGroup::special_linear(std::size_t n) {
  if (n < 2 || n > 4) throw ValidationError("SL_n(Z) supported for n in 2..4");
  MarkedGroup g;
  g.kind_ = CarrierKind::special_linear;
  g.dimension_ = n;
  g.name_ = "SL" + std::to_string(n) + "(Z)";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      Element plus(n * n, 0);
      for (std::size_t k = 0; k < n; ++k) plus[k * n + k] = 1;
      Element minus = plus;
      plus[i * n + j] = 1;
      minus[i * n + j] = -1;
      std::string sym = "e" + std::to_string(i + 1) + std::to_string(j + 1);
      std::size_t at = g.generators_.size();
      g.generators_.push_back({sym, at + 1, plus});
      g.generators_.push_back({sym + "^-1", at, minus});
    }
  }
  g.validate();
  return g;
}

void MarkedGroup::validate() const {
  Element id = identity();
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    const Generator& s = generators_[i];
    if (s.inverse >= generators_.size() || generators_[s.inverse].inverse != i) {
      throw ValidationError("generating set is not symmetric at '" + s.symbol + "'");
    }
    if (s.value == id) throw ValidationError("identity listed as generator '" + s.symbol + "'");
    if (inverse(s.value) != generators_[s.inverse].value) {
      throw ValidationError("generator '" + s.symbol + "' does not evaluate to the inverse of its partner");
    }
  }
}

Element MarkedGroup::identity() const {
  switch (kind_) {
    case CarrierKind::integers:
      return {0};
    case CarrierKind::free:
      return {};
    case CarrierKind::special_linear: {
      Element e(dimension_ * dimension_, 0);
      for (std::size_t k = 0; k < dimension_; ++k) e[k * dimension_ + k] = 1;
      return e;
    }
  }
  return {};
}

Element MarkedGroup::multiply(const Element& a, const Element& b) const {
  switch (kind_) {
    case CarrierKind::integers:
      return {checked(__int128{a[0]} + b[0])};
    case CarrierKind::free: {
      Element out = a;
      for (std::int64_t letter : b) {
        if (!out.empty() && out.back() == -letter) {
          out.pop_back();
        } else {
          out.push_back(letter);
        }
      }
      return out;
    }
    case CarrierKind::special_linear: {
      std::size_t n = dimension_;
      Element out(n * n, 0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          __int128 acc = 0;
          for (std::size_t k = 0; k < n; ++k) acc += __int128{a[i * n + k]} * b[k * n + j];
          out[i * n + j] = checked(acc);
        }
      }
      return out;
    }
  }
  return {};
}

Element MarkedGroup::inverse(const Element& a) const {
  switch (kind_) {
    case CarrierKind::integers:
      return {-a[0]};
    case CarrierKind::free: {
      Element out(a.rbegin(), a.rend());
      for (auto& v : out) v = -v;
      return out;
    }
    case CarrierKind::special_linear:
      return adjugate(a, dimension_, 0);
  }
  return {};
}

Element MarkedGroup::evaluate(std::span<const std::size_t> word) const {
  Element g = identity();
  for (std::size_t s : word) {
    if (s >= generators_.size()) throw ValidationError("generator index out of range");
    g = multiply(g, generators_[s].value);
  }
  return g;
}

std::optional<std::size_t> MarkedGroup::find_generator(std::string_view symbol) const {
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    if (generators_[i].symbol == symbol) return i;
  }
  return std::nullopt;
}

std::vector<std::size_t> MarkedGroup::parse_word(std::string_view text) const {
  std::vector<std::size_t> word;
  std::string token;
  auto flush = [&] {
    if (token.empty() || token == "1") {
      token.clear();
      return;
    }
    auto idx = find_generator(token);
    if (!idx) throw ValidationError("unknown generator '" + token + "' for " + name_);
    word.push_back(*idx);
    token.clear();
  };
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == '*' || ch == '.' || ch == ',') {
      flush();
    } else {
      token.push_back(ch);
    }
  }
  flush();
  return word;
}

std::string MarkedGroup::format_word(std::span<const std::size_t> word) const {
  if (word.empty()) return "1";
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i) out += ' ';
    out += generators_.at(word[i]).symbol;
  }
  return out;
}

std::optional<std::int64_t> MarkedGroup::closed_form_length(const Element& g) const {
  if (kind_ == CarrierKind::integers && steps_ == std::vector<std::int64_t>{1}) return std::llabs(g[0]);
  if (kind_ == CarrierKind::free) return static_cast<std::int64_t>(g.size());
  return std::nullopt;
}

std::string MarkedGroup::format(const Element& g) const {
  switch (kind_) {
    case CarrierKind::integers:
      return std::to_string(g[0]);
    case CarrierKind::free: {
      if (g.empty()) return "1";
      std::string out;
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (i) out += ' ';
        out += static_cast<char>('a' + std::llabs(g[i]) - 1);
        if (g[i] < 0) out += "^-1";
      }
      return out;
    }
    case CarrierKind::special_linear: {
      std::string out = "[";
      for (std::size_t i = 0; i < dimension_; ++i) {
        out += i ? ",[" : "[";
        for (std::size_t j = 0; j < dimension_; ++j) {
          if (j) out += ',';
          out += std::to_string(g[i * dimension_ + j]);
        }
        out += "]";
      }
      return out + "]";
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// QuotientCarrier

QuotientCarrier QuotientCarrier::residues(std::int64_t modulus) {
  if (modulus < 1 || modulus > std::numeric_limits<std::int32_t>::max()) {
    throw ValidationError("residue modulus out of range");
  }
  QuotientCarrier c;
  c.kind = Kind::residues;
  c.modulus = modulus;
  return c;
}

QuotientCarrier QuotientCarrier::matrices(std::size_t dimension, std::int64_t modulus) {
  if (modulus < 2 || modulus > (std::int64_t{1} << 30)) throw ValidationError("matrix modulus out of range");
  QuotientCarrier c;
  c.kind = Kind::matrices;
  c.dimension = dimension;
  c.modulus = modulus;
  return c;
}

QuotientCarrier QuotientCarrier::permutations(std::vector<std::vector<std::vector<std::int32_t>>> letter_images) {
  if (letter_images.empty()) throw ValidationError("permutation carrier needs at least one factor");
  QuotientCarrier c;
  c.kind = Kind::permutations;
  std::size_t letters = letter_images.front().size();
  for (const auto& factor : letter_images) {
    if (factor.size() != letters || factor.empty()) throw ValidationError("every factor needs one image per letter");
    std::size_t degree = factor.front().size();
    if (degree == 0) throw ValidationError("empty permutation");
    for (const auto& p : factor) {
      if (p.size() != degree) throw ValidationError("letter images of one factor must share a degree");
      check_permutation(p);
    }
    c.degrees.push_back(degree);
  }
  c.letter_images = std::move(letter_images);
  return c;
}

std::size_t QuotientCarrier::key_width() const {
  switch (kind) {
    case Kind::residues:
      return 1;
    case Kind::matrices:
      return dimension * dimension;
    case Kind::permutations:
      return std::accumulate(degrees.begin(), degrees.end(), std::size_t{0});
  }
  return 0;
}

Key QuotientCarrier::identity() const {
  switch (kind) {
    case Kind::residues:
      return {0};
    case Kind::matrices: {
      Key k(dimension * dimension, 0);
      for (std::size_t i = 0; i < dimension; ++i) k[i * dimension + i] = 1;
      return k;
    }
    case Kind::permutations: {
      Key k;
      for (std::size_t d : degrees) {
        for (std::size_t i = 0; i < d; ++i) k.push_back(static_cast<std::int32_t>(i));
      }
      return k;
    }
  }
  return {};
}

void QuotientCarrier::multiply(std::span<const std::int32_t> a, std::span<const std::int32_t> b,
                               std::span<std::int32_t> out) const {
  switch (kind) {
    case Kind::residues:
      out[0] = static_cast<std::int32_t>((std::int64_t{a[0]} + b[0]) % modulus);
      return;
    case Kind::matrices: {
      std::size_t n = dimension;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          std::int64_t acc = 0;
          for (std::size_t k = 0; k < n; ++k) acc = (acc + std::int64_t{a[i * n + k]} * b[k * n + j]) % modulus;
          out[i * n + j] = static_cast<std::int32_t>(acc);
        }
      }
      return;
    }
    case Kind::permutations: {
      std::size_t offset = 0;
      for (std::size_t d : degrees) {
        for (std::size_t i = 0; i < d; ++i) {
          out[offset + i] = a[offset + static_cast<std::size_t>(b[offset + i])];
        }
        offset += d;
      }
      return;
    }
  }
}

Key QuotientCarrier::inverse(std::span<const std::int32_t> a) const {
  switch (kind) {
    case Kind::residues:
      return {static_cast<std::int32_t>((modulus - a[0]) % modulus)};
    case Kind::matrices: {
      std::vector<std::int64_t> m(a.begin(), a.end());
      auto adj = adjugate(m, dimension, modulus);
      return Key(adj.begin(), adj.end());
    }
    case Kind::permutations: {
      Key out(a.size());
      std::size_t offset = 0;
      for (std::size_t d : degrees) {
        for (std::size_t i = 0; i < d; ++i) {
          out[offset + static_cast<std::size_t>(a[offset + i])] = static_cast<std::int32_t>(i);
        }
        offset += d;
      }
      return out;
    }
  }
  return {};
}

Key QuotientCarrier::project(const MarkedGroup& group, const Element& g) const {
  switch (kind) {
    case Kind::residues:
      if (group.kind() != CarrierKind::integers) throw ValidationError("residue quotient needs Z as parent");
      return {static_cast<std::int32_t>(mod(g[0], modulus))};
    case Kind::matrices: {
      if (group.kind() != CarrierKind::special_linear || group.dimension() != dimension) {
        throw ValidationError("matrix quotient needs SL_n(Z) of matching dimension as parent");
      }
      Key k(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) k[i] = static_cast<std::int32_t>(mod(g[i], modulus));
      return k;
    }
    case Kind::permutations: {
      if (group.kind() != CarrierKind::free || group.rank() != letter_images.front().size()) {
        throw ValidationError("permutation quotient needs a free group of matching rank as parent");
      }
      Key acc = identity();
      Key next(acc.size());
      for (std::int64_t letter : g) {
        std::size_t l = static_cast<std::size_t>(std::llabs(letter)) - 1;
        Key image;
        for (const auto& factor : letter_images) image.insert(image.end(), factor[l].begin(), factor[l].end());
        if (letter < 0) image = inverse(image);
        multiply(acc, image, next);
        std::swap(acc, next);
      }
      return acc;
    }
  }
  return {};
}

std::string QuotientCarrier::describe() const {
  switch (kind) {
    case Kind::residues:
      return "Z/" + std::to_string(modulus);
    case Kind::matrices:
      return "SL" + std::to_string(dimension) + "(Z/" + std::to_string(modulus) + ")";
    case Kind::permutations: {
      std::string out;
      for (std::size_t i = 0; i < degrees.size(); ++i) out += (i ? "x" : "") + std::string("Sym") + std::to_string(degrees[i]);
      return out;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// KeyIndex

std::size_t KeyIndex::slot_of(std::span<const std::int32_t> key) const {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::int32_t v : key) h = mix(h ^ static_cast<std::uint32_t>(v));
  return static_cast<std::size_t>(h) & (slots_.size() - 1);
}

std::optional<std::uint32_t> KeyIndex::find(std::span<const std::int32_t> key) const {
  if (slots_.empty()) return std::nullopt;
  std::size_t mask = slots_.size() - 1;
  for (std::size_t s = slot_of(key);; s = (s + 1) & mask) {
    std::uint32_t id = slots_[s];
    if (id == kEmptySlot) return std::nullopt;
    if (std::equal(key.begin(), key.end(), keys_.begin() + static_cast<std::ptrdiff_t>(id * width_))) return id;
  }
}

void KeyIndex::grow() {
  std::size_t cap = slots_.empty() ? 64 : slots_.size() * 2;
  slots_.assign(cap, kEmptySlot);
  std::size_t n = size();
  for (std::uint32_t id = 0; id < n; ++id) {
    std::size_t s = slot_of(key(id));
    while (slots_[s] != kEmptySlot) s = (s + 1) & (cap - 1);
    slots_[s] = id;
  }
}

std::pair<std::uint32_t, bool> KeyIndex::insert(std::span<const std::int32_t> key) {
  if (key.size() != width_) throw ValidationError("key width mismatch");
  if (auto id = find(key)) return {*id, false};
  if ((size() + 1) * 2 > slots_.size()) grow();
  std::uint32_t id = static_cast<std::uint32_t>(size());
  keys_.insert(keys_.end(), key.begin(), key.end());
  std::size_t s = slot_of(key);
  while (slots_[s] != kEmptySlot) s = (s + 1) & (slots_.size() - 1);
  slots_[s] = id;
  return {id, true};
}

// ---------------------------------------------------------------------------
// FiniteQuotient

FiniteQuotient FiniteQuotient::generate(std::shared_ptr<const MarkedGroup> parent, std::size_t level,
                                        QuotientCarrier carrier, std::size_t budget) {
  const std::size_t width = carrier.key_width();
  std::vector<Key> gens;
  for (const auto& s : parent->generators()) gens.push_back(carrier.project(*parent, s.value));

  KeyIndex bfs(width);
  std::vector<std::int32_t> dist;
  bfs.insert(carrier.identity());
  dist.push_back(0);
  Key next(width);
  for (std::size_t head = 0; head < bfs.size(); ++head) {
    for (const Key& s : gens) {
      carrier.multiply(bfs.key(head), s, next);
      auto [id, inserted] = bfs.insert(next);
      if (inserted) {
        dist.push_back(dist[head] + 1);
        if (bfs.size() > budget) {
          throw BudgetExceeded("quotient " + carrier.describe() + " exceeds the element budget of " +
                               std::to_string(budget));
        }
      }
    }
  }

  std::vector<std::uint32_t> order(bfs.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    auto ka = bfs.key(a);
    auto kb = bfs.key(b);
    return std::lexicographical_compare(ka.begin(), ka.end(), kb.begin(), kb.end());
  });

  FiniteQuotient q;
  q.parent_ = std::move(parent);
  q.level_ = level;
  q.carrier_ = std::move(carrier);
  q.index_ = KeyIndex(width);
  for (std::uint32_t id : order) q.index_.insert(bfs.key(id));
  q.finish();
  return q;
}

FiniteQuotient FiniteQuotient::from_elements(std::shared_ptr<const MarkedGroup> parent, std::size_t level,
                                             QuotientCarrier carrier, const std::vector<Key>& elements) {
  FiniteQuotient q;
  q.parent_ = std::move(parent);
  q.level_ = level;
  q.carrier_ = std::move(carrier);
  q.index_ = KeyIndex(q.carrier_.key_width());
  for (const Key& k : elements) {
    if (!q.index_.insert(k).second) throw ValidationError("duplicate element in stored quotient");
  }
  if (elements.empty() || elements.front() != q.carrier_.identity()) {
    throw ValidationError("stored quotient must list the identity first");
  }
  q.finish();
  for (std::size_t i = 1; i < q.order(); ++i) {
    auto a = q.key(i - 1);
    auto b = q.key(i);
    bool ordered = q.distance_[i - 1] < q.distance_[i] ||
                   (q.distance_[i - 1] == q.distance_[i] &&
                    std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end()));
    if (!ordered) throw ValidationError("stored quotient elements are not in canonical order");
  }
  return q;
}

void FiniteQuotient::finish() {
  const std::size_t n = order();
  const std::size_t width = carrier_.key_width();
  const auto& gens = parent_->generators();
  std::vector<Key> images;
  for (const auto& s : gens) images.push_back(carrier_.project(*parent_, s.value));

  right_mult_.assign(n * gens.size(), 0);
  Key next(width);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t s = 0; s < gens.size(); ++s) {
      carrier_.multiply(key(x), images[s], next);
      auto id = index_.find(next);
      if (!id) throw ValidationError("element set of " + carrier_.describe() + " is not closed under generators");
      right_mult_[x * gens.size() + s] = *id;
    }
  }
  generator_images_.resize(gens.size());
  for (std::size_t s = 0; s < gens.size(); ++s) generator_images_[s] = right_mult_[s];

  inverse_.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    auto id = index_.find(carrier_.inverse(key(x)));
    if (!id) throw ValidationError("element set is not closed under inversion");
    inverse_[x] = *id;
  }

  distance_.assign(n, -1);
  distance_[0] = 0;
  std::vector<std::uint32_t> queue{0};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    std::uint32_t x = queue[head];
    for (std::size_t s = 0; s < gens.size(); ++s) {
      std::uint32_t y = right_mult_[x * gens.size() + s];
      if (distance_[y] < 0) {
        distance_[y] = distance_[x] + 1;
        queue.push_back(y);
      }
    }
  }
  if (queue.size() != n) {
    throw ValidationError("generator images do not generate: " + std::to_string(n - queue.size()) +
                          " elements unreached");
  }
}

std::optional<std::size_t> FiniteQuotient::index_of(std::span<const std::int32_t> key) const {
  auto id = index_.find(key);
  if (!id) return std::nullopt;
  return *id;
}

std::size_t FiniteQuotient::multiply(std::size_t x, std::size_t y) const {
  Key out(carrier_.key_width());
  carrier_.multiply(key(x), key(y), out);
  return *index_.find(out);
}

std::size_t FiniteQuotient::evaluate(std::span<const std::size_t> word) const {
  std::size_t x = 0;
  for (std::size_t s : word) x = right_multiply(x, s);
  return x;
}

std::size_t FiniteQuotient::project(const Element& g) const {
  auto id = index_.find(carrier_.project(*parent_, g));
  if (!id) throw ValidationError("projection landed outside the quotient");
  return *id;
}

std::int32_t FiniteQuotient::diameter() const { return *std::max_element(distance_.begin(), distance_.end()); }

std::vector<std::size_t> FiniteQuotient::simple_generators() const {
  std::vector<std::size_t> out;
  for (std::uint32_t g : generator_images_) {
    if (g != 0) out.push_back(g);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::int32_t word_metric(const FiniteQuotient& q, std::size_t x, std::size_t y) {
  if (x >= q.order() || y >= q.order()) throw ValidationError("element index out of range");
  return q.distance_from_identity(q.multiply(q.inverse(x), y));
}

// ---------------------------------------------------------------------------
// Families and chains

FamilySpec FamilySpec::parse(std::string_view text) {
  std::string t = trim(text);
  auto colon = t.find(':');
  if (colon == std::string::npos) throw ValidationError("family must look like 'cyclic:2', got '" + t + "'");
  std::string head = t.substr(0, colon);
  std::string rest = t.substr(colon + 1);
  FamilySpec spec;
  if (head == "cyclic") {
    spec.kind = Kind::cyclic_tower;
    auto at = rest.find('@');
    spec.base = parse_int(rest.substr(0, at));
    if (at != std::string::npos) {
      std::int64_t shift = parse_int(rest.substr(at + 1));
      if (shift < 0) throw ValidationError("cyclic shift must be nonnegative");
      spec.shift = static_cast<std::size_t>(shift);
    }
    if (spec.base < 2) throw ValidationError("cyclic tower base must be >= 2");
  } else if (head == "sl2") {
    spec.kind = Kind::congruence_sl2;
    for (const auto& p : split(rest, ',')) spec.primes.push_back(parse_int(p));
  } else if (head == "free") {
    spec.kind = Kind::free_hom;
    auto c2 = rest.find(':');
    if (c2 == std::string::npos) throw ValidationError("free family needs 'free:RANK:IMAGES'");
    std::int64_t rank = parse_int(rest.substr(0, c2));
    if (rank < 1) throw ValidationError("free rank must be positive");
    spec.rank = static_cast<std::size_t>(rank);
    for (const auto& level_text : split(rest.substr(c2 + 1), '/')) {
      std::vector<std::vector<std::int32_t>> level;
      std::string lt = trim(level_text);
      std::size_t pos = 0;
      while (pos < lt.size()) {
        if (lt[pos] != '(') throw ValidationError("permutation images must be written as (i,j,...)");
        auto close = lt.find(')', pos);
        if (close == std::string::npos) throw ValidationError("unterminated permutation image");
        std::vector<std::int32_t> perm;
        for (const auto& v : split(lt.substr(pos + 1, close - pos - 1), ',')) {
          perm.push_back(static_cast<std::int32_t>(parse_int(v)));
        }
        level.push_back(std::move(perm));
        pos = close + 1;
        while (pos < lt.size() && std::isspace(static_cast<unsigned char>(lt[pos]))) ++pos;
      }
      spec.images.push_back(std::move(level));
    }
  } else {
    throw ValidationError("unknown family '" + head + "'");
  }
  return spec;
}

std::string FamilySpec::to_string() const {
  switch (kind) {
    case Kind::cyclic_tower:
      return "cyclic:" + std::to_string(base) + (shift ? "@" + std::to_string(shift) : "");
    case Kind::congruence_sl2: {
      std::string out = "sl2:";
      for (std::size_t i = 0; i < primes.size(); ++i) out += (i ? "," : "") + std::to_string(primes[i]);
      return out;
    }
    case Kind::free_hom: {
      std::string out = "free:" + std::to_string(rank) + ":";
      for (std::size_t l = 0; l < images.size(); ++l) {
        if (l) out += "/";
        for (const auto& p : images[l]) {
          out += "(";
          for (std::size_t i = 0; i < p.size(); ++i) out += (i ? "," : "") + std::to_string(p[i]);
          out += ")";
        }
      }
      return out;
    }
  }
  return {};
}

std::int64_t sl2_order(std::int64_t modulus) {
  std::int64_t m = modulus;
  __int128 num = __int128{modulus} * modulus * modulus;
  __int128 den = 1;
  for (std::int64_t p = 2; p * p <= m; ++p) {
    if (m % p == 0) {
      num *= (p * p - 1);
      den *= p * p;
      while (m % p == 0) m /= p;
    }
  }
  if (m > 1) {
    num *= (m * m - 1);
    den *= m * m;
  }
  return static_cast<std::int64_t>(num / den);
}

const FiniteQuotient& NormalChain::level(std::size_t n) const {
  if (n == 0 || n > quotients.size()) throw ValidationError("chain level " + std::to_string(n) + " out of range");
  return *quotients[n - 1];
}

std::shared_ptr<const FiniteQuotient> NormalChain::level_ptr(std::size_t n) const {
  if (n == 0 || n > quotients.size()) throw ValidationError("chain level " + std::to_string(n) + " out of range");
  return quotients[n - 1];
}

std::vector<std::uint32_t> connecting_map(const FiniteQuotient& fine, const FiniteQuotient& coarse) {
  const std::size_t gens = fine.parent().generators().size();
  const auto& generators = fine.parent().generators();
  std::vector<std::uint32_t> conn(fine.order(), 0);
  for (std::size_t x = 1; x < fine.order(); ++x) {
    bool found = false;
    for (std::size_t s = 0; s < gens && !found; ++s) {
      std::size_t y = fine.right_multiply(x, generators[s].inverse);
      if (fine.distance_from_identity(y) + 1 == fine.distance_from_identity(x)) {
        conn[x] = static_cast<std::uint32_t>(coarse.right_multiply(conn[y], s));
        found = true;
      }
    }
    if (!found) throw ValidationError("element without a BFS parent");
  }
  for (std::size_t x = 0; x < fine.order(); ++x) {
    for (std::size_t s = 0; s < gens; ++s) {
      if (conn[fine.right_multiply(x, s)] != coarse.right_multiply(conn[x], s)) {
        throw ValidationError("connecting map does not commute with generator images (levels " +
                              std::to_string(fine.level()) + " -> " + std::to_string(coarse.level()) + ")");
      }
    }
  }
  std::vector<char> hit(coarse.order(), 0);
  for (auto c : conn) hit[c] = 1;
  if (std::find(hit.begin(), hit.end(), 0) != hit.end()) throw ValidationError("connecting map is not surjective");
  return conn;
}

void validate_chain(const NormalChain& chain) {
  if (chain.quotients.empty()) throw ValidationError("chain has no quotients");
  if (chain.connecting_maps.size() + 1 != chain.quotients.size()) {
    throw ValidationError("chain needs one connecting map per consecutive pair of levels");
  }
  for (std::size_t i = 0; i < chain.quotients.size(); ++i) {
    const FiniteQuotient& q = *chain.quotients[i];
    if (!(q.parent() == *chain.group)) throw ValidationError("quotient parent differs from chain group");
    if (q.level() != i + 1) throw ValidationError("quotient levels must be 1..depth in order");
    for (std::size_t g : q.simple_generators()) {
      if (q.distance_from_identity(g) != 1) throw ValidationError("generator image not at distance 1");
    }
  }
  for (std::size_t i = 0; i + 1 < chain.quotients.size(); ++i) {
    auto expected = connecting_map(*chain.quotients[i + 1], *chain.quotients[i]);
    if (expected != chain.connecting_maps[i]) throw ValidationError("stored connecting map is inconsistent");
  }
}

NormalChain build_family(const FamilySpec& spec, std::size_t depth, std::size_t budget) {
  if (depth < 1) throw ValidationError("depth must be at least 1");
  NormalChain chain;
  chain.family = spec.to_string();
  switch (spec.kind) {
    case FamilySpec::Kind::cyclic_tower: {
      if (spec.base < 2) throw ValidationError("cyclic tower base must be >= 2");
      chain.group = std::make_shared<const MarkedGroup>(MarkedGroup::integers());
      for (std::size_t n = 1; n <= depth; ++n) {
        __int128 m = 1;
        for (std::size_t e = 0; e < n + spec.shift; ++e) {
          m *= spec.base;
          if (m > static_cast<__int128>(budget)) {
            throw BudgetExceeded("cyclic level " + std::to_string(n) + " exceeds the element budget");
          }
        }
        auto q = FiniteQuotient::generate(chain.group, n, QuotientCarrier::residues(static_cast<std::int64_t>(m)),
                                          budget);
        if (static_cast<__int128>(q.order()) != m) throw ValidationError("cyclic closure size mismatch");
        chain.quotients.push_back(std::make_shared<const FiniteQuotient>(std::move(q)));
      }
      break;
    }
    case FamilySpec::Kind::congruence_sl2: {
      if (spec.primes.size() < depth) throw ValidationError("congruence family needs one prime per level");
      for (std::size_t i = 0; i < spec.primes.size(); ++i) {
        std::int64_t p = spec.primes[i];
        if (!is_prime(p) || p == 2) throw ValidationError("congruence primes must be odd primes, got " + std::to_string(p));
        for (std::size_t j = 0; j < i; ++j) {
          if (spec.primes[j] == p) throw ValidationError("congruence primes must be distinct");
        }
      }
      chain.group = std::make_shared<const MarkedGroup>(MarkedGroup::special_linear(2));
      std::int64_t m = 1;
      for (std::size_t n = 1; n <= depth; ++n) {
        m *= spec.primes[n - 1];
        std::int64_t declared = sl2_order(m);
        if (static_cast<std::size_t>(declared) > budget) {
          throw BudgetExceeded("SL2(Z/" + std::to_string(m) + ") has " + std::to_string(declared) +
                               " elements, over the budget of " + std::to_string(budget));
        }
        auto q = FiniteQuotient::generate(chain.group, n, QuotientCarrier::matrices(2, m), budget);
        if (static_cast<std::int64_t>(q.order()) != declared) {
          throw ValidationError("SL2 closure reached " + std::to_string(q.order()) + " of " +
                                std::to_string(declared) + " elements");
        }
        chain.quotients.push_back(std::make_shared<const FiniteQuotient>(std::move(q)));
      }
      break;
    }
    case FamilySpec::Kind::free_hom: {
      if (spec.images.size() < depth) throw ValidationError("free family needs images for every level");
      chain.group = std::make_shared<const MarkedGroup>(MarkedGroup::free_group(spec.rank));
      for (std::size_t n = 1; n <= depth; ++n) {
        const auto& level = spec.images[n - 1];
        if (level.size() != spec.rank) throw ValidationError("free family level needs one image per letter");
        auto factor = QuotientCarrier::permutations({level});
        std::size_t degree = factor.degrees.front();
        if (degree > 10) throw BudgetExceeded("symmetric group degree over 10");
        std::int64_t declared = factorial(degree);
        auto own = FiniteQuotient::generate(chain.group, n, factor, budget);
        if (static_cast<std::int64_t>(own.order()) != declared) {
          throw ValidationError("images at level " + std::to_string(n) + " do not generate Sym(" +
                                std::to_string(degree) + "): " + std::to_string(declared - static_cast<std::int64_t>(own.order())) +
                                " elements unreached");
        }
        std::vector<std::vector<std::vector<std::int32_t>>> factors(spec.images.begin(),
                                                                     spec.images.begin() + static_cast<std::ptrdiff_t>(n));
        auto q = FiniteQuotient::generate(chain.group, n, QuotientCarrier::permutations(std::move(factors)), budget);
        chain.quotients.push_back(std::make_shared<const FiniteQuotient>(std::move(q)));
      }
      break;
    }
  }
  for (std::size_t i = 0; i + 1 < chain.quotients.size(); ++i) {
    chain.connecting_maps.push_back(connecting_map(*chain.quotients[i + 1], *chain.quotients[i]));
  }
  validate_chain(chain);
  return chain;
}

FiniteQuotient cyclic_quotient(std::int64_t n, std::vector<std::int64_t> steps) {
  auto group = std::make_shared<const MarkedGroup>(MarkedGroup::integers(std::move(steps)));
  return FiniteQuotient::generate(group, 1, QuotientCarrier::residues(n), kDefaultElementBudget);
}

// ---------------------------------------------------------------------------
// Balls in the infinite group

std::vector<BallEntry> ball_in_group(const MarkedGroup& g, std::int64_t radius, std::size_t budget) {
  if (radius < 0) throw ValidationError("ball radius must be nonnegative");
  std::unordered_map<Element, std::int64_t, ElementHash> seen;
  std::vector<BallEntry> out;
  Element id = g.identity();
  seen.emplace(id, 0);
  out.push_back({id, 0});
  std::size_t frontier_begin = 0;
  for (std::int64_t r = 1; r <= radius; ++r) {
    std::size_t frontier_end = out.size();
    for (std::size_t i = frontier_begin; i < frontier_end; ++i) {
      for (const auto& s : g.generators()) {
        Element next = g.multiply(out[i].element, s.value);
        if (seen.emplace(next, r).second) {
          out.push_back({std::move(next), r});
          if (out.size() > budget) {
            throw BudgetExceeded("ball of radius " + std::to_string(radius) + " in " + g.name() +
                                 " exceeds the budget of " + std::to_string(budget));
          }
        }
      }
    }
    frontier_begin = frontier_end;
  }
  std::sort(out.begin(), out.end(), [](const BallEntry& a, const BallEntry& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.element < b.element;
  });
  return out;
}

std::int64_t word_length(const MarkedGroup& g, const Element& element, std::int64_t max_radius,
                         std::size_t budget) {
  if (auto closed = g.closed_form_length(element)) return *closed;
  if (element == g.identity()) return 0;
  std::unordered_map<Element, std::int64_t, ElementHash> seen;
  std::vector<Element> frontier{g.identity()};
  seen.emplace(g.identity(), 0);
  for (std::int64_t r = 1; r <= max_radius; ++r) {
    std::vector<Element> next;
    for (const auto& x : frontier) {
      for (const auto& s : g.generators()) {
        Element y = g.multiply(x, s.value);
        if (!seen.emplace(y, r).second) continue;
        if (y == element) return r;
        next.push_back(std::move(y));
        if (seen.size() > budget) throw BudgetExceeded("word-length search exceeded its budget");
      }
    }
    frontier = std::move(next);
  }
  throw BudgetExceeded("element is longer than " + std::to_string(max_radius));
}

InjectivityRadius injectivity_radius(const MarkedGroup& g, const FiniteQuotient& q, std::int64_t r_max,
                                     std::size_t budget) {
  if (r_max < 0) throw ValidationError("r_max must be nonnegative");
  if (!(q.parent() == g)) throw ValidationError("quotient does not belong to this group");
  auto ball = ball_in_group(g, r_max, budget);
  std::vector<char> hit(q.order(), 0);
  for (const auto& entry : ball) {
    std::size_t image = q.project(entry.element);
    if (hit[image]) return {entry.distance - 1, false};
    hit[image] = 1;
  }
  return {r_max, true};
}

std::string to_dot(const FiniteQuotient& q) {
  std::ostringstream out;
  const auto& gens = q.parent().generators();
  out << "graph cayley {\n";
  out << "  label=\"" << q.parent().name() << " -> " << q.carrier().describe() << "\";\n";
  for (std::size_t x = 0; x < q.order(); ++x) {
    out << "  n" << x << " [label=\"";
    auto k = q.key(x);
    for (std::size_t i = 0; i < k.size(); ++i) out << (i ? "," : "") << k[i];
    out << "\"];\n";
  }
  for (std::size_t x = 0; x < q.order(); ++x) {
    for (std::size_t s = 0; s < gens.size(); ++s) {
      if (gens[s].inverse < s) continue;  // one edge per generator pair
      std::size_t y = q.right_multiply(x, s);
      if (y == x) continue;
      out << "  n" << x << " -- n" << y << " [label=\"" << gens[s].symbol << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace boxcouple::groups
