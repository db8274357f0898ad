#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace boxcouple::groups {

/// Canonical carrier form of an element of an infinite marked group:
/// {k} for Z, signed letter codes of a freely reduced word for F_k
/// (+i / -i for the i-th letter and its inverse, 1-based), row-major
/// entries for SL_n(Z).
using Element = std::vector<std::int64_t>;

struct ElementHash {
  std::size_t operator()(const Element& e) const noexcept;
};

enum class CarrierKind { integers, free, special_linear };

struct Generator {
  std::string symbol;
  std::size_t inverse = 0;  // index of the formal inverse in the generator list
  Element value;
};

/// A finitely generated group with a symmetric generating set.
class MarkedGroup {
 public:
  /// Z with generators {±s : s in steps}. The default is the line metric.
  static MarkedGroup integers(std::vector<std::int64_t> steps = {1});
  /// Free group on `rank` letters a, b, c, ...
  static MarkedGroup free_group(std::size_t rank);
  /// SL_n(Z) generated by the elementary matrices e_ij(±1), i != j.
  static MarkedGroup special_linear(std::size_t n);

  const std::string& name() const { return name_; }
  CarrierKind kind() const { return kind_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t rank() const { return rank_; }
  const std::vector<std::int64_t>& steps() const { return steps_; }
  const std::vector<Generator>& generators() const { return generators_; }

  Element identity() const;
  Element multiply(const Element& a, const Element& b) const;
  Element inverse(const Element& a) const;
  Element evaluate(std::span<const std::size_t> word) const;

  /// Parses a word of generator symbols separated by spaces, '*' or '.'.
  /// "1" and the empty string denote the empty word.
  std::vector<std::size_t> parse_word(std::string_view text) const;
  std::string format_word(std::span<const std::size_t> word) const;
  std::optional<std::size_t> find_generator(std::string_view symbol) const;

  /// Exact word length when a closed form exists (Z with unit steps, F_k).
  std::optional<std::int64_t> closed_form_length(const Element& g) const;

  std::string format(const Element& g) const;

  friend bool operator==(const MarkedGroup& a, const MarkedGroup& b) {
    return a.name_ == b.name_ && a.kind_ == b.kind_ && a.dimension_ == b.dimension_ && a.rank_ == b.rank_ &&
           a.steps_ == b.steps_;
  }

 private:
  MarkedGroup() = default;
  void validate() const;

  std::string name_;
  CarrierKind kind_ = CarrierKind::integers;
  std::size_t dimension_ = 0;
  std::size_t rank_ = 0;
  std::vector<std::int64_t> steps_;
  std::vector<Generator> generators_;
};

/// Fixed-width key of a finite-quotient element.
using Key = std::vector<std::int32_t>;

/// Concrete model of G/G_n: residues mod m, matrices mod m, or tuples of
/// permutations (the diagonal image of a free group).
struct QuotientCarrier {
  enum class Kind { residues, matrices, permutations };
  Kind kind = Kind::residues;
  std::int64_t modulus = 0;
  std::size_t dimension = 0;
  std::vector<std::size_t> degrees;
  /// letter_images[factor][letter] is the permutation of {0..degree-1}.
  std::vector<std::vector<std::vector<std::int32_t>>> letter_images;

  static QuotientCarrier residues(std::int64_t modulus);
  static QuotientCarrier matrices(std::size_t dimension, std::int64_t modulus);
  static QuotientCarrier permutations(std::vector<std::vector<std::vector<std::int32_t>>> letter_images);

  std::size_t key_width() const;
  Key identity() const;
  void multiply(std::span<const std::int32_t> a, std::span<const std::int32_t> b, std::span<std::int32_t> out) const;
  Key inverse(std::span<const std::int32_t> a) const;
  /// Image of a parent-group element under the quotient map.
  Key project(const MarkedGroup& group, const Element& g) const;
  std::string describe() const;

  friend bool operator==(const QuotientCarrier&, const QuotientCarrier&) = default;
};

/// Open-addressing index from keys (stored flat, fixed width) to element ids.
class KeyIndex {
 public:
  explicit KeyIndex(std::size_t width = 1) : width_(width) {}
  std::size_t size() const { return keys_.size() / width_; }
  std::span<const std::int32_t> key(std::size_t i) const { return {keys_.data() + i * width_, width_}; }
  std::optional<std::uint32_t> find(std::span<const std::int32_t> key) const;
  /// Inserts if absent; returns (id, inserted).
  std::pair<std::uint32_t, bool> insert(std::span<const std::int32_t> key);
  const std::vector<std::int32_t>& flat() const { return keys_; }

 private:
  std::size_t slot_of(std::span<const std::int32_t> key) const;
  void grow();

  std::size_t width_;
  std::vector<std::int32_t> keys_;
  std::vector<std::uint32_t> slots_;
};

/// A finite quotient G/G_n with its Cayley word metric. Element 0 is the
/// identity; elements are ordered by (distance from identity, key).
class FiniteQuotient {
 public:
  /// Breadth-first closure of the generator images. Throws BudgetExceeded
  /// when the closure outgrows `budget` elements.
  static FiniteQuotient generate(std::shared_ptr<const MarkedGroup> parent, std::size_t level,
                                 QuotientCarrier carrier, std::size_t budget);

  /// Rebuilds a quotient from a stored element list (used by deserialization).
  static FiniteQuotient from_elements(std::shared_ptr<const MarkedGroup> parent, std::size_t level,
                                      QuotientCarrier carrier, const std::vector<Key>& elements);

  const MarkedGroup& parent() const { return *parent_; }
  const std::shared_ptr<const MarkedGroup>& parent_ptr() const { return parent_; }
  std::size_t level() const { return level_; }
  const QuotientCarrier& carrier() const { return carrier_; }
  std::size_t order() const { return index_.size(); }
  std::size_t identity_index() const { return 0; }
  std::span<const std::int32_t> key(std::size_t i) const { return index_.key(i); }
  std::optional<std::size_t> index_of(std::span<const std::int32_t> key) const;

  std::size_t generator_image(std::size_t generator) const { return generator_images_[generator]; }
  const std::vector<std::uint32_t>& generator_images() const { return generator_images_; }
  /// Index of x * image(generator).
  std::size_t right_multiply(std::size_t x, std::size_t generator) const {
    return right_mult_[x * generator_images_.size() + generator];
  }
  std::size_t multiply(std::size_t x, std::size_t y) const;
  std::size_t inverse(std::size_t x) const { return inverse_[x]; }
  std::size_t evaluate(std::span<const std::size_t> word) const;
  std::size_t project(const Element& g) const;

  std::int32_t distance_from_identity(std::size_t x) const { return distance_[x]; }
  const std::vector<std::int32_t>& distances() const { return distance_; }
  std::int32_t diameter() const;

  /// Distinct non-identity generator images, i.e. the simple Cayley graph's
  /// neighbours of the identity.
  std::vector<std::size_t> simple_generators() const;

 private:
  FiniteQuotient() = default;
  void finish();

  std::shared_ptr<const MarkedGroup> parent_;
  std::size_t level_ = 0;
  QuotientCarrier carrier_;
  KeyIndex index_;
  std::vector<std::uint32_t> generator_images_;
  std::vector<std::uint32_t> right_mult_;
  std::vector<std::uint32_t> inverse_;
  std::vector<std::int32_t> distance_;
};

/// Shortest-word distance d(x, y) = d(1, x^-1 y).
std::int32_t word_metric(const FiniteQuotient& q, std::size_t x, std::size_t y);

/// Family of normal chains that admit an independent ground truth.
struct FamilySpec {
  enum class Kind { cyclic_tower, congruence_sl2, free_hom } kind = Kind::cyclic_tower;
  std::int64_t base = 2;  // cyclic_tower: level n is Z / base^(n + shift)
  std::size_t shift = 0;
  std::vector<std::int64_t> primes;  // congruence_sl2: level n is SL_2(Z / p_1...p_n)
  std::size_t rank = 2;              // free_hom
  /// free_hom: images[level][letter] is a permutation; level n is the
  /// diagonal image in Sym(d_1) x ... x Sym(d_n).
  std::vector<std::vector<std::vector<std::int32_t>>> images;

  /// Parses "cyclic:K", "cyclic:K@SHIFT", "sl2:3,5,7",
  /// "free:RANK:(1,2,0)(0,2,1)/(...)(...)".
  static FamilySpec parse(std::string_view text);
  std::string to_string() const;
};

/// A decreasing chain of finite-index normal subgroups, realized by its quotients.
struct NormalChain {
  std::shared_ptr<const MarkedGroup> group;
  std::string family;
  std::vector<std::shared_ptr<const FiniteQuotient>> quotients;
  /// connecting_maps[i] sends level i+2 elements onto level i+1 elements
  /// (0-based: quotient i+1 -> quotient i).
  std::vector<std::vector<std::uint32_t>> connecting_maps;

  std::size_t depth() const { return quotients.size(); }
  const FiniteQuotient& level(std::size_t n) const;  // 1-based
  std::shared_ptr<const FiniteQuotient> level_ptr(std::size_t n) const;
};

inline constexpr std::size_t kDefaultElementBudget = 1'000'000;

NormalChain build_family(const FamilySpec& spec, std::size_t depth, std::size_t budget = kDefaultElementBudget);

/// Z / n with generators {±s}; handy for degenerate Cayley graphs such as K_n.
FiniteQuotient cyclic_quotient(std::int64_t n, std::vector<std::int64_t> steps = {1});

/// Connecting map from `fine` onto `coarse`, built along the BFS tree of
/// `fine` and checked to commute with the generator images.
std::vector<std::uint32_t> connecting_map(const FiniteQuotient& fine, const FiniteQuotient& coarse);

/// Validates every NormalChain invariant; throws ValidationError.
void validate_chain(const NormalChain& chain);

struct BallEntry {
  Element element;
  std::int64_t distance = 0;
};

/// B_r(1_G) with exact word distances, sorted by (distance, canonical form).
std::vector<BallEntry> ball_in_group(const MarkedGroup& g, std::int64_t radius,
                                     std::size_t budget = kDefaultElementBudget);

/// Word length |g| in G: closed form when available, else breadth-first
/// search up to `max_radius` (BudgetExceeded beyond it).
std::int64_t word_length(const MarkedGroup& g, const Element& element, std::int64_t max_radius = 32,
                         std::size_t budget = kDefaultElementBudget);

struct InjectivityRadius {
  std::int64_t radius = 0;
  /// True when no collision was seen up to r_max ("at least r_max").
  bool saturated = false;
};

InjectivityRadius injectivity_radius(const MarkedGroup& g, const FiniteQuotient& q, std::int64_t r_max,
                                     std::size_t budget = kDefaultElementBudget);

/// Cayley graph in DOT format with generator-labelled edges.
std::string to_dot(const FiniteQuotient& q);

/// Declared order of SL_2(Z/m) : m^3 prod_{p | m} (1 - 1/p^2).
std::int64_t sl2_order(std::int64_t modulus);

}  // namespace boxcouple::groups
