#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hypwalk/errors.hpp"

namespace hypwalk {

enum class Family : uint8_t { FreeGroup, FreeProductCyclics, DirectWithFinite };

// Group element in canonical normal form.
//
// The word part is a packed byte string whose meaning depends on the family:
//   FreeGroup           bytes are signed letters: +i / -i for generator i (1-based)
//   FreeProductCyclics  bytes are syllables (factor << 4) | exponent, exponent in [1, order-1]
//   DirectWithFinite    word part of the base family; `fin` is the finite component
// Two elements are equal iff their packed forms are identical.
struct Element {
  std::string w;
  uint8_t fin = 0;

  bool operator==(const Element&) const = default;
  bool is_identity() const { return w.empty() && fin == 0; }
};

struct ElementHash {
  size_t operator()(const Element& e) const {
    // FNV-1a over word bytes plus the finite component.
    uint64_t h = 1469598103934665603ull;
    for (char c : e.w) {
      h ^= static_cast<uint8_t>(c);
      h *= 1099511628211ull;
    }
    h ^= e.fin;
    h *= 1099511628211ull;
    return static_cast<size_t>(h);
  }
};

// Finite factor given by a multiplication table; identity must be index 0.
struct FiniteGroup {
  int order = 1;
  std::vector<uint8_t> table;  // table[i*order + j] = i*j

  uint8_t mul(uint8_t i, uint8_t j) const { return table[i * order + j]; }
  uint8_t inv(uint8_t i) const;
  void validate() const;  // identity, inverses, associativity
};

struct GroupSpec;

// All elements within word-metric distance `radius` of the identity,
// BFS-enumerated with dense ids, sphere offsets, parents and generator
// adjacency. Immutable after construction.
struct Ball {
  const GroupSpec* group = nullptr;
  int radius = 0;
  int num_gens = 0;
  std::vector<Element> elems;      // BFS order; elems[0] = identity
  std::vector<int> rad;            // distance from identity
  std::vector<int> sphere_start;   // sphere_start[r] = first id at distance r; size radius+2
  std::vector<int32_t> parent;     // BFS parent (-1 for identity)
  std::vector<int16_t> parent_gen; // generator index leading parent -> elem
  std::vector<int32_t> adj;        // adj[id*num_gens + s]; -1 if outside ball
  std::unordered_map<Element, int32_t, ElementHash> index;  // empty if !indexed
  bool indexed = true;

  int size() const { return static_cast<int>(elems.size()); }
  // -1 when the element is not in the ball (or the index was dropped).
  int32_t id_of(const Element& e) const {
    auto it = index.find(e);
    return it == index.end() ? -1 : it->second;
  }
  int sphere_begin(int r) const { return sphere_start[r]; }
  int sphere_end(int r) const { return sphere_start[r + 1]; }
};

// Estimated hyperbolicity constant, from an exhaustive basepoint-e scan.
struct Delta {
  double value = 0.0;  // half-integer
  int radius = 0;
};

// A presented group with a chosen symmetric generating set S.
//
// Supported families all admit confluent length-reducing rewriting, so the
// word problem is exact; word length in the S-metric has a closed form for
// standard generating sets and is otherwise computed by BFS within a ball
// budget.
struct GroupSpec {
  Family family = Family::FreeGroup;

  // FreeGroup
  int rank = 2;
  // FreeProductCyclics
  std::vector<int> orders;
  // DirectWithFinite: base family data reuse `rank`/`orders` via base_family.
  Family base_family = Family::FreeGroup;
  FiniteGroup finite;

  std::vector<Element> gens;              // the generating set S, symmetric
  std::vector<std::string> gen_names;

  int max_delta_radius = 6;
  long long ball_node_budget = 40'000'000;

  // ---- construction ----
  static GroupSpec free_group(int rank);
  static GroupSpec free_product_cyclics(std::vector<int> orders);
  static GroupSpec direct_with_finite(GroupSpec base, FiniteGroup finite);
  void set_generators(std::vector<Element> s);  // validates symmetry+generation
  void validate() const;

  // ---- exact arithmetic ----
  Element identity() const { return Element{}; }
  Element mul(const Element& a, const Element& b) const;
  Element inv(const Element& a) const;
  // Length of the base word in its own standard metric (free: letters,
  // cyclics: sum of min(e, n-e)); ignores the finite component.
  int base_len(const Element& a) const;

  // ---- parsing / printing ----
  // Words like "abA" (A = a^{-1}); product elements "ab|1"; identity "e".
  Element parse(const std::string& s) const;
  std::string to_string(const Element& e) const;
  Element normal_form_of_tokens(const std::vector<std::string>& symbols) const;

  // ---- word metric ----
  // True when |.|_S has a closed form valid at any depth.
  bool has_closed_length() const { return closed_len_kind_ != ClosedLen::None; }
  // S-word length; throws radius_error when no closed form applies and the
  // element lies outside `fallback` (or no ball is given).
  long long word_length(const Element& e, const Ball* fallback = nullptr) const;
  long long dist(const Element& x, const Element& y, const Ball* fallback = nullptr) const;
  double gromov_product(const Element& x, const Element& y, const Element& z,
                        const Ball* fallback = nullptr) const;

  // `gens_override` enumerates with a different symmetric set (e.g. a measure
  // support) instead of S; radii are then in that set's metric.
  Ball ball(int radius, bool keep_index = true,
            const std::vector<Element>* gens_override = nullptr) const;
  Delta estimate_delta(int radius) const;

  // Fills out[i] = d(elems[i], y) - d(e, y) for every ball element: the
  // truncated horofunction table of the witness y. O(1) amortized per entry
  // on free and product families; O(word) on free products.
  void fill_horo_table(const Ball& ball, const Element& y, int8_t* out) const;

  // Extends a witness away from the identity so that its horofunction table
  // on `ball` is unchanged; by construction strictly deeper. Throws
  // precision_error when no extension is found.
  Element deepen_witness(const Ball& ball, const Element& y) const;

  bool standard_generators() const { return std_gens_; }
  const std::vector<Element>& generators() const { return gens; }
  int gen_index(const Element& g) const;  // -1 if not in S

private:
  enum class ClosedLen : uint8_t { None, FreeStd, CyclicsStd, ProductStd, ProductLearned };
  ClosedLen closed_len_kind_ = ClosedLen::None;
  bool std_gens_ = false;
  std::vector<int> fin_dist_;          // ProductStd: K-part distances
  std::vector<int> fin_corr_;          // ProductLearned: corr[f*2 + parity]
  friend struct Ball;

  void detect_closed_length();
  void learn_product_correction();
  std::vector<Element> default_generators() const;
};

}  // namespace hypwalk
