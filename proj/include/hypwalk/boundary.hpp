#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "hypwalk/group.hpp"

#include "json.hpp"

namespace hypwalk {

// A Busemann boundary point truncated at precision N: the table
// x |-> h(x) = d(x, y) - d(e, y) on Ball(N), realized by a witness y with
// d(e, y) >= N + margin. Large atlases keep only a Ball(prefix_n) prefix of
// the table plus a hash of the full table; the full table is recomputed from
// the witness on demand (exact, the witness realizes it by definition).
struct TruncHoro {
  Element witness;
  long long depth = 0;          // d(e, witness)
  uint64_t full_hash = 0;       // hash of the table on Ball(N)
  std::vector<int8_t> prefix;   // table on Ball(prefix_n), ball order
};

struct AtlasOptions {
  int precision = 4;            // N
  int margin = 2;
  int window = 3;               // sphere radii compared for stabilization
  int prefix_precision = 4;     // table prefix kept in memory
  long long max_reps = 2'000'000;
};

// Discretized Busemann boundary (or an invariant component of it) at
// precision N, with the generator action resolved through witnesses.
struct BoundaryAtlas {
  const GroupSpec* group = nullptr;
  std::shared_ptr<const Ball> ball;         // Ball(N), indexed
  std::shared_ptr<const Ball> prefix_ball;  // Ball(prefix_n), indexed
  int precision = 0;
  int prefix_precision = 0;
  int margin = 2;
  std::vector<TruncHoro> reps;
  std::vector<int32_t> action;              // action[s * reps.size() + i], generators of S
  std::unordered_map<uint64_t, std::vector<int32_t>> buckets;

  // stabilization / construction certificate
  bool orbit_built = false;
  int window_lo = 0, window_hi = 0;
  std::string seed_desc;

  int size() const { return static_cast<int>(reps.size()); }
  // Exact table on Ball(N) of representative i, written to out (ball order).
  void full_table(int i, std::vector<int8_t>& out) const;
  // h_{xi}(x) for x in Ball(precision); throws precision_error beyond it.
  int table_value(int i, const Element& x) const;
  int find_by_table(const std::vector<int8_t>& table) const;  // -1 if absent
};

TruncHoro horofunction_restriction(const GroupSpec& g, const Ball& ball, const Element& y,
                                   int margin = 2, int prefix_precision = 4);

// Sphere-window enumeration per the stabilization rule; throws
// instability_error when the window spheres disagree.
BoundaryAtlas enumerate_boundary(const GroupSpec& g, const AtlasOptions& opt);

// Orbit closure of the boundary point in the direction of `seed_ray` under
// the generator action; scales to precisions where sphere enumeration is
// infeasible. The certificate is the witness construction itself (every
// representative's witness extends to a ray realizing the same table).
BoundaryAtlas atlas_from_seed(const GroupSpec& g, const AtlasOptions& opt, const Element& seed_ray);

// g . xi resolved by acting on the witness and re-restricting; exact. The
// atlas is mutable because witnesses may get deepened in place.
int act(BoundaryAtlas& atlas, const Element& g, int xi);

// e^{-n} with n the largest radius <= N of agreement; 0 for identical tables.
double boundary_dist(const BoundaryAtlas& atlas, int i, int j);
// Largest r <= N with agreement on Ball(r); N+1 when identical at full precision.
int agreement_radius(const BoundaryAtlas& atlas, int i, int j);

// c_B(g, xi) = h_xi(g^{-1}). Table lookup for |g| <= N; witness evaluation
// with a depth-stability check beyond that.
long long busemann_cocycle(BoundaryAtlas& atlas, const Element& g, int xi);

// Closure of {seed} under the S-action inside the atlas.
BoundaryAtlas minimal_component(const BoundaryAtlas& atlas, int seed);

nlohmann::json atlas_to_json(const BoundaryAtlas& atlas);

}  // namespace hypwalk
