#include "hypwalk/boundary.hpp"

#include <algorithm>
#include <cstring>
#include <deque>

namespace hypwalk {

namespace {

uint64_t table_hash(const int8_t* data, size_t n) {
  uint64_t h = 1469598103934665603ull;
  for (size_t i = 0; i < n; ++i) {
    h ^= static_cast<uint8_t>(data[i]);
    h *= 1099511628211ull;
  }
  return h;
}

void check_lipschitz(const Ball& ball, const int8_t* t) {
  if (t[0] != 0) throw integrity_error("horofunction table: h(e) != 0");
  for (int i = 1; i < ball.size(); ++i) {
    int p = ball.parent[i];
    if (std::abs(t[i] - t[p]) > 1)
      throw integrity_error("horofunction table is not 1-Lipschitz along the Cayley graph");
  }
}

}  // namespace

TruncHoro horofunction_restriction(const GroupSpec& g, const Ball& ball, const Element& y,
                                   int margin, int prefix_precision) {
  long long depth = g.word_length(y);
  if (depth < ball.radius + margin)
    throw precision_error("witness too shallow: d(e,y) = " + std::to_string(depth) +
                          " < N + margin = " + std::to_string(ball.radius + margin));
  TruncHoro h;
  h.witness = y;
  h.depth = depth;
  std::vector<int8_t> table(static_cast<size_t>(ball.size()));
  g.fill_horo_table(ball, y, table.data());
  check_lipschitz(ball, table.data());
  h.full_hash = table_hash(table.data(), table.size());
  int pn = std::min(prefix_precision, ball.radius);
  h.prefix.assign(table.begin(), table.begin() + ball.sphere_end(pn));
  return h;
}

void BoundaryAtlas::full_table(int i, std::vector<int8_t>& out) const {
  out.resize(static_cast<size_t>(ball->size()));
  if (precision <= prefix_precision) {
    std::copy(reps[i].prefix.begin(), reps[i].prefix.end(), out.begin());
    return;
  }
  group->fill_horo_table(*ball, reps[i].witness, out.data());
}

int BoundaryAtlas::table_value(int i, const Element& x) const {
  int32_t id = prefix_ball->id_of(x);
  if (id >= 0) return reps[i].prefix[static_cast<size_t>(id)];
  id = ball->id_of(x);
  if (id < 0)
    throw precision_error("table_value: element outside Ball(N), N = " + std::to_string(precision));
  thread_local std::vector<int8_t> scratch;
  full_table(i, scratch);
  return scratch[static_cast<size_t>(id)];
}

int BoundaryAtlas::find_by_table(const std::vector<int8_t>& table) const {
  uint64_t h = table_hash(table.data(), table.size());
  auto it = buckets.find(h);
  if (it == buckets.end()) return -1;
  thread_local std::vector<int8_t> scratch;
  for (int32_t cand : it->second) {
    full_table(cand, scratch);
    if (std::memcmp(scratch.data(), table.data(), table.size()) == 0) return cand;
  }
  return -1;
}

namespace {

// Shared helper: intern a table (computed from `witness`) into the atlas.
// Returns (index, inserted).
std::pair<int, bool> intern(BoundaryAtlas& atlas, const std::vector<int8_t>& table,
                            const Element& witness, long long depth) {
  int found = atlas.find_by_table(table);
  if (found >= 0) return {found, false};
  if (atlas.size() >= 2'000'000) throw budget_error("atlas representative budget exceeded", atlas.size());
  TruncHoro h;
  h.witness = witness;
  h.depth = depth;
  h.full_hash = table_hash(table.data(), table.size());
  h.prefix.assign(table.begin(), table.begin() + atlas.prefix_ball->size());
  atlas.reps.push_back(std::move(h));
  int idx = atlas.size() - 1;
  atlas.buckets[atlas.reps.back().full_hash].push_back(idx);
  return {idx, true};
}

void init_atlas(BoundaryAtlas& atlas, const GroupSpec& g, const AtlasOptions& opt) {
  atlas.group = &g;
  atlas.precision = opt.precision;
  atlas.prefix_precision = std::min(opt.prefix_precision, opt.precision);
  atlas.margin = opt.margin;
  atlas.ball = std::make_shared<const Ball>(g.ball(opt.precision));
  atlas.prefix_ball = std::make_shared<const Ball>(g.ball(atlas.prefix_precision));
}

// Ensure the witness of rep xi is deep enough to act by an element of length
// gl and still satisfy the depth requirement.
void ensure_depth(BoundaryAtlas& atlas, int xi, long long gl) {
  TruncHoro& r = atlas.reps[static_cast<size_t>(xi)];
  long long need = atlas.precision + atlas.margin + gl;
  while (r.depth < need) {
    r.witness = atlas.group->deepen_witness(*atlas.ball, r.witness);
    r.depth = atlas.group->word_length(r.witness);
  }
}

void build_action_table(BoundaryAtlas& atlas) {
  const auto& gens = atlas.group->generators();
  atlas.action.assign(gens.size() * static_cast<size_t>(atlas.size()), -1);
  for (int xi = 0; xi < atlas.size(); ++xi)
    for (size_t s = 0; s < gens.size(); ++s)
      atlas.action[s * static_cast<size_t>(atlas.size()) + static_cast<size_t>(xi)] =
          act(atlas, gens[s], xi);
}

}  // namespace

BoundaryAtlas enumerate_boundary(const GroupSpec& g, const AtlasOptions& opt) {
  BoundaryAtlas atlas;
  init_atlas(atlas, g, opt);
  const int r_lo = opt.precision + opt.margin;
  const int r_hi = r_lo + opt.window - 1;
  Ball big = g.ball(r_hi, /*keep_index=*/false);

  std::vector<int8_t> table(static_cast<size_t>(atlas.ball->size()));
  // Tables seen per sphere, as hashes of the full table; full dedupe happens
  // through intern() below.
  std::vector<std::vector<uint64_t>> sphere_sets(static_cast<size_t>(opt.window));
  struct Cand {
    Element witness;
    long long depth;
  };
  std::unordered_map<uint64_t, Cand> best_witness;

  for (int r = r_lo; r <= r_hi; ++r) {
    auto& set = sphere_sets[static_cast<size_t>(r - r_lo)];
    for (int id = big.sphere_begin(r); id < big.sphere_end(r); ++id) {
      const Element& y = big.elems[static_cast<size_t>(id)];
      g.fill_horo_table(*atlas.ball, y, table.data());
      uint64_t h = table_hash(table.data(), table.size());
      set.push_back(h);
      auto [it, fresh] = best_witness.try_emplace(h, Cand{y, r});
      if (!fresh && r > it->second.depth) it->second = Cand{y, r};
    }
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
  }
  for (int i = 1; i < opt.window; ++i) {
    if (sphere_sets[static_cast<size_t>(i)] != sphere_sets[0])
      throw instability_error(
          "boundary enumeration did not stabilize: spheres " + std::to_string(r_lo) + " and " +
              std::to_string(r_lo + i) + " give different restriction sets",
          r_lo, r_lo + i);
  }
  for (uint64_t h : sphere_sets[0]) {
    const Cand& c = best_witness.at(h);
    g.fill_horo_table(*atlas.ball, c.witness, table.data());
    check_lipschitz(*atlas.ball, table.data());
    intern(atlas, table, c.witness, c.depth);
  }
  atlas.window_lo = r_lo;
  atlas.window_hi = r_hi;
  atlas.seed_desc = "sphere scan";
  build_action_table(atlas);
  return atlas;
}

BoundaryAtlas atlas_from_seed(const GroupSpec& g, const AtlasOptions& opt, const Element& seed_ray) {
  BoundaryAtlas atlas;
  init_atlas(atlas, g, opt);
  Element seed = seed_ray;
  long long depth = g.word_length(seed);
  while (depth < opt.precision + opt.margin + 2) {
    seed = g.deepen_witness(*atlas.ball, seed);
    depth = g.word_length(seed);
  }
  std::vector<int8_t> table(static_cast<size_t>(atlas.ball->size()));
  g.fill_horo_table(*atlas.ball, seed, table.data());
  check_lipschitz(*atlas.ball, table.data());
  intern(atlas, table, seed, depth);
  atlas.seed_desc = g.to_string(seed_ray);

  const auto& gens = g.generators();
  for (int xi = 0; xi < atlas.size(); ++xi) {  // atlas grows during the loop
    for (const auto& s : gens) {
      long long gl = g.word_length(s);
      ensure_depth(atlas, xi, gl);
      Element w = g.mul(s, atlas.reps[static_cast<size_t>(xi)].witness);
      g.fill_horo_table(*atlas.ball, w, table.data());
      intern(atlas, table, w, g.word_length(w));
    }
  }
  build_action_table(atlas);
  atlas.orbit_built = true;
  return atlas;
}

int act(BoundaryAtlas& atlas, const Element& g, int xi) {
  const GroupSpec& G = *atlas.group;
  if (!atlas.action.empty()) {
    int s = G.gen_index(g);
    if (s >= 0) {
      int32_t r = atlas.action[static_cast<size_t>(s) * atlas.size() + static_cast<size_t>(xi)];
      if (r >= 0) return r;
    }
  }
  if (g.is_identity()) return xi;
  long long gl = G.word_length(g);
  ensure_depth(atlas, xi, gl);
  Element w = G.mul(g, atlas.reps[static_cast<size_t>(xi)].witness);
  thread_local std::vector<int8_t> table;
  table.resize(static_cast<size_t>(atlas.ball->size()));
  G.fill_horo_table(*atlas.ball, w, table.data());
  int r = atlas.find_by_table(table);
  if (r < 0)
    throw precision_error("act: image of representative " + std::to_string(xi) + " under " +
                          G.to_string(g) +
                          " is not in the atlas; the component may need a larger precision N");
  return r;
}

int agreement_radius(const BoundaryAtlas& atlas, int i, int j) {
  if (i == j) return atlas.precision + 1;
  const Ball& ball = *atlas.ball;
  thread_local std::vector<int8_t> ti, tj;
  const int8_t *a, *b;
  if (atlas.precision <= atlas.prefix_precision) {
    a = atlas.reps[static_cast<size_t>(i)].prefix.data();
    b = atlas.reps[static_cast<size_t>(j)].prefix.data();
  } else {
    atlas.full_table(i, ti);
    atlas.full_table(j, tj);
    a = ti.data();
    b = tj.data();
  }
  for (int r = 1; r <= atlas.precision; ++r) {
    for (int id = ball.sphere_begin(r); id < ball.sphere_end(r); ++id)
      if (a[id] != b[id]) return r - 1;
  }
  return atlas.precision + 1;
}

double boundary_dist(const BoundaryAtlas& atlas, int i, int j) {
  int r = agreement_radius(atlas, i, j);
  if (r > atlas.precision) return 0.0;  // identical at full precision: <= e^{-N}
  return std::exp(-static_cast<double>(r));
}

long long busemann_cocycle(BoundaryAtlas& atlas, const Element& g, int xi) {
  const GroupSpec& G = *atlas.group;
  Element gi = G.inv(g);
  int32_t id = atlas.prefix_ball->id_of(gi);
  if (id >= 0) return atlas.reps[static_cast<size_t>(xi)].prefix[static_cast<size_t>(id)];
  id = atlas.ball->id_of(gi);
  if (id >= 0) {
    thread_local std::vector<int8_t> t;
    atlas.full_table(xi, t);
    return t[static_cast<size_t>(id)];
  }
  // Beyond atlas precision: evaluate against the witness at two depths and
  // require agreement.
  long long gl = G.word_length(gi);
  ensure_depth(atlas, xi, gl);
  const TruncHoro& r = atlas.reps[static_cast<size_t>(xi)];
  auto eval = [&](const Element& w) { return G.dist(gi, w) - G.word_length(w); };
  long long v1 = eval(r.witness);
  Element deeper = G.deepen_witness(*atlas.ball, r.witness);
  deeper = G.deepen_witness(*atlas.ball, deeper);
  long long v2 = eval(deeper);
  if (v1 != v2)
    throw precision_error("busemann_cocycle: witness evaluation unstable for " + G.to_string(g) +
                          "; increase atlas precision");
  return v1;
}

BoundaryAtlas minimal_component(const BoundaryAtlas& atlas, int seed) {
  const GroupSpec& G = *atlas.group;
  const auto& gens = G.generators();
  std::vector<int32_t> map_to_new(static_cast<size_t>(atlas.size()), -1);
  std::vector<int32_t> order;
  std::deque<int32_t> q;
  map_to_new[static_cast<size_t>(seed)] = 0;
  order.push_back(seed);
  q.push_back(seed);
  while (!q.empty()) {
    int32_t cur = q.front();
    q.pop_front();
    for (size_t s = 0; s < gens.size(); ++s) {
      int32_t nxt = atlas.action[s * static_cast<size_t>(atlas.size()) + static_cast<size_t>(cur)];
      if (map_to_new[static_cast<size_t>(nxt)] < 0) {
        map_to_new[static_cast<size_t>(nxt)] = static_cast<int32_t>(order.size());
        order.push_back(nxt);
        q.push_back(nxt);
      }
    }
  }
  BoundaryAtlas out;
  out.group = atlas.group;
  out.ball = atlas.ball;
  out.prefix_ball = atlas.prefix_ball;
  out.precision = atlas.precision;
  out.prefix_precision = atlas.prefix_precision;
  out.margin = atlas.margin;
  out.window_lo = atlas.window_lo;
  out.window_hi = atlas.window_hi;
  out.orbit_built = atlas.orbit_built;
  out.seed_desc = "component of " + std::to_string(seed) + " in (" + atlas.seed_desc + ")";
  for (int32_t old : order) {
    out.reps.push_back(atlas.reps[static_cast<size_t>(old)]);
    out.buckets[out.reps.back().full_hash].push_back(static_cast<int32_t>(out.reps.size()) - 1);
  }
  out.action.assign(gens.size() * out.reps.size(), -1);
  for (size_t i = 0; i < order.size(); ++i)
    for (size_t s = 0; s < gens.size(); ++s)
      out.action[s * out.reps.size() + i] = map_to_new[static_cast<size_t>(
          atlas.action[s * static_cast<size_t>(atlas.size()) + static_cast<size_t>(order[i])])];
  return out;
}

nlohmann::json atlas_to_json(const BoundaryAtlas& atlas) {
  nlohmann::json j;
  j["precision"] = atlas.precision;
  j["size"] = atlas.size();
  j["seed"] = atlas.seed_desc;
  j["orbit_built"] = atlas.orbit_built;
  if (!atlas.orbit_built) j["window"] = {atlas.window_lo, atlas.window_hi};
  std::vector<int8_t> t;
  nlohmann::json reps = nlohmann::json::array();
  for (int i = 0; i < atlas.size(); ++i) {
    atlas.full_table(i, t);
    nlohmann::json r;
    r["witness"] = atlas.group->to_string(atlas.reps[static_cast<size_t>(i)].witness);
    r["table"] = std::vector<int>(t.begin(), t.end());
    reps.push_back(std::move(r));
  }
  j["representatives"] = std::move(reps);
  nlohmann::json act = nlohmann::json::object();
  for (size_t s = 0; s < atlas.group->generators().size(); ++s) {
    std::vector<int32_t> row(atlas.action.begin() + s * atlas.size(),
                             atlas.action.begin() + (s + 1) * atlas.size());
    act[atlas.group->gen_names[s]] = row;
  }
  j["action"] = std::move(act);
  return j;
}

}  // namespace hypwalk
