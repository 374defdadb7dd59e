#include "hypwalk/group.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <deque>
#include <set>

namespace hypwalk {

namespace {

constexpr int kMaxFiniteOrder = 64;

char letter_char(int8_t l) {
  return l > 0 ? static_cast<char>('a' + l - 1) : static_cast<char>('A' - l - 1);
}

int8_t syll_factor(char byte) { return static_cast<int8_t>((static_cast<uint8_t>(byte) >> 4) & 0xF); }
int8_t syll_exp(char byte) { return static_cast<int8_t>(static_cast<uint8_t>(byte) & 0xF); }
char make_syll(int factor, int exp) { return static_cast<char>((factor << 4) | exp); }

}  // namespace

uint8_t FiniteGroup::inv(uint8_t i) const {
  for (int j = 0; j < order; ++j)
    if (mul(i, static_cast<uint8_t>(j)) == 0) return static_cast<uint8_t>(j);
  throw config_error("finite factor: element has no inverse");
}

void FiniteGroup::validate() const {
  if (order < 1 || order > kMaxFiniteOrder)
    throw config_error("finite factor order must be in [1, 64]");
  if (static_cast<int>(table.size()) != order * order)
    throw config_error("finite factor table has wrong size");
  for (int i = 0; i < order; ++i) {
    if (mul(0, i) != i || mul(i, 0) != i)
      throw config_error("finite factor: index 0 is not the identity");
    std::vector<bool> seen_row(order, false), seen_col(order, false);
    for (int j = 0; j < order; ++j) {
      uint8_t r = mul(i, j), c = mul(j, i);
      if (r >= order || c >= order) throw config_error("finite factor: entry out of range");
      if (seen_row[r] || seen_col[c]) throw config_error("finite factor: table rows/columns not permutations");
      seen_row[r] = seen_col[c] = true;
    }
  }
  for (int i = 0; i < order; ++i) inv(static_cast<uint8_t>(i));
  for (int i = 0; i < order; ++i)
    for (int j = 0; j < order; ++j)
      for (int k = 0; k < order; ++k)
        if (mul(mul(i, j), k) != mul(i, mul(j, k)))
          throw config_error("finite factor: table not associative");
}

// ---------------------------------------------------------------------------
// construction & validation

GroupSpec GroupSpec::free_group(int rank) {
  GroupSpec g;
  g.family = Family::FreeGroup;
  g.rank = rank;
  g.validate();
  g.set_generators(g.default_generators());
  return g;
}

GroupSpec GroupSpec::free_product_cyclics(std::vector<int> orders) {
  GroupSpec g;
  g.family = Family::FreeProductCyclics;
  g.orders = std::move(orders);
  g.validate();
  g.set_generators(g.default_generators());
  return g;
}

GroupSpec GroupSpec::direct_with_finite(GroupSpec base, FiniteGroup finite) {
  if (base.family == Family::DirectWithFinite)
    throw config_error("direct_with_finite: base must be a free group or free product of cyclics");
  GroupSpec g;
  g.family = Family::DirectWithFinite;
  g.base_family = base.family;
  g.rank = base.rank;
  g.orders = base.orders;
  g.finite = std::move(finite);
  g.validate();
  g.set_generators(g.default_generators());
  return g;
}

void GroupSpec::validate() const {
  Family base = family == Family::DirectWithFinite ? base_family : family;
  if (base == Family::FreeGroup) {
    if (rank < 2 || rank > 8) throw config_error("free group rank must be in [2, 8]");
  } else {
    if (orders.size() < 2 || orders.size() > 8)
      throw config_error("free product needs between 2 and 8 cyclic factors");
    for (int n : orders)
      if (n < 2 || n > 15) throw config_error("cyclic factor orders must be in [2, 15]");
    int nontrivial = 0;
    for (int n : orders) nontrivial += (n > 2);
    if (orders.size() == 2 && nontrivial == 0)
      throw config_error("Z/2 * Z/2 is virtually Z, hence elementary; rejected");
  }
  if (family == Family::DirectWithFinite) finite.validate();
}

std::vector<Element> GroupSpec::default_generators() const {
  std::vector<Element> out;
  Family base = family == Family::DirectWithFinite ? base_family : family;
  std::vector<Element> base_gens;
  if (base == Family::FreeGroup) {
    for (int i = 1; i <= rank; ++i) {
      base_gens.push_back(Element{std::string(1, static_cast<char>(i)), 0});
      base_gens.push_back(Element{std::string(1, static_cast<char>(-i)), 0});
    }
  } else {
    for (size_t i = 0; i < orders.size(); ++i) {
      base_gens.push_back(Element{std::string(1, make_syll(static_cast<int>(i), 1)), 0});
      if (orders[i] > 2)
        base_gens.push_back(Element{std::string(1, make_syll(static_cast<int>(i), orders[i] - 1)), 0});
    }
  }
  if (family != Family::DirectWithFinite) return base_gens;
  for (auto& b : base_gens) out.push_back(b);
  for (int f = 1; f < finite.order; ++f) out.push_back(Element{std::string(), static_cast<uint8_t>(f)});
  return out;
}

void GroupSpec::set_generators(std::vector<Element> s) {
  if (s.empty()) throw config_error("generating set must be nonempty");
  gens = std::move(s);
  for (const auto& g : gens) {
    if (g.is_identity()) throw config_error("identity is not allowed as a generator");
    if (gen_index(inv(g)) < 0)
      throw config_error("generating set is not symmetric: missing inverse of " + to_string(g));
  }
  gen_names.clear();
  for (const auto& g : gens) gen_names.push_back(to_string(g));

  // Generation check: BFS over S must cover the radius-2 ball of the default
  // generating set.
  std::set<std::string> targets;
  auto defaults = default_generators();
  for (const auto& a : defaults)
    for (const auto& b : defaults) {
      targets.insert(to_string(mul(a, b)));
      targets.insert(to_string(a));
    }
  std::unordered_map<Element, int, ElementHash> seen;
  std::deque<Element> q;
  seen[identity()] = 0;
  q.push_back(identity());
  size_t found = targets.count("e") ? 1 : 0;
  while (!q.empty() && found < targets.size()) {
    Element cur = q.front();
    q.pop_front();
    if (seen[cur] >= 10) continue;
    for (const auto& g : gens) {
      Element nxt = mul(cur, g);
      if (seen.emplace(nxt, seen[cur] + 1).second) {
        if (targets.count(to_string(nxt))) ++found;
        q.push_back(nxt);
        if (seen.size() > 2'000'000)
          throw config_error("generation check exceeded its search budget");
      }
    }
  }
  if (found < targets.size())
    throw config_error("generating set does not generate the radius-2 default ball");
  detect_closed_length();
}

int GroupSpec::gen_index(const Element& g) const {
  for (size_t i = 0; i < gens.size(); ++i)
    if (gens[i] == g) return static_cast<int>(i);
  return -1;
}

// ---------------------------------------------------------------------------
// exact arithmetic

Element GroupSpec::mul(const Element& a, const Element& b) const {
  Element r = a;
  Family base = family == Family::DirectWithFinite ? base_family : family;
  if (base == Family::FreeGroup) {
    for (char c : b.w) {
      if (!r.w.empty() && r.w.back() == -c)
        r.w.pop_back();
      else
        r.w.push_back(c);
    }
  } else {
    for (char c : b.w) {
      int f = syll_factor(c), e = syll_exp(c);
      if (!r.w.empty() && syll_factor(r.w.back()) == f) {
        int merged = (syll_exp(r.w.back()) + e) % orders[f];
        if (merged == 0)
          r.w.pop_back();
        else
          r.w.back() = make_syll(f, merged);
      } else {
        r.w.push_back(c);
      }
    }
  }
  if (family == Family::DirectWithFinite) r.fin = finite.mul(a.fin, b.fin);
  return r;
}

Element GroupSpec::inv(const Element& a) const {
  Element r;
  Family base = family == Family::DirectWithFinite ? base_family : family;
  r.w.reserve(a.w.size());
  for (auto it = a.w.rbegin(); it != a.w.rend(); ++it) {
    if (base == Family::FreeGroup)
      r.w.push_back(static_cast<char>(-*it));
    else
      r.w.push_back(make_syll(syll_factor(*it), orders[syll_factor(*it)] - syll_exp(*it)));
  }
  if (family == Family::DirectWithFinite) r.fin = finite.inv(a.fin);
  return r;
}

int GroupSpec::base_len(const Element& a) const {
  Family base = family == Family::DirectWithFinite ? base_family : family;
  if (base == Family::FreeGroup) return static_cast<int>(a.w.size());
  int len = 0;
  for (char c : a.w) {
    int n = orders[syll_factor(c)], e = syll_exp(c);
    len += std::min(e, n - e);
  }
  return len;
}

// ---------------------------------------------------------------------------
// parsing / printing

Element GroupSpec::parse(const std::string& s) const {
  std::string base = s;
  uint8_t fin = 0;
  if (auto bar = s.find('|'); bar != std::string::npos) {
    if (family != Family::DirectWithFinite)
      throw malformed_input_error("'|' component in a group without finite factor: " + s);
    base = s.substr(0, bar);
    std::string fs = s.substr(bar + 1);
    if (fs.empty() || fs.find_first_not_of("0123456789") != std::string::npos)
      throw malformed_input_error("bad finite component in: " + s);
    int f = std::stoi(fs);
    if (f < 0 || f >= finite.order) throw malformed_input_error("finite component out of range in: " + s);
    fin = static_cast<uint8_t>(f);
  }
  if (base == "e") base.clear();
  Family bf = family == Family::DirectWithFinite ? base_family : family;
  int nletters = bf == Family::FreeGroup ? rank : static_cast<int>(orders.size());
  Element r;
  for (char c : base) {
    int idx;
    bool inverse;
    if (c >= 'a' && c <= 'z') {
      idx = c - 'a';
      inverse = false;
    } else if (c >= 'A' && c <= 'Z') {
      idx = c - 'A';
      inverse = true;
    } else {
      throw malformed_input_error(std::string("unknown symbol '") + c + "' in: " + s);
    }
    if (idx >= nletters) throw malformed_input_error(std::string("unknown symbol '") + c + "' in: " + s);
    Element letter;
    if (bf == Family::FreeGroup)
      letter.w.push_back(static_cast<char>(inverse ? -(idx + 1) : idx + 1));
    else
      letter.w.push_back(make_syll(idx, inverse ? orders[idx] - 1 : 1));
    r = mul(r, letter);
  }
  r.fin = fin;
  return r;
}

std::string GroupSpec::to_string(const Element& e) const {
  if (e.is_identity()) return "e";
  Family bf = family == Family::DirectWithFinite ? base_family : family;
  std::string out;
  for (char c : e.w) {
    if (bf == Family::FreeGroup) {
      out.push_back(letter_char(c));
    } else {
      int f = syll_factor(c), x = syll_exp(c), n = orders[f];
      // print with the shorter spelling: c^x or C^(n-x)
      if (x <= n - x)
        out.append(static_cast<size_t>(x), static_cast<char>('a' + f));
      else
        out.append(static_cast<size_t>(n - x), static_cast<char>('A' + f));
    }
  }
  if (family == Family::DirectWithFinite) {
    if (out.empty()) out = "e";
    out.push_back('|');
    out += std::to_string(static_cast<int>(e.fin));
  }
  return out;
}

Element GroupSpec::normal_form_of_tokens(const std::vector<std::string>& symbols) const {
  Element r;
  for (const auto& s : symbols) r = mul(r, parse(s));
  return r;
}

// ---------------------------------------------------------------------------
// word metric

void GroupSpec::detect_closed_length() {
  closed_len_kind_ = ClosedLen::None;
  std_gens_ = false;
  auto as_set = [&](const std::vector<Element>& v) {
    std::set<std::string> s;
    for (const auto& e : v) s.insert(to_string(e));
    return s;
  };
  auto have = as_set(gens), want = as_set(default_generators());
  std_gens_ = have == want;
  if (family == Family::FreeGroup && std_gens_) {
    closed_len_kind_ = ClosedLen::FreeStd;
    return;
  }
  if (family == Family::FreeProductCyclics && std_gens_) {
    closed_len_kind_ = ClosedLen::CyclicsStd;
    return;
  }
  if (family != Family::DirectWithFinite) return;
  if (std_gens_) {
    closed_len_kind_ = ClosedLen::ProductStd;
    fin_dist_.assign(finite.order, 0);
    for (int f = 1; f < finite.order; ++f) fin_dist_[f] = 1;
    return;
  }
  learn_product_correction();
}

void GroupSpec::learn_product_correction() {
  // Expect d(e,(v,f)) = base_len(v) + corr[f][base_len(v) mod 2]; learn the
  // correction table by BFS and verify it exhaustively on the learning ball.
  for (const auto& g : gens) {
    int bl = base_len(g);
    if (bl > 1) return;  // base parts must be single standard letters or e
  }
  const int learn_radius = 8;
  std::unordered_map<Element, int, ElementHash> dist;
  std::deque<Element> q;
  dist[identity()] = 0;
  q.push_back(identity());
  while (!q.empty()) {
    Element cur = q.front();
    q.pop_front();
    int d = dist[cur];
    if (d == learn_radius) continue;
    for (const auto& g : gens) {
      Element nxt = mul(cur, g);
      if (dist.emplace(nxt, d + 1).second) q.push_back(nxt);
      if (dist.size() > 4'000'000) return;
    }
  }
  std::vector<int> corr(static_cast<size_t>(finite.order) * 2, -1);
  for (const auto& [el, d] : dist) {
    int bl = base_len(el);
    if (d >= learn_radius) continue;  // elements at the rim may have shorter true length
    int c = d - bl;
    int& slot = corr[static_cast<size_t>(el.fin) * 2 + (bl & 1)];
    if (slot == -1)
      slot = c;
    else if (slot != c)
      return;  // no closed form of this shape
  }
  for (int v : corr)
    if (v < 0) return;
  fin_corr_ = std::move(corr);
  closed_len_kind_ = ClosedLen::ProductLearned;
}

long long GroupSpec::word_length(const Element& e, const Ball* fallback) const {
  switch (closed_len_kind_) {
    case ClosedLen::FreeStd:
    case ClosedLen::CyclicsStd:
      return base_len(e);
    case ClosedLen::ProductStd:
      return base_len(e) + fin_dist_[e.fin];
    case ClosedLen::ProductLearned: {
      int bl = base_len(e);
      return bl + fin_corr_[static_cast<size_t>(e.fin) * 2 + (bl & 1)];
    }
    case ClosedLen::None:
      break;
  }
  if (fallback && fallback->indexed) {
    int32_t id = fallback->id_of(e);
    if (id >= 0) return fallback->rad[id];
    throw radius_error("word length of " + to_string(e) + " requires a ball of radius > " +
                           std::to_string(fallback->radius),
                       fallback->radius + 1);
  }
  throw radius_error("word length unavailable: no closed form for this generating set and no ball given", -1);
}

long long GroupSpec::dist(const Element& x, const Element& y, const Ball* fallback) const {
  return word_length(mul(inv(x), y), fallback);
}

double GroupSpec::gromov_product(const Element& x, const Element& y, const Element& z,
                                 const Ball* fallback) const {
  return 0.5 * static_cast<double>(dist(x, z, fallback) + dist(y, z, fallback) - dist(x, y, fallback));
}

// ---------------------------------------------------------------------------
// balls

Ball GroupSpec::ball(int radius, bool keep_index, const std::vector<Element>* gens_override) const {
  const std::vector<Element>& G = gens_override ? *gens_override : gens;
  Ball b;
  b.group = this;
  b.radius = radius;
  b.num_gens = static_cast<int>(G.size());
  b.elems.push_back(identity());
  b.rad.push_back(0);
  b.parent.push_back(-1);
  b.parent_gen.push_back(-1);
  b.index.reserve(1024);
  b.index[identity()] = 0;
  for (int32_t id = 0; id < static_cast<int32_t>(b.elems.size()); ++id) {
    b.adj.resize(static_cast<size_t>(id + 1) * b.num_gens, -1);
    Element cur = b.elems[id];  // copy: elems may reallocate below
    int r = b.rad[id];
    for (int s = 0; s < b.num_gens; ++s) {
      Element nxt = mul(cur, G[s]);
      auto it = b.index.find(nxt);
      if (it != b.index.end()) {
        b.adj[static_cast<size_t>(id) * b.num_gens + s] = it->second;
        continue;
      }
      if (r + 1 > radius) continue;  // outside the ball
      if (static_cast<long long>(b.elems.size()) >= ball_node_budget)
        throw budget_error("ball node budget exceeded at radius " + std::to_string(r + 1),
                           b.elems.size());
      int32_t nid = static_cast<int32_t>(b.elems.size());
      b.index.emplace(nxt, nid);
      b.elems.push_back(std::move(nxt));
      b.rad.push_back(r + 1);
      b.parent.push_back(id);
      b.parent_gen.push_back(static_cast<int16_t>(s));
    }
  }
  b.sphere_start.assign(static_cast<size_t>(radius) + 2, 0);
  for (int r : b.rad) ++b.sphere_start[static_cast<size_t>(r) + 1];
  for (size_t i = 1; i < b.sphere_start.size(); ++i) b.sphere_start[i] += b.sphere_start[i - 1];
  if (!keep_index) {
    b.index.clear();
    b.indexed = false;
  }
  return b;
}

// ---------------------------------------------------------------------------
// hyperbolicity scan

Delta GroupSpec::estimate_delta(int radius) const {
  if (radius > max_delta_radius)
    throw config_error("estimate_delta: radius " + std::to_string(radius) +
                       " exceeds the configured maximum " + std::to_string(max_delta_radius));
  Ball b = ball(radius);
  const int n = b.size();
  // Pairwise distances: closed form, else BFS on a slack ball subgraph.
  std::vector<int16_t> d(static_cast<size_t>(n) * n);
  if (has_closed_length()) {
    for (int i = 0; i < n; ++i) {
      Element xi = inv(b.elems[i]);
      for (int j = i; j < n; ++j) {
        auto v = static_cast<int16_t>(word_length(mul(xi, b.elems[j])));
        d[static_cast<size_t>(i) * n + j] = v;
        d[static_cast<size_t>(j) * n + i] = v;
      }
    }
  } else {
    Ball big = ball(std::min(2 * radius, radius + 4));
    std::vector<int16_t> dist_big(static_cast<size_t>(big.size()));
    std::vector<int32_t> queue(big.size());
    for (int i = 0; i < n; ++i) {
      std::fill(dist_big.begin(), dist_big.end(), static_cast<int16_t>(-1));
      int qh = 0, qt = 0;
      int32_t src = big.id_of(b.elems[i]);
      dist_big[static_cast<size_t>(src)] = 0;
      queue[qt++] = src;
      while (qh < qt) {
        int32_t cur = queue[qh++];
        for (int s = 0; s < big.num_gens; ++s) {
          int32_t nx = big.adj[static_cast<size_t>(cur) * big.num_gens + s];
          if (nx >= 0 && dist_big[static_cast<size_t>(nx)] < 0) {
            dist_big[static_cast<size_t>(nx)] = static_cast<int16_t>(dist_big[static_cast<size_t>(cur)] + 1);
            queue[qt++] = nx;
          }
        }
      }
      for (int j = 0; j < n; ++j)
        d[static_cast<size_t>(i) * n + j] = dist_big[static_cast<size_t>(big.id_of(b.elems[j]))];
    }
  }
  // 2*<x|y>_e = |x| + |y| - d(x,y); scan all triples with basepoint e.
  std::vector<int16_t> gp(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      gp[static_cast<size_t>(i) * n + j] =
          static_cast<int16_t>(b.rad[i] + b.rad[j] - d[static_cast<size_t>(i) * n + j]);
  int best2 = 0;
  for (int i = 0; i < n; ++i) {
    const int16_t* gi = gp.data() + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const int16_t* gj = gp.data() + static_cast<size_t>(j) * n;
      const int16_t gij = gi[j];
      for (int k = 0; k < n; ++k) {
        int m = std::min<int>(gij, gj[k]);
        int def = m - gi[k];
        if (def > best2) best2 = def;
      }
    }
  }
  return Delta{0.5 * best2, radius};
}

// ---------------------------------------------------------------------------
// horofunction tables from witnesses

void GroupSpec::fill_horo_table(const Ball& b, const Element& y, int8_t* out) const {
  const int n = b.size();
  Family bf = family == Family::DirectWithFinite ? base_family : family;
  if (closed_len_kind_ == ClosedLen::None)
    throw precision_error("horofunction tables need a closed-form word length for this generating set");

  if (bf == Family::FreeProductCyclics) {
    long long dy = word_length(y);
    for (int i = 0; i < n; ++i)
      out[i] = static_cast<int8_t>(word_length(mul(inv(b.elems[i]), y)) - dy);
    return;
  }

  // Free base: incremental longest-common-prefix with y's base word along the
  // BFS tree. Ball elements are products of generators whose base parts are
  // single letters or trivial, so the base word changes by at most one letter
  // per BFS edge.
  const std::string& yw = y.w;
  const int ylen = static_cast<int>(yw.size());
  std::vector<int16_t> lcp(static_cast<size_t>(n));
  std::vector<int16_t> blen(static_cast<size_t>(n));
  lcp[0] = 0;
  blen[0] = 0;
  for (int i = 1; i < n; ++i) {
    int p = b.parent[i];
    int bl = static_cast<int>(b.elems[i].w.size());
    int pl = static_cast<int>(blen[static_cast<size_t>(p)]);
    int plcp = lcp[static_cast<size_t>(p)];
    int l;
    if (bl == pl) {
      l = plcp;  // finite-factor move, base unchanged
    } else if (bl < pl) {
      l = std::min(plcp, bl);  // cancellation
    } else if (bl == pl + 1) {
      l = (plcp == pl && pl < ylen && b.elems[i].w[static_cast<size_t>(pl)] == yw[static_cast<size_t>(pl)])
              ? pl + 1
              : plcp;
    } else {
      // multi-letter generator: recompute the prefix directly
      l = 0;
      const std::string& xw = b.elems[i].w;
      int lim = std::min(bl, ylen);
      while (l < lim && xw[static_cast<size_t>(l)] == yw[static_cast<size_t>(l)]) ++l;
    }
    lcp[i] = static_cast<int16_t>(l);
    blen[i] = static_cast<int16_t>(bl);
  }
  long long dy = word_length(y);
  const int ybl = static_cast<int>(yw.size());
  for (int i = 0; i < n; ++i) {
    int bdist = static_cast<int>(blen[i]) + ybl - 2 * lcp[i];
    long long dxy;
    switch (closed_len_kind_) {
      case ClosedLen::FreeStd:
        dxy = bdist;
        break;
      case ClosedLen::ProductStd: {
        uint8_t df = finite.mul(finite.inv(b.elems[i].fin), y.fin);
        dxy = bdist + fin_dist_[df];
        break;
      }
      case ClosedLen::ProductLearned: {
        uint8_t df = finite.mul(finite.inv(b.elems[i].fin), y.fin);
        dxy = bdist + fin_corr_[static_cast<size_t>(df) * 2 + (bdist & 1)];
        break;
      }
      default:
        dxy = 0;  // unreachable
    }
    out[i] = static_cast<int8_t>(dxy - dy);
  }
}

Element GroupSpec::deepen_witness(const Ball& b, const Element& y) const {
  Family bf = family == Family::DirectWithFinite ? base_family : family;
  long long dy = word_length(y);
  if (bf == Family::FreeGroup) {
    // Appending the last letter again never cancels, moves one step away from
    // the identity, and leaves d(x, y) - d(e, y) unchanged for every x with
    // |x| < |y| (the common prefix with any such x is unaffected).
    char last = y.w.empty() ? static_cast<char>(1) : y.w.back();
    Element cand = y;
    cand.w.push_back(last);
    if (closed_len_kind_ == ClosedLen::ProductLearned) cand.w.push_back(last);  // keep length parity
    if (word_length(cand) <= dy) throw precision_error("witness deepening failed");
    return cand;
  }
  // Free products: extend by a syllable of a different factor.
  int last_factor = y.w.empty() ? -1 : syll_factor(y.w.back());
  for (size_t f = 0; f < orders.size(); ++f) {
    if (static_cast<int>(f) == last_factor) continue;
    Element cand = y;
    cand.w.push_back(make_syll(static_cast<int>(f), 1));
    if (word_length(cand) == dy + 1) return cand;
  }
  (void)b;
  throw precision_error("witness deepening failed");
}

}  // namespace hypwalk
