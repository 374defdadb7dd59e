#include "hypwalk/green.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_map>

namespace hypwalk {

// ---------------------------------------------------------------------------
// StepMeasure

StepMeasure StepMeasure::make(const GroupSpec& g, std::vector<Element> support,
                              std::vector<double> weights) {
  if (support.size() != weights.size())
    throw config_error("measure: support and weight lists differ in length");
  if (support.empty()) throw config_error("measure: empty support");
  std::set<std::string> seen;
  for (const auto& e : support)
    if (!seen.insert(g.to_string(e)).second)
      throw config_error("measure: duplicate support element " + g.to_string(e));
  StepMeasure mu;
  mu.group = &g;
  mu.support = std::move(support);
  mu.weights = std::move(weights);
  double sum = 0.0;
  bool nonneg = true;
  for (double w : mu.weights) {
    sum += w;
    if (w < -1e-15) nonneg = false;
  }
  mu.is_probability = nonneg && std::abs(sum - 1.0) <= 1e-12;

  // Admissibility: the semigroup generated by the positive-weight support
  // must cover Ball(2) within a bounded number of steps.
  Ball b2 = g.ball(2);
  std::set<std::string> targets;
  for (const auto& e : b2.elems) targets.insert(g.to_string(e));
  std::unordered_map<Element, int, ElementHash> seen_bfs;
  std::deque<Element> q;
  seen_bfs[g.identity()] = 0;
  q.push_back(g.identity());
  size_t found = 1;  // identity
  targets.erase("e");
  const int depth_cap = 40;
  while (!q.empty() && found <= targets.size()) {
    Element cur = q.front();
    q.pop_front();
    int d = seen_bfs[cur];
    if (d >= depth_cap) break;
    for (size_t i = 0; i < mu.support.size(); ++i) {
      if (mu.weights[i] <= 0) continue;
      Element nxt = g.mul(cur, mu.support[i]);
      if (seen_bfs.emplace(nxt, d + 1).second) {
        if (targets.count(g.to_string(nxt))) ++found;
        if (seen_bfs.size() > 500'000) break;
        q.push_back(nxt);
      }
    }
  }
  mu.is_admissible = (found == targets.size() + 1);
  return mu;
}

double StepMeasure::total() const {
  double s = 0;
  for (double w : weights) s += w;
  return s;
}

double StepMeasure::weight_of(const Element& g) const {
  for (size_t i = 0; i < support.size(); ++i)
    if (support[i] == g) return weights[i];
  return 0.0;
}

int StepMeasure::max_word_length() const {
  long long m = 0;
  for (const auto& e : support) m = std::max(m, group->word_length(e));
  return static_cast<int>(m);
}

StepMeasure StepMeasure::reversed() const {
  std::vector<Element> s;
  s.reserve(support.size());
  for (const auto& e : support) s.push_back(group->inv(e));
  StepMeasure r = *this;
  r.support = std::move(s);
  return r;
}

// ---------------------------------------------------------------------------
// convolution powers

double ConvPower::total_mass() const {
  double s = 0;
  for (double m : mass) s += m;
  return s;
}

double ConvPower::entropy() const {
  double h = 0;
  for (double p : mass)
    if (p > 0) h -= p * std::log(p);
  return h;
}

ConvolutionEngine::ConvolutionEngine(const StepMeasure& mu, int n_max, bool keep_inverse_ids)
    : mu_(&mu) {
  const GroupSpec& g = *mu.group;
  std::set<std::string> seen;
  for (const auto& e : mu.support) {
    if (seen.insert(g.to_string(e)).second) sym_support_.push_back(e);
    Element i = g.inv(e);
    if (seen.insert(g.to_string(i)).second) sym_support_.push_back(i);
  }
  if (seen.count("e") == 0) {
    // identity not in support: fine, the ball just has no lazy edge
  }
  Ball b = g.ball(n_max, /*keep_index=*/true, &sym_support_);
  const int n = b.size();
  supp_adj_.assign(static_cast<size_t>(n) * mu.support.size(), -1);
  for (int id = 0; id < n; ++id)
    for (size_t s = 0; s < mu.support.size(); ++s) {
      int32_t t = b.id_of(g.mul(b.elems[static_cast<size_t>(id)], mu.support[s]));
      supp_adj_[static_cast<size_t>(id) * mu.support.size() + s] = t;
    }
  if (keep_inverse_ids) {
    inv_id_.assign(static_cast<size_t>(n), -1);
    for (int id = 0; id < n; ++id) inv_id_[static_cast<size_t>(id)] = b.id_of(g.inv(b.elems[static_cast<size_t>(id)]));
  }
  b.index.clear();
  b.indexed = false;
  cur_.ball = std::make_shared<const Ball>(std::move(b));
  cur_.mass.assign(static_cast<size_t>(n), 0.0);
  cur_.mass[0] = 1.0;
  cur_.n = 0;
  scratch_.assign(static_cast<size_t>(n), 0.0);
}

void ConvolutionEngine::step() {
  if (cur_.n + 1 > cur_.ball->radius)
    throw budget_error("convolution power exceeds the enumerated ball", cur_.n);
  std::fill(scratch_.begin(), scratch_.end(), 0.0);
  const size_t ns = mu_->support.size();
  const int lim = cur_.ball->sphere_end(cur_.n);  // support of mu^{*n}
  for (int id = 0; id < lim; ++id) {
    double m = cur_.mass[static_cast<size_t>(id)];
    if (m == 0.0) continue;
    const int32_t* row = supp_adj_.data() + static_cast<size_t>(id) * ns;
    for (size_t s = 0; s < ns; ++s) scratch_[static_cast<size_t>(row[s])] += m * mu_->weights[s];
  }
  std::swap(cur_.mass, scratch_);
  ++cur_.n;
}

double ConvolutionEngine::even_return_probability() const {
  if (inv_id_.empty()) throw integrity_error("even_return_probability needs inverse ids");
  double s = 0;
  const int lim = cur_.ball->sphere_end(std::min(cur_.n, cur_.ball->radius));
  for (int id = 0; id < lim; ++id) {
    double m = cur_.mass[static_cast<size_t>(id)];
    if (m != 0.0) s += m * cur_.mass[static_cast<size_t>(inv_id_[static_cast<size_t>(id)])];
  }
  return s;
}

ConvPower convolution_power(const StepMeasure& mu, int n) {
  ConvolutionEngine eng(mu, std::max(n, 1));
  for (int i = 0; i < n; ++i) eng.step();
  return eng.current();
}

SpectralRadiusEstimate spectral_radius_estimate(const StepMeasure& mu, int n_half_max) {
  if (!mu.is_probability) throw config_error("spectral_radius_estimate expects a probability measure");
  ConvolutionEngine eng(mu, n_half_max, /*keep_inverse_ids=*/true);
  std::vector<double> p2;  // p2[i] = mu^{*2(i+1)}(e)
  for (int n = 1; n <= n_half_max; ++n) {
    eng.step();
    p2.push_back(eng.even_return_probability());
  }
  SpectralRadiusEstimate est;
  int m = static_cast<int>(p2.size());
  if (m < 2 || p2[static_cast<size_t>(m - 1)] <= 0 || p2[static_cast<size_t>(m - 2)] <= 0) {
    est.has_estimate = false;  // the walk never returns (e.g. a point mass)
    return est;
  }
  est.has_estimate = true;
  est.last_power = 2 * m;
  est.root_last = std::pow(p2[static_cast<size_t>(m - 1)], 1.0 / (2.0 * m));
  est.root_prev = std::pow(p2[static_cast<size_t>(m - 2)], 1.0 / (2.0 * (m - 1)));
  double rn = p2[static_cast<size_t>(m - 1)] / p2[static_cast<size_t>(m - 2)];
  double rp = p2[static_cast<size_t>(m - 2)] / p2[static_cast<size_t>(m - 3 >= 0 ? m - 3 : 0)];
  if (m >= 3) {
    double richardson = m * rn - (m - 1) * rp;  // kills the 1/n prefactor bias
    est.rho = richardson > 0 ? std::sqrt(richardson) : std::sqrt(rn);
  } else {
    est.rho = std::sqrt(rn);
  }
  return est;
}

// ---------------------------------------------------------------------------
// radial reduction

std::optional<RadialGreen> RadialGreen::make(const StepMeasure& mu) {
  const GroupSpec& g = *mu.group;
  Family base = g.family == Family::DirectWithFinite ? g.base_family : g.family;
  if (base != Family::FreeGroup) return std::nullopt;
  RadialGreen r;
  r.group_ = &g;
  r.two_k_ = 2 * g.rank;
  r.fin_order_ = g.family == Family::DirectWithFinite ? g.finite.order : 1;
  r.stay_.assign(static_cast<size_t>(r.fin_order_), 0.0);
  std::vector<std::vector<double>> dir(static_cast<size_t>(r.fin_order_));
  for (auto& v : dir) v.assign(static_cast<size_t>(r.two_k_), -1.0);
  for (size_t i = 0; i < mu.support.size(); ++i) {
    const Element& e = mu.support[i];
    int bl = g.base_len(e);
    if (bl > 1) return std::nullopt;
    if (bl == 0) {
      r.stay_[e.fin] += mu.weights[i];
      continue;
    }
    int letter = static_cast<int8_t>(e.w[0]);
    int idx = letter > 0 ? letter - 1 : g.rank - letter - 1;
    if (dir[e.fin][static_cast<size_t>(idx)] >= 0) return std::nullopt;
    dir[e.fin][static_cast<size_t>(idx)] = mu.weights[i];
  }
  r.move_.assign(static_cast<size_t>(r.fin_order_), 0.0);
  for (int f = 0; f < r.fin_order_; ++f) {
    double w = -1;
    bool any = false, all = true;
    for (double v : dir[static_cast<size_t>(f)]) {
      if (v >= 0) {
        any = true;
        if (w < 0)
          w = v;
        else if (std::abs(v - w) > 1e-15)
          return std::nullopt;  // not direction-uniform
      } else {
        all = false;
      }
    }
    if (any && !all) return std::nullopt;
    r.move_[static_cast<size_t>(f)] = any ? w : 0.0;
  }
  return r;
}

// two-step sup-mass ratio, robust to parity-alternating walks
static double sup_ratio_rho(const std::vector<double>& sups) {
  size_t n = sups.size();
  if (n < 8) return 0.9;
  double a = sups[n - 1], b = sups[n - 3];
  if (b <= 0) return 0.9;
  return std::sqrt(std::max(a / b, 1e-12));
}

void RadialGreen::run(int n_cap) const {
  if (n_max_ >= n_cap) return;
  const int F = fin_order_;
  const int R = n_cap + 1;
  auto idx = [&](int rr, int f) { return static_cast<size_t>(rr) * F + static_cast<size_t>(f); };
  std::vector<double> cur(static_cast<size_t>(R + 1) * F, 0.0), nxt(cur.size(), 0.0);
  green_.assign(cur.size(), 0.0);
  dist_.clear();
  sup_hist_.clear();
  cur[idx(0, 0)] = 1.0;
  green_[idx(0, 0)] = 1.0;
  dist_.push_back(cur);
  rho_hat_ = 0.0;
  double prev_sup = 1.0;
  for (int n = 1; n <= n_cap; ++n) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    const GroupSpec& g = *group_;
    int rmax = std::min(n, R);
    for (int rr = 0; rr < rmax; ++rr) {
      for (int f = 0; f < F; ++f) {
        double m = cur[idx(rr, f)];
        if (m == 0.0) continue;
        for (int fs = 0; fs < F; ++fs) {
          double ws = stay_[static_cast<size_t>(fs)], wm = move_[static_cast<size_t>(fs)];
          if (ws == 0.0 && wm == 0.0) continue;
          int ft = F == 1 ? 0 : g.finite.mul(static_cast<uint8_t>(f), static_cast<uint8_t>(fs));
          if (ws != 0.0) nxt[idx(rr, ft)] += m * ws;
          if (wm != 0.0) {
            if (rr == 0) {
              nxt[idx(1, ft)] += m * wm * two_k_;
            } else {
              nxt[idx(rr - 1, ft)] += m * wm;
              if (rr + 1 <= R) nxt[idx(rr + 1, ft)] += m * wm * (two_k_ - 1);
            }
          }
        }
      }
    }
    std::swap(cur, nxt);
    for (size_t i = 0; i < cur.size(); ++i) green_[i] += cur[i];
    if (static_cast<int>(dist_.size()) <= 80) dist_.push_back(cur);
    // sup point mass this layer, for the tail rate
    double sup = 0, count = 1;
    for (int rr = 0; rr <= std::min(n, R); ++rr) {
      for (int f = 0; f < F; ++f) sup = std::max(sup, cur[idx(rr, f)] / count);
      count *= (rr == 0 ? two_k_ : two_k_ - 1);
    }
    sup_hist_.push_back(sup);
    prev_sup = sup;
  }
  (void)prev_sup;
  rho_hat_ = sup_ratio_rho(sup_hist_);
  layers_ = cur;
  n_max_ = n_cap;
}

GreenValue RadialGreen::at_e(const Element& z, double eps) const {
  run(std::max(600, 6 * group_->base_len(z) + 100));
  int r = group_->base_len(z);
  int f = z.fin;
  if (r > n_max_) throw budget_error("radial green: target deeper than the run cap", r);
  double count = 1;
  for (int rr = 1; rr <= r; ++rr) count *= (rr == 1 ? two_k_ : two_k_ - 1);
  double value = green_[static_cast<size_t>(r) * fin_order_ + static_cast<size_t>(f)] / count;
  // tail: remaining layers bounded by the measured sup-point-mass decay with
  // a 10% safety margin
  double sup_last = 0;
  double cnt = 1;
  for (int rr = 0; rr <= n_max_; ++rr) {
    for (int ff = 0; ff < fin_order_; ++ff)
      sup_last = std::max(sup_last, layers_[static_cast<size_t>(rr) * fin_order_ + ff] / cnt);
    cnt *= (rr == 0 ? two_k_ : two_k_ - 1);
  }
  double rho = std::min(0.999, rho_hat_ * 1.10);
  double tail = rho < 1.0 ? sup_last * rho / (1 - rho) : 1.0;
  if (tail > eps)
    throw budget_error("radial green: certified tail " + std::to_string(tail) +
                       " exceeds requested eps");
  return GreenValue{value, tail};
}

double RadialGreen::point_mass(const Element& z, int n) const {
  run(std::max(n, 80));
  if (n >= static_cast<int>(dist_.size()))
    throw budget_error("radial point mass: layer storage cap exceeded", n);
  int r = group_->base_len(z);
  if (r > n) return 0.0;
  double count = 1;
  for (int rr = 1; rr <= r; ++rr) count *= (rr == 1 ? two_k_ : two_k_ - 1);
  return dist_[static_cast<size_t>(n)][static_cast<size_t>(r) * fin_order_ + z.fin] / count;
}

// ---------------------------------------------------------------------------
// GreenEngine

GreenEngine::GreenEngine(const StepMeasure& mu, GreenOptions opt)
    : mu_(&mu), opt_(opt), radial_(RadialGreen::make(mu)) {}

void GreenEngine::build_table() const {
  if (table_ball_) return;
  const GroupSpec& g = *mu_->group;
  Ball b = g.ball(opt_.table_radius);
  const int n = b.size();
  const size_t ns = mu_->support.size();
  std::vector<int32_t> adj(static_cast<size_t>(n) * ns);
  for (int id = 0; id < n; ++id)
    for (size_t s = 0; s < ns; ++s)
      adj[static_cast<size_t>(id) * ns + s] = b.id_of(g.mul(b.elems[static_cast<size_t>(id)], mu_->support[s]));
  std::vector<double> cur(static_cast<size_t>(n), 0.0), nxt(cur.size());
  table_.assign(static_cast<size_t>(n), 0.0);
  cur[0] = 1.0;
  table_[0] = 1.0;
  double leak = 0.0, sup = 1.0, rho = 0.0;
  for (int step = 1; step <= opt_.n_max; ++step) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (int id = 0; id < n; ++id) {
      double m = cur[static_cast<size_t>(id)];
      if (m == 0.0) continue;
      const int32_t* row = adj.data() + static_cast<size_t>(id) * ns;
      for (size_t s = 0; s < ns; ++s) {
        if (row[s] >= 0)
          nxt[static_cast<size_t>(row[s])] += m * mu_->weights[s];
        else
          leak += m * mu_->weights[s];
      }
    }
    std::swap(cur, nxt);
    double s2 = 0;
    for (double v : cur) s2 = std::max(s2, v);
    for (int id = 0; id < n; ++id) table_[static_cast<size_t>(id)] += cur[static_cast<size_t>(id)];
    if (sup > 0 && step > 8) rho = s2 / sup;
    sup = s2;
    if (sup < 1e-18) break;
  }
  rho = std::min(0.999, std::max(rho, 0.0) * opt_.rho_margin);
  table_tail_ = sup * (rho < 1 ? rho / (1 - rho) : 1.0) + leak;
  table_ball_ = std::make_shared<const Ball>(std::move(b));
}

GreenValue GreenEngine::at_e(const Element& z, double eps) const {
  if (radial_) return radial_->at_e(z, eps);
  build_table();
  int32_t id = table_ball_->id_of(z);
  if (id < 0)
    throw budget_error("green: target outside the table ball of radius " +
                       std::to_string(opt_.table_radius));
  // Truncation bound: leaked paths must re-enter from distance >= gap.
  double tail = table_tail_;
  if (tail > eps)
    throw budget_error("green: certified tail " + std::to_string(tail) + " exceeds eps");
  return GreenValue{table_[static_cast<size_t>(id)], tail};
}

GreenValue GreenEngine::at(const Element& x, const Element& y, double eps) const {
  return at_e(mu_->group->mul(mu_->group->inv(x), y), eps);
}

// ---------------------------------------------------------------------------
// relative Green

GreenValue relative_green(const StepMeasure& mu, const Element& x, const Element& y,
                          const std::function<bool(const Element&)>& region, const Ball& ball,
                          const GreenOptions& opt) {
  const GroupSpec& g = *mu.group;
  const int n = ball.size();
  const size_t ns = mu.support.size();
  int32_t xid = ball.id_of(x), yid = ball.id_of(y);
  if (xid < 0 || yid < 0) throw budget_error("relative_green: endpoint outside the working ball");
  std::vector<int32_t> adj(static_cast<size_t>(n) * ns);
  for (int id = 0; id < n; ++id)
    for (size_t s = 0; s < ns; ++s)
      adj[static_cast<size_t>(id) * ns + s] = ball.id_of(g.mul(ball.elems[static_cast<size_t>(id)], mu.support[s]));
  std::vector<char> in_region(static_cast<size_t>(n));
  for (int id = 0; id < n; ++id) in_region[static_cast<size_t>(id)] = region(ball.elems[static_cast<size_t>(id)]) ? 1 : 0;

  double total = (x == y) ? 1.0 : 0.0;  // the length-0 path
  std::vector<double> cur(static_cast<size_t>(n), 0.0), nxt(cur.size());
  cur[static_cast<size_t>(xid)] = 1.0;
  double leak = 0.0, sup = 1.0, rho = 0.0;
  for (int step = 1; step <= opt.n_max; ++step) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (int id = 0; id < n; ++id) {
      double m = cur[static_cast<size_t>(id)];
      if (m == 0.0) continue;
      // interior constraint: continue only from region states (the start is
      // exempt at step 1)
      if (step > 1 && !in_region[static_cast<size_t>(id)]) continue;
      const int32_t* row = adj.data() + static_cast<size_t>(id) * ns;
      for (size_t s = 0; s < ns; ++s) {
        if (row[s] >= 0)
          nxt[static_cast<size_t>(row[s])] += m * mu.weights[s];
        else
          leak += m * mu.weights[s];
      }
    }
    std::swap(cur, nxt);
    total += cur[static_cast<size_t>(yid)];
    double s2 = 0;
    for (double v : cur)
      if (v > s2) s2 = v;
    if (sup > 0 && step > 8) rho = s2 / sup;
    sup = s2;
    if (sup < 1e-18 && leak == 0.0) break;
    if (sup < 1e-18) break;
  }
  rho = std::min(0.999, rho * opt.rho_margin);
  double tail = sup * (rho < 1 ? rho / (1 - rho) : 1.0) + leak;
  return GreenValue{total, tail};
}

// ---------------------------------------------------------------------------
// diagnostics

double ancona_check(const GreenEngine& green, const Element& x, const Element& y, const Element& z,
                    double K, double eps) {
  const GroupSpec& g = *green.measure().group;
  if (g.gromov_product(x, y, z) > K)
    throw std::domain_error("ancona_check: z is not within " + std::to_string(K) +
                            " of a geodesic from x to y (Gromov product too large)");
  double gxy = green.at(x, y, eps).value;
  double gxz = green.at(x, z, eps).value;
  double gzy = green.at(z, y, eps).value;
  return gxy / (gxz * gzy);
}

double harnack_constant(const StepMeasure& mu) {
  // C such that G(x,z)/G(y,z) <= e^{C d(x,y)}: a positive-weight path of
  // kappa*d(x,y) support-steps exists between any x,y, each step costing at
  // least the minimum positive weight.
  const GroupSpec& g = *mu.group;
  double wmin = 1.0;
  for (double w : mu.weights)
    if (w > 0) wmin = std::min(wmin, w);
  // kappa: how many support steps per S-generator
  std::unordered_map<Element, int, ElementHash> dist;
  std::deque<Element> q;
  dist[g.identity()] = 0;
  q.push_back(g.identity());
  int kappa = 1;
  std::set<std::string> want;
  for (const auto& s : g.generators()) want.insert(g.to_string(s));
  size_t found = 0;
  while (!q.empty() && found < want.size() && dist.size() < 200'000) {
    Element cur = q.front();
    q.pop_front();
    for (size_t i = 0; i < mu.support.size(); ++i) {
      if (mu.weights[i] <= 0) continue;
      Element nxt = g.mul(cur, mu.support[i]);
      if (dist.emplace(nxt, dist[cur] + 1).second) {
        if (want.count(g.to_string(nxt))) {
          ++found;
          kappa = std::max(kappa, dist[cur] + 1);
        }
        q.push_back(nxt);
      }
    }
  }
  if (found < want.size())
    throw numeric_error("harnack_constant: support does not reach all generators in the search budget");
  return kappa * (-std::log(wmin));
}

AnconaTrend strong_ancona_trend(const GreenEngine& green, const Element& direction,
                                const std::vector<int>& lengths, double delta_hat, uint64_t seed) {
  const GroupSpec& g = *green.measure().group;
  AnconaTrend out;
  uint64_t state = seed ? seed : 1;
  auto rnd = [&]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  };
  // offsets near an endpoint, used on both sides
  Ball b2 = g.ball(2);
  for (int D : lengths) {
    // geodesic gamma(t) = direction^t-ish: powers of the direction element
    std::vector<Element> path;
    Element cur = g.identity();
    while (static_cast<long long>(g.word_length(cur)) < D) cur = g.mul(cur, direction);
    Element far = cur;  // gamma(D)
    double thresh = D - 10.0 * delta_hat;
    std::vector<Element> left, right;
    for (const auto& u : b2.elems) {
      // I^-(gamma): <gamma(0) | x>_{gamma(D)} >= D - 10 delta, sampled near e
      Element xl = u;
      if (g.gromov_product(g.identity(), xl, far) >= thresh) left.push_back(xl);
      // I^+(gamma): <gamma(D) | y>_{gamma(0)} >= D - 10 delta, sampled near gamma(D)
      Element xr = g.mul(far, u);
      if (g.gromov_product(far, xr, g.identity()) >= thresh) right.push_back(xr);
    }
    if (left.size() < 2 || right.size() < 2)
      throw numeric_error("strong_ancona_trend: not enough sample points in I^±");
    double dev = 0.0;
    const int samples = 24;
    for (int t = 0; t < samples; ++t) {
      const Element& xa = left[rnd() % left.size()];
      const Element& xb = left[rnd() % left.size()];
      const Element& ya = right[rnd() % right.size()];
      const Element& yb = right[rnd() % right.size()];
      if (xa == xb || ya == yb) continue;
      double u_xa = green.at(xa, ya, 1e-6).value, u_xb = green.at(xb, ya, 1e-6).value;
      double v_xa = green.at(xa, yb, 1e-6).value, v_xb = green.at(xb, yb, 1e-6).value;
      dev = std::max(dev, std::abs((u_xa / u_xb) / (v_xa / v_xb) - 1.0));
    }
    out.lengths.push_back(D);
    out.deviations.push_back(dev);
  }
  // least squares of log(dev) on D
  int m = static_cast<int>(out.lengths.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < m; ++i) {
    double X = out.lengths[static_cast<size_t>(i)], Y = std::log(std::max(out.deviations[static_cast<size_t>(i)], 1e-300));
    sx += X;
    sy += Y;
    sxx += X * X;
    sxy += X * Y;
    syy += Y * Y;
  }
  double cov = sxy - sx * sy / m, vx = sxx - sx * sx / m, vy = syy - sy * sy / m;
  out.slope = cov / vx;
  out.correlation = cov / std::sqrt(std::max(vx * vy, 1e-300));
  return out;
}

GreenValue martin_kernel_ratio(const GreenEngine& green, const Element& x,
                               const std::vector<Element>& chain, double eps) {
  const GroupSpec& g = *green.measure().group;
  if (x.is_identity()) return GreenValue{1.0, 0.0};
  double prev = -1.0;
  int stable = 0;
  double ratio = 0.0;
  for (const auto& y : chain) {
    double gy = green.at(g.identity(), y, eps * 0.01).value;
    double gxy = green.at(x, y, eps * 0.01).value;
    ratio = gxy / gy;
    if (prev >= 0 && std::abs(ratio - prev) < eps) {
      if (++stable >= 2) return GreenValue{ratio, eps};
    } else {
      stable = 0;
    }
    prev = ratio;
  }
  throw budget_error("martin_kernel_ratio: ratios did not stagnate within the chain; last two: " +
                     std::to_string(prev) + ", " + std::to_string(ratio));
}

}  // namespace hypwalk
