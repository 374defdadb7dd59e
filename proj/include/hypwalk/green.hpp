#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "hypwalk/group.hpp"

namespace hypwalk {

// Finitely supported measure on the group.
struct StepMeasure {
  const GroupSpec* group = nullptr;
  std::vector<Element> support;
  std::vector<double> weights;
  bool is_probability = false;
  bool is_admissible = false;

  static StepMeasure make(const GroupSpec& g, std::vector<Element> support,
                          std::vector<double> weights);
  double total() const;
  double weight_of(const Element& g) const;  // 0 when not in support
  int max_word_length() const;               // max |g|_S over the support
  StepMeasure reversed() const;              // g -> mu(g^{-1})
};

// One convolution power mu^{*n}, stored densely over a ball enumerated with
// the symmetrized support as generating set (so radius n always suffices).
struct ConvPower {
  std::shared_ptr<const Ball> ball;
  std::vector<double> mass;
  int n = 0;
  double total_mass() const;
  double entropy() const;  // -sum p log p over positive entries
};

// Exact convolution iterator: step() advances mu^{*n} -> mu^{*(n+1)}.
class ConvolutionEngine {
 public:
  ConvolutionEngine(const StepMeasure& mu, int n_max, bool keep_inverse_ids = false);
  const ConvPower& current() const { return cur_; }
  void step();
  // mu^{*2n}(e) = sum_x mu^{*n}(x) mu^{*n}(x^{-1}); requires keep_inverse_ids.
  double even_return_probability() const;

 private:
  std::vector<Element> sym_support_;
  std::vector<int32_t> supp_adj_;  // ball adjacency for support elements
  std::vector<int32_t> inv_id_;
  const StepMeasure* mu_;
  ConvPower cur_;
  std::vector<double> scratch_;
};

ConvPower convolution_power(const StepMeasure& mu, int n);

struct SpectralRadiusEstimate {
  bool has_estimate = false;   // false when the walk never returns
  double rho = 0.0;            // Richardson-extrapolated even-return ratio
  double root_last = 0.0;      // (mu^{*2n}(e))^{1/2n} at the last two even powers
  double root_prev = 0.0;
  int last_power = 0;
};

SpectralRadiusEstimate spectral_radius_estimate(const StepMeasure& mu, int n_half_max = 12);

// Green value with a certified truncation bound: |true - value| <= tail.
struct GreenValue {
  double value = 0.0;
  double tail = 0.0;
};

struct GreenOptions {
  int table_radius = 12;       // generic ball-DP radius
  int n_max = 2000;            // DP length cap
  double rho_margin = 1.10;    // safety margin on the measured decay rate
};

// Exact radial reduction for measures that are uniform on the standard free
// generators (optionally with mass at the tree-identity), optionally crossed
// with a finite factor carried by the steps. The (tree radius, finite part)
// chain is an exact strong lumping, so Green values are exact up to a
// geometric tail at any depth.
class RadialGreen {
 public:
  static std::optional<RadialGreen> make(const StepMeasure& mu);
  GreenValue at_e(const Element& z, double eps) const;  // G(e, z)
  // mu^{*n}(z) for a specific element, exact.
  double point_mass(const Element& z, int n) const;
  int n_max() const { return n_max_; }

 private:
  void run(int n_cap) const;
  const GroupSpec* group_;
  int two_k_ = 0;
  int fin_order_ = 1;
  // transition weights: stay[f], move[f] (per single direction)
  std::vector<double> stay_, move_;
  mutable int n_max_ = 0;
  mutable std::vector<double> green_;     // green_[r * fin + f] accumulated
  mutable std::vector<double> layers_;    // last layer for tail estimation
  mutable std::vector<std::vector<double>> dist_;  // dist_[n][r*fin+f], shell masses
  mutable std::vector<double> sup_hist_;
  mutable double rho_hat_ = 0.0;
};

// Green function engine for a fixed measure: radial fast path when valid,
// otherwise a ball-truncated DP table with reported truncation bounds.
class GreenEngine {
 public:
  GreenEngine(const StepMeasure& mu, GreenOptions opt = {});
  GreenValue at(const Element& x, const Element& y, double eps) const;
  GreenValue at_e(const Element& z, double eps) const;
  bool radial() const { return radial_.has_value(); }
  const StepMeasure& measure() const { return *mu_; }

 private:
  void build_table() const;
  const StepMeasure* mu_;
  GreenOptions opt_;
  std::optional<RadialGreen> radial_;
  mutable std::shared_ptr<const Ball> table_ball_;
  mutable std::vector<double> table_;
  mutable double table_tail_ = 0.0;
};

// Weight of paths x -> y staying in `region` except possibly at the first and
// last step, truncated to the given ball with reported leak.
GreenValue relative_green(const StepMeasure& mu, const Element& x, const Element& y,
                          const std::function<bool(const Element&)>& region, const Ball& ball,
                          const GreenOptions& opt = {});

// G(x,y) / (G(x,z) G(z,y)); checks that z is Gromov-close to a geodesic.
double ancona_check(const GreenEngine& green, const Element& x, const Element& y, const Element& z,
                    double K, double eps = 1e-9);

// Harnack calibration constant per the support structure of mu.
double harnack_constant(const StepMeasure& mu);

struct AnconaTrend {
  std::vector<int> lengths;
  std::vector<double> deviations;  // max ratio deviation per geodesic length
  double slope = 0.0;              // of log(dev) against length
  double correlation = 0.0;
};

// Strong Ancona decay probe along powers of a base direction.
AnconaTrend strong_ancona_trend(const GreenEngine& green, const Element& direction,
                                const std::vector<int>& lengths, double delta_hat, uint64_t seed);

GreenValue martin_kernel_ratio(const GreenEngine& green, const Element& x,
                               const std::vector<Element>& chain, double eps);

}  // namespace hypwalk
