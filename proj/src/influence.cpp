#include "hklapse/influence.hpp"

#include <algorithm>
#include <cmath>

namespace hklapse {

InfluenceSpec InfluenceSpec::Constant(double c) {
  require(std::isfinite(c) && c > 0.0, "Constant influence needs c > 0");
  InfluenceSpec s;
  s.family_ = InfluenceFamily::constant;
  s.c_ = c;
  s.k_sup_ = c;
  return s;
}

InfluenceSpec InfluenceSpec::RadialPower(double K, double beta) {
  require(std::isfinite(K) && K > 0.0, "RadialPower needs K > 0");
  require(std::isfinite(beta) && beta >= 0.0, "RadialPower needs beta >= 0");
  InfluenceSpec s;
  s.family_ = InfluenceFamily::radial_power;
  s.K_ = K;
  s.beta_ = beta;
  s.k_sup_ = K;  // profile is maximal at zero separation
  return s;
}

InfluenceSpec InfluenceSpec::RadialTable(std::vector<double> radii, std::vector<double> values) {
  require(radii.size() == values.size() && radii.size() >= 2, "RadialTable needs >= 2 samples");
  require(radii.front() == 0.0, "RadialTable must start at r = 0");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(std::isfinite(radii[i]) && std::isfinite(values[i]), "RadialTable sample not finite");
    require(values[i] > 0.0, "RadialTable values must be positive");
    if (i > 0) require(radii[i] > radii[i - 1], "RadialTable radii must increase");
  }
  InfluenceSpec s;
  s.family_ = InfluenceFamily::radial_table;
  s.k_sup_ = *std::max_element(values.begin(), values.end());
  s.radii_ = std::move(radii);
  s.values_ = std::move(values);
  return s;
}

InfluenceSpec InfluenceSpec::Custom(Evaluator eval, double k_sup, std::optional<double> psi0_hint) {
  require(static_cast<bool>(eval), "Custom influence needs an evaluator");
  require(std::isfinite(k_sup) && k_sup > 0.0, "Custom influence needs K_sup > 0");
  InfluenceSpec s;
  s.family_ = InfluenceFamily::custom;
  s.eval_ = std::move(eval);
  s.k_sup_ = k_sup;
  s.psi0_hint_ = psi0_hint;
  return s;
}

double InfluenceSpec::radial_profile(double r) const {
  switch (family_) {
    case InfluenceFamily::constant:
      return c_;
    case InfluenceFamily::radial_power:
      return K_ / std::pow(1.0 + r * r, beta_);
    case InfluenceFamily::radial_table: {
      if (r <= radii_.front()) return values_.front();
      if (r >= radii_.back()) return values_.back();
      const auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
      const std::size_t i = static_cast<std::size_t>(it - radii_.begin());
      const double w = (r - radii_[i - 1]) / (radii_[i] - radii_[i - 1]);
      return values_[i - 1] + w * (values_[i] - values_[i - 1]);
    }
    case InfluenceFamily::custom:
      break;
  }
  throw std::logic_error("radial_profile called on a non-radial influence");
}

double InfluenceSpec::lipschitz() const {
  switch (family_) {
    case InfluenceFamily::constant:
      return 0.0;
    case InfluenceFamily::radial_power: {
      if (beta_ == 0.0) return 0.0;
      // |d/dr K(1+r^2)^-beta| peaks at r* = 1/sqrt(2 beta + 1)
      const double r = 1.0 / std::sqrt(2.0 * beta_ + 1.0);
      return 2.0 * beta_ * K_ * r / std::pow(1.0 + r * r, beta_ + 1.0);
    }
    default:
      throw std::invalid_argument("no closed-form Lipschitz constant for this influence family");
  }
}

double InfluenceSpec::operator()(const Vec& y, const Vec& z) const {
  if (family_ == InfluenceFamily::custom) return eval_(y, z);
  return radial_profile((y - z).norm());
}

double eval_influence(const InfluenceSpec& spec, const Vec& y, const Vec& z) {
  require(y.size() == z.size(), "influence arguments have mismatched dimensions");
  require(y.allFinite() && z.allFinite(), "influence arguments must be finite");
  const double v = spec(y, z);
  if (!(v > 0.0))
    throw std::domain_error("influence evaluated to a non-positive value (violates positivity)");
  if (!(v <= spec.k_sup() * (1.0 + 1e-12)))
    throw std::domain_error("influence exceeded its declared K_sup");
  return v;
}

namespace {

// Additive-recurrence (Kronecker) low-discrepancy sequence on [0,1)^n.
class Kronecker {
 public:
  explicit Kronecker(int n) : alpha_(n), x_(n) {
    // generalized golden-ratio parameters
    double phi = 2.0;
    for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (n + 1));
    double a = 1.0 / phi;
    for (int k = 0; k < n; ++k) {
      alpha_[k] = a;
      a /= phi;
      x_[k] = 0.5;
    }
  }
  const std::vector<double>& next() {
    for (std::size_t k = 0; k < x_.size(); ++k) {
      x_[k] += alpha_[k];
      x_[k] -= std::floor(x_[k]);
    }
    return x_;
  }

 private:
  std::vector<double> alpha_, x_;
};

// Map [0,1)^d onto the closed ball of radius M (interior points map to
// themselves after recentering; exterior cube corners land on the sphere,
// which is where minima of decreasing radial profiles live).
Vec cube_to_ball(const double* u, int dim, double M) {
  Vec v(dim);
  for (int k = 0; k < dim; ++k) v[k] = 2.0 * u[k] - 1.0;
  const double n = v.norm();
  if (n > 1.0) v /= n;
  return v * M;
}

}  // namespace

Psi0 compute_psi0(const InfluenceSpec& spec, double M0, int dim) {
  require(std::isfinite(M0) && M0 >= 0.0, "M0 must be >= 0");
  require(dim >= 1, "dimension must be >= 1");

  if (spec.radial()) {
    // min over the product of balls of a radial profile is attained on
    // separations r in [0, 2 M0]
    double lo = 0.0;
    switch (spec.family()) {
      case InfluenceFamily::constant:
        lo = spec.constant_value();
        break;
      case InfluenceFamily::radial_power:
        lo = spec.power_K() / std::pow(1.0 + 4.0 * M0 * M0, spec.power_beta());
        break;
      case InfluenceFamily::radial_table: {
        const double rmax = 2.0 * M0;
        lo = spec.radial_profile(rmax);
        lo = std::min(lo, spec.radial_profile(0.0));
        for (std::size_t i = 0; i < spec.table_radii().size(); ++i)
          if (spec.table_radii()[i] <= rmax) lo = std::min(lo, spec.table_values()[i]);
        break;
      }
      case InfluenceFamily::custom:
        break;
    }
    if (!(lo > 0.0)) throw std::domain_error("psi0 is not positive for this spec");
    return {lo, false};
  }

  // custom evaluator: quasi-random sweep of the product ball
  constexpr int kSamples = 100000;
  Kronecker seq(2 * dim);
  double lo = std::numeric_limits<double>::infinity();
  for (int s = 0; s < kSamples; ++s) {
    const auto& u = seq.next();
    const Vec y = cube_to_ball(u.data(), dim, M0);
    const Vec z = cube_to_ball(u.data() + dim, dim, M0);
    const double v = spec(y, z);
    if (!(v > 0.0))
      throw std::domain_error("influence evaluated to a non-positive value during psi0 sweep");
    lo = std::min(lo, v);
  }
  return {0.99 * lo, true};
}

}  // namespace hklapse
