#pragma once

#include "hklapse/common.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace hklapse {

enum class InfluenceFamily { constant, radial_power, radial_table, custom };

/// The influence kernel psi: R^d x R^d -> (0, K_sup]. Positive, bounded,
/// continuous; no symmetry or monotonicity assumed except where a family
/// guarantees it. Immutable after construction.
class InfluenceSpec {
 public:
  using Evaluator = std::function<double(const Vec&, const Vec&)>;

  /// psi == c.
  static InfluenceSpec Constant(double c);
  /// psi(y, z) = K / (1 + |y - z|^2)^beta.
  static InfluenceSpec RadialPower(double K, double beta);
  /// Piecewise-linear radial profile psi(y, z) = interp(|y - z|); values are
  /// clamped to the last sample beyond the table range.
  static InfluenceSpec RadialTable(std::vector<double> radii, std::vector<double> values);
  /// Arbitrary positive evaluator with a declared sup bound.
  static InfluenceSpec Custom(Evaluator eval, double k_sup,
                              std::optional<double> psi0_hint = std::nullopt);

  InfluenceFamily family() const { return family_; }
  double k_sup() const { return k_sup_; }
  std::optional<double> psi0_hint() const { return psi0_hint_; }
  bool radial() const { return family_ != InfluenceFamily::custom; }

  /// Profile value at separation r (radial families only).
  double radial_profile(double r) const;

  /// Lipschitz constant of psi in (y, z) jointly, closed form. Only the
  /// constant and radial_power families admit one here; others throw.
  double lipschitz() const;

  double operator()(const Vec& y, const Vec& z) const;

  // family parameters, for serialization
  double constant_value() const { return c_; }
  double power_K() const { return K_; }
  double power_beta() const { return beta_; }
  const std::vector<double>& table_radii() const { return radii_; }
  const std::vector<double>& table_values() const { return values_; }

 private:
  InfluenceSpec() = default;

  InfluenceFamily family_ = InfluenceFamily::constant;
  double k_sup_ = 1.0;
  std::optional<double> psi0_hint_;
  double c_ = 1.0;
  double K_ = 1.0, beta_ = 1.0;
  std::vector<double> radii_, values_;
  Evaluator eval_;
};

/// psi(y, z) with domain checks; result is validated against (0, K_sup].
double eval_influence(const InfluenceSpec& spec, const Vec& y, const Vec& z);

struct Psi0 {
  double value = 0.0;
  bool sampled = false;  // true when obtained by sweep rather than closed form
};

/// min psi over |y|, |z| <= M0. Closed form for radial families; for custom
/// evaluators a quasi-random sweep of the product ball scaled by a 0.99
/// safety factor (flagged `sampled`). `dim` is only used on the sweep path.
Psi0 compute_psi0(const InfluenceSpec& spec, double M0, int dim = 1);

}  // namespace hklapse
