#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "crnsn/errors.hpp"
#include "crnsn/expansion.hpp"
#include "crnsn/network.hpp"
#include "crnsn/rational.hpp"
#include "crnsn/selections.hpp"

namespace crnsn {

enum class KineticsKind { MichaelisMenten, Hill, MassAction };

const char* to_string(KineticsKind k);
KineticsKind kinetics_from_string(const std::string& s);

/// f_j(x) = a_j prod_m (x_m^c / (1 + b x_m^c))^s, over reactants m of j.
/// b and c are keyed by reactant pairs; missing entries mean b = 0, c = 1.
struct HillParams {
  std::vector<Rational> a;
  std::map<DerivativeSymbol, Rational> b;
  std::map<DerivativeSymbol, Rational> c;

  Rational b_of(const DerivativeSymbol& s) const {
    auto it = b.find(s);
    return it == b.end() ? Rational(0) : it->second;
  }
  Rational c_of(const DerivativeSymbol& s) const {
    auto it = c.find(s);
    return it == c.end() ? Rational(1) : it->second;
  }
};

struct BifurcationParameter {
  enum class Kind { Saturation, RateConstant };
  Kind kind = Kind::Saturation;
  std::size_t reaction = 0;
  std::size_t species = 0;  // Saturation only

  Rational value(const HillParams& p) const {
    return kind == Kind::Saturation ? p.b_of({reaction, species}) : p.a[reaction];
  }
  void set(HillParams& p, const Rational& v) const {
    if (kind == Kind::Saturation)
      p.b[{reaction, species}] = v;
    else
      p.a[reaction] = v;
  }
};

std::string lambda_name(const ReactionNetwork& net, const BifurcationParameter& lambda);

namespace detail {

inline double power(double base, const Rational& exponent) {
  if (exponent == 1) return base;
  if (is_integer(exponent)) return std::pow(base, exponent.convert_to<int>());
  return std::pow(base, to_double(exponent));
}

inline Rational power(const Rational& base, const Rational& exponent) {
  if (exponent == 1) return base;
  auto value = exact_power(base, exponent);
  if (!value) throw InvalidParameter("power " + to_string(base) + "^" + to_string(exponent) + " is not rational");
  return *value;
}

template <typename Scalar>
Scalar cast(const Rational& r) {
  if constexpr (std::is_same_v<Scalar, Rational>)
    return r;
  else
    return static_cast<Scalar>(to_double(r));
}

}  // namespace detail

/// Hill rate functions and their derivatives for one parameter set, over
/// Scalar = double (numerics) or Rational (exact identities at rational x).
template <typename Scalar>
class HillKinetics {
 public:
  struct Factor {
    std::size_t species;
    Rational s;
    Scalar b;
    Rational c;
    Scalar cs;  // c * s
  };

  HillKinetics(const ReactionNetwork& net, const HillParams& params) : s_(stoich_matrix(net)) {
    if (params.a.size() != net.reaction_count()) throw InvalidParameter("parameter a has the wrong length");
    for (std::size_t j = 0; j < net.reaction_count(); ++j) {
      a_.push_back(detail::cast<Scalar>(params.a[j]));
      std::vector<Factor> fs;
      for (const auto& [m, s] : net.reaction(j).reactants) {
        const Rational c = params.c_of({j, m});
        fs.push_back({m, s, detail::cast<Scalar>(params.b_of({j, m})), c, detail::cast<Scalar>(Rational(c * s))});
      }
      factors_.push_back(std::move(fs));
    }
    s_scalar_ = Matrix<Scalar>(s_.rows(), s_.cols());
    for (Eigen::Index i = 0; i < s_.rows(); ++i)
      for (Eigen::Index j = 0; j < s_.cols(); ++j) s_scalar_(i, j) = detail::cast<Scalar>(s_(i, j));
  }

  std::size_t reaction_count() const { return factors_.size(); }
  Eigen::Index species_count() const { return s_.rows(); }
  const Matrix<Scalar>& stoichiometry() const { return s_scalar_; }

  void set_parameter(const BifurcationParameter& lambda, const Scalar& value) {
    if (lambda.kind == BifurcationParameter::Kind::RateConstant) {
      a_[lambda.reaction] = value;
      return;
    }
    for (auto& f : factors_[lambda.reaction])
      if (f.species == lambda.species) f.b = value;
  }

  Scalar value(std::size_t j, const Vector<Scalar>& x) const {
    Scalar f = a_[j];
    for (const auto& fac : factors_[j]) {
      const Scalar u = power_of(x, fac.species, fac.c);
      f *= detail::power(Scalar(u / (Scalar(1) + fac.b * u)), fac.s);
    }
    return f;
  }

  /// d f_j / d x_m; zero unless m is a reactant of j.
  Scalar d1(std::size_t j, std::size_t m, const Vector<Scalar>& x) const {
    const Factor* fac = find(j, m);
    if (!fac) return Scalar(0);
    return value(j, x) * log_slope(*fac, x);
  }

  Scalar d2(std::size_t j, std::size_t m, std::size_t n, const Vector<Scalar>& x) const {
    const Factor* fm = find(j, m);
    const Factor* fn = find(j, n);
    if (!fm || !fn) return Scalar(0);
    const Scalar f = value(j, x);
    const Scalar gm = log_slope(*fm, x);
    if (m != n) return f * gm * log_slope(*fn, x);
    const Scalar xm = x(static_cast<Eigen::Index>(m));
    const Scalar u = power_of(x, m, fm->c);
    const Scalar q = Scalar(1) + fm->b * u;
    const Scalar dg = -fm->cs * (q + fm->b * detail::cast<Scalar>(fm->c) * u) / (xm * xm * q * q);
    return f * (gm * gm + dg);
  }

  /// d f_j / d lambda for a parameter of reaction j; zero for other reactions.
  Scalar d_lambda(const BifurcationParameter& lambda, std::size_t j, const Vector<Scalar>& x) const {
    if (j != lambda.reaction) return Scalar(0);
    if (lambda.kind == BifurcationParameter::Kind::RateConstant) return value(j, x) / a_[j];
    const Factor* fac = find(j, lambda.species);
    if (!fac) return Scalar(0);
    const Scalar u = power_of(x, fac->species, fac->c);
    return -detail::cast<Scalar>(fac->s) * u * value(j, x) / (Scalar(1) + fac->b * u);
  }

  Vector<Scalar> rates(const Vector<Scalar>& x) const {
    Vector<Scalar> r(static_cast<Eigen::Index>(reaction_count()));
    for (std::size_t j = 0; j < reaction_count(); ++j) r(static_cast<Eigen::Index>(j)) = value(j, x);
    return r;
  }

  /// g(x) = S f(x).
  Vector<Scalar> field(const Vector<Scalar>& x) const { return s_scalar_ * rates(x); }

  /// E x M matrix of first derivatives.
  Matrix<Scalar> rate_jacobian(const Vector<Scalar>& x) const {
    Matrix<Scalar> d = Matrix<Scalar>::Zero(static_cast<Eigen::Index>(reaction_count()), species_count());
    for (std::size_t j = 0; j < reaction_count(); ++j)
      for (const auto& fac : factors_[j])
        d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(fac.species)) = d1(j, fac.species, x);
    return d;
  }

  Matrix<Scalar> jacobian(const Vector<Scalar>& x) const { return s_scalar_ * rate_jacobian(x); }

  /// w^T D^2 g(x)[v, v] = sum_j <w, S^j> sum_{m,n} f''_{jmn} v_m v_n.
  Scalar contract(const Vector<Scalar>& x, const Vector<Scalar>& w, const Vector<Scalar>& v) const {
    Scalar total(0);
    for (std::size_t j = 0; j < reaction_count(); ++j) {
      const Scalar ws = w.dot(s_scalar_.col(static_cast<Eigen::Index>(j)));
      if (ws == Scalar(0)) continue;
      Scalar q(0);
      for (const auto& fm : factors_[j])
        for (const auto& fn : factors_[j])
          q += d2(j, fm.species, fn.species, x) * v(static_cast<Eigen::Index>(fm.species)) *
               v(static_cast<Eigen::Index>(fn.species));
      total += ws * q;
    }
    return total;
  }

  /// d g / d lambda = S^j d f_j / d lambda.
  Vector<Scalar> field_d_lambda(const BifurcationParameter& lambda, const Vector<Scalar>& x) const {
    return s_scalar_.col(static_cast<Eigen::Index>(lambda.reaction)) * d_lambda(lambda, lambda.reaction, x);
  }

 private:
  const Factor* find(std::size_t j, std::size_t m) const {
    for (const auto& f : factors_[j])
      if (f.species == m) return &f;
    return nullptr;
  }

  static Scalar power_of(const Vector<Scalar>& x, std::size_t m, const Rational& c) {
    const Scalar xm = x(static_cast<Eigen::Index>(m));
    if (!(xm > Scalar(0))) throw InvalidParameter("nonpositive concentration");
    return detail::power(xm, c);
  }

  // d log f_j / d x_m = s c / (x (1 + b x^c)).
  static Scalar log_slope(const Factor& fac, const Vector<Scalar>& x) {
    const Scalar u = power_of(x, fac.species, fac.c);
    return fac.cs / (x(static_cast<Eigen::Index>(fac.species)) * (Scalar(1) + fac.b * u));
  }

  RationalMatrix s_;
  Matrix<Scalar> s_scalar_;
  std::vector<Scalar> a_;
  std::vector<std::vector<Factor>> factors_;
};

/// Default multiple in r_j / r'_{jm} > margin * x_m / s^j_m.
inline const Rational kDefaultFeasibilityMargin = 2;

/// Minimal LP flux (with optional extra rows) scaled by the smallest 2^k, k >= 0,
/// making r_j / r'_{jm} > margin * x_m / s^j_m for every reactant pair.
RationalVector feasible_flux(const ReactionNetwork& net, const SimpleZeroPoint& point, const RationalVector& x_bar,
                             const std::vector<FluxBound>& extra = {},
                             const Rational& margin = kDefaultFeasibilityMargin);

/// b from f'(x) = r', a from f(x) = r; throws InvalidParameter on b <= 0 or irrational values.
HillParams build_hill_params(const ReactionNetwork& net, const SimpleZeroPoint& point, const RationalVector& flux,
                             const RationalVector& x_bar, const std::map<DerivativeSymbol, Rational>& c = {});

/// Mass action limit: b = 0, c = 1, a_j = r_j / prod x^s.
HillParams build_mass_action_params(const ReactionNetwork& net, const RationalVector& flux, const RationalVector& x_bar);

struct MMCheck {
  bool nondegenerate = false;
  Rational lhs;  // alpha_J2 / r_eta (1 + 1/s^eta_{m*})
  Rational rhs;  // -alpha_J1 / r_j2 (1 + 1/s^j2_{m*})
};

/// Throws DistanceNotOne unless the pair is at distance 1.
MMCheck check_mm_nondegeneracy(const ReactionNetwork& net, const SNPairCertificate& cert, const RationalVector& flux);

/// Row L(r) with L = 0 exactly on degenerate fluxes; direction +1 asks L >= 1, -1 asks L <= -1.
FluxBound mm_separating_bound(const ReactionNetwork& net, const SNPairCertificate& cert, int direction);

struct BifurcationRealization {
  KineticsKind kind = KineticsKind::MichaelisMenten;
  RationalVector x_bar;
  RationalVector flux;
  HillParams params;
  BifurcationParameter lambda;
  Rational lambda_star;
  SimpleZeroPoint point;
  std::optional<MMCheck> mm_check;  // empty when the pair distance is not 1
  bool flux_perturbed = false;
  bool nudged = false;
  std::optional<Rational> sn3_exact;  // empty when not representable exactly
};

struct RealizeConfig {
  KineticsKind kind = KineticsKind::MichaelisMenten;
  Rational margin = kDefaultFeasibilityMargin;
};

/// Michaelis-Menten construction at (x_bar, point): feasible flux, a and b,
/// lambda = b^eta_{m*}. At distance 1 a degenerate flux is replaced by a
/// separated one when the LP allows it.
BifurcationRealization realize(const ReactionNetwork& net, const SNPairCertificate& cert, const SimpleZeroPoint& point,
                               const RationalVector& x_bar, const RealizeConfig& config = {});

/// Realization from user supplied kinetics; x_bar must be an equilibrium with
/// a corank-one Jacobian.
BifurcationRealization realize_from_params(const ReactionNetwork& net, KineticsKind kind, const HillParams& params,
                                           const RationalVector& x_bar, const BifurcationParameter& lambda);

/// Exact w^T D^2 g[v, v] at x_bar; nullopt when some power is irrational.
std::optional<Rational> sn3_exact(const ReactionNetwork& net, const HillParams& params, const RationalVector& x_bar,
                                  const RationalVector& w, const RationalVector& v);

/// Tries c^eta_{m*} in {2, 3, 1/2}, rebuilding a and b with (x, r, r') fixed,
/// until |SN3| >= tolerance. Returns the input unchanged when already nondegenerate.
/// Both sn3_value and the tolerance refer to unit w and v.
BifurcationRealization nudge_c(const ReactionNetwork& net, const BifurcationRealization& realization,
                               double sn3_value, double tolerance = 1e-9);

nlohmann::json to_json(const ReactionNetwork& net, const HillParams& p);
HillParams hill_params_from_json(const ReactionNetwork& net, const nlohmann::json& j);
nlohmann::json to_json(const ReactionNetwork& net, const BifurcationRealization& r);
BifurcationRealization realization_from_json(const ReactionNetwork& net, const nlohmann::json& j);

/// Parses "NAME=p/q" overrides on top of the all-ones default.
RationalVector x_bar_from_overrides(const ReactionNetwork& net, const std::vector<std::string>& overrides);

struct SuppliedKinetics {
  KineticsKind kind;
  HillParams params;
  RationalVector x_bar;
  BifurcationParameter lambda;
};

/// Reads {"kinetics", "x_bar", "a", "b", "c", "lambda", "lambda_kind"}.
SuppliedKinetics supplied_kinetics_from_json(const ReactionNetwork& net, const nlohmann::json& j);

}  // namespace crnsn
