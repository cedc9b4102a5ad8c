#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "crnsn/network.hpp"
#include "crnsn/rational.hpp"
#include "crnsn/selections.hpp"

namespace crnsn {

/// r'_{jm}: derivative of reaction j's rate with respect to species m.
struct DerivativeSymbol {
  std::size_t reaction;
  std::size_t species;

  friend auto operator<=>(const DerivativeSymbol&, const DerivativeSymbol&) = default;
};

/// Every (j, m) with m a reactant of j, ordered by (reaction, species).
std::vector<DerivativeSymbol> admissible_symbols(const ReactionNetwork& net);

std::string symbol_name(const ReactionNetwork& net, const DerivativeSymbol& s);
/// Inverse of symbol_name; throws Error when no reaction/species split matches.
DerivativeSymbol parse_symbol(const ReactionNetwork& net, const std::string& text);

using Monomial = std::vector<DerivativeSymbol>;

struct DetTerm {
  Rational alpha;
  Monomial monomial;  // one symbol per species, species order
};

struct DetExpansion {
  std::size_t species_count = 0;
  std::vector<DetTerm> terms;
};

struct AdjTerm {
  Rational beta;
  std::size_t omitted;
  Monomial monomial;
};

struct AdjTraceExpansion {
  std::size_t species_count = 0;
  std::vector<AdjTerm> terms;
};

struct RateAssignment {
  std::map<DerivativeSymbol, Rational> values;
  Rational epsilon = 0;

  const Rational* find(const DerivativeSymbol& s) const {
    auto it = values.find(s);
    return it == values.end() ? nullptr : &it->second;
  }
};

/// Throws PermanentlySingular when there is no nonzero Child Selection.
DetExpansion expand_determinant(const ReactionNetwork& net, std::size_t cap = kDefaultCap);
AdjTraceExpansion expand_adjugate_trace(const ReactionNetwork& net, std::size_t cap = kDefaultCap);

/// Missing symbols count as zero only when epsilon == 0; otherwise MissingSymbol.
Rational evaluate(const DetExpansion& p, const RateAssignment& r);
Rational evaluate(const AdjTraceExpansion& a, const RateAssignment& r);

/// G = S R' with R'(j, m) = r'_{jm} (zero for unset or inadmissible symbols).
RationalMatrix jacobian(const ReactionNetwork& net, const RateAssignment& r);

/// Symbols (J1(m), m) and (J2(m), m).
std::vector<DerivativeSymbol> pair_support(const SNPairCertificate& cert);

inline DerivativeSymbol rho_symbol(const SNPairCertificate& cert) { return {cert.eta, cert.m_star}; }

/// Support symbols get `base`, all other admissible symbols epsilon * base,
/// the rho symbol (eta, m*) stays unset.
RateAssignment build_epsilon_assignment(const ReactionNetwork& net, const SNPairCertificate& cert,
                                        const Rational& base = 1, const Rational& epsilon = 0);

/// Exact root of P, which is affine in `rho`. Throws DegenerateSlope or NonpositiveRoot.
Rational solve_rho(const DetExpansion& p, const RateAssignment& r, const DerivativeSymbol& rho);

struct CertifyConfig {
  Rational base = 1;
  /// Replaces the default schedule 1/10^3 ... 1/10^12 when set.
  std::optional<Rational> epsilon;
  std::size_t cap = kDefaultCap;
};

struct SimpleZeroPoint {
  RateAssignment assignment;  // includes the solved rho symbol
  DerivativeSymbol rho_symbol{};
  Rational rho_value;
  RationalMatrix jacobian;
  RationalVector w;  // left kernel, primitive integer
  RationalVector v;  // right kernel, primitive integer
  Rational adj_trace;
  Rational sn2_structural;  // <w, S^eta>
  std::size_t pattern = 0;  // index of the support value pattern that succeeded
};

std::vector<Rational> default_epsilon_schedule();

/// Walks the epsilon schedule until the solved point has rank M-1, A != 0,
/// <w, S^eta> != 0 and v_{m*} != 0. Throws ScheduleExhausted with every attempt.
SimpleZeroPoint certify_simple_zero(const ReactionNetwork& net, const SNPairCertificate& cert,
                                    const CertifyConfig& config = {});
SimpleZeroPoint certify_simple_zero(const ReactionNetwork& net, const SNPairCertificate& cert,
                                    const DetExpansion& p, const CertifyConfig& config = {});

Rational check_sn2_structural(const ReactionNetwork& net, const SimpleZeroPoint& point, std::size_t eta);

/// Sum of principal (M-1)-minors; 1 for M = 1.
Rational adjugate_trace(const RationalMatrix& g);

nlohmann::json to_json(const ReactionNetwork& net, const RateAssignment& r);
RateAssignment rate_assignment_from_json(const ReactionNetwork& net, const nlohmann::json& j, const Rational& epsilon);
nlohmann::json to_json(const ReactionNetwork& net, const SimpleZeroPoint& point);
SimpleZeroPoint simple_zero_from_json(const ReactionNetwork& net, const nlohmann::json& j);
nlohmann::json vector_to_json(const RationalVector& v);
RationalVector vector_from_json(const nlohmann::json& j);

}  // namespace crnsn
