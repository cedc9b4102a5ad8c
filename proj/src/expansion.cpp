#include "crnsn/expansion.hpp"

#include <algorithm>
#include <set>

#include "crnsn/errors.hpp"
#include "crnsn/linalg.hpp"

namespace crnsn {
namespace {

Rational monomial_value(const Monomial& monomial, const RateAssignment& r) {
  Rational product = 1;
  for (const auto& s : monomial) {
    const Rational* value = r.find(s);
    if (!value) {
      if (r.epsilon != 0) throw MissingSymbol("derivative symbol without a value");
      return 0;
    }
    product *= *value;
    if (product == 0) return 0;
  }
  return product;
}

Monomial monomial_of(const Assignment& a) {
  Monomial out;
  for (std::size_t m = 0; m < a.size(); ++m)
    if (a[m] != kUnassigned) out.push_back({a[m], m});
  return out;
}

// Alternative support values, tried after the uniform one fails.
std::map<DerivativeSymbol, Rational> support_pattern(const SNPairCertificate& cert, std::size_t pattern) {
  std::map<DerivativeSymbol, Rational> scale;
  const auto support = pair_support(cert);
  std::set<DerivativeSymbol> in1, in2;
  for (std::size_t m = 0; m < cert.j1.assignment.size(); ++m) {
    in1.insert({cert.j1.assignment[m], m});
    in2.insert({cert.j2.assignment[m], m});
  }
  for (std::size_t k = 0; k < support.size(); ++k) {
    const auto& s = support[k];
    Rational f = 1;
    if (pattern == 1 && in1.count(s) && !in2.count(s)) f = 2;
    if (pattern == 2 && in2.count(s) && !in1.count(s)) f = 2;
    if (pattern == 3) f = static_cast<long>(k + 1);
    scale[s] = f;
  }
  return scale;
}

constexpr std::size_t kPatternCount = 4;

}  // namespace

std::vector<DerivativeSymbol> admissible_symbols(const ReactionNetwork& net) {
  std::vector<DerivativeSymbol> out;
  for (std::size_t j = 0; j < net.reaction_count(); ++j)
    for (const auto& [m, c] : net.reaction(j).reactants) out.push_back({j, m});
  return out;
}

std::string symbol_name(const ReactionNetwork& net, const DerivativeSymbol& s) {
  return net.reaction(s.reaction).name + "." + net.species_name(s.species);
}

DerivativeSymbol parse_symbol(const ReactionNetwork& net, const std::string& text) {
  for (std::size_t dot = text.find('.'); dot != std::string::npos; dot = text.find('.', dot + 1)) {
    auto j = net.reaction_index(text.substr(0, dot));
    auto m = net.species_index(text.substr(dot + 1));
    if (j && m) return {*j, *m};
  }
  throw Error("unknown derivative symbol '" + text + "'");
}

DetExpansion expand_determinant(const ReactionNetwork& net, std::size_t cap) {
  auto census = child_selection_census(net, cap);
  if (census.nonzero.empty())
    throw PermanentlySingular("every Child Selection has zero coefficient; det G vanishes identically");
  DetExpansion p{net.species_count(), {}};
  for (auto& cs : census.nonzero) p.terms.push_back({cs.alpha, monomial_of(cs.assignment)});
  return p;
}

AdjTraceExpansion expand_adjugate_trace(const ReactionNetwork& net, std::size_t cap) {
  AdjTraceExpansion a{net.species_count(), {}};
  for (auto& pcs : enumerate_partial_selections(net, cap))
    a.terms.push_back({pcs.beta, pcs.omitted, monomial_of(pcs.assignment)});
  return a;
}

Rational evaluate(const DetExpansion& p, const RateAssignment& r) {
  Rational total = 0;
  for (const auto& t : p.terms) total += t.alpha * monomial_value(t.monomial, r);
  return total;
}

Rational evaluate(const AdjTraceExpansion& a, const RateAssignment& r) {
  Rational total = 0;
  for (const auto& t : a.terms) total += t.beta * monomial_value(t.monomial, r);
  return total;
}

RationalMatrix jacobian(const ReactionNetwork& net, const RateAssignment& r) {
  const RationalMatrix s = stoich_matrix(net);
  RationalMatrix rprime = RationalMatrix::Zero(s.cols(), s.rows());
  for (const auto& [sym, value] : r.values)
    if (net.is_reactant(sym.reaction, sym.species))
      rprime(static_cast<Eigen::Index>(sym.reaction), static_cast<Eigen::Index>(sym.species)) = value;
  return s * rprime;
}

std::vector<DerivativeSymbol> pair_support(const SNPairCertificate& cert) {
  std::set<DerivativeSymbol> support;
  for (std::size_t m = 0; m < cert.j1.assignment.size(); ++m) {
    support.insert({cert.j1.assignment[m], m});
    support.insert({cert.j2.assignment[m], m});
  }
  return {support.begin(), support.end()};
}

RateAssignment build_epsilon_assignment(const ReactionNetwork& net, const SNPairCertificate& cert,
                                        const Rational& base, const Rational& epsilon) {
  const auto support = pair_support(cert);
  const DerivativeSymbol rho = rho_symbol(cert);
  RateAssignment r;
  r.epsilon = epsilon;
  for (const auto& s : admissible_symbols(net)) {
    if (s == rho) continue;
    const bool in_support = std::binary_search(support.begin(), support.end(), s);
    if (in_support)
      r.values[s] = base;
    else if (epsilon != 0)
      r.values[s] = epsilon * base;
  }
  return r;
}

Rational solve_rho(const DetExpansion& p, const RateAssignment& r, const DerivativeSymbol& rho) {
  Rational slope = 0;
  Rational constant = 0;
  for (const auto& t : p.terms) {
    auto it = std::find(t.monomial.begin(), t.monomial.end(), rho);
    if (it == t.monomial.end()) {
      constant += t.alpha * monomial_value(t.monomial, r);
    } else {
      Monomial rest = t.monomial;
      rest.erase(rest.begin() + (it - t.monomial.begin()));
      slope += t.alpha * monomial_value(rest, r);
    }
  }
  if (slope == 0) throw DegenerateSlope("coefficient of the solved symbol vanishes");
  Rational root = -constant / slope;
  if (root <= 0) throw NonpositiveRoot("solved symbol value " + to_string(root) + " is not positive");
  return root;
}

std::vector<Rational> default_epsilon_schedule() {
  std::vector<Rational> out;
  Rational eps(1, 1000);
  for (int k = 3; k <= 12; ++k, eps /= 10) out.push_back(eps);
  return out;
}

Rational adjugate_trace(const RationalMatrix& g) {
  const Eigen::Index n = g.rows();
  if (n == 1) return 1;
  Rational total = 0;
  for (Eigen::Index m = 0; m < n; ++m) {
    RationalMatrix minor(n - 1, n - 1);
    for (Eigen::Index i = 0, r = 0; i < n; ++i) {
      if (i == m) continue;
      for (Eigen::Index j = 0, c = 0; j < n; ++j)
        if (j != m) minor(r, c++) = g(i, j);
      ++r;
    }
    total += det_exact(minor);
  }
  return total;
}

SimpleZeroPoint certify_simple_zero(const ReactionNetwork& net, const SNPairCertificate& cert,
                                    const CertifyConfig& config) {
  return certify_simple_zero(net, cert, expand_determinant(net, config.cap), config);
}

SimpleZeroPoint certify_simple_zero(const ReactionNetwork& net, const SNPairCertificate& cert,
                                    const DetExpansion& p, const CertifyConfig& config) {
  const auto support = pair_support(cert);
  const DerivativeSymbol rho = rho_symbol(cert);
  const RationalMatrix s = stoich_matrix(net);
  const auto m = static_cast<Eigen::Index>(net.species_count());
  const bool has_off_support = admissible_symbols(net).size() > support.size();

  std::vector<Rational> schedule;
  if (config.epsilon)
    schedule = {*config.epsilon};
  else if (has_off_support)
    schedule = default_epsilon_schedule();
  else
    schedule = {Rational(0)};

  std::vector<std::string> attempts;
  for (std::size_t pattern = 0; pattern < kPatternCount; ++pattern) {
    const auto scale = support_pattern(cert, pattern);
    for (const Rational& eps : schedule) {
      const std::string tag = "pattern " + std::to_string(pattern) + ", epsilon " + to_string(eps) + ": ";
      RateAssignment r = build_epsilon_assignment(net, cert, config.base, eps);
      for (auto& [sym, f] : scale)
        if (auto it = r.values.find(sym); it != r.values.end()) it->second *= f;
      Rational root;
      try {
        root = solve_rho(p, r, rho);
      } catch (const Error& e) {
        attempts.push_back(tag + e.what());
        continue;
      }
      r.values[rho] = root;
      SimpleZeroPoint point;
      point.jacobian = jacobian(net, r);
      if (rank_exact(point.jacobian) != m - 1) {
        attempts.push_back(tag + "rank of G is not M-1");
        continue;
      }
      point.adj_trace = adjugate_trace(point.jacobian);
      if (point.adj_trace == 0) {
        attempts.push_back(tag + "trace of the adjugate vanishes");
        continue;
      }
      point.w = primitive_integer_vector(left_kernel_basis(point.jacobian).front());
      point.v = primitive_integer_vector(right_kernel_basis(point.jacobian).front());
      point.sn2_structural = point.w.dot(s.col(static_cast<Eigen::Index>(cert.eta)));
      if (point.sn2_structural == 0) {
        attempts.push_back(tag + "left kernel vector is orthogonal to the eta column");
        continue;
      }
      if (point.v(static_cast<Eigen::Index>(cert.m_star)) == 0) {
        attempts.push_back(tag + "right kernel vector vanishes at m*");
        continue;
      }
      point.assignment = std::move(r);
      point.rho_symbol = rho;
      point.rho_value = root;
      point.pattern = pattern;
      return point;
    }
  }
  throw ScheduleExhausted("no epsilon in the schedule produced a simple zero eigenvalue", attempts);
}

Rational check_sn2_structural(const ReactionNetwork& net, const SimpleZeroPoint& point, std::size_t eta) {
  return point.w.dot(stoich_matrix(net).col(static_cast<Eigen::Index>(eta)));
}

nlohmann::json vector_to_json(const RationalVector& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(to_string(v(i)));
  return j;
}

RationalVector vector_from_json(const nlohmann::json& j) {
  RationalVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_rational(j[i].get<std::string>());
  return v;
}

nlohmann::json to_json(const ReactionNetwork& net, const RateAssignment& r) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [sym, value] : r.values) j[symbol_name(net, sym)] = to_string(value);
  return j;
}

RateAssignment rate_assignment_from_json(const ReactionNetwork& net, const nlohmann::json& j, const Rational& epsilon) {
  RateAssignment r;
  r.epsilon = epsilon;
  for (const auto& [key, value] : j.items()) r.values[parse_symbol(net, key)] = parse_rational(value.get<std::string>());
  return r;
}

nlohmann::json to_json(const ReactionNetwork& net, const SimpleZeroPoint& point) {
  nlohmann::json g = nlohmann::json::array();
  for (Eigen::Index i = 0; i < point.jacobian.rows(); ++i) g.push_back(vector_to_json(point.jacobian.row(i).transpose()));
  const bool has_rho = point.rho_symbol.reaction != kUnassigned;
  return {{"epsilon", to_string(point.assignment.epsilon)},
          {"pattern", point.pattern},
          {"rho_symbol", has_rho ? nlohmann::json(symbol_name(net, point.rho_symbol)) : nlohmann::json(nullptr)},
          {"rho", has_rho ? nlohmann::json(to_string(point.rho_value)) : nlohmann::json(nullptr)},
          {"r_prime", to_json(net, point.assignment)},
          {"jacobian", g},
          {"w", vector_to_json(point.w)},
          {"v", vector_to_json(point.v)},
          {"adj_trace", to_string(point.adj_trace)},
          {"sn2_structural", to_string(point.sn2_structural)}};
}

SimpleZeroPoint simple_zero_from_json(const ReactionNetwork& net, const nlohmann::json& j) {
  SimpleZeroPoint p;
  p.assignment = rate_assignment_from_json(net, j.at("r_prime"), parse_rational(j.at("epsilon").get<std::string>()));
  p.pattern = j.at("pattern").get<std::size_t>();
  if (j.at("rho_symbol").is_null()) {
    p.rho_symbol = {kUnassigned, kUnassigned};
  } else {
    p.rho_symbol = parse_symbol(net, j.at("rho_symbol").get<std::string>());
    p.rho_value = parse_rational(j.at("rho").get<std::string>());
  }
  const auto& g = j.at("jacobian");
  p.jacobian = RationalMatrix(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) p.jacobian.row(static_cast<Eigen::Index>(i)) = vector_from_json(g[i]).transpose();
  p.w = vector_from_json(j.at("w"));
  p.v = vector_from_json(j.at("v"));
  p.adj_trace = parse_rational(j.at("adj_trace").get<std::string>());
  p.sn2_structural = parse_rational(j.at("sn2_structural").get<std::string>());
  return p;
}

}  // namespace crnsn
