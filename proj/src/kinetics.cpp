#include "crnsn/kinetics.hpp"

#include "crnsn/linalg.hpp"

namespace crnsn {
namespace {

const Rational& rprime_of(const SimpleZeroPoint& point, const DerivativeSymbol& s) {
  const Rational* value = point.assignment.find(s);
  if (!value) throw MissingSymbol("the certified point has no value for a derivative symbol");
  return *value;
}

nlohmann::json species_map_to_json(const ReactionNetwork& net, const RationalVector& x) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t m = 0; m < net.species_count(); ++m) j[net.species_name(m)] = to_string(x(static_cast<Eigen::Index>(m)));
  return j;
}

nlohmann::json reaction_map_to_json(const ReactionNetwork& net, const RationalVector& r) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t k = 0; k < net.reaction_count(); ++k) j[net.reaction(k).name] = to_string(r(static_cast<Eigen::Index>(k)));
  return j;
}

RationalVector species_map_from_json(const ReactionNetwork& net, const nlohmann::json& j, const Rational& fallback) {
  RationalVector x = RationalVector::Constant(static_cast<Eigen::Index>(net.species_count()), fallback);
  for (const auto& [name, value] : j.items()) {
    auto m = net.species_index(name);
    if (!m) throw Error("unknown species '" + name + "'");
    x(static_cast<Eigen::Index>(*m)) = parse_rational(value.get<std::string>());
  }
  return x;
}

RationalVector reaction_map_from_json(const ReactionNetwork& net, const nlohmann::json& j) {
  RationalVector r(static_cast<Eigen::Index>(net.reaction_count()));
  std::vector<bool> seen(net.reaction_count(), false);
  for (const auto& [name, value] : j.items()) {
    auto k = net.reaction_index(name);
    if (!k) throw Error("unknown reaction '" + name + "'");
    r(static_cast<Eigen::Index>(*k)) = parse_rational(value.get<std::string>());
    seen[*k] = true;
  }
  for (std::size_t k = 0; k < seen.size(); ++k)
    if (!seen[k]) throw Error("missing value for reaction '" + net.reaction(k).name + "'");
  return r;
}

BifurcationParameter lambda_from_json(const ReactionNetwork& net, const std::string& name, const std::string& kind) {
  BifurcationParameter lambda;
  if (kind == "rate_constant") {
    auto j = net.reaction_index(name);
    if (!j) throw Error("unknown reaction '" + name + "' for the bifurcation parameter");
    lambda.kind = BifurcationParameter::Kind::RateConstant;
    lambda.reaction = *j;
    return lambda;
  }
  if (kind != "saturation") throw Error("unknown bifurcation parameter kind '" + kind + "'");
  const DerivativeSymbol s = parse_symbol(net, name);
  if (!net.is_reactant(s.reaction, s.species)) throw Error("'" + name + "' is not a reactant pair");
  lambda.reaction = s.reaction;
  lambda.species = s.species;
  return lambda;
}

const char* lambda_kind_name(const BifurcationParameter& lambda) {
  return lambda.kind == BifurcationParameter::Kind::RateConstant ? "rate_constant" : "saturation";
}

}  // namespace

const char* to_string(KineticsKind k) {
  switch (k) {
    case KineticsKind::MichaelisMenten: return "mm";
    case KineticsKind::Hill: return "hill";
    case KineticsKind::MassAction: return "mass_action";
  }
  return "?";
}

KineticsKind kinetics_from_string(const std::string& s) {
  if (s == "mm") return KineticsKind::MichaelisMenten;
  if (s == "hill") return KineticsKind::Hill;
  if (s == "mass_action") return KineticsKind::MassAction;
  throw Error("unknown kinetics '" + s + "'");
}

std::string lambda_name(const ReactionNetwork& net, const BifurcationParameter& lambda) {
  if (lambda.kind == BifurcationParameter::Kind::RateConstant) return net.reaction(lambda.reaction).name;
  return symbol_name(net, {lambda.reaction, lambda.species});
}

RationalVector feasible_flux(const ReactionNetwork& net, const SimpleZeroPoint& point, const RationalVector& x_bar,
                             const std::vector<FluxBound>& extra, const Rational& margin) {
  const RationalMatrix s = stoich_matrix(net);
  auto r = minimal_positive_flux(s, RationalVector::Constant(s.cols(), Rational(1)), extra);
  if (!r) throw Infeasible("no positive equilibrium flux satisfies the constraints");
  Rational needed = 0;
  for (const auto& sym : admissible_symbols(net)) {
    const Rational coeff = net.reaction(sym.reaction).reactant_coefficient(sym.species);
    const Rational t = margin * x_bar(static_cast<Eigen::Index>(sym.species)) * rprime_of(point, sym) /
                       (coeff * (*r)(static_cast<Eigen::Index>(sym.reaction)));
    if (t > needed) needed = t;
  }
  Rational scale = 1;
  while (scale <= needed) scale *= 2;
  return *r * scale;
}

HillParams build_hill_params(const ReactionNetwork& net, const SimpleZeroPoint& point, const RationalVector& flux,
                             const RationalVector& x_bar, const std::map<DerivativeSymbol, Rational>& c) {
  HillParams p;
  p.a.resize(net.reaction_count());
  for (std::size_t j = 0; j < net.reaction_count(); ++j) {
    const Rational r = flux(static_cast<Eigen::Index>(j));
    if (r <= 0) throw InvalidParameter("equilibrium flux of reaction '" + net.reaction(j).name + "' is not positive");
    Rational product = 1;
    for (const auto& [m, s] : net.reaction(j).reactants) {
      const DerivativeSymbol sym{j, m};
      auto it = c.find(sym);
      const Rational cj = it == c.end() ? Rational(1) : it->second;
      if (cj <= 0) throw InvalidParameter("Hill exponent must be positive");
      const Rational x = x_bar(static_cast<Eigen::Index>(m));
      const Rational u = detail::power(x, cj);
      const Rational b = (r * s * cj / (rprime_of(point, sym) * x) - 1) / u;
      if (b <= 0)
        throw InvalidParameter("saturation constant for " + symbol_name(net, sym) + " is not positive; flux too small");
      p.b[sym] = b;
      if (cj != 1) p.c[sym] = cj;
      product *= detail::power(Rational(u / (1 + b * u)), s);
    }
    p.a[j] = r / product;
  }
  return p;
}

HillParams build_mass_action_params(const ReactionNetwork& net, const RationalVector& flux, const RationalVector& x_bar) {
  HillParams p;
  p.a.resize(net.reaction_count());
  for (std::size_t j = 0; j < net.reaction_count(); ++j) {
    Rational product = 1;
    for (const auto& [m, s] : net.reaction(j).reactants) product *= detail::power(x_bar(static_cast<Eigen::Index>(m)), s);
    p.a[j] = flux(static_cast<Eigen::Index>(j)) / product;
  }
  return p;
}

MMCheck check_mm_nondegeneracy(const ReactionNetwork& net, const SNPairCertificate& cert, const RationalVector& flux) {
  if (cert.distance != 1) throw DistanceNotOne("the nondegeneracy condition needs a pair at distance 1");
  const std::size_t eta = cert.eta;
  const std::size_t j2 = cert.j2.assignment[cert.m_star];
  const Rational s_eta = net.reaction(eta).reactant_coefficient(cert.m_star);
  const Rational s_j2 = net.reaction(j2).reactant_coefficient(cert.m_star);
  MMCheck out;
  out.lhs = cert.j2.alpha / flux(static_cast<Eigen::Index>(eta)) * (1 + 1 / s_eta);
  out.rhs = -cert.j1.alpha / flux(static_cast<Eigen::Index>(j2)) * (1 + 1 / s_j2);
  out.nondegenerate = out.lhs != out.rhs;
  return out;
}

FluxBound mm_separating_bound(const ReactionNetwork& net, const SNPairCertificate& cert, int direction) {
  const std::size_t eta = cert.eta;
  const std::size_t j2 = cert.j2.assignment[cert.m_star];
  const Rational s_eta = net.reaction(eta).reactant_coefficient(cert.m_star);
  const Rational s_j2 = net.reaction(j2).reactant_coefficient(cert.m_star);
  FluxBound bound{RationalVector::Zero(static_cast<Eigen::Index>(net.reaction_count())), Rational(1)};
  bound.coefficients(static_cast<Eigen::Index>(j2)) += cert.j2.alpha * (1 + 1 / s_eta);
  bound.coefficients(static_cast<Eigen::Index>(eta)) += cert.j1.alpha * (1 + 1 / s_j2);
  if (direction < 0) bound.coefficients = -bound.coefficients;
  return bound;
}

std::optional<Rational> sn3_exact(const ReactionNetwork& net, const HillParams& params, const RationalVector& x_bar,
                                  const RationalVector& w, const RationalVector& v) {
  try {
    return HillKinetics<Rational>(net, params).contract(x_bar, w, v);
  } catch (const InvalidParameter&) {
    return std::nullopt;
  }
}

BifurcationRealization realize(const ReactionNetwork& net, const SNPairCertificate& cert, const SimpleZeroPoint& point,
                               const RationalVector& x_bar, const RealizeConfig& config) {
  BifurcationRealization out;
  out.kind = config.kind;
  out.x_bar = x_bar;
  out.point = point;
  out.flux = feasible_flux(net, point, x_bar, {}, config.margin);
  if (cert.distance == 1) {
    out.mm_check = check_mm_nondegeneracy(net, cert, out.flux);
    for (int direction : {1, -1}) {
      if (out.mm_check->nondegenerate) break;
      try {
        RationalVector alt = feasible_flux(net, point, x_bar, {mm_separating_bound(net, cert, direction)}, config.margin);
        MMCheck check = check_mm_nondegeneracy(net, cert, alt);
        if (check.nondegenerate) {
          out.flux = std::move(alt);
          out.mm_check = check;
          out.flux_perturbed = true;
        }
      } catch (const Infeasible&) {
      }
    }
  }
  out.params = build_hill_params(net, point, out.flux, x_bar);
  out.lambda = {BifurcationParameter::Kind::Saturation, cert.eta, cert.m_star};
  out.lambda_star = out.lambda.value(out.params);
  out.sn3_exact = sn3_exact(net, out.params, x_bar, point.w, point.v);
  return out;
}

BifurcationRealization realize_from_params(const ReactionNetwork& net, KineticsKind kind, const HillParams& params,
                                           const RationalVector& x_bar, const BifurcationParameter& lambda) {
  const HillKinetics<Rational> k(net, params);
  BifurcationRealization out;
  out.kind = kind;
  out.x_bar = x_bar;
  out.params = params;
  out.lambda = lambda;
  out.lambda_star = lambda.value(params);
  out.flux = k.rates(x_bar);
  const RationalMatrix s = stoich_matrix(net);
  if (!(s * out.flux).isZero()) throw InvalidParameter("x_bar is not an equilibrium of the supplied kinetics");

  SimpleZeroPoint& p = out.point;
  const RationalMatrix d = k.rate_jacobian(x_bar);
  for (const auto& sym : admissible_symbols(net))
    p.assignment.values[sym] = d(static_cast<Eigen::Index>(sym.reaction), static_cast<Eigen::Index>(sym.species));
  p.rho_symbol = {kUnassigned, kUnassigned};
  p.jacobian = s * d;
  if (rank_exact(p.jacobian) != s.rows() - 1) throw InvalidParameter("the Jacobian at x_bar does not have corank one");
  p.w = primitive_integer_vector(left_kernel_basis(p.jacobian).front());
  p.v = primitive_integer_vector(right_kernel_basis(p.jacobian).front());
  p.adj_trace = adjugate_trace(p.jacobian);
  p.sn2_structural = p.w.dot(s.col(static_cast<Eigen::Index>(lambda.reaction)));
  out.sn3_exact = sn3_exact(net, params, x_bar, p.w, p.v);
  return out;
}

BifurcationRealization nudge_c(const ReactionNetwork& net, const BifurcationRealization& realization, double sn3_value,
                               double tolerance) {
  if (std::abs(sn3_value) >= tolerance) return realization;
  if (realization.lambda.kind != BifurcationParameter::Kind::Saturation)
    throw NudgeExhausted("the bifurcation parameter is not a saturation constant");
  const DerivativeSymbol target{realization.lambda.reaction, realization.lambda.species};
  std::string tried;
  for (const Rational& candidate : {Rational(2), Rational(3), Rational(1, 2)}) {
    tried += (tried.empty() ? "" : ", ") + to_string(candidate);
    std::map<DerivativeSymbol, Rational> c = realization.params.c;
    c[target] = candidate;
    HillParams params;
    try {
      params = build_hill_params(net, realization.point, realization.flux, realization.x_bar, c);
    } catch (const InvalidParameter&) {
      continue;
    }
    auto exact = sn3_exact(net, params, realization.x_bar, realization.point.w, realization.point.v);
    const Vector<double> w = to_double(realization.point.w);
    const Vector<double> v = to_double(realization.point.v);
    const double value = exact ? to_double(*exact) : HillKinetics<double>(net, params).contract(to_double(realization.x_bar), w, v);
    if (std::abs(value) / (w.norm() * v.squaredNorm()) < tolerance) continue;
    BifurcationRealization out = realization;
    out.kind = KineticsKind::Hill;
    out.params = std::move(params);
    out.lambda_star = out.lambda.value(out.params);
    out.sn3_exact = exact;
    out.nudged = true;
    return out;
  }
  throw NudgeExhausted("every Hill exponent candidate (" + tried + ") leaves SN3 degenerate");
}

nlohmann::json to_json(const ReactionNetwork& net, const HillParams& p) {
  nlohmann::json a = nlohmann::json::object(), b = nlohmann::json::object(), c = nlohmann::json::object();
  for (std::size_t j = 0; j < p.a.size(); ++j) a[net.reaction(j).name] = to_string(p.a[j]);
  for (const auto& [s, v] : p.b) b[symbol_name(net, s)] = to_string(v);
  for (const auto& [s, v] : p.c) c[symbol_name(net, s)] = to_string(v);
  return {{"a", a}, {"b", b}, {"c", c}};
}

HillParams hill_params_from_json(const ReactionNetwork& net, const nlohmann::json& j) {
  HillParams p;
  const RationalVector a = reaction_map_from_json(net, j.at("a"));
  p.a.assign(a.begin(), a.end());
  for (const char* key : {"b", "c"}) {
    if (!j.contains(key)) continue;
    auto& target = std::string(key) == "b" ? p.b : p.c;
    for (const auto& [name, value] : j.at(key).items()) {
      const DerivativeSymbol s = parse_symbol(net, name);
      if (!net.is_reactant(s.reaction, s.species)) throw Error("'" + name + "' is not a reactant pair");
      target[s] = parse_rational(value.get<std::string>());
    }
  }
  for (const auto& v : p.a)
    if (v <= 0) throw InvalidParameter("rate constants must be positive");
  for (const auto& [s, v] : p.b)
    if (v < 0) throw InvalidParameter("saturation constants must be nonnegative");
  for (const auto& [s, v] : p.c)
    if (v <= 0) throw InvalidParameter("Hill exponents must be positive");
  return p;
}

nlohmann::json to_json(const ReactionNetwork& net, const BifurcationRealization& r) {
  nlohmann::json params = to_json(net, r.params);
  params["lambda"] = lambda_name(net, r.lambda);
  params["lambda_kind"] = lambda_kind_name(r.lambda);
  params["lambda_star"] = to_string(r.lambda_star);
  nlohmann::json mm = nullptr;
  if (r.mm_check)
    mm = {{"nondegenerate", r.mm_check->nondegenerate}, {"lhs", to_string(r.mm_check->lhs)}, {"rhs", to_string(r.mm_check->rhs)}};
  return {{"kinetics", to_string(r.kind)},
          {"x_bar", species_map_to_json(net, r.x_bar)},
          {"flux", reaction_map_to_json(net, r.flux)},
          {"params", params},
          {"point", to_json(net, r.point)},
          {"mm_check", mm},
          {"flux_perturbed", r.flux_perturbed},
          {"nudged", r.nudged},
          {"sn3_exact", r.sn3_exact ? nlohmann::json(to_string(*r.sn3_exact)) : nlohmann::json(nullptr)}};
}

BifurcationRealization realization_from_json(const ReactionNetwork& net, const nlohmann::json& j) {
  BifurcationRealization r;
  r.kind = kinetics_from_string(j.at("kinetics").get<std::string>());
  r.x_bar = species_map_from_json(net, j.at("x_bar"), 1);
  r.flux = reaction_map_from_json(net, j.at("flux"));
  const auto& params = j.at("params");
  r.params = hill_params_from_json(net, params);
  r.lambda = lambda_from_json(net, params.at("lambda").get<std::string>(), params.at("lambda_kind").get<std::string>());
  r.lambda_star = parse_rational(params.at("lambda_star").get<std::string>());
  r.point = simple_zero_from_json(net, j.at("point"));
  if (!j.at("mm_check").is_null()) {
    const auto& mm = j.at("mm_check");
    r.mm_check = MMCheck{mm.at("nondegenerate").get<bool>(), parse_rational(mm.at("lhs").get<std::string>()),
                         parse_rational(mm.at("rhs").get<std::string>())};
  }
  r.flux_perturbed = j.at("flux_perturbed").get<bool>();
  r.nudged = j.at("nudged").get<bool>();
  if (!j.at("sn3_exact").is_null()) r.sn3_exact = parse_rational(j.at("sn3_exact").get<std::string>());
  return r;
}

RationalVector x_bar_from_overrides(const ReactionNetwork& net, const std::vector<std::string>& overrides) {
  RationalVector x = RationalVector::Constant(static_cast<Eigen::Index>(net.species_count()), Rational(1));
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error("expected NAME=value in '" + item + "'");
    auto m = net.species_index(item.substr(0, eq));
    if (!m) throw Error("unknown species '" + item.substr(0, eq) + "'");
    Rational value;
    try {
      value = parse_rational(item.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw Error(e.what());
    }
    if (value <= 0) throw InvalidParameter("concentration for '" + item.substr(0, eq) + "' must be positive");
    x(static_cast<Eigen::Index>(*m)) = value;
  }
  return x;
}

SuppliedKinetics supplied_kinetics_from_json(const ReactionNetwork& net, const nlohmann::json& j) {
  SuppliedKinetics out;
  out.kind = kinetics_from_string(j.value("kinetics", std::string("mm")));
  out.params = hill_params_from_json(net, j);
  out.x_bar = species_map_from_json(net, j.value("x_bar", nlohmann::json::object()), 1);
  for (Eigen::Index m = 0; m < out.x_bar.size(); ++m)
    if (out.x_bar(m) <= 0) throw InvalidParameter("concentrations must be positive");
  out.lambda = lambda_from_json(net, j.at("lambda").get<std::string>(), j.value("lambda_kind", std::string("saturation")));
  return out;
}

}  // namespace crnsn
