#include <cmath>
#include <fstream>

#include "doctest.h"

#include "crnsn/errors.hpp"
#include "crnsn/kinetics.hpp"
#include "crnsn/linalg.hpp"
#include "oracles.hpp"

using namespace crnsn;

namespace {

ReactionNetwork load(const std::string& name) { return load_network(std::string(CRNSN_NETWORK_DIR) + "/" + name); }

SNPairCertificate first_certificate(const ReactionNetwork& net) {
  for (const auto& [g, b] : find_opposite_sign_pairs_at_min_set_distance(net))
    if (auto cert = certify_sn_pair(net, g, b)) return *cert;
  FAIL("no certificate");
  return {};
}

struct Realized {
  ReactionNetwork net;
  SNPairCertificate cert;
  BifurcationRealization real;
};

Realized realize_file(const std::string& name, const std::vector<std::string>& overrides = {}) {
  auto net = load(name);
  auto cert = first_certificate(net);
  auto point = certify_simple_zero(net, cert);
  auto real = realize(net, cert, point, x_bar_from_overrides(net, overrides));
  return {std::move(net), std::move(cert), std::move(real)};
}

// Hill rate written out directly, no shared code with HillKinetics.
double hill_rate(const ReactionNetwork& net, const HillParams& p, std::size_t j, const Vector<double>& x) {
  double f = to_double(p.a[j]);
  for (const auto& [m, s] : net.reaction(j).reactants) {
    const double c = to_double(p.c_of({j, m}));
    const double b = to_double(p.b_of({j, m}));
    const double u = std::pow(x(static_cast<Eigen::Index>(m)), c);
    f *= std::pow(u / (1 + b * u), to_double(s));
  }
  return f;
}

// Every exact identity a realization has to satisfy at x_bar.
void check_reconstruction(const ReactionNetwork& net, const BifurcationRealization& r) {
  HillKinetics<Rational> k(net, r.params);
  const RationalVector rates = k.rates(r.x_bar);
  CHECK(rates == r.flux);
  CHECK((stoich_matrix(net) * rates).isZero());
  const RationalMatrix d = k.rate_jacobian(r.x_bar);
  for (const auto& s : admissible_symbols(net))
    CHECK(d(static_cast<Eigen::Index>(s.reaction), static_cast<Eigen::Index>(s.species)) == *r.point.assignment.find(s));
  const RationalMatrix g = k.jacobian(r.x_bar);
  CHECK(g == r.point.jacobian);
  CHECK((g * r.point.v).isZero());
  CHECK((r.point.w.transpose() * g).isZero());
  for (const auto& [s, b] : r.params.b) CHECK(b > 0);
  for (const auto& a : r.params.a) CHECK(a > 0);
}

}  // namespace

TEST_CASE("cycle realization") {
  auto [net, cert, r] = realize_file("cycle_M3.crn");
  CHECK(r.kind == KineticsKind::MichaelisMenten);
  CHECK(r.flux == RationalVector::Constant(6, Rational(4)));
  CHECK(r.params.a[0] == 16);
  CHECK(r.params.a[1] == 256);
  CHECK(r.params.b_of({1, 0}) == 7);
  CHECK(r.params.b_of({0, 0}) == 3);
  CHECK(lambda_name(net, r.lambda) == "2.m1");
  CHECK(r.lambda_star == 7);
  CHECK_FALSE(r.mm_check.has_value());
  check_reconstruction(net, r);

  HillKinetics<Rational> k(net, r.params);
  CHECK(k.d2(0, 0, 0, r.x_bar) == Rational(-3, 2));
  CHECK(k.d2(1, 0, 0, r.x_bar) == Rational(-13, 8));
  REQUIRE(r.sn3_exact);
  CHECK(abs(*r.sn3_exact) == Rational(1, 8));
}

TEST_CASE("michaelis menten nondegeneracy flags") {
  SUBCASE("core stays degenerate") {
    auto [net, cert, r] = realize_file("degenerate_core.crn");
    REQUIRE(r.mm_check);
    CHECK_FALSE(r.mm_check->nondegenerate);
    CHECK_FALSE(r.flux_perturbed);
    CHECK(*r.sn3_exact == 0);
    check_reconstruction(net, r);
  }
  SUBCASE("inflow breaks the degeneracy") {
    auto [net, cert, r] = realize_file("degenerate_core_with_inflow.crn");
    REQUIRE(r.mm_check);
    CHECK(r.mm_check->nondegenerate);
    CHECK_FALSE(r.flux_perturbed);
    CHECK(r.flux(*net.reaction_index("F_A")) == 4);
    CHECK(r.flux(*net.reaction_index("0")) == 8);
    CHECK(*r.sn3_exact == Rational(1, 4));
    check_reconstruction(net, r);
  }
  SUBCASE("glyoxylate network after a flux perturbation") {
    auto [net, cert, r] = realize_file("ecoli_tca_glyoxylate.crn");
    REQUIRE(r.mm_check);
    CHECK(r.mm_check->nondegenerate);
    REQUIRE(r.sn3_exact);
    CHECK(*r.sn3_exact != 0);
    check_reconstruction(net, r);
  }
}

TEST_CASE("the separating row vanishes exactly on degenerate fluxes") {
  oracle::Generator gen(11);
  for (const char* name : {"degenerate_core.crn", "degenerate_core_with_inflow.crn", "ecoli_tca_glyoxylate.crn"}) {
    auto net = load(name);
    auto cert = first_certificate(net);
    REQUIRE(cert.distance == 1);
    const FluxBound row = mm_separating_bound(net, cert, 1);
    CHECK(mm_separating_bound(net, cert, -1).coefficients == -row.coefficients);
    for (int trial = 0; trial < 50; ++trial) {
      RationalVector r(static_cast<Eigen::Index>(net.reaction_count()));
      for (Eigen::Index j = 0; j < r.size(); ++j) r(j) = gen.positive_rational();
      const MMCheck check = check_mm_nondegeneracy(net, cert, r);
      CHECK(check.nondegenerate == (row.coefficients.dot(r) != 0));
    }
  }
}

TEST_CASE("distance one is required for the michaelis menten check") {
  auto net = load("cycle_M3.crn");
  auto cert = first_certificate(net);
  REQUIRE(cert.distance > 1);
  CHECK_THROWS_AS(check_mm_nondegeneracy(net, cert, RationalVector::Ones(6)), DistanceNotOne);
}

TEST_CASE("hill exponent nudge on the degenerate core") {
  auto [net, cert, r] = realize_file("degenerate_core.crn");
  auto nudged = nudge_c(net, r, 0.0);
  CHECK(nudged.nudged);
  CHECK(nudged.kind == KineticsKind::Hill);
  CHECK(nudged.params.c_of({0, 0}) == 2);
  REQUIRE(nudged.sn3_exact);
  CHECK(*nudged.sn3_exact == 1);
  check_reconstruction(net, nudged);
  // b from the general c formula: (r s c / (r' x) - 1) / x^c
  CHECK(nudged.params.b_of({0, 0}) == 7);
  CHECK(nudged.lambda_star == 7);

  auto unchanged = nudge_c(net, r, 0.5);
  CHECK_FALSE(unchanged.nudged);
}

TEST_CASE("general hill exponents reconstruct the certified point") {
  auto net = load("cycle_M3.crn");
  auto cert = first_certificate(net);
  auto point = certify_simple_zero(net, cert);
  for (const char* xs : {"1", "2", "1/2", "9/4"}) {
    const RationalVector x = x_bar_from_overrides(net, {std::string("m1=") + xs, "m2=4", "m3=1/4"});
    const RationalVector flux = feasible_flux(net, point, x);
    for (const Rational& c : {Rational(1), Rational(2), Rational(3), Rational(1, 2)}) {
      std::map<DerivativeSymbol, Rational> cs;
      for (const auto& s : admissible_symbols(net)) cs[s] = c;
      HillParams p;
      try {
        p = build_hill_params(net, point, flux, x, cs);
      } catch (const InvalidParameter&) {
        CHECK(c == Rational(1, 2));
        continue;
      }
      BifurcationRealization r;
      r.x_bar = x;
      r.flux = flux;
      r.params = p;
      r.point = point;
      check_reconstruction(net, r);
    }
  }
}

TEST_CASE("feasible flux respects the margin") {
  for (const char* name : {"cycle_M3.crn", "degenerate_core.crn", "degenerate_core_with_inflow.crn",
                           "ecoli_tca_glyoxylate.crn"}) {
    auto net = load(name);
    auto cert = first_certificate(net);
    auto point = certify_simple_zero(net, cert);
    for (const char* x1 : {"1", "3", "1/7"}) {
      const RationalVector x = x_bar_from_overrides(net, {net.species_name(0) + "=" + x1});
      const RationalVector r = feasible_flux(net, point, x);
      CHECK((stoich_matrix(net) * r).isZero());
      for (const auto& s : admissible_symbols(net)) {
        const Rational coeff = net.reaction(s.reaction).reactant_coefficient(s.species);
        CHECK(r(static_cast<Eigen::Index>(s.reaction)) / *point.assignment.find(s) >
              kDefaultFeasibilityMargin * x(static_cast<Eigen::Index>(s.species)) / coeff);
      }
      // smallest power of two: halving would break the margin unless already at the LP minimum
      auto base = minimal_positive_flux(stoich_matrix(net), RationalVector::Ones(r.size()), {});
      REQUIRE(base);
      Rational scale = r(0) / (*base)(0);
      CHECK(r == *base * scale);
      bool is_power = false;
      for (int k = 0; k < 64 && !is_power; ++k) is_power = scale == power_of_two(k);
      CHECK(is_power);
    }
  }
}

TEST_CASE("scaling the flux scales a and leaves b consistent") {
  auto net = load("degenerate_core_with_inflow.crn");
  auto cert = first_certificate(net);
  auto point = certify_simple_zero(net, cert);
  const RationalVector x = RationalVector::Ones(2);
  const RationalVector flux = feasible_flux(net, point, x);
  const HillParams p1 = build_hill_params(net, point, flux, x);
  const HillParams p2 = build_hill_params(net, point, flux * 2, x);
  for (const auto& s : admissible_symbols(net)) {
    // b grows with r / r'
    CHECK(p2.b_of(s) > p1.b_of(s));
  }
  BifurcationRealization r;
  r.x_bar = x;
  r.flux = flux * 2;
  r.params = p2;
  r.point = point;
  check_reconstruction(net, r);
}

TEST_CASE("infeasible flux constraints") {
  auto net = load("degenerate_core.crn");
  auto cert = first_certificate(net);
  auto point = certify_simple_zero(net, cert);
  CHECK_THROWS_AS(feasible_flux(net, point, RationalVector::Ones(2), {mm_separating_bound(net, cert, 1)}), Infeasible);
  CHECK_THROWS_AS(feasible_flux(net, point, RationalVector::Ones(2), {mm_separating_bound(net, cert, -1)}), Infeasible);
}

TEST_CASE("derivatives match finite differences") {
  oracle::Generator gen(5);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto net = gen.network(4, 6);
    HillParams p;
    for (std::size_t j = 0; j < net.reaction_count(); ++j) p.a.push_back(gen.positive_rational());
    for (const auto& s : admissible_symbols(net)) {
      p.b[s] = gen.positive_rational();
      if (gen.uniform(0, 2) == 0) p.c[s] = Rational(gen.uniform(1, 4), gen.uniform(1, 3));
    }
    HillKinetics<double> k(net, p);
    Vector<double> x(static_cast<Eigen::Index>(net.species_count()));
    for (Eigen::Index m = 0; m < x.size(); ++m) x(m) = 0.5 + 0.25 * gen.uniform(0, 6);
    const double h = 1e-5;
    for (std::size_t j = 0; j < net.reaction_count(); ++j) {
      CHECK(k.value(j, x) == doctest::Approx(hill_rate(net, p, j, x)).epsilon(1e-12));
      for (std::size_t m = 0; m < net.species_count(); ++m) {
        Vector<double> xp = x, xm = x;
        xp(static_cast<Eigen::Index>(m)) += h;
        xm(static_cast<Eigen::Index>(m)) -= h;
        const double fd = (hill_rate(net, p, j, xp) - hill_rate(net, p, j, xm)) / (2 * h);
        CHECK(k.d1(j, m, x) == doctest::Approx(fd).epsilon(1e-6).scale(1));
        for (std::size_t n = 0; n < net.species_count(); ++n) {
          const double fd2 = (k.d1(j, n, xp) - k.d1(j, n, xm)) / (2 * h);
          CHECK(k.d2(j, m, n, x) == doctest::Approx(fd2).epsilon(1e-5).scale(1));
          ++checked;
        }
      }
    }
    const auto symbols = admissible_symbols(net);
    if (symbols.empty()) continue;
    const auto& s = symbols[static_cast<std::size_t>(gen.uniform(0, static_cast<int>(symbols.size()) - 1))];
    const BifurcationParameter lambda{BifurcationParameter::Kind::Saturation, s.reaction, s.species};
    const double b0 = to_double(p.b_of(s));
    HillKinetics<double> kp = k, km = k;
    kp.set_parameter(lambda, b0 + h);
    km.set_parameter(lambda, b0 - h);
    const Vector<double> fd = (kp.field(x) - km.field(x)) / (2 * h);
    CHECK((k.field_d_lambda(lambda, x) - fd).norm() <= 1e-6 * (1 + fd.norm()));
    // lambda only touches its own reaction
    for (std::size_t j = 0; j < net.reaction_count(); ++j)
      if (j != s.reaction) CHECK(k.d_lambda(lambda, j, x) == 0);
  }
  CHECK(checked > 1000);
}

TEST_CASE("double and exact evaluation agree") {
  auto [net, cert, r] = realize_file("cycle_M3.crn", {"m2=3/2"});
  HillKinetics<double> kd(net, r.params);
  HillKinetics<Rational> kr(net, r.params);
  const Vector<double> x = to_double(r.x_bar);
  const RationalMatrix g = kr.jacobian(r.x_bar);
  const Matrix<double> gd = kd.jacobian(x);
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index c = 0; c < g.cols(); ++c) CHECK(gd(i, c) == doctest::Approx(to_double(g(i, c))).epsilon(1e-12));
  CHECK(kd.contract(x, to_double(r.point.w), to_double(r.point.v)) ==
        doctest::Approx(to_double(*r.sn3_exact)).epsilon(1e-10));
  check_reconstruction(net, r);
}

TEST_CASE("supplied mass action kinetics") {
  auto net = load("mass_action_fold.crn");
  const auto j = nlohmann::json::parse(std::ifstream(std::string(CRNSN_NETWORK_DIR) + "/mass_action_fold.params.json"));
  const SuppliedKinetics k = supplied_kinetics_from_json(net, j);
  CHECK(k.kind == KineticsKind::MassAction);
  CHECK(k.lambda.kind == BifurcationParameter::Kind::RateConstant);
  auto r = realize_from_params(net, k.kind, k.params, k.x_bar, k.lambda);
  CHECK(r.lambda_star == 1);
  CHECK(r.point.w == (RationalVector(3) << 1, 1, 4).finished());
  CHECK(r.point.v == (RationalVector(3) << 1, 1, 2).finished());
  CHECK(r.point.sn2_structural == 2);
  REQUIRE(r.sn3_exact);
  CHECK(*r.sn3_exact == 4);
  CHECK(r.point.rho_symbol.reaction == kUnassigned);

  const auto round = realization_from_json(net, to_json(net, r));
  CHECK(to_json(net, round) == to_json(net, r));

  auto bad = j;
  bad["a"]["1"] = "3";
  const SuppliedKinetics off = supplied_kinetics_from_json(net, bad);
  CHECK_THROWS_AS(realize_from_params(net, off.kind, off.params, off.x_bar, off.lambda), InvalidParameter);

  const HillParams ma = build_mass_action_params(net, r.flux, r.x_bar);
  CHECK(ma.a == k.params.a);
}

TEST_CASE("realization json round trip") {
  for (const char* name : {"cycle_M3.crn", "degenerate_core.crn", "ecoli_tca_glyoxylate.crn"}) {
    auto [net, cert, r] = realize_file(name);
    const auto j = to_json(net, r);
    CHECK(to_json(net, realization_from_json(net, j)) == j);
  }
}

TEST_CASE("x_bar overrides") {
  auto net = load("degenerate_core.crn");
  auto x = x_bar_from_overrides(net, {"B=5/2"});
  CHECK(x(0) == 1);
  CHECK(x(1) == Rational(5, 2));
  CHECK_THROWS_AS(x_bar_from_overrides(net, {"Q=1"}), Error);
  CHECK_THROWS_AS(x_bar_from_overrides(net, {"A=0"}), InvalidParameter);
  CHECK_THROWS_AS(x_bar_from_overrides(net, {"A"}), Error);
}

TEST_CASE("irrational powers are refused in exact mode") {
  CHECK(detail::power(Rational(4), Rational(1, 2)) == 2);
  CHECK_THROWS_AS(detail::power(Rational(2), Rational(1, 2)), InvalidParameter);
  CHECK(detail::power(2.0, Rational(1, 2)) == doctest::Approx(std::sqrt(2.0)));
}
