#include "doctest.h"

#include "crnsn/errors.hpp"
#include "crnsn/expansion.hpp"
#include "crnsn/linalg.hpp"
#include "oracles.hpp"

using namespace crnsn;

namespace {

ReactionNetwork load(const std::string& name) { return load_network(std::string(CRNSN_NETWORK_DIR) + "/" + name); }

RateAssignment random_assignment(const ReactionNetwork& net, oracle::Generator& gen) {
  RateAssignment r;
  r.epsilon = 1;
  for (const auto& s : admissible_symbols(net)) r.values[s] = gen.positive_rational();
  return r;
}

RationalMatrix rprime_matrix(const ReactionNetwork& net, const RateAssignment& r) {
  RationalMatrix out = RationalMatrix::Zero(static_cast<Eigen::Index>(net.reaction_count()),
                                            static_cast<Eigen::Index>(net.species_count()));
  for (const auto& [s, v] : r.values) out(static_cast<Eigen::Index>(s.reaction), static_cast<Eigen::Index>(s.species)) = v;
  return out;
}

SNPairCertificate first_certificate(const ReactionNetwork& net) {
  for (const auto& [g, b] : find_opposite_sign_pairs_at_min_set_distance(net))
    if (auto cert = certify_sn_pair(net, g, b)) return *cert;
  FAIL("no certificate");
  return {};
}

RateAssignment ones(const ReactionNetwork& net) {
  RateAssignment r;
  for (const auto& s : admissible_symbols(net)) r.values[s] = 1;
  return r;
}

}  // namespace

TEST_CASE("determinant expansion of the degenerate core") {
  auto net = load("degenerate_core.crn");
  auto p = expand_determinant(net);
  REQUIRE(p.terms.size() == 2);
  CHECK(p.terms[0].alpha == 1);
  CHECK(p.terms[0].monomial == Monomial{{0, 0}, {2, 1}});
  CHECK(p.terms[1].alpha == -1);
  CHECK(p.terms[1].monomial == Monomial{{1, 0}, {2, 1}});

  CHECK(evaluate(p, ones(net)) == 0);
  CHECK(evaluate(p, RateAssignment{}) == 0);

  auto a = expand_adjugate_trace(net);
  CHECK(evaluate(a, ones(net)) == -3);
  bool has_witness_term = false;
  for (const auto& t : a.terms) has_witness_term |= t.omitted == 0 && t.monomial == Monomial{{2, 1}};
  CHECK(has_witness_term);
}

TEST_CASE("cycle determinant has two terms") {
  auto net = load("cycle_M3.crn");
  auto p = expand_determinant(net);
  REQUIRE(p.terms.size() == 2);
  CHECK(p.terms[0].alpha == 1);
  CHECK(p.terms[1].alpha == -1);
}

TEST_CASE("mass action determinant signs") {
  // Mass action derivatives at x: r'_{jm} = k_j * s * prod / x_m.
  auto net = load("mass_action_fold.crn");
  auto p = expand_determinant(net);
  oracle::Generator gen(4);
  for (int k = 0; k < 20; ++k) {
    const Rational k1 = gen.positive_rational(), k2 = gen.positive_rational(), k3 = gen.positive_rational(),
                   k4 = gen.positive_rational(), xa = gen.positive_rational(), xb = gen.positive_rational();
    RateAssignment r;
    auto j = [&](const char* n) { return *net.reaction_index(n); };
    auto m = [&](const char* n) { return *net.species_index(n); };
    r.values[{j("1"), m("A")}] = k1;
    r.values[{j("2"), m("A")}] = k2 * xb;
    r.values[{j("2"), m("B")}] = k2 * xa;
    r.values[{j("3"), m("B")}] = k3;
    r.values[{j("4"), m("C")}] = k4;
    CHECK(evaluate(p, r) == -k1 * k3 * k4 + k1 * k2 * k4 * xa + k2 * k3 * k4 * xb);
  }
}

TEST_CASE("permanently singular networks are rejected") {
  CHECK_THROWS_AS(expand_determinant(parse_network("A -> B\nB -> A")), PermanentlySingular);
}

TEST_CASE("single species adjugate is one") {
  auto a = expand_adjugate_trace(parse_network("A ->"));
  RateAssignment r;
  r.values[{0, 0}] = 5;
  CHECK(evaluate(a, r) == 1);
}

TEST_CASE("missing symbols") {
  auto net = load("degenerate_core.crn");
  auto p = expand_determinant(net);
  RateAssignment r;
  r.epsilon = Rational(1, 10);
  r.values[{0, 0}] = 1;
  CHECK_THROWS_AS(evaluate(p, r), MissingSymbol);
}

TEST_CASE("epsilon assignments") {
  auto core = load("degenerate_core.crn");
  auto cert = first_certificate(core);
  auto r = build_epsilon_assignment(core, cert);
  CHECK(r.values.size() == 2);
  CHECK(*r.find({1, 0}) == 1);
  CHECK(*r.find({2, 1}) == 1);
  CHECK(r.find({0, 0}) == nullptr);

  auto ecoli = load("ecoli_tca_glyoxylate.crn");
  auto ecert = first_certificate(ecoli);
  const Rational eps(1, 1000);
  auto re = build_epsilon_assignment(ecoli, ecert, 1, eps);
  const auto support = pair_support(ecert);
  for (const auto& s : admissible_symbols(ecoli)) {
    if (s == rho_symbol(ecert)) continue;
    const bool in = std::find(support.begin(), support.end(), s) != support.end();
    CHECK(*re.find(s) == (in ? Rational(1) : eps));
  }
  CHECK(*re.find({*ecoli.reaction_index("9"), *ecoli.species_index("I")}) == eps);
  CHECK(*re.find({*ecoli.reaction_index("11"), *ecoli.species_index("I")}) == eps);
  CHECK(*re.find({*ecoli.reaction_index("9"), *ecoli.species_index("F")}) == 1);

  // At epsilon = 0 only the two pair monomials survive.
  auto p = expand_determinant(ecoli);
  auto r0 = build_epsilon_assignment(ecoli, ecert, 1, 0);
  const Rational rho = 3;
  r0.values[rho_symbol(ecert)] = rho;
  CHECK(evaluate(p, r0) == ecert.j1.alpha * rho + ecert.j2.alpha);
}

TEST_CASE("solving for rho") {
  auto core = load("degenerate_core.crn");
  auto cert = first_certificate(core);
  auto p = expand_determinant(core);
  CHECK(solve_rho(p, build_epsilon_assignment(core, cert), rho_symbol(cert)) == 1);

  auto cycle = load("cycle_M3.crn");
  auto ccert = first_certificate(cycle);
  CHECK(solve_rho(expand_determinant(cycle), build_epsilon_assignment(cycle, ccert), rho_symbol(ccert)) == 1);

  // Same-sign pair: no positive root.
  SNPairCertificate same = cert;
  same.j2.alpha = 1;
  DetExpansion q{2, {{1, {{0, 0}, {2, 1}}}, {1, {{1, 0}, {2, 1}}}}};
  CHECK_THROWS_AS(solve_rho(q, build_epsilon_assignment(core, same), rho_symbol(same)), NonpositiveRoot);
  DetExpansion flat{2, {{1, {{1, 0}, {2, 1}}}}};
  CHECK_THROWS_AS(solve_rho(flat, build_epsilon_assignment(core, cert), rho_symbol(cert)), DegenerateSlope);
}

TEST_CASE("simple zero points of the worked networks") {
  auto core = load("degenerate_core.crn");
  auto point = certify_simple_zero(core, first_certificate(core));
  RationalMatrix g(2, 2);
  g << -2, 2, 1, -1;
  CHECK(point.jacobian == g);
  CHECK(point.adj_trace == -3);
  CHECK(point.w == (RationalVector(2) << 1, 2).finished());
  CHECK(point.v == (RationalVector(2) << 1, 1).finished());

  auto cycle = load("cycle_M3.crn");
  auto cpoint = certify_simple_zero(cycle, first_certificate(cycle));
  RationalMatrix g1(3, 3);
  g1 << -3, 1, 2, 1, -2, 1, 1, 1, -2;
  CHECK(cpoint.jacobian == g1);
  CHECK(rank_exact(cpoint.jacobian) == 2);
  CHECK(cpoint.v == (RationalVector(3) << 1, 1, 1).finished());
  CHECK(cpoint.w == (RationalVector(3) << 3, 4, 5).finished());
  const RationalMatrix s = stoich_matrix(cycle);
  for (Eigen::Index j = 0; j < s.cols(); ++j) CHECK(cpoint.w.dot(s.col(j)) != 0);

  auto ecoli = load("ecoli_tca_glyoxylate.crn");
  auto ecert = first_certificate(ecoli);
  auto epoint = certify_simple_zero(ecoli, ecert);
  CHECK(epoint.assignment.epsilon == Rational(1, 1000));
  CHECK(evaluate(expand_determinant(ecoli), epoint.assignment) == 0);
  CHECK(check_sn2_structural(ecoli, epoint, ecert.eta) != 0);
}

TEST_CASE("sn2 structural value on the mass action network") {
  auto net = load("mass_action_fold.crn");
  SimpleZeroPoint point;
  point.w = (RationalVector(3) << 1, 1, 4).finished();
  CHECK(check_sn2_structural(net, point, *net.reaction_index("2")) == 2);
}

TEST_CASE("left kernel is orthogonal to J1 columns away from m* at epsilon zero") {
  auto cycle = load("cycle_M3.crn");
  auto cert = first_certificate(cycle);
  auto point = certify_simple_zero(cycle, cert);
  const RationalMatrix s = stoich_matrix(cycle);
  // w G = 0 with G = sum over the J1 and J2 columns; with two selections per
  // species only the m* column can carry a nonzero pairing.
  for (std::size_t m = 0; m < cycle.species_count(); ++m) {
    if (m == cert.m_star) continue;
    const auto j = cert.j1.assignment[m];
    const auto k = cert.j2.assignment[m];
    CHECK(point.w.dot(s.col(static_cast<Eigen::Index>(j))) == -point.w.dot(s.col(static_cast<Eigen::Index>(k))));
  }
}

TEST_CASE("simple zero point json round trip") {
  auto net = load("ecoli_tca_glyoxylate.crn");
  auto point = certify_simple_zero(net, first_certificate(net));
  auto back = simple_zero_from_json(net, to_json(net, point));
  CHECK(back.assignment.values == point.assignment.values);
  CHECK(back.jacobian == point.jacobian);
  CHECK(back.w == point.w);
  CHECK(back.rho_value == point.rho_value);
  CHECK(back.adj_trace == point.adj_trace);
}

TEST_CASE("expansions agree with brute force oracles on random networks") {
  oracle::Generator gen(99);
  int certified = 0;
  for (int k = 0; k < 500; ++k) {
    auto net = gen.network(5, 8);
    const auto r = random_assignment(net, gen);
    const RationalMatrix g = oracle::assemble_jacobian(net, rprime_matrix(net, r));
    CHECK(jacobian(net, r) == g);
    const auto a = expand_adjugate_trace(net);
    CHECK(evaluate(a, r) == oracle::adjugate_trace(g));
    DetExpansion p;
    try {
      p = expand_determinant(net);
    } catch (const PermanentlySingular&) {
      CHECK(oracle::leibniz_det(g) == 0);
      continue;
    }
    CHECK(evaluate(p, r) == oracle::leibniz_det(g));

    for (const auto& [good, bad] : find_opposite_sign_pairs_at_min_set_distance(net)) {
      auto cert = certify_sn_pair(net, good, bad);
      if (!cert) continue;
      SimpleZeroPoint point;
      try {
        point = certify_simple_zero(net, *cert, p);
      } catch (const ScheduleExhausted&) {
        continue;
      }
      ++certified;
      CHECK(evaluate(p, point.assignment) == 0);
      CHECK(rank_exact(point.jacobian) == static_cast<Eigen::Index>(net.species_count()) - 1);
      CHECK(point.adj_trace != 0);
      CHECK(evaluate(a, point.assignment) == point.adj_trace);
      CHECK((point.w.transpose() * point.jacobian).isZero());
      CHECK((point.jacobian * point.v).isZero());
      CHECK(point.v(static_cast<Eigen::Index>(cert->m_star)) != 0);
      for (const auto& [s, value] : point.assignment.values) CHECK(value > 0);
      break;
    }
  }
  CHECK(certified > 20);
}

TEST_CASE("homogeneity and multilinearity") {
  oracle::Generator gen(17);
  for (int k = 0; k < 100; ++k) {
    auto net = gen.network(5, 8);
    DetExpansion p;
    try {
      p = expand_determinant(net);
    } catch (const PermanentlySingular&) {
      continue;
    }
    const auto a = expand_adjugate_trace(net);
    const auto r = random_assignment(net, gen);
    const auto m = static_cast<unsigned>(net.species_count());
    for (int t : {2, 3}) {
      RateAssignment scaled = r;
      for (auto& [s, v] : scaled.values) v *= t;
      CHECK(evaluate(p, scaled) == evaluate(p, r) * *exact_power(Rational(t), Rational(m)));
      CHECK(evaluate(a, scaled) == evaluate(a, r) * *exact_power(Rational(t), Rational(m - 1)));
    }
    for (const auto& [s, v] : r.values) {
      RateAssignment r0 = r, r1 = r, r2 = r;
      r0.values[s] = 1;
      r1.values[s] = 2;
      r2.values[s] = 5;
      const Rational p0 = evaluate(p, r0), p1 = evaluate(p, r1), p2 = evaluate(p, r2);
      CHECK(p2 - p0 == 4 * (p1 - p0));
    }
  }
}
