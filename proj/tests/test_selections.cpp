#include "doctest.h"

#include <set>

#include "crnsn/errors.hpp"
#include "crnsn/selections.hpp"
#include "oracles.hpp"

using namespace crnsn;

namespace {

ReactionNetwork load(const std::string& name) { return load_network(std::string(CRNSN_NETWORK_DIR) + "/" + name); }

// Species-ordered reaction names to an assignment.
Assignment by_names(const ReactionNetwork& net, std::initializer_list<const char*> names) {
  Assignment a;
  for (const char* n : names) a.push_back(n ? *net.reaction_index(n) : kUnassigned);
  return a;
}

// Brute force over all E^M maps.
std::vector<Assignment> all_selections_brute(const ReactionNetwork& net, std::size_t omitted = kUnassigned) {
  std::vector<Assignment> out;
  const std::size_t m = net.species_count();
  const std::size_t e = net.reaction_count();
  Assignment a(m, 0);
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == m) {
      if (is_valid_selection(net, a, omitted)) out.push_back(a);
      return;
    }
    if (k == omitted) {
      a[k] = kUnassigned;
      rec(k + 1);
      return;
    }
    for (std::size_t j = 0; j < e; ++j) {
      a[k] = j;
      rec(k + 1);
    }
  };
  rec(0);
  return out;
}

ChildSelection cs(const ReactionNetwork& net, Assignment a) {
  Rational value = alpha(net, a);
  return {std::move(a), value};
}

}  // namespace

TEST_CASE("degenerate core has exactly two child selections") {
  auto net = load("degenerate_core.crn");
  auto all = enumerate_child_selections(net);
  REQUIRE(all.size() == 2);
  CHECK(all[0].assignment == by_names(net, {"0", "2"}));
  CHECK(all[1].assignment == by_names(net, {"1", "2"}));
  CHECK(all[0].alpha == 1);
  CHECK(all[1].alpha == -1);
  CHECK(classify(net, all[0]) == SelectionClass::Good);
  CHECK(classify(net, all[1]) == SelectionClass::Bad);
}

TEST_CASE("cycle has two nonzero selections with alternating signs") {
  auto net = load("cycle_M3.crn");
  auto census = child_selection_census(net);
  REQUIRE(census.nonzero.size() == 2);
  const auto j1 = by_names(net, {"1", "3", "5"});
  const auto j2 = by_names(net, {"2", "4", "6"});
  CHECK(census.nonzero[0].assignment == j1);
  CHECK(census.nonzero[1].assignment == j2);
  CHECK(census.nonzero[0].alpha == 1);   // (-1)^(M-1)
  CHECK(census.nonzero[1].alpha == -1);  // (-1)^M
  CHECK(distance(census.nonzero[0], census.nonzero[1]) == 3);
  CHECK(census.total == census.zero + 2);
}

TEST_CASE("inflow only network has no child selection") {
  CHECK(enumerate_child_selections(parse_network("-> A")).empty());
}

TEST_CASE("glyoxylate pair") {
  auto net = load("ecoli_tca_glyoxylate.crn");
  REQUIRE(net.species() == std::vector<std::string>{"A", "B", "C", "D", "E", "F", "G", "H", "I"});
  auto j1 = cs(net, by_names(net, {"1", "3", "5", "6", "7", "9", "10", "11", "12"}));
  auto j2 = cs(net, by_names(net, {"2", "3", "5", "6", "7", "9", "10", "11", "12"}));
  CHECK(j1.alpha == -1);
  CHECK(j2.alpha == 1);
  CHECK(classify(net, j1) == SelectionClass::Good);
  CHECK(classify(net, j2) == SelectionClass::Bad);
  CHECK(distance(j1, j2) == 1);
  CHECK(distance(j1, j1) == 0);

  auto pairs = find_opposite_sign_pairs_at_min_set_distance(net);
  bool found = false;
  for (auto& [g, b] : pairs) found |= g.assignment == j1.assignment && b.assignment == j2.assignment;
  CHECK(found);

  auto witness = find_witness_pcs(net, j1, j2);
  REQUIRE(witness);
  CHECK(witness->species == *net.species_index("A"));
  CHECK(witness->pcs.assignment == by_names(net, {nullptr, "3", "5", "6", "7", "9", "10", "11", "12"}));
  CHECK(witness->pcs.beta == 1);

  auto cert = certify_sn_pair(net, j1, j2);
  REQUIRE(cert);
  CHECK(cert->m_star == *net.species_index("A"));
  CHECK(cert->eta == *net.reaction_index("1"));
}

TEST_CASE("mass action network selections") {
  auto net = load("mass_action_fold.crn");
  CHECK(alpha(net, by_names(net, {"1", "3", "4"})) == -1);
  CHECK(alpha(net, by_names(net, {"2", "3", "4"})) == 1);
  auto pairs = find_opposite_sign_pairs_at_min_set_distance(net);
  REQUIRE(!pairs.empty());
  bool found = false;
  for (auto& [g, b] : pairs) {
    CHECK(distance(g, b) == 1);
    found |= g.assignment == by_names(net, {"1", "3", "4"}) && b.assignment == by_names(net, {"2", "3", "4"});
  }
  CHECK(found);
}

TEST_CASE("no sign switch when inflow and outflow only") {
  auto net = parse_network("A ->\n-> A");
  CHECK(find_opposite_sign_pairs_at_min_set_distance(net).empty());
}

TEST_CASE("minimal distance") {
  auto net = load("cycle_M3.crn");
  auto census = child_selection_census(net);
  CHECK(certify_minimal_distance(net, census.nonzero[0], census.nonzero[1]));
  CHECK(certify_minimal_distance(net, census.nonzero[0], census.nonzero[0]));

  auto core = load("degenerate_core.crn");
  auto all = enumerate_child_selections(core);
  CHECK(certify_minimal_distance(core, all[0], all[1]));

  // Three nonzero selections on a line: the middle one breaks minimality of the outer pair.
  auto line = parse_network("A -> B\nA ->\nB -> A\nB ->\nA + B ->");
  auto sel = enumerate_child_selections(line);
  for (const auto& a : sel)
    for (const auto& b : sel) {
      if (a.alpha == 0 || b.alpha == 0) continue;
      bool expected = true;
      const std::size_t d = distance(a, b);
      for (const auto& c : sel)
        if (c.alpha != 0 && distance(a, c) < d && distance(b, c) < d) expected = false;
      if (d <= 1) expected = true;
      CHECK(certify_minimal_distance(line, a, b) == expected);
    }
}

TEST_CASE("certificates for the worked networks") {
  auto cycle = load("cycle_M3.crn");
  auto census = child_selection_census(cycle);
  auto cert = certify_sn_pair(cycle, census.nonzero[1], census.nonzero[0]);
  REQUIRE(cert);
  CHECK(cert->distance == 3);
  CHECK(cert->witness_pcs.beta != 0);
  CHECK(cert->eta == cert->j1.assignment[cert->m_star]);

  auto core = load("degenerate_core.crn");
  auto all = enumerate_child_selections(core);
  cert = certify_sn_pair(core, all[0], all[1]);
  REQUIRE(cert);
  CHECK(cert->witness_species == 0);
  CHECK(cert->witness_pcs.assignment == Assignment{kUnassigned, 2});
  CHECK(cert->eta == 0);

  CHECK_FALSE(certify_sn_pair(core, all[0], all[0]));
}

TEST_CASE("certificate json round trip") {
  auto net = load("ecoli_tca_glyoxylate.crn");
  auto pairs = find_opposite_sign_pairs_at_min_set_distance(net);
  for (auto& [g, b] : pairs) {
    auto cert = certify_sn_pair(net, g, b);
    if (!cert) continue;
    auto back = certificate_from_json(net, to_json(net, *cert));
    CHECK(back.j1 == cert->j1);
    CHECK(back.j2 == cert->j2);
    CHECK(back.witness_pcs == cert->witness_pcs);
    CHECK(back.eta == cert->eta);
    CHECK(back.m_star == cert->m_star);
  }
}

TEST_CASE("lifting certificates") {
  auto core = load("degenerate_core.crn");
  auto all = enumerate_child_selections(core);
  auto cert = certify_sn_pair(core, all[0], all[1]);
  REQUIRE(cert);

  auto inflow = load("degenerate_core_with_inflow.crn");
  auto lifted = lift_sn_pair(inflow, core, *cert);
  REQUIRE(lifted);
  CHECK(lifted->j1.alpha == cert->j1.alpha);
  CHECK(lifted->j2.alpha == cert->j2.alpha);

  auto same = lift_sn_pair(core, core, *cert);
  REQUIRE(same);
  CHECK(same->j1 == cert->j1);
  CHECK(same->j2 == cert->j2);

  auto big = parse_network("0: A ->\n1: A -> B\n2: B -> 2 A\n3: C ->");
  lifted = lift_sn_pair(big, core, *cert);
  REQUIRE(lifted);
  // Block-triangular determinant: the extension block is the single entry -1.
  CHECK(lifted->j1.alpha == cert->j1.alpha * -1);
  CHECK(lifted->j2.alpha == cert->j2.alpha * -1);
  CHECK(lifted->j1.assignment[2] == 3);
  CHECK(oracle::cofactor_det(selection_columns(stoich_matrix(big), lifted->j1.assignment)) == lifted->j1.alpha);

  auto wrong = parse_network("0: A ->\n1: A -> 2 B\n2: B -> 2 A");
  CHECK_THROWS_AS(lift_sn_pair(wrong, core, *cert), EmbeddingMismatch);
  CHECK_THROWS_AS(lift_sn_pair(parse_network("0: A ->\n1: A -> B"), core, *cert), EmbeddingMismatch);
}

TEST_CASE("enumeration cap") {
  auto net = load("cycle_M3.crn");
  CHECK_THROWS_AS(enumerate_child_selections(net, 1), EnumerationCapExceeded);
}

TEST_CASE("enumeration matches brute force on random networks") {
  oracle::Generator gen(21);
  for (int k = 0; k < 300; ++k) {
    auto net = gen.network(4, 7);
    auto fast = enumerate_child_selections(net);
    auto brute = all_selections_brute(net);
    REQUIRE(fast.size() == brute.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(fast[i].assignment == brute[i]);  // both lexicographic
      CHECK(is_valid_selection(net, fast[i].assignment));
      CHECK(fast[i].alpha == oracle::cofactor_det(selection_columns(stoich_matrix(net), fast[i].assignment)));
    }
    std::size_t pcs_brute = 0;
    const RationalMatrix s = stoich_matrix(net);
    for (std::size_t m = 0; m < net.species_count(); ++m)
      for (const auto& a : all_selections_brute(net, m)) pcs_brute += beta(s, m, a) != 0;
    CHECK(enumerate_partial_selections(net).size() == pcs_brute);
  }
}

TEST_CASE("pairs returned by the set-distance search are minimal") {
  oracle::Generator gen(8);
  int checked = 0;
  for (int k = 0; k < 300; ++k) {
    auto net = gen.network(5, 8);
    for (const auto& [g, b] : find_opposite_sign_pairs_at_min_set_distance(net)) {
      CHECK(sign(g.alpha) * sign(b.alpha) < 0);
      CHECK(certify_minimal_distance(net, g, b));
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("classification is invariant under positive column scaling") {
  oracle::Generator gen(13);
  for (int k = 0; k < 200; ++k) {
    auto net = gen.network(4, 7);
    RationalMatrix s = stoich_matrix(net);
    RationalMatrix scaled = s;
    for (Eigen::Index j = 0; j < s.cols(); ++j) scaled.col(j) *= gen.positive_rational();
    for (const auto& c : enumerate_child_selections(net))
      CHECK(classify(alpha(scaled, c.assignment), net.species_count()) == classify(net, c));
  }
}
