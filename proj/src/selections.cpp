#include "crnsn/selections.hpp"

#include <algorithm>
#include <set>

#include "crnsn/errors.hpp"
#include "crnsn/linalg.hpp"

namespace crnsn {
namespace {

// Kuhn augmenting paths: can `species` be matched into reactions not in `used`?
class HallCheck {
 public:
  explicit HallCheck(const ReactionNetwork& net) : net_(net), owner_(net.reaction_count()), seen_(net.reaction_count()) {}

  bool feasible(const std::vector<std::size_t>& species, const std::vector<bool>& used) {
    std::fill(owner_.begin(), owner_.end(), kUnassigned);
    for (std::size_t m : species) {
      std::fill(seen_.begin(), seen_.end(), false);
      if (!augment(m, used)) return false;
    }
    return true;
  }

 private:
  bool augment(std::size_t m, const std::vector<bool>& used) {
    for (std::size_t j : net_.consumers(m)) {
      if (used[j] || seen_[j]) continue;
      seen_[j] = true;
      if (owner_[j] == kUnassigned || augment(owner_[j], used)) {
        owner_[j] = m;
        return true;
      }
    }
    return false;
  }

  const ReactionNetwork& net_;
  std::vector<std::size_t> owner_;
  std::vector<bool> seen_;
};

struct Search {
  const ReactionNetwork& net;
  std::size_t omitted;
  std::size_t cap;
  const std::function<bool(const Assignment&)>& visit;
  std::vector<std::size_t> order;
  Assignment current;
  std::vector<bool> used;
  HallCheck hall;
  std::size_t produced = 0;

  bool descend(std::size_t depth) {
    if (depth == order.size()) {
      if (++produced > cap) throw EnumerationCapExceeded(cap);
      return visit(current);
    }
    const std::size_t m = order[depth];
    const std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(depth) + 1, order.end());
    for (std::size_t j : net.consumers(m)) {
      if (used[j]) continue;
      used[j] = true;
      current[m] = j;
      if (hall.feasible(rest, used) && !descend(depth + 1)) return false;
      used[j] = false;
      current[m] = kUnassigned;
    }
    return true;
  }
};

Rational checked_alpha(const RationalMatrix& s, const Assignment& a) { return det_exact(selection_columns(s, a)); }

// Hamming ball search: Child Selections strictly inside both balls of radius delta.
bool ball_has_nonzero(const ReactionNetwork& net, const RationalMatrix& s, const Assignment& a1,
                      const Assignment& a2, std::size_t delta, std::size_t cap) {
  const std::size_t species = net.species_count();
  Assignment current(species, kUnassigned);
  std::vector<bool> used(net.reaction_count(), false);
  std::size_t produced = 0;
  std::function<bool(std::size_t, std::size_t, std::size_t)> rec = [&](std::size_t m, std::size_t d1,
                                                                       std::size_t d2) -> bool {
    if (d1 >= delta || d2 >= delta) return false;
    if (m == species) {
      if (++produced > cap) throw EnumerationCapExceeded(cap);
      return checked_alpha(s, current) != 0;
    }
    for (std::size_t j : net.consumers(m)) {
      if (used[j]) continue;
      used[j] = true;
      current[m] = j;
      const bool hit = rec(m + 1, d1 + (j != a1[m]), d2 + (j != a2[m]));
      used[j] = false;
      current[m] = kUnassigned;
      if (hit) return true;
    }
    return false;
  };
  return rec(0, 0, 0);
}

}  // namespace

const char* to_string(SelectionClass c) {
  switch (c) {
    case SelectionClass::Zero: return "zero";
    case SelectionClass::Good: return "good";
    case SelectionClass::Bad: return "bad";
  }
  return "?";
}

RationalMatrix selection_columns(const RationalMatrix& s, const Assignment& assignment) {
  std::vector<Eigen::Index> cols;
  for (std::size_t j : assignment)
    if (j != kUnassigned) cols.push_back(static_cast<Eigen::Index>(j));
  RationalMatrix out(s.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = s.col(cols[k]);
  return out;
}

Rational alpha(const RationalMatrix& s, const Assignment& assignment) { return checked_alpha(s, assignment); }

Rational alpha(const ReactionNetwork& net, const Assignment& assignment) {
  return alpha(stoich_matrix(net), assignment);
}

Rational beta(const RationalMatrix& s, std::size_t omitted, const Assignment& assignment) {
  const RationalMatrix cols = selection_columns(s, assignment);
  RationalMatrix reduced(cols.rows() - 1, cols.cols());
  for (Eigen::Index i = 0, r = 0; i < cols.rows(); ++i)
    if (static_cast<std::size_t>(i) != omitted) reduced.row(r++) = cols.row(i);
  return det_exact(reduced);
}

SelectionClass classify(const Rational& a, std::size_t species_count) {
  if (a == 0) return SelectionClass::Zero;
  const int good_sign = species_count % 2 ? -1 : 1;
  return sign(a) == good_sign ? SelectionClass::Good : SelectionClass::Bad;
}

SelectionClass classify(const ReactionNetwork& net, const ChildSelection& cs) {
  return classify(cs.alpha, net.species_count());
}

bool is_valid_selection(const ReactionNetwork& net, const Assignment& assignment, std::size_t omitted) {
  if (assignment.size() != net.species_count()) return false;
  std::set<std::size_t> images;
  for (std::size_t m = 0; m < assignment.size(); ++m) {
    if (m == omitted) {
      if (assignment[m] != kUnassigned) return false;
      continue;
    }
    const std::size_t j = assignment[m];
    if (j >= net.reaction_count() || !net.is_reactant(j, m)) return false;
    if (!images.insert(j).second) return false;
  }
  return true;
}

void for_each_selection(const ReactionNetwork& net, std::size_t omitted, std::size_t cap,
                        const std::function<bool(const Assignment&)>& visit) {
  Search search{net, omitted, cap, visit, {}, Assignment(net.species_count(), kUnassigned),
                std::vector<bool>(net.reaction_count(), false), HallCheck(net)};
  for (std::size_t m = 0; m < net.species_count(); ++m)
    if (m != omitted) search.order.push_back(m);
  if (!search.hall.feasible(search.order, search.used)) return;
  search.descend(0);
}

std::vector<ChildSelection> enumerate_child_selections(const ReactionNetwork& net, std::size_t cap) {
  const RationalMatrix s = stoich_matrix(net);
  std::vector<ChildSelection> out;
  for_each_selection(net, kUnassigned, cap, [&](const Assignment& a) {
    out.push_back({a, alpha(s, a)});
    return true;
  });
  return out;
}

std::vector<PartialChildSelection> enumerate_partial_selections(const ReactionNetwork& net, std::size_t cap) {
  const RationalMatrix s = stoich_matrix(net);
  std::vector<PartialChildSelection> out;
  for (std::size_t m = 0; m < net.species_count(); ++m) {
    for_each_selection(net, m, cap, [&](const Assignment& a) {
      Rational b = beta(s, m, a);
      if (b != 0) out.push_back({m, a, std::move(b)});
      return true;
    });
  }
  return out;
}

SelectionCensus child_selection_census(const ReactionNetwork& net, std::size_t cap) {
  const RationalMatrix s = stoich_matrix(net);
  SelectionCensus census;
  for_each_selection(net, kUnassigned, cap, [&](const Assignment& a) {
    ++census.total;
    Rational value = alpha(s, a);
    switch (classify(value, net.species_count())) {
      case SelectionClass::Zero: ++census.zero; return true;
      case SelectionClass::Good: ++census.good; break;
      case SelectionClass::Bad: ++census.bad; break;
    }
    census.nonzero.push_back({a, std::move(value)});
    return true;
  });
  return census;
}

std::size_t distance(const Assignment& a, const Assignment& b) {
  std::size_t d = 0;
  for (std::size_t m = 0; m < a.size(); ++m) d += a[m] != b[m];
  return d;
}

std::vector<std::size_t> disagreement(const Assignment& a, const Assignment& b) {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < a.size(); ++m)
    if (a[m] != b[m]) out.push_back(m);
  return out;
}

std::vector<std::pair<ChildSelection, ChildSelection>> find_opposite_sign_pairs_at_min_set_distance(
    const SelectionCensus& census) {
  if (census.nonzero.empty()) return {};
  const std::size_t species = census.nonzero.front().assignment.size();
  std::vector<const ChildSelection*> good, bad;
  for (const auto& cs : census.nonzero)
    (classify(cs.alpha, species) == SelectionClass::Good ? good : bad).push_back(&cs);
  std::size_t best = std::numeric_limits<std::size_t>::max();
  std::vector<std::pair<ChildSelection, ChildSelection>> out;
  for (const auto* g : good) {
    for (const auto* b : bad) {
      const std::size_t d = distance(*g, *b);
      if (d > best) continue;
      if (d < best) {
        best = d;
        out.clear();
      }
      out.emplace_back(*g, *b);
    }
  }
  return out;
}

std::vector<std::pair<ChildSelection, ChildSelection>> find_opposite_sign_pairs_at_min_set_distance(
    const ReactionNetwork& net, std::size_t cap) {
  return find_opposite_sign_pairs_at_min_set_distance(child_selection_census(net, cap));
}

bool certify_minimal_distance(const ReactionNetwork& net, const ChildSelection& j1, const ChildSelection& j2,
                              std::size_t cap) {
  const std::size_t delta = distance(j1, j2);
  if (delta <= 1) return true;
  return !ball_has_nonzero(net, stoich_matrix(net), j1.assignment, j2.assignment, delta, cap);
}

std::optional<Witness> find_witness_pcs(const ReactionNetwork& net, const ChildSelection& j1,
                                        const ChildSelection& j2) {
  const RationalMatrix s = stoich_matrix(net);
  const auto d = disagreement(j1.assignment, j2.assignment);
  for (std::size_t tilde : d) {
    std::vector<std::size_t> free;
    for (std::size_t m : d)
      if (m != tilde) free.push_back(m);
    for (std::size_t mask = 0; mask < (std::size_t{1} << free.size()); ++mask) {
      Assignment a = j1.assignment;
      a[tilde] = kUnassigned;
      for (std::size_t k = 0; k < free.size(); ++k)
        if (mask >> k & 1) a[free[k]] = j2.assignment[free[k]];
      if (!is_valid_selection(net, a, tilde)) continue;
      Rational b = beta(s, tilde, a);
      if (b != 0) return Witness{tilde, {tilde, std::move(a), std::move(b)}};
    }
  }
  return std::nullopt;
}

std::optional<SNPairCertificate> certify_sn_pair(const ReactionNetwork& net, const ChildSelection& j1,
                                                 const ChildSelection& j2, std::size_t cap) {
  if (j1.alpha == 0 || j2.alpha == 0) return std::nullopt;
  if (!certify_minimal_distance(net, j1, j2, cap)) return std::nullopt;
  if (sign(j1.alpha) * sign(j2.alpha) >= 0) return std::nullopt;
  auto witness = find_witness_pcs(net, j1, j2);
  if (!witness) return std::nullopt;
  SNPairCertificate cert;
  cert.j1 = j1;
  cert.j2 = j2;
  cert.disagreement = disagreement(j1.assignment, j2.assignment);
  cert.distance = cert.disagreement.size();
  cert.witness_species = witness->species;
  cert.witness_pcs = std::move(witness->pcs);
  cert.m_star = cert.witness_species;
  cert.eta = j1.assignment[cert.m_star];
  return cert;
}

std::optional<SNPairCertificate> lift_sn_pair(const ReactionNetwork& big, const ReactionNetwork& sub,
                                              const SNPairCertificate& cert, std::size_t cap) {
  std::vector<std::size_t> species_map(sub.species_count());
  std::vector<bool> covered(big.species_count(), false);
  for (std::size_t m = 0; m < sub.species_count(); ++m) {
    auto idx = big.species_index(sub.species_name(m));
    if (!idx) throw EmbeddingMismatch("species '" + sub.species_name(m) + "' is missing from the larger network");
    species_map[m] = *idx;
    covered[*idx] = true;
  }
  std::vector<std::size_t> reaction_map(sub.reaction_count());
  for (std::size_t j = 0; j < sub.reaction_count(); ++j) {
    const Reaction& r = sub.reaction(j);
    auto idx = big.reaction_index(r.name);
    if (!idx) throw EmbeddingMismatch("reaction '" + r.name + "' is missing from the larger network");
    const Reaction& rb = big.reaction(*idx);
    for (std::size_t m = 0; m < sub.species_count(); ++m) {
      if (r.reactant_coefficient(m) != rb.reactant_coefficient(species_map[m]) ||
          r.product_coefficient(m) != rb.product_coefficient(species_map[m]))
        throw EmbeddingMismatch("reaction '" + r.name + "' has different stoichiometry in the larger network");
    }
    reaction_map[j] = *idx;
  }

  Assignment base1(big.species_count(), kUnassigned), base2(big.species_count(), kUnassigned);
  std::vector<bool> used(big.reaction_count(), false);
  for (std::size_t m = 0; m < sub.species_count(); ++m) {
    base1[species_map[m]] = reaction_map[cert.j1.assignment[m]];
    base2[species_map[m]] = reaction_map[cert.j2.assignment[m]];
    used[base1[species_map[m]]] = true;
    used[base2[species_map[m]]] = true;
  }
  std::vector<std::size_t> extra;
  for (std::size_t m = 0; m < big.species_count(); ++m)
    if (!covered[m]) extra.push_back(m);

  const RationalMatrix s = stoich_matrix(big);
  std::size_t produced = 0;
  std::optional<SNPairCertificate> found;
  std::function<bool(std::size_t)> rec = [&](std::size_t k) -> bool {
    if (k == extra.size()) {
      if (++produced > cap) throw EnumerationCapExceeded(cap);
      ChildSelection l1{base1, alpha(s, base1)};
      ChildSelection l2{base2, alpha(s, base2)};
      if (sign(l1.alpha) * sign(l2.alpha) >= 0) return false;
      found = certify_sn_pair(big, l1, l2, cap);
      return found.has_value();
    }
    const std::size_t m = extra[k];
    for (std::size_t j : big.consumers(m)) {
      if (used[j]) continue;
      used[j] = true;
      base1[m] = base2[m] = j;
      if (rec(k + 1)) return true;
      used[j] = false;
      base1[m] = base2[m] = kUnassigned;
    }
    return false;
  };
  rec(0);
  return found;
}

nlohmann::json assignment_to_json(const ReactionNetwork& net, const Assignment& a) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t m = 0; m < a.size(); ++m)
    if (a[m] != kUnassigned) j[net.species_name(m)] = net.reaction(a[m]).name;
  return j;
}

Assignment assignment_from_json(const ReactionNetwork& net, const nlohmann::json& j) {
  Assignment a(net.species_count(), kUnassigned);
  for (const auto& [species, reaction] : j.items()) {
    auto m = net.species_index(species);
    auto r = net.reaction_index(reaction.get<std::string>());
    if (!m || !r) throw Error("assignment refers to unknown species or reaction");
    a[*m] = *r;
  }
  return a;
}

nlohmann::json to_json(const ReactionNetwork& net, const ChildSelection& cs) {
  return {{"assignment", assignment_to_json(net, cs.assignment)},
          {"alpha", to_string(cs.alpha)},
          {"class", to_string(classify(net, cs))}};
}

nlohmann::json to_json(const ReactionNetwork& net, const SNPairCertificate& cert) {
  std::vector<std::string> d;
  for (std::size_t m : cert.disagreement) d.push_back(net.species_name(m));
  return {{"j1", to_json(net, cert.j1)},
          {"j2", to_json(net, cert.j2)},
          {"disagreement", d},
          {"distance", cert.distance},
          {"witness_species", net.species_name(cert.witness_species)},
          {"witness_pcs",
           {{"omitted", net.species_name(cert.witness_pcs.omitted)},
            {"assignment", assignment_to_json(net, cert.witness_pcs.assignment)},
            {"beta", to_string(cert.witness_pcs.beta)}}},
          {"m_star", net.species_name(cert.m_star)},
          {"eta", net.reaction(cert.eta).name}};
}

SNPairCertificate certificate_from_json(const ReactionNetwork& net, const nlohmann::json& j) {
  auto species = [&](const nlohmann::json& v) {
    auto m = net.species_index(v.get<std::string>());
    if (!m) throw Error("certificate refers to unknown species");
    return *m;
  };
  SNPairCertificate cert;
  cert.j1 = {assignment_from_json(net, j.at("j1").at("assignment")), parse_rational(j.at("j1").at("alpha").get<std::string>())};
  cert.j2 = {assignment_from_json(net, j.at("j2").at("assignment")), parse_rational(j.at("j2").at("alpha").get<std::string>())};
  for (const auto& m : j.at("disagreement")) cert.disagreement.push_back(species(m));
  cert.distance = j.at("distance").get<std::size_t>();
  cert.witness_species = species(j.at("witness_species"));
  const auto& w = j.at("witness_pcs");
  cert.witness_pcs = {species(w.at("omitted")), assignment_from_json(net, w.at("assignment")),
                      parse_rational(w.at("beta").get<std::string>())};
  cert.m_star = species(j.at("m_star"));
  auto eta = net.reaction_index(j.at("eta").get<std::string>());
  if (!eta) throw Error("certificate refers to unknown reaction");
  cert.eta = *eta;
  return cert;
}

}  // namespace crnsn
