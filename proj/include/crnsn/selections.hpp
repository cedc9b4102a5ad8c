#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"

#include "crnsn/network.hpp"
#include "crnsn/rational.hpp"

namespace crnsn {

inline constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kDefaultCap = 1'000'000;

/// assignment[m] is the reaction chosen for species m.
using Assignment = std::vector<std::size_t>;

struct ChildSelection {
  Assignment assignment;
  Rational alpha;

  friend bool operator==(const ChildSelection&, const ChildSelection&) = default;
};

/// assignment[omitted] == kUnassigned.
struct PartialChildSelection {
  std::size_t omitted = kUnassigned;
  Assignment assignment;
  Rational beta;

  friend bool operator==(const PartialChildSelection&, const PartialChildSelection&) = default;
};

enum class SelectionClass { Zero, Good, Bad };

const char* to_string(SelectionClass c);

/// Columns S^{J(m)} in species order, skipping unassigned species.
RationalMatrix selection_columns(const RationalMatrix& s, const Assignment& assignment);

Rational alpha(const RationalMatrix& s, const Assignment& assignment);
Rational alpha(const ReactionNetwork& net, const Assignment& assignment);
/// Determinant of the selected columns with row `omitted` removed.
Rational beta(const RationalMatrix& s, std::size_t omitted, const Assignment& assignment);

SelectionClass classify(const Rational& alpha, std::size_t species_count);
SelectionClass classify(const ReactionNetwork& net, const ChildSelection& cs);

/// True when assignment is injective and each species is a reactant of its reaction.
bool is_valid_selection(const ReactionNetwork& net, const Assignment& assignment,
                        std::size_t omitted = kUnassigned);

/// Depth-first enumeration in lexicographic order, pruned by a Hall-condition
/// matching test. `omitted` skips one species (Partial Child Selections).
/// The visitor returns false to stop early. Throws EnumerationCapExceeded
/// once more than `cap` assignments have been produced.
void for_each_selection(const ReactionNetwork& net, std::size_t omitted, std::size_t cap,
                        const std::function<bool(const Assignment&)>& visit);

/// Every Child Selection, zero ones included.
std::vector<ChildSelection> enumerate_child_selections(const ReactionNetwork& net,
                                                       std::size_t cap = kDefaultCap);

/// Nonzero Partial Child Selections for every omitted species.
std::vector<PartialChildSelection> enumerate_partial_selections(const ReactionNetwork& net,
                                                                std::size_t cap = kDefaultCap);

struct SelectionCensus {
  std::vector<ChildSelection> nonzero;  // lexicographic order
  std::size_t total = 0;
  std::size_t good = 0;
  std::size_t bad = 0;
  std::size_t zero = 0;
};

/// Enumerates once, keeps only the nonzero selections.
SelectionCensus child_selection_census(const ReactionNetwork& net, std::size_t cap = kDefaultCap);

std::size_t distance(const Assignment& a, const Assignment& b);
inline std::size_t distance(const ChildSelection& a, const ChildSelection& b) {
  return distance(a.assignment, b.assignment);
}
std::vector<std::size_t> disagreement(const Assignment& a, const Assignment& b);

/// (good, bad) pairs realizing the minimal distance between the good and bad sets.
std::vector<std::pair<ChildSelection, ChildSelection>> find_opposite_sign_pairs_at_min_set_distance(
    const ReactionNetwork& net, std::size_t cap = kDefaultCap);
std::vector<std::pair<ChildSelection, ChildSelection>> find_opposite_sign_pairs_at_min_set_distance(
    const SelectionCensus& census);

bool certify_minimal_distance(const ReactionNetwork& net, const ChildSelection& j1,
                              const ChildSelection& j2, std::size_t cap = kDefaultCap);

struct Witness {
  std::size_t species;
  PartialChildSelection pcs;
};

std::optional<Witness> find_witness_pcs(const ReactionNetwork& net, const ChildSelection& j1,
                                        const ChildSelection& j2);

struct SNPairCertificate {
  ChildSelection j1;
  ChildSelection j2;
  std::vector<std::size_t> disagreement;
  std::size_t distance = 0;
  std::size_t witness_species = kUnassigned;
  PartialChildSelection witness_pcs;
  std::size_t m_star = kUnassigned;
  std::size_t eta = kUnassigned;
};

std::optional<SNPairCertificate> certify_sn_pair(const ReactionNetwork& net, const ChildSelection& j1,
                                                 const ChildSelection& j2, std::size_t cap = kDefaultCap);

/// Extends a certificate of `sub` to `big` by a common assignment of the
/// extra species. Throws EmbeddingMismatch if `sub` does not embed by names.
std::optional<SNPairCertificate> lift_sn_pair(const ReactionNetwork& big, const ReactionNetwork& sub,
                                              const SNPairCertificate& cert, std::size_t cap = kDefaultCap);

nlohmann::json assignment_to_json(const ReactionNetwork& net, const Assignment& a);
Assignment assignment_from_json(const ReactionNetwork& net, const nlohmann::json& j);
nlohmann::json to_json(const ReactionNetwork& net, const ChildSelection& cs);
nlohmann::json to_json(const ReactionNetwork& net, const SNPairCertificate& cert);
SNPairCertificate certificate_from_json(const ReactionNetwork& net, const nlohmann::json& j);

}  // namespace crnsn
