#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "crnsn/rational.hpp"

namespace crnsn {

/// Coefficients keyed by species index; only strictly positive entries are stored.
using Complex = std::map<std::size_t, Rational>;

struct Reaction {
  std::string name;
  Complex reactants;  // s^j_m
  Complex products;   // s~^j_m
  /// Name of the reaction this one reverses, when both came from one `<->` line.
  std::optional<std::string> reverse_of;

  bool is_inflow() const { return reactants.empty(); }
  bool is_outflow() const { return products.empty(); }
  Rational reactant_coefficient(std::size_t species) const;
  Rational product_coefficient(std::size_t species) const;

  friend bool operator==(const Reaction&, const Reaction&) = default;
};

/// A chemical reaction network: ordered species and ordered irreversible
/// reactions. Immutable after construction; the constructor validates.
class ReactionNetwork {
 public:
  ReactionNetwork(std::vector<std::string> species, std::vector<Reaction> reactions);

  const std::vector<std::string>& species() const { return species_; }
  const std::vector<Reaction>& reactions() const { return reactions_; }
  std::size_t species_count() const { return species_.size(); }
  std::size_t reaction_count() const { return reactions_.size(); }

  const std::string& species_name(std::size_t m) const { return species_[m]; }
  const Reaction& reaction(std::size_t j) const { return reactions_[j]; }
  std::optional<std::size_t> species_index(std::string_view name) const;
  std::optional<std::size_t> reaction_index(std::string_view name) const;

  bool is_reactant(std::size_t reaction, std::size_t species) const {
    return reactions_[reaction].reactants.count(species) != 0;
  }
  /// Reactions having `species` as a reactant, in increasing index order.
  const std::vector<std::size_t>& consumers(std::size_t species) const { return consumers_[species]; }

  friend bool operator==(const ReactionNetwork& a, const ReactionNetwork& b) {
    return a.species_ == b.species_ && a.reactions_ == b.reactions_;
  }

 private:
  std::vector<std::string> species_;
  std::vector<Reaction> reactions_;
  std::vector<std::vector<std::size_t>> consumers_;
};

/// Line-oriented text format:  `[name:] term {+ term} (-> | <->) [term {+ term}]`
/// with `term = [coeff] species`, `#` comments and empty sides for in/outflows.
ReactionNetwork parse_network(std::string_view text);
ReactionNetwork load_network(const std::string& path);

/// Text rendering that parse_network reads back to an identical network.
std::string to_text(const ReactionNetwork& net);

nlohmann::json to_json(const ReactionNetwork& net);
ReactionNetwork network_from_json(const nlohmann::json& j);

/// M x E matrix with S(m, j) = products[m] - reactants[m] of reaction j.
RationalMatrix stoich_matrix(const ReactionNetwork& net);

/// Extra linear row for flux problems:  coefficients . r >= bound.
struct FluxBound {
  RationalVector coefficients;
  Rational bound;
};

/// Minimizes weights . r over { S r = 0, r >= 1, extra bounds }; nullopt if empty.
std::optional<RationalVector> minimal_positive_flux(const RationalMatrix& s,
                                                    const RationalVector& weights,
                                                    const std::vector<FluxBound>& extra = {});

/// Rational r with S r = 0 and every r_j >= 1, minimizing sum r_j.
/// Throws Infeasible when S has no positive right kernel vector.
RationalVector positive_right_kernel(const RationalMatrix& s);

}  // namespace crnsn
