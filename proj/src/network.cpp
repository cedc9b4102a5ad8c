#include "crnsn/network.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "crnsn/errors.hpp"
#include "crnsn/simplex.hpp"

namespace crnsn {
namespace {

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '\'';
}
bool is_species_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_number_char(char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '/'; }

struct ParsedLine {
  std::optional<std::string> name;
  std::size_t name_column = 1;
  std::vector<std::pair<std::string, Rational>> left;
  std::vector<std::pair<std::string, Rational>> right;
  bool reversible = false;
};

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t line_no) : s_(line), line_(line_no) {}

  ParsedLine parse() {
    ParsedLine out;
    skip_ws();
    if (auto colon = s_.find(':'); colon != std::string_view::npos) {
      std::string_view raw = s_.substr(pos_, colon - pos_);
      while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);
      if (raw.empty()) fail("empty reaction name");
      for (std::size_t k = 0; k < raw.size(); ++k)
        if (!is_name_char(raw[k])) {
          pos_ += k;
          fail(std::string("invalid character '") + raw[k] + "' in reaction name");
        }
      out.name = std::string(raw);
      out.name_column = pos_ + 1;
      pos_ = colon + 1;
    }
    out.left = parse_side(true);
    skip_ws();
    if (consume("<->"))
      out.reversible = true;
    else if (!consume("->"))
      fail("expected '->' or '<->'");
    out.right = parse_side(false);
    skip_ws();
    if (pos_ != s_.size()) fail(std::string("unexpected character '") + s_[pos_] + "'");
    if (out.left.empty() && out.right.empty()) fail("reaction has no species");
    return out;
  }

 private:
  std::vector<std::pair<std::string, Rational>> parse_side(bool left) {
    std::vector<std::pair<std::string, Rational>> terms;
    skip_ws();
    if (at_side_end(left)) return terms;
    for (;;) {
      terms.push_back(parse_term());
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == '+') {
        ++pos_;
        continue;
      }
      if (!at_side_end(left)) fail("expected '+' between terms");
      return terms;
    }
  }

  bool at_side_end(bool left) const {
    if (pos_ >= s_.size()) return true;
    if (!left) return false;
    return s_.substr(pos_, 2) == "->" || s_.substr(pos_, 3) == "<->";
  }

  std::pair<std::string, Rational> parse_term() {
    skip_ws();
    Rational coeff = 1;
    if (pos_ < s_.size() && s_[pos_] == '-' && pos_ + 1 < s_.size() &&
        (std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) || s_[pos_ + 1] == '.'))
      fail("negative coefficient");
    if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && is_number_char(s_[pos_])) ++pos_;
      try {
        coeff = parse_rational(s_.substr(start, pos_ - start));
      } catch (const std::invalid_argument& e) {
        pos_ = start;
        fail(e.what());
      }
      skip_ws();
    }
    if (pos_ >= s_.size() || !is_species_start(s_[pos_])) fail("expected species name");
    const std::size_t start = pos_;
    while (pos_ < s_.size() && is_name_char(s_[pos_])) ++pos_;
    return {std::string(s_.substr(start, pos_ - start)), coeff};
  }

  bool consume(std::string_view token) {
    if (s_.substr(pos_, token.size()) != token) return false;
    pos_ += token.size();
    return true;
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, line_, pos_ + 1); }

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::string render_side(const ReactionNetwork& net, const Complex& side) {
  std::string out;
  for (const auto& [m, coeff] : side) {
    if (!out.empty()) out += " + ";
    if (coeff != 1) out += to_string(coeff) + " ";
    out += net.species_name(m);
  }
  return out;
}

nlohmann::json complex_to_json(const ReactionNetwork& net, const Complex& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [m, coeff] : c) j[net.species_name(m)] = to_string(coeff);
  return j;
}

}  // namespace

Rational Reaction::reactant_coefficient(std::size_t species) const {
  auto it = reactants.find(species);
  return it == reactants.end() ? Rational(0) : it->second;
}

Rational Reaction::product_coefficient(std::size_t species) const {
  auto it = products.find(species);
  return it == products.end() ? Rational(0) : it->second;
}

ReactionNetwork::ReactionNetwork(std::vector<std::string> species, std::vector<Reaction> reactions)
    : species_(std::move(species)), reactions_(std::move(reactions)), consumers_(species_.size()) {
  std::set<std::string> seen;
  for (const auto& s : species_)
    if (!seen.insert(s).second) throw InvalidNetwork("duplicate species name '" + s + "'");
  seen.clear();
  std::vector<bool> referenced(species_.size(), false);
  for (std::size_t j = 0; j < reactions_.size(); ++j) {
    const Reaction& r = reactions_[j];
    if (!seen.insert(r.name).second) throw InvalidNetwork("duplicate reaction name '" + r.name + "'");
    if (r.reactants.empty() && r.products.empty())
      throw InvalidNetwork("reaction '" + r.name + "' has neither reactants nor products");
    for (const Complex* side : {&r.reactants, &r.products}) {
      for (const auto& [m, coeff] : *side) {
        if (m >= species_.size()) throw InvalidNetwork("reaction '" + r.name + "' references unknown species");
        if (coeff <= 0) throw InvalidNetwork("reaction '" + r.name + "' has a nonpositive coefficient");
        referenced[m] = true;
      }
    }
    for (const auto& [m, coeff] : r.reactants) consumers_[m].push_back(j);
  }
  for (std::size_t m = 0; m < species_.size(); ++m)
    if (!referenced[m]) throw InvalidNetwork("species '" + species_[m] + "' appears in no reaction");
}

std::optional<std::size_t> ReactionNetwork::species_index(std::string_view name) const {
  for (std::size_t m = 0; m < species_.size(); ++m)
    if (species_[m] == name) return m;
  return std::nullopt;
}

std::optional<std::size_t> ReactionNetwork::reaction_index(std::string_view name) const {
  for (std::size_t j = 0; j < reactions_.size(); ++j)
    if (reactions_[j].name == name) return j;
  return std::nullopt;
}

ReactionNetwork parse_network(std::string_view text) {
  std::vector<std::string> species;
  std::map<std::string, std::size_t, std::less<>> index;
  std::vector<Reaction> reactions;
  std::set<std::string, std::less<>> names;

  auto intern = [&](const std::string& name) {
    auto [it, inserted] = index.emplace(name, species.size());
    if (inserted) species.push_back(name);
    return it->second;
  };
  auto to_complex = [&](const std::vector<std::pair<std::string, Rational>>& terms) {
    Complex c;
    for (const auto& [name, coeff] : terms) {
      if (coeff == 0) continue;
      c[intern(name)] += coeff;
    }
    return c;
  };

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;

    ParsedLine parsed = LineParser(line, line_no).parse();
    Reaction forward;
    forward.name = parsed.name ? *parsed.name : "r" + std::to_string(reactions.size() + 1);
    forward.reactants = to_complex(parsed.left);
    forward.products = to_complex(parsed.right);
    if (forward.reactants.empty() && forward.products.empty())
      throw ParseError("reaction has no species with positive coefficient", line_no, 1);
    if (!names.insert(forward.name).second)
      throw ParseError("duplicate reaction name '" + forward.name + "'", line_no, parsed.name_column);
    reactions.push_back(forward);
    if (parsed.reversible) {
      Reaction backward;
      backward.name = forward.name + "_rev";
      backward.reactants = forward.products;
      backward.products = forward.reactants;
      backward.reverse_of = forward.name;
      if (!names.insert(backward.name).second)
        throw ParseError("duplicate reaction name '" + backward.name + "'", line_no, parsed.name_column);
      reactions.push_back(std::move(backward));
    }
    if (end == text.size()) break;
  }
  return ReactionNetwork(std::move(species), std::move(reactions));
}

ReactionNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open network file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_network(buffer.str());
}

std::string to_text(const ReactionNetwork& net) {
  std::string out;
  const auto& rs = net.reactions();
  for (std::size_t j = 0; j < rs.size(); ++j) {
    const Reaction& r = rs[j];
    const bool paired = j + 1 < rs.size() && rs[j + 1].reverse_of == r.name &&
                        rs[j + 1].name == r.name + "_rev" && rs[j + 1].reactants == r.products &&
                        rs[j + 1].products == r.reactants;
    out += r.name + ": " + render_side(net, r.reactants);
    out += paired ? " <-> " : " -> ";
    out += render_side(net, r.products);
    out += "\n";
    if (paired) ++j;
  }
  return out;
}

nlohmann::json to_json(const ReactionNetwork& net) {
  nlohmann::json reactions = nlohmann::json::array();
  for (const auto& r : net.reactions()) {
    nlohmann::json jr = {{"name", r.name},
                         {"reactants", complex_to_json(net, r.reactants)},
                         {"products", complex_to_json(net, r.products)}};
    if (r.reverse_of) jr["reverse_of"] = *r.reverse_of;
    reactions.push_back(std::move(jr));
  }
  return {{"species", net.species()}, {"reactions", std::move(reactions)}};
}

ReactionNetwork network_from_json(const nlohmann::json& j) {
  std::vector<std::string> species = j.at("species").get<std::vector<std::string>>();
  std::map<std::string, std::size_t> index;
  for (std::size_t m = 0; m < species.size(); ++m) index[species[m]] = m;
  auto read_complex = [&](const nlohmann::json& jc) {
    Complex c;
    for (const auto& [name, value] : jc.items()) {
      auto it = index.find(name);
      if (it == index.end()) throw InvalidNetwork("unknown species '" + name + "' in JSON network");
      c[it->second] = parse_rational(value.get<std::string>());
    }
    return c;
  };
  std::vector<Reaction> reactions;
  for (const auto& jr : j.at("reactions")) {
    Reaction r;
    r.name = jr.at("name").get<std::string>();
    r.reactants = read_complex(jr.at("reactants"));
    r.products = read_complex(jr.at("products"));
    if (jr.contains("reverse_of")) r.reverse_of = jr.at("reverse_of").get<std::string>();
    reactions.push_back(std::move(r));
  }
  return ReactionNetwork(std::move(species), std::move(reactions));
}

RationalMatrix stoich_matrix(const ReactionNetwork& net) {
  RationalMatrix s = RationalMatrix::Zero(static_cast<Eigen::Index>(net.species_count()),
                                          static_cast<Eigen::Index>(net.reaction_count()));
  for (std::size_t j = 0; j < net.reaction_count(); ++j) {
    const Reaction& r = net.reaction(j);
    for (const auto& [m, c] : r.products) s(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) += c;
    for (const auto& [m, c] : r.reactants) s(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) -= c;
  }
  return s;
}

std::optional<RationalVector> minimal_positive_flux(const RationalMatrix& s,
                                                    const RationalVector& weights,
                                                    const std::vector<FluxBound>& extra) {
  // Substitute r = 1 + y with y >= 0.
  const Eigen::Index e = s.cols();
  const RationalVector ones = RationalVector::Constant(e, Rational(1));
  LinearProgram lp;
  lp.equality = s;
  lp.equality_rhs = -(s * ones);
  lp.inequality = RationalMatrix::Zero(static_cast<Eigen::Index>(extra.size()), e);
  lp.inequality_rhs = RationalVector::Zero(static_cast<Eigen::Index>(extra.size()));
  for (std::size_t k = 0; k < extra.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    lp.inequality.row(row) = extra[k].coefficients.transpose();
    lp.inequality_rhs(row) = extra[k].bound - extra[k].coefficients.dot(ones);
  }
  lp.objective = weights;
  auto y = minimize(lp);
  if (!y) return std::nullopt;
  return RationalVector(*y + ones);
}

RationalVector positive_right_kernel(const RationalMatrix& s) {
  auto r = minimal_positive_flux(s, RationalVector::Constant(s.cols(), Rational(1)));
  if (!r) throw Infeasible("the stoichiometric matrix has no positive right kernel vector");
  return *r;
}

}  // namespace crnsn
