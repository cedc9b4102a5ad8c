#include "crnsn/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "crnsn/linalg.hpp"

namespace crnsn {
namespace {

namespace fs = std::filesystem;

const char* kStages[] = {"analyze", "certify", "realize"};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Stage artifacts under <out>/cache/<stage>.json, each carrying the key it was
/// computed for and the hash of its payload.
class StageCache {
 public:
  explicit StageCache(const std::optional<std::string>& out) {
    if (out) dir_ = fs::path(*out) / "cache";
  }

  std::optional<nlohmann::json> load(const std::string& stage, const std::string& key) const {
    if (dir_.empty()) return std::nullopt;
    const fs::path file = dir_ / (stage + ".json");
    if (!fs::exists(file)) return std::nullopt;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(file.string()));
    } catch (const nlohmann::json::exception&) {
      throw TamperedArtifact("cached " + stage + " artifact is not valid JSON");
    }
    if (!j.is_object() || !j.contains("key") || !j.contains("payload") || !j.contains("sha256"))
      throw TamperedArtifact("cached " + stage + " artifact is incomplete");
    if (j.at("key") != key) return std::nullopt;  // stale: other input or config
    if (sha256_hex(j.at("payload").dump()) != j.at("sha256"))
      throw TamperedArtifact("cached " + stage + " artifact does not match its content hash");
    return j.at("payload");
  }

  void store(const std::string& stage, const std::string& key, const nlohmann::json& payload) const {
    if (dir_.empty()) return;
    fs::create_directories(dir_);
    const nlohmann::json j{{"schema_version", kSchemaVersion},
                           {"stage", stage},
                           {"key", key},
                           {"payload", payload},
                           {"sha256", sha256_hex(payload.dump())}};
    std::ofstream(dir_ / (stage + ".json")) << j.dump(1) << "\n";
  }

 private:
  fs::path dir_;
};

ChildSelection selection_from_json(const ReactionNetwork& net, const nlohmann::json& j) {
  return {assignment_from_json(net, j.at("assignment")), parse_rational(j.at("alpha").get<std::string>())};
}

nlohmann::json census_to_json(const ReactionNetwork& net, const SelectionCensus& c) {
  nlohmann::json nonzero = nlohmann::json::array();
  for (const auto& cs : c.nonzero) nonzero.push_back(to_json(net, cs));
  return {{"total", c.total}, {"good", c.good}, {"bad", c.bad}, {"zero", c.zero}, {"nonzero", nonzero}};
}

SelectionCensus census_from_json(const ReactionNetwork& net, const nlohmann::json& j) {
  SelectionCensus c;
  c.total = j.at("total").get<std::size_t>();
  c.good = j.at("good").get<std::size_t>();
  c.bad = j.at("bad").get<std::size_t>();
  c.zero = j.at("zero").get<std::size_t>();
  for (const auto& cs : j.at("nonzero")) c.nonzero.push_back(selection_from_json(net, cs));
  return c;
}

nlohmann::json pairs_to_json(const ReactionNetwork& net, const std::vector<std::pair<ChildSelection, ChildSelection>>& pairs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [g, b] : pairs)
    out.push_back({{"good", to_json(net, g)}, {"bad", to_json(net, b)}, {"distance", distance(g, b)}});
  return out;
}

Verdict verdict_from_string(const std::string& s) {
  for (Verdict v : {Verdict::SNCertified, Verdict::SingularOnlyNecessary, Verdict::NoSignSwitch,
                    Verdict::PermanentlySingular, Verdict::Infeasible})
    if (s == to_string(v)) return v;
  throw Error("unknown verdict '" + s + "'");
}

nlohmann::json analyze(const ReactionNetwork& net, std::size_t cap) {
  const RationalMatrix s = stoich_matrix(net);
  const bool feasible = minimal_positive_flux(s, RationalVector::Ones(s.cols()), {}).has_value();
  const SelectionCensus census = child_selection_census(net, cap);
  const auto pairs = find_opposite_sign_pairs_at_min_set_distance(census);
  Verdict verdict = Verdict::SingularOnlyNecessary;
  if (!feasible)
    verdict = Verdict::Infeasible;
  else if (census.nonzero.empty())
    verdict = Verdict::PermanentlySingular;
  else if (pairs.empty())
    verdict = Verdict::NoSignSwitch;
  return {{"feasible", feasible},
          {"census", census_to_json(net, census)},
          {"pairs", pairs_to_json(net, pairs)},
          {"verdict", to_string(verdict)}};
}

nlohmann::json certify(const ReactionNetwork& net, const std::vector<std::pair<ChildSelection, ChildSelection>>& pairs,
                       const AnalysisConfig& config) {
  std::vector<SNPairCertificate> certs;
  for (const auto& [g, b] : pairs)
    if (auto cert = certify_sn_pair(net, g, b)) certs.push_back(std::move(*cert));
  nlohmann::json certificates = nlohmann::json::array();
  for (const auto& c : certs) certificates.push_back(to_json(net, c));
  nlohmann::json attempts = nlohmann::json::array();
  nlohmann::json point = nullptr, chosen = nullptr;
  CertifyConfig cc;
  cc.epsilon = config.epsilon;
  cc.cap = config.cap;
  for (std::size_t i = 0; i < certs.size() && point.is_null(); ++i) {
    try {
      point = to_json(net, certify_simple_zero(net, certs[i], cc));
      chosen = i;
    } catch (const ScheduleExhausted& e) {
      for (const auto& a : e.attempts()) attempts.push_back("certificate " + std::to_string(i) + ": " + a);
    }
  }
  return {{"certificates", certificates}, {"chosen", chosen}, {"point", point}, {"attempts", attempts}};
}

nlohmann::json realize_stage(const ReactionNetwork& net, const PipelineReport& rep, const AnalysisConfig& config,
                             const std::optional<nlohmann::json>& supplied) {
  std::vector<std::string> notes;
  BifurcationRealization r;
  if (supplied) {
    const SuppliedKinetics k = supplied_kinetics_from_json(net, *supplied);
    RationalVector x = k.x_bar;
    if (!config.x_bar.empty()) {
      const RationalVector overrides = x_bar_from_overrides(net, config.x_bar);
      for (const auto& item : config.x_bar) {
        const auto m = *net.species_index(item.substr(0, item.find('=')));
        x(static_cast<Eigen::Index>(m)) = overrides(static_cast<Eigen::Index>(m));
      }
    }
    r = realize_from_params(net, k.kind, k.params, x, k.lambda);
    notes.push_back("kinetics supplied by parameter file");
  } else {
    if (!rep.point || !rep.chosen) throw Error("no certified simple zero to realize");
    const SNPairCertificate& cert = rep.certificates[*rep.chosen];
    RealizeConfig rc;
    rc.kind = config.kinetics;
    r = realize(net, cert, *rep.point, x_bar_from_overrides(net, config.x_bar), rc);
    if (!r.mm_check) {
      notes.push_back("pair distance " + std::to_string(cert.distance) +
                      ": nondegeneracy undecided structurally, decided by the numeric SN3");
    } else if (r.flux_perturbed) {
      notes.push_back("flux moved off the degenerate hyperplane to satisfy the nondegeneracy condition");
    } else if (!r.mm_check->nondegenerate) {
      notes.push_back("nondegeneracy condition fails on every feasible flux");
    }
    if (config.kinetics == KineticsKind::Hill) {
      const Vector<double> w = to_double(r.point.w);
      const Vector<double> v = to_double(r.point.v);
      const double sn3 = r.sn3_exact ? to_double(*r.sn3_exact)
                                     : HillKinetics<double>(net, r.params).contract(to_double(r.x_bar), w, v);
      r = nudge_c(net, r, sn3 / (w.norm() * v.squaredNorm()));
      if (r.nudged)
        notes.push_back("Hill exponent of " + lambda_name(net, r.lambda) + " set to " +
                        to_string(r.params.c_of({r.lambda.reaction, r.lambda.species})));
    }
  }
  return {{"realization", to_json(net, r)}, {"notes", notes}};
}

}  // namespace

const char* to_string(Command c) {
  switch (c) {
    case Command::Analyze: return "analyze";
    case Command::Certify: return "certify";
    case Command::Realize: return "realize";
    case Command::Verify: return "verify";
    case Command::Scan: return "scan";
    case Command::Pipeline: return "pipeline";
  }
  return "?";
}

Command command_from_string(const std::string& s) {
  for (Command c : {Command::Analyze, Command::Certify, Command::Realize, Command::Verify, Command::Scan, Command::Pipeline})
    if (s == to_string(c)) return c;
  throw Error("unknown command '" + s + "'");
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::SNCertified: return "SNCertified";
    case Verdict::SingularOnlyNecessary: return "SingularOnlyNecessary";
    case Verdict::NoSignSwitch: return "NoSignSwitch";
    case Verdict::PermanentlySingular: return "PermanentlySingular";
    case Verdict::Infeasible: return "Infeasible";
  }
  return "?";
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

int PipelineReport::exit_code() const {
  if (error) return error->exit_code;
  switch (verdict) {
    case Verdict::Infeasible: return 4;
    case Verdict::NoSignSwitch:
    case Verdict::PermanentlySingular: return 3;
    case Verdict::SingularOnlyNecessary: return command == Command::Analyze ? 0 : 3;
    case Verdict::SNCertified: break;
  }
  if (sn_report) {
    if (sn_report->verdict == SNVerdict::DegenerateSN3) return 2;
    if (sn_report->verdict == SNVerdict::Failed) return 1;
  }
  return 0;
}

PipelineReport run(const AnalysisConfig& config) {
  PipelineReport rep;
  rep.command = config.command;
  std::string stage = "parse";
  try {
    const std::string text = read_file(config.input);
    rep.network = parse_network(text);
    const ReactionNetwork& net = *rep.network;
    const StageCache cache(config.out_dir);
    std::optional<nlohmann::json> supplied;
    std::string supplied_text;
    if (config.params) {
      supplied_text = read_file(*config.params);
      supplied = nlohmann::json::parse(supplied_text);
    }

    // keys chain so a change upstream invalidates everything downstream
    const std::string analyze_key = sha256_hex(text + "\ncap=" + std::to_string(config.cap));
    const std::string certify_key =
        sha256_hex(analyze_key + "\nepsilon=" + (config.epsilon ? to_string(*config.epsilon) : std::string("schedule")));
    std::string realize_input = certify_key + "\nkinetics=" + to_string(config.kinetics) + "\nparams=" + supplied_text;
    for (const auto& x : config.x_bar) realize_input += "\nx=" + x;
    const std::string realize_key = sha256_hex(realize_input);

    auto staged = [&](const char* name, const std::string& key, auto compute) {
      if (auto hit = cache.load(name, key)) return *hit;
      nlohmann::json payload = compute();
      cache.store(name, key, payload);
      return payload;
    };

    stage = kStages[0];
    const nlohmann::json a = staged(kStages[0], analyze_key, [&] { return analyze(net, config.cap); });
    rep.census = census_from_json(net, a.at("census"));
    for (const auto& p : a.at("pairs"))
      rep.pairs.emplace_back(selection_from_json(net, p.at("good")), selection_from_json(net, p.at("bad")));
    rep.verdict = verdict_from_string(a.at("verdict").get<std::string>());
    if (config.command == Command::Analyze) return rep;

    if (rep.verdict == Verdict::SingularOnlyNecessary) {
      stage = kStages[1];
      const nlohmann::json c = staged(kStages[1], certify_key, [&] { return certify(net, rep.pairs, config); });
      for (const auto& cert : c.at("certificates")) rep.certificates.push_back(certificate_from_json(net, cert));
      if (!c.at("point").is_null()) {
        rep.chosen = c.at("chosen").get<std::size_t>();
        rep.point = simple_zero_from_json(net, c.at("point"));
        rep.verdict = Verdict::SNCertified;
      } else if (rep.certificates.empty()) {
        rep.notes.push_back("no opposite-sign pair has a Partial Child Selection witness");
      } else {
        rep.notes.push_back("epsilon schedule exhausted for every certificate");
        for (const auto& attempt : c.at("attempts")) rep.notes.push_back(attempt.get<std::string>());
      }
    }
    if (config.command == Command::Certify) return rep;
    if (rep.verdict != Verdict::SNCertified && !supplied) return rep;

    stage = kStages[2];
    const nlohmann::json r = staged(kStages[2], realize_key, [&] { return realize_stage(net, rep, config, supplied); });
    rep.realization = realization_from_json(net, r.at("realization"));
    for (const auto& n : r.at("notes")) rep.notes.push_back(n.get<std::string>());
    if (config.command == Command::Realize) return rep;

    stage = "verify";
    VerifyConfig vc;
    vc.window = config.window;
    vc.grid = config.grid;
    rep.sn_report = verify(net, *rep.realization, vc);
    if (config.command == Command::Verify) return rep;

    stage = "scan";
    if (rep.sn_report->verdict != SNVerdict::Nondegenerate) {
      rep.notes.push_back(std::string("fold scan skipped: SN verdict ") + to_string(rep.sn_report->verdict));
      return rep;
    }
    rep.scan = fold_scan(net, *rep.realization, *rep.sn_report, vc);
  } catch (const Infeasible& e) {
    rep.verdict = Verdict::Infeasible;
    rep.error = StageError{stage, e.what(), 4};
  } catch (const std::exception& e) {
    rep.error = StageError{stage, e.what(), 1};
  }
  return rep;
}

nlohmann::json to_json(const PipelineReport& rep, const AnalysisConfig& config) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = to_string(config.command);
  j["config"] = {{"input", fs::path(config.input).filename().string()},
                 {"kinetics", to_string(config.kinetics)},
                 {"x_bar", config.x_bar},
                 {"epsilon", config.epsilon ? nlohmann::json(to_string(*config.epsilon)) : nlohmann::json(nullptr)},
                 {"cap", config.cap},
                 {"window", config.window},
                 {"grid", config.grid},
                 {"params", config.params ? nlohmann::json(fs::path(*config.params).filename().string()) : nlohmann::json(nullptr)},
                 {"seed", config.seed}};
  if (rep.network) {
    const ReactionNetwork& net = *rep.network;
    std::vector<std::string> species, reactions;
    for (std::size_t m = 0; m < net.species_count(); ++m) species.push_back(net.species_name(m));
    for (std::size_t k = 0; k < net.reaction_count(); ++k) reactions.push_back(net.reaction(k).name);
    j["network"] = {{"species", species}, {"reactions", reactions}, {"stoichiometric_rank", rank_exact(stoich_matrix(net))}};
    j["census"] = rep.census ? census_to_json(net, *rep.census) : nlohmann::json(nullptr);
    j["pairs"] = pairs_to_json(net, rep.pairs);
    nlohmann::json certs = nlohmann::json::array();
    for (const auto& c : rep.certificates) certs.push_back(to_json(net, c));
    j["certificates"] = certs;
    j["chosen_certificate"] = rep.chosen ? nlohmann::json(*rep.chosen) : nlohmann::json(nullptr);
    j["point"] = rep.point ? to_json(net, *rep.point) : nlohmann::json(nullptr);
    j["realization"] = rep.realization ? to_json(net, *rep.realization) : nlohmann::json(nullptr);
  } else {
    j["network"] = nullptr;
  }
  j["sn_report"] = rep.sn_report ? to_json(*rep.sn_report) : nlohmann::json(nullptr);
  j["fold_scan"] = rep.scan ? to_json(*rep.scan) : nlohmann::json(nullptr);
  j["notes"] = rep.notes;
  j["error"] = rep.error ? nlohmann::json{{"stage", rep.error->stage}, {"message", rep.error->message}} : nlohmann::json(nullptr);
  j["verdict"] = to_string(rep.verdict);
  j["sn_verdict"] = rep.sn_report ? nlohmann::json(to_string(rep.sn_report->verdict)) : nlohmann::json(nullptr);
  j["exit_code"] = rep.exit_code();
  return j;
}

std::string to_text(const PipelineReport& rep) {
  std::ostringstream out;
  if (rep.network) {
    const ReactionNetwork& net = *rep.network;
    out << "network: " << net.species_count() << " species, " << net.reaction_count() << " reactions\n";
    if (rep.census)
      out << "child selections: " << rep.census->nonzero.size() << " nonzero (" << rep.census->good << " good, "
          << rep.census->bad << " bad), " << rep.census->zero << " zero\n";
    out << "opposite-sign pairs at minimal distance: " << rep.pairs.size() << "\n";
    if (rep.chosen) {
      const auto& c = rep.certificates[*rep.chosen];
      out << "certificate: distance " << c.distance << ", m* = " << net.species_name(c.m_star)
          << ", eta = " << net.reaction(c.eta).name << ", witness beta = " << to_string(c.witness_pcs.beta) << "\n";
    }
    if (rep.point)
      out << "simple zero: epsilon = " << to_string(rep.point->assignment.epsilon)
          << ", A = " << to_string(rep.point->adj_trace) << "\n";
    if (rep.realization) {
      const auto& r = *rep.realization;
      out << "realization: " << to_string(r.kind) << ", lambda = " << lambda_name(net, r.lambda)
          << ", lambda* = " << to_string(r.lambda_star);
      if (r.sn3_exact) out << ", SN3 exact = " << to_string(*r.sn3_exact);
      out << "\n";
    }
  }
  if (rep.sn_report) {
    const auto& s = *rep.sn_report;
    out << "SN1 " << (s.sn1.simple_zero ? "ok" : "fails") << " (kappa " << s.sn1.negative << "), SN2 = " << s.sn2_value
        << ", SN3 = " << s.sn3_value << ": " << to_string(s.verdict) << "\n";
  }
  if (rep.scan) {
    out << "fold scan counts:";
    for (int c : rep.scan->counts) out << ' ' << c;
    out << " (two equilibria " << rep.scan->two_equilibria_side << " lambda*)\n";
  }
  for (const auto& n : rep.notes) out << "note: " << n << "\n";
  if (rep.error) out << "error in " << rep.error->stage << ": " << rep.error->message << "\n";
  out << "verdict: " << to_string(rep.verdict) << "\n";
  return out.str();
}

}  // namespace crnsn
