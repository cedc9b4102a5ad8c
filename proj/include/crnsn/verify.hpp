#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "crnsn/kinetics.hpp"
#include "crnsn/network.hpp"
#include "crnsn/rational.hpp"

namespace crnsn {

struct VerifyConfig {
  double zero_eigenvalue = 1e-9;  // relative to ||G||
  double simplicity_gap = 1e-6;   // relative to ||G||
  double nonzero = 1e-9;          // SN2 / SN3, for unit w and v
  double newton_residual = 1e-10;
  double dedup_radius = 1e-6;     // relative to ||x_bar||
  double neighborhood = 4.0;      // equilibria kept within this * ||x_bar|| of x_bar
  double window = 0.1;
  std::size_t grid = 21;
  unsigned threads = 0;           // 0: hardware concurrency
};

enum class SNVerdict { Nondegenerate, DegenerateSN3, Failed };
const char* to_string(SNVerdict v);

struct SN1Result {
  bool simple_zero = false;
  std::vector<std::complex<double>> eigenvalues;  // ascending modulus
  double norm = 0;                                // Frobenius norm of G
  std::size_t negative = 0;                       // kappa
  std::size_t positive = 0;
  std::size_t zero = 0;
  std::string diagnostics;
};

struct SNReport {
  SN1Result sn1;
  double sn2_value = 0;
  double sn3_value = 0;
  bool sn2_nonzero = false;
  bool sn3_nonzero = false;
  double dfdlambda = 0;            // analytic d f_eta / d lambda at x_bar
  double equilibrium_residual = 0; // ||g(x_bar)||
  double jacobian_error = 0;       // max entrywise |G_num - G_exact| / max(1, |G_exact|)
  SNVerdict verdict = SNVerdict::Failed;
};

Matrix<double> numeric_jacobian(const ReactionNetwork& net, const HillParams& params, const Vector<double>& x);
double second_tensor_contract(const ReactionNetwork& net, const HillParams& params, const Vector<double>& x,
                              const Vector<double>& w, const Vector<double>& v);

SN1Result check_sn1(const Matrix<double>& g, const VerifyConfig& config = {});
/// <w, d_lambda g> at x_bar.
double check_sn2(const ReactionNetwork& net, const HillParams& params, const Vector<double>& x_bar,
                 const Vector<double>& w, const BifurcationParameter& lambda);
double check_sn3(const ReactionNetwork& net, const HillParams& params, const Vector<double>& x_bar,
                 const Vector<double>& w, const Vector<double>& v);

/// All three conditions, recomputed in floating point from the realized parameters.
SNReport verify(const ReactionNetwork& net, const BifurcationRealization& r, const VerifyConfig& config = {});

struct Equilibrium {
  Vector<double> x;
  double residual = 0;
};

struct FoldScan {
  std::vector<double> lambda_grid;
  std::vector<int> counts;  // -1 where the grid point is missing
  std::vector<std::vector<Equilibrium>> branches;
  double neighborhood = 0;  // radius relative to ||x_bar||
  std::size_t nearest = 0;  // grid index closest to lambda*
  /// Count change across lambda*, from the neighbours of `nearest`.
  std::optional<int> jump;
  bool parity_ok = false;
  std::string two_equilibria_side;  // "below", "above" or "none"
};

/// Damped Newton for g(x, lambda) = 0 from one guess; nullopt on failure.
std::optional<Equilibrium> solve_equilibrium(const HillKinetics<double>& k, const Vector<double>& guess,
                                             const VerifyConfig& config = {});

/// Distinct positive equilibria near x_bar for lambda on a grid around lambda*.
FoldScan fold_scan(const ReactionNetwork& net, const BifurcationRealization& r, const SNReport& report,
                   const VerifyConfig& config = {});

nlohmann::json to_json(const SNReport& report);
nlohmann::json to_json(const FoldScan& scan);
/// lambda,count,index,<species...>,residual; one row per equilibrium, one row for empty grid points.
std::string to_csv(const ReactionNetwork& net, const FoldScan& scan);

}  // namespace crnsn
