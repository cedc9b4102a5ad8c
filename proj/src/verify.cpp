#include "crnsn/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace crnsn {
namespace {

Matrix<double> to_double_matrix(const RationalMatrix& m) {
  Matrix<double> out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = to_double(m(i, j));
  return out;
}

bool positive(const Vector<double>& x) { return (x.array() > 0).all() && x.allFinite(); }

nlohmann::json vector_json(const Vector<double>& x) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) j.push_back(x(i));
  return j;
}

std::vector<Vector<double>> star_guesses(const Vector<double>& x_bar, const Vector<double>& v, double sn2, double sn3,
                                         double mu) {
  std::vector<Vector<double>> guesses{x_bar};
  const double scale = x_bar.norm();
  const Vector<double> unit = v / v.norm();
  for (double delta : {0.01, 0.05, 0.1})
    for (double sign : {1.0, -1.0}) guesses.push_back(x_bar + sign * delta * scale * unit);
  for (double reach : {0.5, 1.0, 2.0, 3.0})
    for (double sign : {1.0, -1.0}) guesses.push_back(x_bar + sign * reach * scale * unit);
  // normal form: mu <w, d_lambda g> + t^2 / 2 w' D^2 g[v, v] = 0 along x_bar + t v
  if (sn3 != 0) {
    const double t2 = -2 * mu * sn2 / sn3;
    if (t2 > 0)
      for (double factor : {0.5, 1.0, 2.0, 4.0})
        for (double sign : {1.0, -1.0}) guesses.push_back(x_bar + sign * factor * std::sqrt(t2) * v);
  }
  std::erase_if(guesses, [](const Vector<double>& g) { return !positive(g); });
  return guesses;
}

}  // namespace

const char* to_string(SNVerdict v) {
  switch (v) {
    case SNVerdict::Nondegenerate: return "Nondegenerate";
    case SNVerdict::DegenerateSN3: return "DegenerateSN3";
    case SNVerdict::Failed: return "Failed";
  }
  return "?";
}

Matrix<double> numeric_jacobian(const ReactionNetwork& net, const HillParams& params, const Vector<double>& x) {
  return HillKinetics<double>(net, params).jacobian(x);
}

double second_tensor_contract(const ReactionNetwork& net, const HillParams& params, const Vector<double>& x,
                              const Vector<double>& w, const Vector<double>& v) {
  return HillKinetics<double>(net, params).contract(x, w, v);
}

SN1Result check_sn1(const Matrix<double>& g, const VerifyConfig& config) {
  SN1Result out;
  out.norm = g.norm();
  Eigen::EigenSolver<Matrix<double>> solver(g, false);
  if (solver.info() != Eigen::Success) {
    out.diagnostics = "eigenvalue iteration did not converge";
    return out;
  }
  const auto values = solver.eigenvalues();
  out.eigenvalues.assign(values.data(), values.data() + values.size());
  std::stable_sort(out.eigenvalues.begin(), out.eigenvalues.end(),
                   [](const auto& a, const auto& b) { return std::abs(a) < std::abs(b); });
  const double zero_tol = config.zero_eigenvalue * out.norm;
  for (const auto& e : out.eigenvalues) {
    if (std::abs(e) < zero_tol)
      ++out.zero;
    else if (e.real() < 0)
      ++out.negative;
    else if (e.real() > 0)
      ++out.positive;
  }
  if (out.eigenvalues.empty() || std::abs(out.eigenvalues[0]) >= zero_tol) {
    out.diagnostics = "no eigenvalue below the zero threshold";
    return out;
  }
  if (out.eigenvalues.size() > 1 && std::abs(out.eigenvalues[1]) <= config.simplicity_gap * out.norm) {
    out.diagnostics = "second smallest eigenvalue inside the simplicity gap";
    return out;
  }
  if (out.zero + out.negative + out.positive != out.eigenvalues.size()) {
    out.diagnostics = "purely imaginary eigenvalue";
    return out;
  }
  out.simple_zero = true;
  return out;
}

double check_sn2(const ReactionNetwork& net, const HillParams& params, const Vector<double>& x_bar,
                 const Vector<double>& w, const BifurcationParameter& lambda) {
  return w.dot(HillKinetics<double>(net, params).field_d_lambda(lambda, x_bar));
}

double check_sn3(const ReactionNetwork& net, const HillParams& params, const Vector<double>& x_bar,
                 const Vector<double>& w, const Vector<double>& v) {
  return second_tensor_contract(net, params, x_bar, w, v);
}

SNReport verify(const ReactionNetwork& net, const BifurcationRealization& r, const VerifyConfig& config) {
  SNReport out;
  const HillKinetics<double> k(net, r.params);
  const Vector<double> x = to_double(r.x_bar);
  const Vector<double> w = to_double(r.point.w);
  const Vector<double> v = to_double(r.point.v);

  const Matrix<double> g = k.jacobian(x);
  const Matrix<double> exact = to_double_matrix(r.point.jacobian);
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      out.jacobian_error = std::max(out.jacobian_error, std::abs(g(i, j) - exact(i, j)) / std::max(1.0, std::abs(exact(i, j))));
  out.equilibrium_residual = k.field(x).norm();

  out.sn1 = check_sn1(g, config);
  out.dfdlambda = k.d_lambda(r.lambda, r.lambda.reaction, x);
  out.sn2_value = w.dot(k.field_d_lambda(r.lambda, x));
  out.sn3_value = k.contract(x, w, v);
  out.sn2_nonzero = std::abs(out.sn2_value) / w.norm() > config.nonzero;
  out.sn3_nonzero = std::abs(out.sn3_value) / (w.norm() * v.squaredNorm()) > config.nonzero;

  if (!out.sn1.simple_zero || !out.sn2_nonzero)
    out.verdict = SNVerdict::Failed;
  else if (!out.sn3_nonzero)
    out.verdict = SNVerdict::DegenerateSN3;
  else
    out.verdict = SNVerdict::Nondegenerate;
  return out;
}

std::optional<Equilibrium> solve_equilibrium(const HillKinetics<double>& k, const Vector<double>& guess,
                                             const VerifyConfig& config) {
  Vector<double> x = guess;
  Vector<double> g = k.field(x);
  double residual = g.norm();
  for (int iter = 0; iter < 200; ++iter) {
    if (!std::isfinite(residual)) return std::nullopt;
    if (residual < config.newton_residual) break;
    const Vector<double> step = k.jacobian(x).fullPivLu().solve(-g);
    if (!step.allFinite()) return std::nullopt;
    double t = 1;
    bool accepted = false;
    for (int halving = 0; halving <= 50; ++halving, t /= 2) {
      const Vector<double> candidate = x + t * step;
      if (!positive(candidate)) continue;
      const Vector<double> gc = k.field(candidate);
      const double rc = gc.norm();
      if (rc < residual) {
        x = candidate;
        g = gc;
        residual = rc;
        accepted = true;
        break;
      }
    }
    if (!accepted) return std::nullopt;
  }
  if (!(residual < config.newton_residual)) return std::nullopt;
  // polish: near a fold the root error is about sqrt(residual)
  for (int iter = 0; iter < 20 && residual > 0; ++iter) {
    const Vector<double> candidate = x + k.jacobian(x).fullPivLu().solve(-g);
    if (!positive(candidate)) break;
    const Vector<double> gc = k.field(candidate);
    if (!(gc.norm() < residual)) break;
    x = candidate;
    g = gc;
    residual = gc.norm();
  }
  return Equilibrium{x, residual};
}

FoldScan fold_scan(const ReactionNetwork& net, const BifurcationRealization& r, const SNReport& report,
                   const VerifyConfig& config) {
  FoldScan out;
  const double lambda_star = to_double(r.lambda_star);
  const std::size_t n = std::max<std::size_t>(config.grid, 2);
  const double lo = lambda_star * (1 - config.window);
  const double hi = lambda_star * (1 + config.window);
  for (std::size_t i = 0; i < n; ++i) out.lambda_grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.counts.assign(n, -1);
  out.neighborhood = config.neighborhood;
  out.branches.assign(n, {});

  const Vector<double> x_bar = to_double(r.x_bar);
  const Vector<double> v = to_double(r.point.v);
  const Vector<double> unit = v / v.norm();
  const double scale = x_bar.norm();
  const HillKinetics<double> base(net, r.params);

  auto run = [&](std::size_t i) {
    const double lambda = out.lambda_grid[i];
    HillKinetics<double> k = base;
    k.set_parameter(r.lambda, lambda);
    std::vector<Equilibrium> found;
    bool any_clean = false;
    for (const auto& guess : star_guesses(x_bar, v, report.sn2_value, report.sn3_value, lambda - lambda_star)) {
      std::optional<Equilibrium> e;
      try {
        e = solve_equilibrium(k, guess, config);
        any_clean = true;
      } catch (const InvalidParameter&) {
        continue;
      }
      if (!e || (e->x - x_bar).norm() > config.neighborhood * scale) continue;
      // equilibria on (or numerically at) the boundary are not positive ones
      if (e->x.minCoeff() <= config.dedup_radius * scale) continue;
      const bool duplicate = std::any_of(found.begin(), found.end(), [&](const Equilibrium& f) {
        return (f.x - e->x).norm() <= config.dedup_radius * scale;
      });
      if (!duplicate) found.push_back(std::move(*e));
    }
    std::sort(found.begin(), found.end(),
              [&](const Equilibrium& a, const Equilibrium& b) { return a.x.dot(unit) < b.x.dot(unit); });
    if (any_clean) out.counts[i] = static_cast<int>(found.size());
    out.branches[i] = std::move(found);
  };

  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) run(i);
    });
  for (auto& t : pool) t.join();

  out.nearest = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(out.lambda_grid[i] - lambda_star) < std::abs(out.lambda_grid[out.nearest] - lambda_star)) out.nearest = i;
  out.two_equilibria_side = "none";
  if (out.nearest > 0 && out.nearest + 1 < n) {
    const int below = out.counts[out.nearest - 1];
    const int above = out.counts[out.nearest + 1];
    if (below >= 0 && above >= 0) {
      out.jump = above - below;
      out.parity_ok = std::abs(*out.jump) == 2;
      if (below > above) out.two_equilibria_side = "below";
      if (above > below) out.two_equilibria_side = "above";
    }
  }
  return out;
}

nlohmann::json to_json(const SNReport& report) {
  nlohmann::json eig = nlohmann::json::array();
  for (const auto& e : report.sn1.eigenvalues) eig.push_back({e.real(), e.imag()});
  return {{"eigenvalues", eig},
          {"jacobian_norm", report.sn1.norm},
          {"zero_multiplicity_check", report.sn1.simple_zero},
          {"eigen_signature", {{"negative", report.sn1.negative}, {"positive", report.sn1.positive}, {"zero", report.sn1.zero}}},
          {"sn1_diagnostics", report.sn1.diagnostics},
          {"sn2_value", report.sn2_value},
          {"sn2_nonzero", report.sn2_nonzero},
          {"dfdlambda", report.dfdlambda},
          {"sn3_value", report.sn3_value},
          {"sn3_nonzero", report.sn3_nonzero},
          {"equilibrium_residual", report.equilibrium_residual},
          {"jacobian_error", report.jacobian_error},
          {"verdict", to_string(report.verdict)}};
}

nlohmann::json to_json(const FoldScan& scan) {
  nlohmann::json branches = nlohmann::json::array();
  for (const auto& b : scan.branches) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& e : b) row.push_back({{"x", vector_json(e.x)}, {"residual", e.residual}});
    branches.push_back(row);
  }
  return {{"lambda_grid", scan.lambda_grid},
          {"neighborhood", scan.neighborhood},
          {"equilibria_counts", scan.counts},
          {"branches", branches},
          {"nearest", scan.nearest},
          {"jump", scan.jump ? nlohmann::json(*scan.jump) : nlohmann::json(nullptr)},
          {"parity_ok", scan.parity_ok},
          {"two_equilibria_side", scan.two_equilibria_side}};
}

std::string to_csv(const ReactionNetwork& net, const FoldScan& scan) {
  std::ostringstream out;
  out.precision(17);
  out << "lambda,count,index";
  for (std::size_t m = 0; m < net.species_count(); ++m) out << ',' << net.species_name(m);
  out << ",residual\n";
  for (std::size_t i = 0; i < scan.lambda_grid.size(); ++i) {
    if (scan.branches[i].empty()) {
      out << scan.lambda_grid[i] << ',' << scan.counts[i] << ",";
      for (std::size_t m = 0; m < net.species_count(); ++m) out << ',';
      out << "\n";
      continue;
    }
    for (std::size_t e = 0; e < scan.branches[i].size(); ++e) {
      out << scan.lambda_grid[i] << ',' << scan.counts[i] << ',' << e;
      for (Eigen::Index m = 0; m < scan.branches[i][e].x.size(); ++m) out << ',' << scan.branches[i][e].x(m);
      out << ',' << scan.branches[i][e].residual << "\n";
    }
  }
  return out.str();
}

}  // namespace crnsn
