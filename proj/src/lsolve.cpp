#include "napi/lsolve.hpp"

#include <cmath>
#include <random>

#include "napi/bgeom.hpp"

namespace napi {

const char* to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Exact: return "exact";
    case SolverKind::GradientDescent: return "gd";
    case SolverKind::Nesterov: return "nesterov";
    case SolverKind::Svrg: return "svrg";
    case SolverKind::AcceleratedSvrg: return "asvrg";
  }
  return "?";
}

SolverKind solver_kind_from_string(const std::string& name) {
  if (name == "exact") return SolverKind::Exact;
  if (name == "gd") return SolverKind::GradientDescent;
  if (name == "nesterov") return SolverKind::Nesterov;
  if (name == "svrg") return SolverKind::Svrg;
  if (name == "asvrg") return SolverKind::AcceleratedSvrg;
  throw config_error("unknown solver kind: " + name);
}

void LsProblem::check() const {
  if (!b) throw config_error("LsProblem: missing operator");
  if (rhs.rows() != b->dim()) throw contract_error("LsProblem: rhs dimension mismatch");
  if (x0.rows() != rhs.rows() || x0.cols() != rhs.cols())
    throw contract_error("LsProblem: x0 shape mismatch");
  if (finite_sum && finite_sum->factors.cols() != b->dim())
    throw contract_error("LsProblem: finite-sum factor width mismatch");
}

double LsProblem::objective(const Matrix& w) const {
  Matrix bw = b->apply_mat(w);
  return 0.5 * (w.array() * bw.array()).sum() - (w.array() * rhs.array()).sum();
}

Matrix LsProblem::gradient(const Matrix& w) const { return b->apply_mat(w) - rhs; }

std::pair<double, double> spectral_bounds(const LsProblem& prob) {
  const SymOperator& b = *prob.b;
  if (b.has_dense()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(b.dense(), Eigen::EigenvaluesOnly);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
  }
  // power iteration on B, then on (lmax I - B); widened by 10% each way
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> gauss;
  auto power = [&](auto&& apply) {
    Vector v(b.dim());
    for (Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
    v.normalize();
    double ev = 0.0;
    for (int it = 0; it < 200; ++it) {
      Vector w = apply(v);
      ev = v.dot(w);
      double n = w.norm();
      if (n == 0.0) break;
      v = w / n;
    }
    return ev;
  };
  double lmax = power([&](const Vector& v) { return b.apply(v); });
  double shift = 1.1 * std::abs(lmax);
  double nu = power([&](const Vector& v) { return (shift * v - b.apply(v)).eval(); });
  double lmin = shift - nu;
  if (lmin <= 0.0) throw definiteness_error("spectral_bounds: estimated lambda_min <= 0");
  return {0.9 * lmin, 1.1 * lmax};
}

double residual(const Matrix& w, const LsProblem& prob, const Matrix* oracle_solution,
                double lambda_min) {
  prob.check();
  if (w.rows() != prob.dim() || w.cols() != prob.width())
    throw contract_error("residual: iterate shape mismatch");
  if (oracle_solution) {
    Matrix diff = w - *oracle_solution;
    return (diff.array() * prob.b->apply_mat(diff).array()).sum();
  }
  if (lambda_min <= 0.0)
    throw config_error("residual: surrogate bound needs a positive lambda_min estimate");
  return prob.gradient(w).squaredNorm() / lambda_min;
}

namespace {

struct Certificate {
  double lmin, lmax, tau;
  double g0_sq;  // ||grad f(x0)||_F^2
  // Certified bound on r(w)/r(x0) from gradient norms only:
  //   r(w) <= ||g(w)||^2 / lmin  and  r(x0) >= ||g(x0)||^2 / lmax.
  double ratio(double g_sq) const { return (g_sq / lmin) / (g0_sq / lmax); }
  bool done(double g_sq) const { return ratio(g_sq) <= tau; }
};

LsReport finish(Matrix w, double passes, double ratio, std::int64_t iters) {
  return LsReport{std::move(w), passes, ratio, iters};
}

LsReport solve_gd(const LsProblem& prob, const SolverOptions& opts, const Certificate& cert,
                  bool nesterov) {
  const double eta = opts.step_size > 0.0 ? opts.step_size : 1.0 / cert.lmax;
  const double kappa = cert.lmax / cert.lmin;
  const double theta = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);
  Matrix w = prob.x0, y = prob.x0;
  double passes = 0.0;
  std::int64_t it = 0;
  double best_ratio = cert.ratio(cert.g0_sq);
  while (it < opts.max_component_steps) {
    if (nesterov) {
      Matrix g_y = prob.gradient(y);
      Matrix w_next = y - eta * g_y;
      Matrix g_w = prob.gradient(w_next);
      passes += 2.0;
      ++it;
      y = w_next + theta * (w_next - w);
      w = std::move(w_next);
      double ratio = cert.ratio(g_w.squaredNorm());
      best_ratio = std::min(best_ratio, ratio);
      if (ratio <= cert.tau) return finish(std::move(w), passes, ratio, it);
    } else {
      Matrix g = prob.gradient(w);
      passes += 1.0;
      double ratio = cert.ratio(g.squaredNorm());
      best_ratio = std::min(best_ratio, ratio);
      if (ratio <= cert.tau) return finish(std::move(w), passes, ratio, it);
      w -= eta * g;
      ++it;
    }
  }
  throw nonconvergence_error("lsolve: iteration cap exceeded before certificate", w, best_ratio);
}

LsReport solve_svrg(const LsProblem& prob, const SolverOptions& opts, const Certificate& cert,
                    bool accelerated) {
  if (!prob.finite_sum)
    throw config_error("lsolve: SVRG kinds require finite-sum structure");
  const Matrix& x = prob.finite_sum->factors;
  const bool diag_ridge = prob.finite_sum->ridge_diag.size() > 0;
  const double ridge = prob.finite_sum->ridge;
  const Vector& ridge_d = prob.finite_sum->ridge_diag;
  const double ridge_max = diag_ridge ? ridge_d.maxCoeff() : ridge;
  const Index n = x.rows();
  const double row_max = x.rowwise().squaredNorm().maxCoeff();
  const double eta = opts.step_size > 0.0 ? opts.step_size : 1.0 / (row_max + ridge_max);
  const Index m = opts.epoch_length > 0 ? opts.epoch_length : 2 * n;
  const double kt = (row_max + ridge_max) / cert.lmin;
  const double theta = (std::sqrt(kt) - 1.0) / (std::sqrt(kt) + 1.0);

  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<Index> pick(0, n - 1);

  Matrix w = prob.x0, w_prev = prob.x0, y = prob.x0;
  double passes = 0.0;
  std::int64_t steps = 0;
  double best_ratio = cert.ratio(cert.g0_sq);
  Matrix best = w;
  while (steps < opts.max_component_steps) {
    const Matrix& snap = accelerated ? y : w;
    Matrix g_snap = prob.gradient(snap);
    passes += 1.0;
    {
      Matrix g_cur = accelerated ? prob.gradient(w) : g_snap;
      if (accelerated) passes += 1.0;
      double ratio = cert.ratio(g_cur.squaredNorm());
      if (ratio < best_ratio) { best_ratio = ratio; best = w; }
      if (ratio <= cert.tau) return finish(std::move(w), passes, ratio, steps);
    }
    Matrix z = snap;
    for (Index s = 0; s < m && steps < opts.max_component_steps; ++s, ++steps) {
      Index i = pick(rng);
      // grad f_i(z) - grad f_i(snap) + g_snap with
      // f_i(w) = 1/2 w^T (x_i x_i^T + ridge I) w - w^T rhs
      auto xi = x.row(i);
      Matrix dz = z - snap;
      Matrix dg = xi.transpose() * (xi * dz);
      if (diag_ridge)
        dg.array() += dz.array().colwise() * ridge_d.array();
      else
        dg += ridge * dz;
      z -= eta * (dg + g_snap);
    }
    passes += static_cast<double>(m) / static_cast<double>(n);
    if (accelerated) {
      w_prev = w;
      w = z;
      y = w + theta * (w - w_prev);
    } else {
      w = std::move(z);
    }
  }
  throw nonconvergence_error("lsolve: component-step cap exceeded before certificate", best,
                             best_ratio);
}

}  // namespace

LsReport solve(const LsProblem& prob, double tau, const SolverOptions& opts) {
  prob.check();
  if (!(tau > 0.0 && tau <= 1.0)) throw config_error("lsolve: tau must lie in (0, 1]");

  if (opts.kind == SolverKind::Exact) {
    Matrix w = prob.b->llt().solve(prob.rhs);
    return finish(std::move(w), 1.0, 0.0, 0);
  }

  double lmin = opts.lambda_min, lmax = opts.lambda_max;
  if (lmin <= 0.0 || lmax <= 0.0) {
    auto [lo, hi] = spectral_bounds(prob);
    if (lmin <= 0.0) lmin = lo;
    if (lmax <= 0.0) lmax = hi;
  }
  double g0_sq = prob.gradient(prob.x0).squaredNorm();
  double rhs_scale = prob.rhs.squaredNorm() + 1.0;
  if (g0_sq <= 1e-28 * rhs_scale)
    return finish(prob.x0, 0.0, 0.0, 0);  // warm start already optimal
  Certificate cert{lmin, lmax, tau, g0_sq};

  switch (opts.kind) {
    case SolverKind::GradientDescent: return solve_gd(prob, opts, cert, false);
    case SolverKind::Nesterov: return solve_gd(prob, opts, cert, true);
    case SolverKind::Svrg: return solve_svrg(prob, opts, cert, false);
    case SolverKind::AcceleratedSvrg: return solve_svrg(prob, opts, cert, true);
    default: throw config_error("lsolve: unsupported solver kind");
  }
}

std::pair<double, std::optional<double>> condition_numbers(const LsProblem& prob) {
  prob.check();
  auto [lmin, lmax] = spectral_bounds(prob);
  std::optional<double> kt;
  if (prob.finite_sum)
    kt = prob.finite_sum->factors.rowwise().squaredNorm().maxCoeff() / lmin;
  return {lmax / lmin, kt};
}

}  // namespace napi
