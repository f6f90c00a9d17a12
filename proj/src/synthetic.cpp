#include "napi/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include <json.hpp>

#include "napi/io.hpp"

namespace napi {

namespace {

Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = gauss(rng);
  return m;
}

/// Haar-ish random orthonormal columns: QR of a Gaussian matrix with the
/// sign ambiguity fixed by R's diagonal.
Matrix random_orthonormal(Index rows, Index cols, std::mt19937_64& rng) {
  Matrix g = gaussian_matrix(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  Matrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Index j = 0; j < cols; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

Vector sort_by_oracle_order(Vector lambda) {
  std::vector<Index> idx(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](Index i, Index j) {
    double ai = std::abs(lambda[i]), aj = std::abs(lambda[j]);
    if (ai != aj) return ai > aj;
    return lambda[i] > lambda[j];
  });
  Vector out(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) out[i] = lambda[idx[i]];
  return out;
}

}  // namespace

Vector SyntheticSpec::eigenvalues() const {
  if (spectrum.size() > 0) {
    if (d > 0 && spectrum.size() != d)
      throw config_error("SyntheticSpec: spectrum length disagrees with d");
    return sort_by_oracle_order(spectrum);
  }
  if (d < 2) throw config_error("SyntheticSpec: need d >= 2 for the spectrum triple");
  if (lambda1 == 0.0) throw config_error("SyntheticSpec: lambda1 must be nonzero");
  if (!(delta > 0.0 && delta < 1.0))
    throw config_error("SyntheticSpec: delta must lie in (0, 1)");
  if (!(decay > 0.0 && decay <= 1.0))
    throw config_error("SyntheticSpec: decay must lie in (0, 1]");
  Vector lambda(d);
  lambda[0] = lambda1;
  lambda[1] = lambda1 * (1.0 - delta);
  for (Index j = 2; j < d; ++j) lambda[j] = decay * lambda[j - 1];
  return lambda;
}

SyntheticPair gen_pair(const SyntheticSpec& spec) {
  Vector lambda = spec.eigenvalues();
  const Index d = lambda.size();
  if (spec.kappa_b < 1.0) throw config_error("SyntheticSpec: kappa_b must be >= 1");
  if (spec.spectrum.size() == 0 &&
      !(std::abs(lambda[0]) > std::abs(lambda[1]) * (1.0 + 1e-12)))
    throw config_error("SyntheticSpec: requested gap is not realizable");

  std::mt19937_64 rng(spec.seed);
  Matrix qb = random_orthonormal(d, d, rng);
  Vector db(d);
  for (Index i = 0; i < d; ++i)
    db[i] = d > 1 ? std::pow(spec.kappa_b, static_cast<double>(d - 1 - i) /
                                               static_cast<double>(d - 1))
                  : 1.0;
  Matrix b = qb * db.asDiagonal() * qb.transpose();
  b = 0.5 * (b + b.transpose()).eval();
  Matrix sqrt_b = qb * db.cwiseSqrt().asDiagonal() * qb.transpose();
  Matrix invsqrt_b = qb * db.cwiseSqrt().cwiseInverse().asDiagonal() * qb.transpose();

  Matrix p = random_orthonormal(d, d, rng);
  Matrix a = sqrt_b * p * lambda.asDiagonal() * p.transpose() * sqrt_b;
  a = 0.5 * (a + a.transpose()).eval();

  SpectrumOracle oracle;
  oracle.eigenvalues = lambda;
  oracle.eigenvectors = invsqrt_b * p;
  return SyntheticPair{
      GeneralizedPair{SymOperator::from_dense(std::move(a)), SymOperator::from_dense(std::move(b))},
      std::move(oracle)};
}

PairedViews gen_views(const SyntheticViewsSpec& spec) {
  const Index n = spec.n, d1 = spec.d1, d2 = spec.d2;
  const Index k = spec.correlations.size();
  if (n < d1 + d2) throw config_error("SyntheticViewsSpec: need n >= d1 + d2");
  if (d1 < 1 || d2 < 1) throw config_error("SyntheticViewsSpec: empty view");
  if (k > std::min(d1, d2))
    throw config_error("SyntheticViewsSpec: more correlations than directions");
  for (Index j = 0; j < k; ++j) {
    if (!(spec.correlations[j] > 0.0 && spec.correlations[j] <= 1.0))
      throw config_error("SyntheticViewsSpec: correlations must lie in (0, 1]");
    if (j > 0 && spec.correlations[j] > spec.correlations[j - 1])
      throw config_error("SyntheticViewsSpec: correlations must be descending");
  }
  if (spec.condition < 1.0) throw config_error("SyntheticViewsSpec: condition must be >= 1");

  std::mt19937_64 rng(spec.seed);
  Matrix q = random_orthonormal(n, d1 + d2, rng);
  Matrix u = q.leftCols(d1);
  Matrix v(n, d2);
  for (Index j = 0; j < d2; ++j) {
    if (j < k) {
      double rho = spec.correlations[j];
      v.col(j) = rho * u.col(j) + std::sqrt(1.0 - rho * rho) * q.col(d1 + j);
    } else {
      v.col(j) = q.col(d1 + j);
    }
  }
  // invertible diagonal per-view scalings leave the canonical correlations
  // untouched while setting the covariance condition number
  auto scaling = [&](Index d) {
    Vector c(d);
    for (Index j = 0; j < d; ++j)
      c[j] = d > 1 ? std::pow(spec.condition, -0.5 * static_cast<double>(j) /
                                                  static_cast<double>(d - 1))
                   : 1.0;
    return c;
  };
  const double root_n = std::sqrt(static_cast<double>(n));
  PairedViews views;
  views.x = root_n * u * scaling(d1).asDiagonal();
  views.y = root_n * v * scaling(d2).asDiagonal();
  views.gamma1 = spec.gamma1;
  views.gamma2 = spec.gamma2;
  return views;
}

std::pair<Vector, ConvergenceTrace> power_baseline(const GeneralizedPair& pair, NapiConfig cfg,
                                                   const Vector& x0) {
  cfg.beta = 0.0;
  cfg.power_baseline_schedule = true;
  return napi_top1(pair, cfg, x0);
}

RunSummary run_experiment(const RunConfig& cfg) {
  if (cfg.repetitions < 1) throw config_error("RunConfig: repetitions must be >= 1");
  if (cfg.algorithm != "napi" && cfg.algorithm != "power")
    throw config_error("RunConfig: unknown algorithm " + cfg.algorithm);

  SyntheticPair sp = gen_pair(cfg.problem);
  std::filesystem::create_directories(cfg.output_dir);

  const Index nthr = static_cast<Index>(cfg.thresholds.size());
  std::vector<std::vector<double>> passes_to(nthr);
  RunSummary summary;

  for (Index rep = 0; rep < cfg.repetitions; ++rep) {
    NapiConfig run = cfg.napi;
    run.seed = cfg.napi.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(rep + 1));
    run.oracle = &sp.oracle;
    if (cfg.algorithm == "power") {
      run.beta = 0.0;
      run.power_baseline_schedule = true;
    }
    std::mt19937_64 rng(run.seed);
    ConvergenceTrace trace;
    std::string error;
    try {
      if (run.k > 1) {
        Matrix x0 = gaussian_matrix(sp.pair.dim(), run.k, rng);
        trace = napi_topk(sp.pair, run, x0).second;
      } else {
        Vector x0 = gaussian_matrix(sp.pair.dim(), 1, rng);
        trace = napi_top1(sp.pair, run, x0).second;
      }
    } catch (const std::exception& e) {
      error = e.what();
    }
    summary.run_errors.push_back(error);
    double final_sin = -1.0;
    if (!trace.rows.empty()) final_sin = trace.rows.back().sin_theta;
    summary.final_sin.push_back(final_sin);
    for (Index i = 0; i < nthr; ++i) {
      double p = std::numeric_limits<double>::infinity();
      for (const TraceRow& row : trace.rows) {
        if (row.sin_theta >= 0.0 && row.sin_theta <= cfg.thresholds[i]) {
          p = row.passes;
          break;
        }
      }
      if (error.empty()) passes_to[i].push_back(p);
    }

    char name[32];
    std::snprintf(name, sizeof(name), "trace_%03lld.csv", static_cast<long long>(rep));
    write_trace_csv((std::filesystem::path(cfg.output_dir) / name).string(), trace,
                    /*include_wall=*/false);
  }

  for (Index i = 0; i < nthr; ++i) {
    auto& v = passes_to[i];
    double med = -1.0;
    if (!v.empty()) {
      std::sort(v.begin(), v.end());
      med = v.size() % 2 ? v[v.size() / 2]
                         : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
      if (!std::isfinite(med)) med = -1.0;
    }
    summary.median_passes.push_back(med);
  }

  nlohmann::json j;
  j["algorithm"] = cfg.algorithm;
  j["d"] = sp.pair.dim();
  j["k"] = cfg.napi.k;
  j["repetitions"] = cfg.repetitions;
  j["thresholds"] = cfg.thresholds;
  j["median_passes_to_threshold"] = summary.median_passes;
  j["final_sin_theta"] = summary.final_sin;
  j["run_errors"] = summary.run_errors;
  std::ofstream out(std::filesystem::path(cfg.output_dir) / "summary.json");
  if (!out) throw config_error("cannot write summary.json under " + cfg.output_dir);
  out << j.dump(2) << '\n';
  return summary;
}

}  // namespace napi
