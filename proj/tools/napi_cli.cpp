#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "napi/io.hpp"
#include "napi/synthetic.hpp"

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw napi::config_error("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw napi::config_error(std::string("bad config JSON: ") + e.what());
  }
}

napi::SolverOptions solver_from_json(const json& j) {
  napi::SolverOptions opts;
  if (j.contains("kind")) opts.kind = napi::solver_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("step_size")) opts.step_size = j.at("step_size").get<double>();
  if (j.contains("epoch_length")) opts.epoch_length = j.at("epoch_length").get<napi::Index>();
  if (j.contains("seed")) opts.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("lambda_min")) opts.lambda_min = j.at("lambda_min").get<double>();
  if (j.contains("lambda_max")) opts.lambda_max = j.at("lambda_max").get<double>();
  if (j.contains("max_component_steps"))
    opts.max_component_steps = j.at("max_component_steps").get<std::int64_t>();
  return opts;
}

void napi_config_from_json(const json& j, napi::NapiConfig& cfg) {
  if (j.contains("beta")) cfg.beta = j.at("beta").get<double>();
  if (j.contains("k")) cfg.k = j.at("k").get<napi::Index>();
  if (j.contains("max_outer")) cfg.max_outer = j.at("max_outer").get<napi::Index>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("oracle_coupled")) cfg.oracle_coupled = j.at("oracle_coupled").get<bool>();
  if (j.contains("delta_hat")) cfg.schedule.delta_hat = j.at("delta_hat").get<double>();
  if (j.contains("cos_theta0_hat"))
    cfg.schedule.cos_theta0_hat = j.at("cos_theta0_hat").get<double>();
  if (j.contains("gamma_ratio_hat"))
    cfg.schedule.gamma_ratio_hat = j.at("gamma_ratio_hat").get<double>();
  if (j.contains("phase_switch")) cfg.schedule.phase_switch = j.at("phase_switch").get<napi::Index>();
  if (j.contains("solver")) cfg.solver = solver_from_json(j.at("solver"));
}

napi::SyntheticSpec spec_from_json(const json& j) {
  napi::SyntheticSpec spec;
  if (j.contains("d")) spec.d = j.at("d").get<napi::Index>();
  if (j.contains("spectrum")) {
    auto vals = j.at("spectrum").get<std::vector<double>>();
    spec.spectrum = Eigen::Map<napi::Vector>(vals.data(), static_cast<napi::Index>(vals.size()));
  }
  if (j.contains("lambda1")) spec.lambda1 = j.at("lambda1").get<double>();
  if (j.contains("delta")) spec.delta = j.at("delta").get<double>();
  if (j.contains("decay")) spec.decay = j.at("decay").get<double>();
  if (j.contains("kappa_b")) spec.kappa_b = j.at("kappa_b").get<double>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  return spec;
}

napi::Matrix random_start(napi::Index d, napi::Index k, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5741525453545254ULL);
  std::normal_distribution<double> gauss;
  napi::Matrix x0(d, k);
  for (napi::Index j = 0; j < k; ++j)
    for (napi::Index i = 0; i < d; ++i) x0(i, j) = gauss(rng);
  return x0;
}

void write_matrix_auto(const std::string& path, const napi::Matrix& m) {
  auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "mtx" || ext == "mm")
    napi::write_matrix_market(path, m);
  else
    napi::write_csv_matrix(path, m);
}

struct GenParams {
  bool views = false;
  std::string out = ".";
  std::string format = "csv";
  std::string config;
  // pair
  napi::Index d = 0;
  std::vector<double> spectrum;
  double lambda1 = 1.0, delta = 0.1, decay = 0.9, kappa_b = 1.0;
  // views
  napi::Index n = 0, d1 = 0, d2 = 0;
  std::vector<double> correlations;
  double condition = 1.0, gamma1 = 0.0, gamma2 = 0.0;
  std::uint64_t seed = 0;
};

int cmd_gen(const GenParams& p) {
  fs::create_directories(p.out);
  std::string ext = "." + p.format;
  if (p.views) {
    napi::SyntheticViewsSpec spec;
    spec.n = p.n;
    spec.d1 = p.d1;
    spec.d2 = p.d2;
    spec.correlations = Eigen::Map<const napi::Vector>(
        p.correlations.data(), static_cast<napi::Index>(p.correlations.size()));
    spec.condition = p.condition;
    spec.gamma1 = p.gamma1;
    spec.gamma2 = p.gamma2;
    spec.seed = p.seed;
    napi::PairedViews views = napi::gen_views(spec);
    write_matrix_auto((fs::path(p.out) / ("x" + ext)).string(), views.x);
    write_matrix_auto((fs::path(p.out) / ("y" + ext)).string(), views.y);
    std::cout << "wrote x" << ext << ", y" << ext << " (n=" << spec.n << ", d1=" << spec.d1
              << ", d2=" << spec.d2 << ") under " << p.out << "\n";
    return 0;
  }
  napi::SyntheticSpec spec;
  if (!p.config.empty()) spec = spec_from_json(load_config_file(p.config));
  if (p.d > 0) spec.d = p.d;
  if (!p.spectrum.empty())
    spec.spectrum = Eigen::Map<const napi::Vector>(p.spectrum.data(),
                                                   static_cast<napi::Index>(p.spectrum.size()));
  if (p.config.empty()) {
    spec.lambda1 = p.lambda1;
    spec.delta = p.delta;
    spec.decay = p.decay;
    spec.kappa_b = p.kappa_b;
    spec.seed = p.seed;
  }
  napi::SyntheticPair sp = napi::gen_pair(spec);
  write_matrix_auto((fs::path(p.out) / ("a" + ext)).string(), sp.pair.a.dense());
  write_matrix_auto((fs::path(p.out) / ("b" + ext)).string(), sp.pair.b.dense());
  napi::write_csv_matrix((fs::path(p.out) / "spectrum.csv").string(),
                         sp.oracle.eigenvalues.transpose());
  std::cout << "wrote a" << ext << ", b" << ext << ", spectrum.csv (d=" << sp.pair.dim()
            << ") under " << p.out << "\n";
  return 0;
}

struct SolveParams {
  std::string a_path, b_path, config;
  std::string out = "w.csv";
  std::string trace;
  std::string beta_method = "user";
  double beta = -1.0;  // <0 -> from config / method
  napi::Index k = 0;   // 0 -> from config
  bool with_oracle = false;
};

int cmd_solve(const SolveParams& p) {
  napi::GeneralizedPair pair{napi::SymOperator::from_dense(napi::load_matrix(p.a_path)),
                             napi::SymOperator::from_dense(napi::load_matrix(p.b_path))};
  pair.check();

  napi::NapiConfig cfg;
  std::string method = p.beta_method;
  if (!p.config.empty()) {
    json j = load_config_file(p.config);
    napi_config_from_json(j, cfg);
    if (j.contains("beta_method")) method = j.at("beta_method").get<std::string>();
  }
  if (p.k > 0) cfg.k = p.k;
  if (p.beta >= 0.0) cfg.beta = p.beta;

  std::string warning;
  cfg.beta = napi::select_beta(pair, cfg.k, napi::beta_method_from_string(method), cfg.beta,
                               &warning);
  if (!warning.empty()) std::cerr << "warning: " << warning << "\n";

  napi::SpectrumOracle oracle;
  if (p.with_oracle || cfg.oracle_coupled) {
    oracle = napi::dense_oracle(pair);
    cfg.oracle = &oracle;
    double gap = oracle.gap(cfg.k);
    if (!(gap > 0.0))
      std::cerr << "warning: measured relative gap at k=" << cfg.k << " is " << gap
                << "; convergence is not guaranteed\n";
  }

  napi::Matrix x0 = random_start(pair.dim(), cfg.k, cfg.seed);
  napi::Matrix w;
  napi::ConvergenceTrace trace;
  double alpha = 0.0, passes = 0.0;
  if (cfg.k == 1) {
    auto [vec, tr] = napi::napi_top1(pair, cfg, x0.col(0));
    w = vec;
    trace = std::move(tr);
  } else {
    auto [basis, tr] = napi::napi_topk(pair, cfg, x0);
    w = basis.cols;
    trace = std::move(tr);
  }
  if (!trace.rows.empty()) {
    alpha = trace.rows.back().alpha;
    passes = trace.rows.back().passes;
  }
  napi::write_csv_matrix(p.out, w);
  if (!p.trace.empty()) napi::write_trace_csv(p.trace, trace);
  std::cout << "beta=" << cfg.beta << " iterations=" << trace.rows.size() << " passes=" << passes
            << " rayleigh=" << alpha << "\n";
  return 0;
}

struct CcaParams {
  std::string x_path, y_path, config;
  std::string out = ".";
  napi::Index k = 1;
  double gamma1 = 0.0, gamma2 = 0.0;
};

int cmd_cca(const CcaParams& p) {
  napi::PairedViews views;
  views.x = napi::load_matrix(p.x_path);
  views.y = napi::load_matrix(p.y_path);
  views.gamma1 = p.gamma1;
  views.gamma2 = p.gamma2;

  napi::NapiConfig cfg;
  if (!p.config.empty()) {
    json j = load_config_file(p.config);
    napi_config_from_json(j, cfg);
    if (j.contains("gamma1")) views.gamma1 = j.at("gamma1").get<double>();
    if (j.contains("gamma2")) views.gamma2 = j.at("gamma2").get<double>();
  }

  napi::CcaFitResult fit = napi::cca_fit(views, p.k, cfg);
  fs::create_directories(p.out);
  napi::write_csv_matrix((fs::path(p.out) / "phi.csv").string(), fit.model.phi);
  napi::write_csv_matrix((fs::path(p.out) / "psi.csv").string(), fit.model.psi);
  napi::write_trace_csv((fs::path(p.out) / "trace.csv").string(), fit.trace);

  json summary;
  summary["k"] = p.k;
  summary["correlations"] = std::vector<double>(
      fit.model.correlations.data(), fit.model.correlations.data() + fit.model.correlations.size());
  summary["objective"] = napi::cca_objective(fit.model, views);
  summary["iterations"] = fit.trace.rows.size();
  summary["passes"] = fit.trace.rows.empty() ? 0.0 : fit.trace.rows.back().passes;
  std::ofstream out(fs::path(p.out) / "summary.json");
  if (!out) throw napi::config_error("cannot write summary.json under " + p.out);
  out << summary.dump(2) << '\n';
  std::cout << "correlations:";
  for (napi::Index i = 0; i < fit.model.correlations.size(); ++i)
    std::cout << ' ' << fit.model.correlations[i];
  std::cout << "\n";
  return 0;
}

struct BenchParams {
  std::string config;
  std::string algorithm, out;
  napi::Index repetitions = 0;
};

int cmd_bench(const BenchParams& p) {
  napi::RunConfig cfg;
  if (!p.config.empty()) {
    json j = load_config_file(p.config);
    if (j.contains("problem")) cfg.problem = spec_from_json(j.at("problem"));
    if (j.contains("napi")) napi_config_from_json(j.at("napi"), cfg.napi);
    if (j.contains("algorithm")) cfg.algorithm = j.at("algorithm").get<std::string>();
    if (j.contains("repetitions")) cfg.repetitions = j.at("repetitions").get<napi::Index>();
    if (j.contains("output")) cfg.output_dir = j.at("output").get<std::string>();
    if (j.contains("thresholds")) cfg.thresholds = j.at("thresholds").get<std::vector<double>>();
  }
  if (!p.algorithm.empty()) cfg.algorithm = p.algorithm;
  if (!p.out.empty()) cfg.output_dir = p.out;
  if (p.repetitions > 0) cfg.repetitions = p.repetitions;

  napi::RunSummary summary = napi::run_experiment(cfg);
  std::cout << "wrote " << cfg.repetitions << " trace file(s) + summary.json under "
            << cfg.output_dir << "\n";
  for (std::size_t i = 0; i < cfg.thresholds.size(); ++i)
    std::cout << "median passes to sin_theta<=" << cfg.thresholds[i] << ": "
              << summary.median_passes[i] << "\n";
  return 0;
}

struct OracleParams {
  std::string a_path, b_path;
  std::string out = ".";
  napi::Index max_dim = 2000;
};

int cmd_oracle(const OracleParams& p) {
  napi::GeneralizedPair pair{napi::SymOperator::from_dense(napi::load_matrix(p.a_path)),
                             napi::SymOperator::from_dense(napi::load_matrix(p.b_path))};
  pair.check();
  napi::SpectrumOracle oracle = napi::dense_oracle(pair, p.max_dim);
  fs::create_directories(p.out);
  napi::write_csv_matrix((fs::path(p.out) / "eigenvalues.csv").string(), oracle.eigenvalues);
  napi::write_csv_matrix((fs::path(p.out) / "eigenvectors.csv").string(), oracle.eigenvectors);
  std::cout << "wrote eigenvalues.csv, eigenvectors.csv (d=" << oracle.dim() << ") under " << p.out
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Momentum-accelerated iteration for generalized eigenproblems A w = lambda B w"};
  app.require_subcommand(1);

  GenParams gen;
  CLI::App* cgen = app.add_subcommand("gen", "Generate a synthetic pair or paired views");
  cgen->add_flag("--views", gen.views, "generate paired data views instead of an (A, B) pair");
  cgen->add_option("--out", gen.out, "output directory");
  cgen->add_option("--format", gen.format, "csv or mtx")->check(CLI::IsMember({"csv", "mtx"}));
  cgen->add_option("--config", gen.config, "JSON config with a problem spec");
  cgen->add_option("--d", gen.d, "dimension");
  cgen->add_option("--spectrum", gen.spectrum, "explicit eigenvalues");
  cgen->add_option("--lambda1", gen.lambda1, "leading eigenvalue");
  cgen->add_option("--delta", gen.delta, "relative gap |l1|-|l2| over |l1|");
  cgen->add_option("--decay", gen.decay, "geometric tail decay");
  cgen->add_option("--kappa-b", gen.kappa_b, "condition number of B");
  cgen->add_option("--n", gen.n, "samples (views mode)");
  cgen->add_option("--d1", gen.d1, "first view dimension");
  cgen->add_option("--d2", gen.d2, "second view dimension");
  cgen->add_option("--correlations", gen.correlations, "planted canonical correlations");
  cgen->add_option("--condition", gen.condition, "per-view covariance condition number");
  cgen->add_option("--gamma1", gen.gamma1, "first-view ridge");
  cgen->add_option("--gamma2", gen.gamma2, "second-view ridge");
  cgen->add_option("--seed", gen.seed, "random seed");

  SolveParams solve;
  CLI::App* csolve = app.add_subcommand("solve", "Top-1 / top-k eigenvector computation");
  csolve->add_option("--a", solve.a_path, "matrix A (csv or mtx)")->required();
  csolve->add_option("--b", solve.b_path, "matrix B (csv or mtx)")->required();
  csolve->add_option("--config", solve.config, "JSON config");
  csolve->add_option("--k", solve.k, "subspace dimension");
  csolve->add_option("--beta", solve.beta, "momentum parameter");
  csolve->add_option("--beta-method", solve.beta_method, "user, oracle, or estimate");
  csolve->add_option("--out", solve.out, "output eigenvector CSV");
  csolve->add_option("--trace", solve.trace, "convergence trace CSV");
  csolve->add_flag("--with-oracle", solve.with_oracle,
                   "attach the dense oracle for angle diagnostics");

  CcaParams cca;
  CLI::App* ccca = app.add_subcommand("cca", "Canonical correlation analysis");
  ccca->add_option("--x", cca.x_path, "first view (n x d1)")->required();
  ccca->add_option("--y", cca.y_path, "second view (n x d2)")->required();
  ccca->add_option("--k", cca.k, "number of canonical pairs");
  ccca->add_option("--gamma1", cca.gamma1, "first-view ridge");
  ccca->add_option("--gamma2", cca.gamma2, "second-view ridge");
  ccca->add_option("--config", cca.config, "JSON config");
  ccca->add_option("--out", cca.out, "output directory");

  BenchParams bench;
  CLI::App* cbench = app.add_subcommand("bench", "Repeated synthetic experiments with traces");
  cbench->add_option("--config", bench.config, "JSON run config")->required();
  cbench->add_option("--algorithm", bench.algorithm, "napi or power");
  cbench->add_option("--repetitions", bench.repetitions, "number of runs");
  cbench->add_option("--out", bench.out, "output directory");

  OracleParams oracle;
  CLI::App* coracle = app.add_subcommand("oracle", "Dense ground-truth eigendecomposition");
  coracle->add_option("--a", oracle.a_path, "matrix A")->required();
  coracle->add_option("--b", oracle.b_path, "matrix B")->required();
  coracle->add_option("--out", oracle.out, "output directory");
  coracle->add_option("--max-dim", oracle.max_dim, "dense-path size cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cgen->parsed()) return cmd_gen(gen);
    if (csolve->parsed()) return cmd_solve(solve);
    if (ccca->parsed()) return cmd_cca(cca);
    if (cbench->parsed()) return cmd_bench(bench);
    if (coracle->parsed()) return cmd_oracle(oracle);
  } catch (const napi::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const napi::contract_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
