#include "lka/runner.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "lka/errors.hpp"
#include "lka/parallel.hpp"
#include "lka/serialize.hpp"
#include "lka/tv.hpp"

namespace lka {

namespace {

// one measurement per row; deterministic order and locale-free formatting
struct CsvTable {
  std::string header;
  std::vector<std::string> rows;

  static std::string real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  }
  void add(const std::string& row) { rows.push_back(row); }
  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), "ConfigInvalid", "cannot write " + path);
    f << header << "\n";
    for (const auto& r : rows) f << r << "\n";
  }
};

bool is_validation_kind(const std::string& kind) {
  static const std::set<std::string> numerical{
      "SingularJ",        "SingularHessian", "ExcessBoundaryRate",
      "GridTooCoarse",    "ZeroBlockMass",   "NotMeasurable",
      "NumericalFailure",
  };
  return numerical.find(kind) == numerical.end();
}

std::string timestamp_utc() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

struct Summary {
  std::string text;
  bool pass = true;
};

// --------------------------------------------------------------------------
// per-command runners; each fills the result document and a summary line

Summary run_fit(const json& cfg, std::uint64_t, int, json& result, CsvTable*) {
  const auto prior = measure_from_json(cfg.at("prior"));
  const auto features = features_from_json(cfg.at("features"));
  const auto target = cfg.at("target").get<std::vector<double>>();
  SolverOptions opts;
  if (cfg.contains("options")) opts = solver_options_from_json(cfg.at("options"));
  auto [g, rep] = fit_lambda(prior, features, target, opts);
  result["fit"] = to_json(rep);
  result["posterior"] = to_json(g.to_measure());
  Summary s;
  const bool ok = rep.feasibility != Feasibility::Interior || rep.final_grad_norm <= 1e-9;
  s.pass = ok;
  std::ostringstream os;
  os << "fit: feasibility=" << feasibility_name(rep.feasibility)
     << " gradNorm=" << rep.final_grad_norm << " iters=" << rep.iterations
     << (ok ? " PASS" : " FAIL") << " (moment tol 1e-9)";
  s.text = os.str();
  return s;
}

Summary run_lka(const json& cfg, std::uint64_t, int, json& result, CsvTable*) {
  const auto p0 = measure_from_json(cfg.at("p0"));
  const auto p = measure_from_json(cfg.at("p"));
  const auto t = truthset_from_json(cfg.at("t"));
  World x0;
  if (p.space.kind == SpaceKind::Finite) x0 = World::at(cfg.at("x0").get<int>());
  else x0 = World::at(cfg.at("x0").get<std::vector<double>>());
  const MetricKind metric = cfg.value("metric", std::string("auto")) == "discrete"
                                ? MetricKind::Discrete
                                : (p.space.kind == SpaceKind::Finite ? MetricKind::Discrete
                                                                     : MetricKind::SupNorm);
  std::vector<double> grid = cfg.contains("epsGrid")
                                 ? cfg.at("epsGrid").get<std::vector<double>>()
                                 : default_eps_grid(p.space);
  const auto rep = lka_verdict(p0, p, t, x0, metric, grid);
  result["report"] = to_json(rep);
  Summary s;
  std::ostringstream os;
  os << "lka: activeInfo=" << rep.active_info << " learned=" << (rep.learned ? 1 : 0)
     << " knowledge=" << (rep.knowledge_acquired ? 1 : 0) << " PASS";
  s.text = os.str();
  return s;
}

Summary run_limits(const json& cfg, std::uint64_t, int, json& result, CsvTable*) {
  const int d = cfg.at("d").get<int>();
  const double magnitude = cfg.value("magnitude", 40.0);
  const int n = bits_needed(d);
  const auto features = binary_code_features(d);
  const auto prior = BeliefMeasure::uniform(WorldSpace::finite(d));
  json per = json::array();
  double worst = 1.0;
  for (int x0 = 0; x0 < d; ++x0) {
    GibbsPosterior g{prior, features, lambda_for_world(d, x0, magnitude), "none"};
    const double px0 = g.to_measure().p[size_t(x0)];
    worst = std::min(worst, px0);
    per.push_back(px0);
  }
  result["n_required"] = n;
  result["magnitude"] = magnitude;
  result["P_x0"] = per;
  result["min_P_x0"] = worst;
  if (n >= 2) {  // the converse certificate with one bit fewer
    std::vector<double> trunc;
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < n - 1; ++i)
        trunc.push_back(features.finite_value(k, i));
    const auto cert =
        pigeonhole_certificate(FeatureSet::finite(WorldSpace::finite(d), n - 1, trunc));
    result["converse"] = {{"x0", cert.x0},
                          {"cellSize", cert.cell_size},
                          {"bound", cert.bound}};
  }
  Summary s;
  s.pass = worst >= 1.0 - 1e-9;
  std::ostringstream os;
  os << "limits: d=" << d << " n=" << n << " min P(x0)=" << worst
     << (s.pass ? " PASS" : " FAIL") << " (threshold 1-1e-9)";
  s.text = os.str();
  return s;
}

Summary run_scenario(const json& cfg, std::uint64_t seed, int, json& result,
                     CsvTable* csv) {
  const std::string which = cfg.at("scenario").get<std::string>();
  const long N = cfg.value("N", 1000L);
  const long reps = cfg.value("replicates", 1L);
  csv->header = "scenario,seed,N_or_m,replicate,quantity,value";
  auto row = [&](long rep, const std::string& q, double v) {
    std::ostringstream os;
    os << which << "," << seed << "," << N << "," << rep << "," << q << ","
       << CsvTable::real(v);
    csv->add(os.str());
  };

  Summary s;
  std::ostringstream os;
  if (which == "poll") {
    const auto sc = poll_from_json(cfg.at("params"));
    json runs = json::array();
    for (long rep = 0; rep < reps; ++rep) {
      const auto r = poll_simulate(sc, N, seed, rep);
      row(rep, "mu_hat", r.mu_hat);
      row(rep, "P_northern", measure_of(r.posterior, sc.northern_set()));
      if (sc.biased) row(rep, "mu_tilde", r.mu_tilde);
      if (rep == 0) {
        runs.push_back({{"mu_hat", r.mu_hat}, {"posterior", to_json(r.posterior)}});
      }
    }
    result["runs"] = runs;
    os << "scenario poll: d=" << sc.d << " h=" << sc.h << " PASS";
  } else if (which == "coin") {
    const auto sc = coin_from_json(cfg.at("params"));
    json runs = json::array();
    double worst = 0.0;
    for (long rep = 0; rep < reps; ++rep) {
      const auto r = coin_simulate(sc, N, seed, rep);
      for (int c = 0; c < sc.r; ++c) row(rep, "d_bar_" + std::to_string(c), r.d_bar[size_t(c)]);
      worst = std::max(worst, r.fit.final_grad_norm);
      if (rep == 0) runs.push_back({{"fit", to_json(r.fit)}});
    }
    result["runs"] = runs;
    s.pass = worst <= 1e-9;
    os << "scenario coin: r=" << sc.r << " maxGradNorm=" << worst
       << (s.pass ? " PASS" : " FAIL") << " (tol 1e-9)";
  } else if (which == "decimal") {
    const auto sc = decimal_from_json(cfg.at("params"));
    double worst = 0.0;
    for (long rep = 0; rep < reps; ++rep) {
      const auto r = decimal_posterior(sc, N, seed, rep);
      row(rep, "d_bar", r.d_bar);
      row(rep, "info_second", r.info_second_closed);
      row(rep, "P_first", r.report_first.p_T);
      if (sc.n == 10) worst = std::max(worst, std::fabs(r.info_second_closed));
      if (rep == 0) result["report_first"] = to_json(r.report_first);
    }
    s.pass = worst == 0.0;
    os << "scenario decimal: n=" << sc.n << " |info_second|=" << worst
       << (s.pass ? " PASS" : " FAIL") << " (exact zero for n=10)";
  } else if (which == "tree") {
    const auto sc = tree_from_json(cfg.at("params"));
    const auto r = tree_build(sc);
    for (size_t i = 0; i < r.mu_hat.size(); ++i) {
      row(long(i), "leaf_weight", r.mu_hat[i]);
      row(long(i), "leaf_volume", r.volumes[i]);
      row(long(i), "leaf_lambda", r.lambda[i]);
    }
    result["maxDiameter"] = r.max_diameter;
    result["diameterLowerBound"] = r.diameter_lower_bound;
    result["witnessBallMass"] = r.witness_ball_mass;
    s.pass = r.max_diameter >= r.diameter_lower_bound && r.witness_ball_mass < 1.0;
    os << "scenario tree: leaves=" << r.mu_hat.size() << " maxDiam=" << r.max_diameter
       << (s.pass ? " PASS" : " FAIL") << " (bound n^{-1/r})";
  } else if (which == "spike") {
    const auto sc = spike_from_json(cfg.at("params"));
    const auto r = spike_posterior(sc);
    double worst = r.background_gap;
    for (size_t i = 0; i < r.gap.size(); ++i) {
      row(long(i), "atom_gap", r.gap[i]);
      worst = std::max(worst, r.gap[i]);
    }
    result["lambda"] = r.lambda;
    result["limit"] = to_json(r.limit);
    s.pass = worst <= sc.delta * double(sc.atoms.size() + 1);
    os << "scenario spike: atoms=" << sc.atoms.size() << " maxGap=" << worst
       << (s.pass ? " PASS" : " FAIL") << " (O(delta) bound)";
  } else {
    fail("ConfigInvalid", "unknown scenario '" + which + "'");
  }
  s.text = os.str();
  return s;
}

Summary run_secondary(const json& cfg, std::uint64_t seed, int threads, json& result,
                      CsvTable* csv) {
  const std::string mode = cfg.value("mode", std::string("expansion"));
  const auto fixture = cfg.at("fixture");
  const auto prior = measure_from_json(fixture.at("prior"));
  const auto features = features_from_json(fixture.at("features"));
  const auto t = truthset_from_json(fixture.at("t"));
  const auto lam = fixture.at("lambda").get<std::vector<double>>();

  Summary s;
  std::ostringstream os;
  if (mode == "plugin") {
    const long m = cfg.value("m", 1000L);
    const auto rep = plugin_secondary(prior, features, t, lam, m, seed);
    result["report"] = to_json(rep);
    s.pass = rep.identity_gap <= 1e-12;
    os << "secondary plugin: m=" << m << " identityGap=" << rep.identity_gap
       << (s.pass ? " PASS" : " FAIL") << " (tol 1e-12)";
  } else if (mode == "expansion") {
    const auto m_list = cfg.at("mList").get<std::vector<long>>();
    const long R = cfg.value("R", 2000L);
    const auto rep = expansion_verify(prior, features, t, lam, m_list, R, seed, threads);
    result["report"] = to_json(rep);
    csv->header = "scenario,seed,N_or_m,replicate,quantity,value";
    for (size_t i = 0; i < rep.m_list.size(); ++i) {
      std::ostringstream r1;
      r1 << "secondary," << seed << "," << rep.m_list[i] << ",0,meanGap,"
         << CsvTable::real(rep.mean_gap[i]);
      csv->add(r1.str());
    }
    const double ratio = rep.C_centered != 0.0 ? rep.fitted_slope / rep.C_centered : 0.0;
    s.pass = ratio >= 0.8 && ratio <= 1.2;
    os << "secondary expansion: slope=" << rep.fitted_slope
       << " C_centered=" << rep.C_centered << " ratio=" << ratio
       << (s.pass ? " PASS" : " FAIL") << " (band [0.8, 1.2])";
  } else if (mode == "bayes") {
    const long m = cfg.value("m", 500L);
    BayesianSecondaryConfig bc;
    if (cfg.contains("config")) {
      bc.sigma = cfg.at("config").value("sigma", bc.sigma);
      bc.L = cfg.at("config").value("L", bc.L);
      bc.G = cfg.at("config").value("G", bc.G);
    }
    const auto rep = bayesian_secondary(prior, features, t, lam, m, bc, seed);
    result["report"] = to_json(rep);
    os << "secondary bayes: m=" << m << " I_tilde=" << rep.i_tilde_plus << " PASS";
  } else {
    fail("ConfigInvalid", "unknown secondary mode '" + mode + "'");
  }
  s.text = os.str();
  return s;
}

Summary run_asymptotics(const json& cfg, std::uint64_t seed, int threads, json& result,
                        CsvTable* csv) {
  const std::string experiment = cfg.at("experiment").get<std::string>();
  const auto sc = coin_from_json(cfg.at("coin"));
  csv->header = "experiment,N,replicate,quantity,value";

  Summary s;
  std::ostringstream os;
  if (experiment == "convergence") {
    const auto Ns = cfg.at("Ns").get<std::vector<long>>();
    const long R = cfg.value("R", 200L);
    const auto rep = primary_convergence(sc, Ns, R, seed, threads);
    // rows sorted by (replicate, N)
    for (long r = 0; r < R; ++r)
      for (size_t ni = 0; ni < Ns.size(); ++ni) {
        std::ostringstream line;
        line << "convergence," << Ns[ni] << "," << r << ",tv_to_Pinf,"
             << CsvTable::real(rep.tv_errors[ni][size_t(r)]);
        csv->add(line.str());
      }
    result["slope"] = json_real(rep.slope);
    result["medianTv"] = rep.median_tv;
    s.pass = std::isnan(rep.slope) || (rep.slope >= -0.6 && rep.slope <= -0.4);
    os << "asymptotics convergence: slope=" << rep.slope
       << (s.pass ? " PASS" : " FAIL") << " (band [-0.6, -0.4])";
  } else if (experiment == "clt") {
    const long N = cfg.value("N", 10000L);
    const long R = cfg.value("R", 5000L);
    const auto A = truthset_from_json(cfg.at("A"));
    const auto rep = clt_check(sc, A, N, R, seed, cfg.value("fdStep", 1e-4), threads);
    result["empiricalVar"] = rep.empirical_var;
    result["predictedVar"] = rep.predicted_var;
    result["meanDev"] = rep.empirical_mean_dev;
    for (size_t r2 = 0; r2 < rep.devs.size(); ++r2) {
      std::ostringstream line;
      line << "clt," << N << "," << r2 << ",sqrtN_dev,"
           << CsvTable::real(rep.devs[r2]);
      csv->add(line.str());
    }
    const double ratio = rep.empirical_var / rep.predicted_var;
    s.pass = ratio >= 0.9 && ratio <= 1.1;
    os << "asymptotics clt: var ratio=" << ratio << (s.pass ? " PASS" : " FAIL")
       << " (band [0.9, 1.1])";
  } else if (experiment == "synthetic") {
    const int generations = cfg.value("generations", 5);
    const long N = cfg.value("N", 100000L);
    const auto rep = synthetic_loop(sc, generations, N, seed);
    for (size_t g = 0; g < rep.tv_to_gen0.size(); ++g) {
      std::ostringstream l1, l2;
      l1 << "synthetic," << N << "," << g << ",tv_to_Pinf,"
         << CsvTable::real(rep.tv_to_gen0[g]);
      l2 << "synthetic," << N << "," << g << ",tv_to_delta,"
         << CsvTable::real(rep.tv_to_delta[g]);
      csv->add(l1.str());
      csv->add(l2.str());
    }
    result["tvToGen0"] = rep.tv_to_gen0;
    result["tvToDelta"] = rep.tv_to_delta;
    const double floor0 = rep.tv_to_delta.front() - 0.05;
    s.pass = true;
    for (double v : rep.tv_to_delta) s.pass = s.pass && v >= floor0;
    os << "asymptotics synthetic: generations=" << generations
       << " minTvToDelta=" << *std::min_element(rep.tv_to_delta.begin(), rep.tv_to_delta.end())
       << (s.pass ? " PASS" : " FAIL") << " (floor gen0-0.05)";
  } else {
    fail("ConfigInvalid", "unknown experiment '" + experiment + "'");
  }
  s.text = os.str();
  return s;
}

}  // namespace

int run_experiment(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  json cfg;
  Summary summary;
  try {
    std::ifstream f(opts.config_path);
    require(f.good(), "ConfigInvalid", "cannot open config " + opts.config_path);
    try {
      cfg = json::parse(f);
    } catch (const json::exception& e) {
      fail("ConfigInvalid", std::string("config is not valid JSON: ") + e.what());
    }
    require(cfg.contains("command"), "ConfigInvalid", "config needs a command");
    require(cfg.contains("seed") || opts.seed_override.has_value(), "ConfigInvalid",
            "seed is required (no wall-clock default)");
    const std::uint64_t seed =
        opts.seed_override.value_or(cfg.value("seed", std::uint64_t(0)));
    cfg["seed"] = seed;  // resolved config embeds the effective seed
    const std::string command = cfg.at("command").get<std::string>();

    json result;
    CsvTable csv;
    if (command == "fit") summary = run_fit(cfg, seed, opts.threads, result, &csv);
    else if (command == "lka") summary = run_lka(cfg, seed, opts.threads, result, &csv);
    else if (command == "limits") summary = run_limits(cfg, seed, opts.threads, result, &csv);
    else if (command == "scenario") summary = run_scenario(cfg, seed, opts.threads, result, &csv);
    else if (command == "secondary") summary = run_secondary(cfg, seed, opts.threads, result, &csv);
    else if (command == "asymptotics") summary = run_asymptotics(cfg, seed, opts.threads, result, &csv);
    else fail("ConfigInvalid", "unknown command '" + command + "'");

    json doc;
    doc["version"] = kVersion;
    doc["config"] = cfg;
    doc["result"] = result;
    doc["summary"] = summary.text;
    if (!opts.no_timestamp) doc["timestamp"] = timestamp_utc();

    std::filesystem::create_directories(opts.out_dir);
    const std::string json_path =
        (std::filesystem::path(opts.out_dir) / "result.json").string();
    std::ofstream jf(json_path, std::ios::binary);
    require(jf.good(), "ConfigInvalid", "cannot write " + json_path);
    jf << doc.dump(2) << "\n";
    if (!csv.rows.empty())
      csv.write((std::filesystem::path(opts.out_dir) / "results.csv").string());

    out << summary.text << "\n";
    return 0;
  } catch (const error& e) {
    err << e.what() << "\n";
    return is_validation_kind(e.kind()) ? 2 : 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace lka
