#include "lka/serialize.hpp"

#include <cmath>

#include "lka/errors.hpp"

namespace lka {

json json_real(double v) {
  if (std::isnan(v)) return "nan";
  if (v == HUGE_VAL) return "inf";
  if (v == -HUGE_VAL) return "-inf";
  return v;
}

double real_from_json(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    if (s == "nan") return std::nan("");
    fail("ConfigInvalid", "unrecognized numeric string '" + s + "'");
  }
  require(j.is_number(), "ConfigInvalid", "expected a number");
  return j.get<double>();
}

// ---------------------------------------------------------------------------

json to_json(const WorldSpace& s) {
  json j;
  if (s.kind == SpaceKind::Finite) {
    j["kind"] = "finite";
    j["d"] = s.d;
    if (!s.labels.empty()) j["labels"] = s.labels;
  } else {
    j["kind"] = "cube";
    j["r"] = s.r;
  }
  return j;
}

WorldSpace space_from_json(const json& j) {
  require(j.contains("kind"), "ConfigInvalid", "space needs a kind");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "finite") {
    require(j.contains("d"), "ConfigInvalid", "finite space needs d");
    std::vector<std::string> labels;
    if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
    return WorldSpace::finite(j.at("d").get<int>(), std::move(labels));
  }
  if (kind == "cube") {
    require(j.contains("r"), "ConfigInvalid", "cube space needs r");
    return WorldSpace::cube(j.at("r").get<int>());
  }
  fail("ConfigInvalid", "space kind must be finite or cube");
}

static json rect_to_json(const Rect& r) {
  json iv = json::array();
  for (const auto& s : r.sides) iv.push_back(json::array({s.lo, s.hi}));
  return iv;
}

static Rect rect_from_json(const json& j) {
  Rect r;
  for (const auto& side : j) {
    require(side.is_array() && side.size() == 2, "ConfigInvalid",
            "an interval is a [lo, hi] pair");
    r.sides.push_back({side[0].get<double>(), side[1].get<double>()});
  }
  return r;
}

json to_json(const TruthSet& t) {
  json j;
  j["space"] = to_json(t.space);
  switch (t.body) {
    case TruthSet::Body::FiniteSubset: {
      j["kind"] = "finiteSubset";
      json mask = json::array();
      for (auto v : t.mask) mask.push_back(int(v));
      j["mask"] = mask;
      break;
    }
    case TruthSet::Body::Rectangle:
      j["kind"] = "rectangle";
      j["intervals"] = rect_to_json(t.rects[0]);
      break;
    case TruthSet::Body::RectangleUnion: {
      j["kind"] = "rectangleUnion";
      json rs = json::array();
      for (const auto& r : t.rects) rs.push_back(rect_to_json(r));
      j["intervals"] = rs;
      break;
    }
  }
  return j;
}

TruthSet truthset_from_json(const json& j) {
  const WorldSpace space = space_from_json(j.at("space"));
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "finiteSubset") {
    std::vector<std::uint8_t> mask;
    for (const auto& v : j.at("mask")) mask.push_back(std::uint8_t(v.get<int>() ? 1 : 0));
    return TruthSet::finite_subset(space, std::move(mask));
  }
  if (kind == "rectangle") return TruthSet::rectangle(space, rect_from_json(j.at("intervals")));
  if (kind == "rectangleUnion") {
    std::vector<Rect> rs;
    for (const auto& r : j.at("intervals")) rs.push_back(rect_from_json(r));
    return TruthSet::rectangle_union(space, std::move(rs));
  }
  fail("ConfigInvalid", "unknown truth-set kind '" + kind + "'");
}

json to_json(const Partition& p) {
  json blocks = json::array();
  for (const auto& b : p.blocks) blocks.push_back(to_json(b));
  json j;
  j["space"] = to_json(p.space);
  j["blocks"] = blocks;
  return j;
}

Partition partition_from_json(const json& j, const WorldSpace& space) {
  std::vector<TruthSet> blocks;
  for (const auto& b : j.at("blocks")) blocks.push_back(truthset_from_json(b));
  return Partition::of(space, std::move(blocks));
}

static json marginal_to_json(const MarginalSpec& m) {
  json j;
  switch (m.kind) {
    case MarginalSpec::Kind::Uniform: j["kind"] = "uniform"; break;
    case MarginalSpec::Kind::OneTilt:
      j["kind"] = "oneTilt";
      j["lambda"] = m.lam;
      break;
    case MarginalSpec::Kind::TwoTilt:
      j["kind"] = "twoTilt";
      j["lambdaLin"] = m.lam1;
      j["lambdaQuad"] = m.lam2;
      break;
  }
  return j;
}

static MarginalSpec marginal_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform") return MarginalSpec::uniform();
  if (kind == "oneTilt") return MarginalSpec::one_tilt(j.at("lambda").get<double>());
  if (kind == "twoTilt")
    return MarginalSpec::two_tilt(j.at("lambdaLin").get<double>(),
                                  j.at("lambdaQuad").get<double>());
  fail("ConfigInvalid", "unknown marginal kind '" + kind + "'");
}

json to_json(const BeliefMeasure& m) {
  json j;
  j["space"] = to_json(m.space);
  switch (m.form) {
    case BeliefMeasure::Form::FiniteVec:
      j["kind"] = "finiteVec";
      j["p"] = m.p;
      break;
    case BeliefMeasure::Form::PiecewiseConstant: {
      j["kind"] = "piecewiseConstant";
      json blocks = json::array();
      for (const auto& b : m.partition->blocks) blocks.push_back(to_json(b));
      j["blocks"] = blocks;
      j["blockProbs"] = m.blockProbs;
      break;
    }
    case BeliefMeasure::Form::ProductTilted: {
      j["kind"] = "productTilted";
      json marg = json::array();
      for (const auto& mm : m.marginals) marg.push_back(marginal_to_json(mm));
      j["marginals"] = marg;
      break;
    }
    case BeliefMeasure::Form::AtomMixture: {
      j["kind"] = "atomMixture";
      j["p0"] = m.p0;
      json atoms = json::array();
      for (const auto& [x, w] : m.atoms) atoms.push_back(json::array({x, w}));
      j["atoms"] = atoms;
      break;
    }
  }
  return j;
}

BeliefMeasure measure_from_json(const json& j) {
  const WorldSpace space = space_from_json(j.at("space"));
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "finiteVec")
    return BeliefMeasure::finite_vec(space, j.at("p").get<std::vector<double>>());
  if (kind == "piecewiseConstant") {
    std::vector<TruthSet> blocks;
    for (const auto& b : j.at("blocks")) blocks.push_back(truthset_from_json(b));
    auto part = std::make_shared<Partition>(Partition::of(space, std::move(blocks)));
    return BeliefMeasure::piecewise(part, j.at("blockProbs").get<std::vector<double>>());
  }
  if (kind == "productTilted") {
    std::vector<MarginalSpec> marg;
    for (const auto& mm : j.at("marginals")) marg.push_back(marginal_from_json(mm));
    return BeliefMeasure::product_tilted(space, std::move(marg));
  }
  if (kind == "atomMixture") {
    std::vector<std::pair<double, double>> atoms;
    for (const auto& a : j.at("atoms"))
      atoms.emplace_back(a[0].get<double>(), a[1].get<double>());
    return BeliefMeasure::atom_mixture(space, j.at("p0").get<double>(), std::move(atoms));
  }
  if (kind == "uniform") return BeliefMeasure::uniform(space);
  fail("ConfigInvalid", "unknown measure kind '" + kind + "'");
}

json to_json(const FeatureSet& f) {
  json j;
  j["space"] = to_json(f.space);
  j["n"] = f.n;
  if (f.space.kind == SpaceKind::Finite) {
    j["kind"] = "matrix";
    json rows = json::array();
    for (int k = 0; k < f.space.d; ++k) {
      json row = json::array();
      for (int i = 0; i < f.n; ++i) row.push_back(f.finite_value(k, i));
      rows.push_back(row);
    }
    j["values"] = rows;
  } else {
    j["kind"] = "coordinate";
    json fs = json::array();
    for (const auto& cf : f.cube_features) {
      json e;
      switch (cf.kind) {
        case CoordFeature::Kind::Linear:
          e["kind"] = "linear";
          e["coord"] = cf.coord;
          break;
        case CoordFeature::Kind::Quadratic:
          e["kind"] = "quadratic";
          e["coord"] = cf.coord;
          break;
        case CoordFeature::Kind::BoxIndicator:
          e["kind"] = "boxIndicator";
          e["intervals"] = rect_to_json(cf.box);
          if (cf.scale != 1.0) e["scale"] = cf.scale;
          break;
      }
      fs.push_back(e);
    }
    j["features"] = fs;
  }
  return j;
}

FeatureSet features_from_json(const json& j) {
  const WorldSpace space = space_from_json(j.at("space"));
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "matrix") {
    const auto rows = j.at("values");
    const int n = int(rows.at(0).size());
    std::vector<double> values;
    for (const auto& row : rows)
      for (const auto& v : row) values.push_back(v.get<double>());
    return FeatureSet::finite(space, n, std::move(values));
  }
  require(kind == "coordinate", "ConfigInvalid", "unknown feature-set kind");
  std::vector<CoordFeature> fs;
  for (const auto& e : j.at("features")) {
    const std::string fk = e.at("kind").get<std::string>();
    if (fk == "linear") fs.push_back(CoordFeature::linear(e.at("coord").get<int>()));
    else if (fk == "quadratic") fs.push_back(CoordFeature::quadratic(e.at("coord").get<int>()));
    else if (fk == "boxIndicator")
      fs.push_back(CoordFeature::box_indicator(rect_from_json(e.at("intervals")),
                                               e.value("scale", 1.0)));
    else fail("ConfigInvalid", "unknown feature kind '" + fk + "'");
  }
  return FeatureSet::cube(space, std::move(fs));
}

SolverOptions solver_options_from_json(const json& j) {
  SolverOptions o;
  o.max_iterations = j.value("maxIterations", o.max_iterations);
  o.gradient_tolerance = j.value("gradientTolerance", o.gradient_tolerance);
  o.lambda_cap = j.value("lambdaCap", o.lambda_cap);
  o.backtrack = j.value("lineSearchBacktrack", o.backtrack);
  o.armijo_c = j.value("armijoConstant", o.armijo_c);
  return o;
}

// ---------------------------------------------------------------------------

json to_json(const FitReport& r) {
  json j;
  j["lambda"] = r.lambda;
  j["gauge"] = r.gauge;
  j["iterations"] = r.iterations;
  j["finalGradNorm"] = r.final_grad_norm;
  j["feasibility"] = feasibility_name(r.feasibility);
  j["achievedMoments"] = r.achieved_moments;
  return j;
}

json to_json(const LkaReport& r) {
  json j;
  j["activeInfo"] = json_real(r.active_info);
  j["truthValue"] = r.truth_value;
  j["learned"] = r.learned;
  j["fullLearning"] = r.full_learning;
  j["k2_supportContains_x0"] = r.k2_support_contains_x0;
  j["k3_ballInfoNonneg"] = r.k3_ball_info_nonneg;
  j["k3_witnessEps"] = r.k3_witness_eps;
  j["knowledgeAcquired"] = r.knowledge_acquired;
  j["fullKnowledge"] = r.full_knowledge;
  j["rawValues"] = {{"P_T", r.p_T}, {"P0_T", r.p0_T}, {"P_x0", r.p_x0}};
  return j;
}

json to_json(const ExpansionReport& r) {
  json per = json::array();
  for (size_t i = 0; i < r.m_list.size(); ++i)
    per.push_back({{"m", r.m_list[i]},
                   {"meanGap", r.mean_gap[i]},
                   {"stderr", r.stderr_gap[i]},
                   {"excludedRate", r.excluded_rate[i]}});
  json j;
  j["perM"] = per;
  j["C_centered"] = r.C_centered;
  j["C_uncentered"] = r.C_uncentered;
  j["fittedSlope"] = r.fitted_slope;
  j["maxIdentityGap"] = r.max_identity_gap;
  return j;
}

json to_json(const SecondaryReport& r) {
  json j;
  j["lambdaHat"] = r.lambda_hat;
  j["IhatPlus"] = json_real(r.i_hat_plus);
  j["IPlus"] = json_real(r.i_plus);
  j["m"] = r.m;
  j["feasibility"] = feasibility_name(r.feasibility);
  j["identityGap"] = json_real(r.identity_gap);
  return j;
}

json to_json(const BayesianSecondaryResult& r) {
  json j;
  j["P_tilde_T_tilde"] = r.p_T_tilde;
  j["P0_T_tilde"] = r.p0_T_tilde;
  j["I_tilde_plus"] = json_real(r.i_tilde_plus);
  j["edgeMass"] = r.edge_mass;
  j["posteriorOverLambda"] = r.posterior_weight;
  j["mixedPosterior"] = to_json(r.mixed_posterior);
  return j;
}

// ---------------------------------------------------------------------------

PollScenario poll_from_json(const json& j) {
  PollScenario s;
  s.d = j.value("d", s.d);
  s.h = j.value("h", s.h);
  s.eps = j.value("eps", s.eps);
  s.x0 = j.value("x0", s.x0);
  s.biased = j.value("biased", s.biased);
  s.delta = j.value("delta", s.delta);
  s.validate();
  return s;
}

CoinCubeScenario coin_from_json(const json& j) {
  CoinCubeScenario s;
  s.r = j.value("r", s.r);
  s.features_per_coord = j.value("featuresPerCoord", s.features_per_coord);
  s.x0 = j.at("x0").get<std::vector<double>>();
  if (j.contains("truth")) s.truth = rect_from_json(j.at("truth"));
  s.validate();
  return s;
}

DecimalScenario decimal_from_json(const json& j) {
  DecimalScenario s;
  s.n = j.value("n", s.n);
  s.x0 = j.at("x0").get<double>();
  s.validate();
  return s;
}

TreeScenario tree_from_json(const json& j) {
  TreeScenario s;
  s.r = j.value("r", 1);
  s.root = j.value("root", 0);
  for (const auto& nd : j.at("nodes")) {
    TreeNode n;
    n.split_coord = nd.value("splitCoord", 0);
    n.split_point = nd.value("splitPoint", 0.5);
    n.split_prob = nd.value("splitProb", 0.5);
    n.left = nd.value("left", -1);
    n.right = nd.value("right", -1);
    s.nodes.push_back(n);
  }
  s.validate();
  return s;
}

SpikeScenario spike_from_json(const json& j) {
  SpikeScenario s;
  s.atoms = j.at("atoms").get<std::vector<double>>();
  s.delta = j.value("delta", s.delta);
  s.p0 = j.value("p0", 0.0);
  s.weights = j.at("weights").get<std::vector<double>>();
  s.validate();
  return s;
}

}  // namespace lka
