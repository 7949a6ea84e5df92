#include "bjs/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bjs/errors.hpp"

namespace bjs {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

RatMat parse_matrix(const std::string& text, int expected_dim) {
  // format [[a,b],[c,d]] with integer or p/q entries
  std::vector<std::vector<Rational>> rows;
  std::string s;
  for (char c : text)
    if (!isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.size() < 4 || s.front() != '[' || s.back() != ']')
    throw Error(ErrorKind::ConfigError, "bad matrix literal: " + text);
  size_t i = 1;
  while (i < s.size() - 1) {
    if (s[i] == ',') {
      ++i;
      continue;
    }
    if (s[i] != '[') throw Error(ErrorKind::ConfigError, "bad matrix row in: " + text);
    size_t j = s.find(']', i);
    if (j == std::string::npos) throw Error(ErrorKind::ConfigError, "unterminated row in: " + text);
    std::vector<Rational> row;
    for (const std::string& tok : split(s.substr(i + 1, j - i - 1), ','))
      row.push_back(rational_from_string(tok));
    rows.push_back(std::move(row));
    i = j + 1;
  }
  int d = static_cast<int>(rows.size());
  if (expected_dim > 0 && d != expected_dim)
    throw Error(ErrorKind::ConfigError, "matrix has wrong dimension: " + text);
  RatMat mat(d);
  for (int r = 0; r < d; ++r) {
    if (static_cast<int>(rows[static_cast<size_t>(r)].size()) != d)
      throw Error(ErrorKind::ConfigError, "ragged matrix: " + text);
    for (int c = 0; c < d; ++c) mat.at(r, c) = rows[static_cast<size_t>(r)][static_cast<size_t>(c)];
  }
  return mat;
}

struct KeyValues {
  std::map<std::string, std::string> kv;
  const std::string* find(const std::string& k) const {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  }
  std::string get(const std::string& k, const std::string& dflt) const {
    auto* v = find(k);
    return v ? *v : dflt;
  }
  double get_num(const std::string& k, double dflt) const {
    auto* v = find(k);
    if (!v) return dflt;
    try {
      return std::stod(*v);
    } catch (...) {
      throw Error(ErrorKind::ConfigError, "field '" + k + "': not a number: " + *v);
    }
  }
  long get_int(const std::string& k, long dflt) const {
    auto* v = find(k);
    if (!v) return dflt;
    try {
      return std::stol(*v);
    } catch (...) {
      throw Error(ErrorKind::ConfigError, "field '" + k + "': not an integer: " + *v);
    }
  }
};

std::vector<int> parse_theta(const std::string& s) {
  std::vector<int> out;
  for (const std::string& tok : split(s, ','))
    if (!tok.empty()) out.push_back(std::stoi(tok));
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  KeyValues kvs;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::ConfigError, "expected key = value, got: " + line);
    kvs.kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  RunConfig cfg;
  cfg.text = text;

  std::string kind = kvs.get("model.kind", "");
  if (kind.empty()) throw Error(ErrorKind::ConfigError, "field 'model.kind' is required");
  GenerationMode mode =
      kvs.get("model.mode", "group") == "semigroup" ? GenerationMode::Semigroup : GenerationMode::Group;
  Arithmetic arith =
      kvs.get("model.arith", "exact") == "float" ? Arithmetic::Float : Arithmetic::ExactRational;

  if (kind == "free-tree") {
    cfg.model = GroupModel::free_tree(static_cast<int>(kvs.get_int("model.rank", 2)), mode);
  } else if (kind == "fuchsian" || kind == "linear") {
    int dim = kind == "fuchsian" ? 2 : static_cast<int>(kvs.get_int("model.dim", 2));
    auto* gens_text = kvs.find("model.generators");
    if (!gens_text) throw Error(ErrorKind::ConfigError, "field 'model.generators' is required");
    std::vector<RatMat> gens;
    for (const std::string& tok : split(*gens_text, ';'))
      if (!tok.empty()) gens.push_back(parse_matrix(tok, dim));
    cfg.model = kind == "fuchsian" ? GroupModel::fuchsian(std::move(gens), mode, arith)
                                   : GroupModel::linear(dim, std::move(gens), mode, arith);
    if (auto* names = kvs.find("model.generator_names"))
      cfg.model.generator_names = split(*names, ';');
  } else {
    throw Error(ErrorKind::ConfigError, "field 'model.kind': unknown model '" + kind + "'");
  }

  std::string ck = kvs.get("cocycle.kind", "");
  if (ck.empty())
    ck = cfg.model.kind == ModelKind::FreeTree
             ? "busemann-tree"
             : (cfg.model.kind == ModelKind::Fuchsian ? "busemann-fuchsian" : "cartan");
  if (ck == "busemann-tree")
    cfg.sigma = CocycleSpec::busemann_tree();
  else if (ck == "busemann-fuchsian")
    cfg.sigma = CocycleSpec::busemann_fuchsian();
  else if (ck == "projective-omega1")
    cfg.sigma = CocycleSpec::projective_omega1();
  else if (ck == "cartan") {
    int d = cfg.model.dim;
    LinearFunctional phi = LinearFunctional::omega1(d);
    if (auto* coeffs = kvs.find("cocycle.phi")) {
      auto toks = split(*coeffs, ',');
      if (static_cast<int>(toks.size()) != d)
        throw Error(ErrorKind::ConfigError, "field 'cocycle.phi': expected " + std::to_string(d) +
                                                " coefficients");
      phi.coeffs = VecD(d);
      for (int i = 0; i < d; ++i) phi.coeffs(i) = std::stod(toks[static_cast<size_t>(i)]);
      phi.label = "phi";
    }
    std::vector<int> theta = parse_theta(kvs.get("cocycle.theta", ""));
    if (theta.empty())
      for (int i = 1; i < d; ++i) theta.push_back(i);
    cfg.sigma = CocycleSpec::cartan(phi, theta);
  } else {
    throw Error(ErrorKind::ConfigError, "field 'cocycle.kind': unknown cocycle '" + ck + "'");
  }

  switch (cfg.model.kind) {
    case ModelKind::FreeTree:
      cfg.registered = {CocycleSpec::busemann_tree()};
      break;
    case ModelKind::Fuchsian:
      cfg.registered = {CocycleSpec::busemann_fuchsian(), CocycleSpec::projective_omega1()};
      break;
    case ModelKind::Linear:
      cfg.registered = {cfg.sigma, CocycleSpec::projective_omega1(), CocycleSpec::dual_projective()};
      break;
  }

  std::string delta_raw = kvs.get("construction.delta", "auto:0.8");
  if (delta_raw.rfind("auto", 0) == 0) {
    cfg.delta_auto = true;
    auto colon = delta_raw.find(':');
    cfg.delta_fraction = colon == std::string::npos ? 0.8 : std::stod(delta_raw.substr(colon + 1));
    if (!(cfg.delta_fraction > 0 && cfg.delta_fraction < 1))
      throw Error(ErrorKind::ConfigError, "field 'construction.delta': auto fraction must be in (0,1)");
  } else {
    cfg.delta_auto = false;
    cfg.delta = std::stod(delta_raw);
    if (!(cfg.delta > 0))
      throw Error(ErrorKind::ConfigError, "field 'construction.delta': must be positive");
  }

  cfg.enumeration_depth = static_cast<int>(kvs.get_int("enumeration.depth", 10));
  cfg.enumeration_cap = static_cast<size_t>(kvs.get_int("enumeration.cap", 30000000));
  cfg.certification_depth = static_cast<int>(kvs.get_int("construction.depth", 6));
  cfg.annulus_budget = static_cast<int>(kvs.get_int("construction.annulus_budget", -1));
  cfg.adjuster_depth = static_cast<int>(kvs.get_int("construction.adjuster_depth", 4));
  cfg.safety = kvs.get_num("construction.safety", 1.5);
  cfg.metric_tolerance = kvs.get_num("tolerances.metric", 1e-9);
  cfg.gap_tolerance = kvs.get_num("tolerances.gap", 0.05);
  cfg.gap_margin = kvs.get_num("tolerances.margin", 0.02);
  cfg.pair_budget = static_cast<size_t>(kvs.get_int("tolerances.pair_budget", 200000));
  cfg.rng_seed = static_cast<uint64_t>(kvs.get_int("seed", 1));
  cfg.threads = static_cast<int>(kvs.get_int("threads", 1));
  cfg.output_dir = kvs.get("output.dir", "out");

  if (auto* seed_text = kvs.find("construction.seed")) {
    for (const std::string& tok : split(*seed_text, ';')) {
      if (tok.empty()) continue;
      if (cfg.model.kind == ModelKind::FreeTree) {
        cfg.explicit_seed.push_back(word_from_pretty(tok));
      } else {
        // dot-separated effective generator names or indices
        Word w;
        for (const std::string& part : split(tok, '.')) {
          int found = -1;
          for (int gi = 0; gi < cfg.model.effective_generator_count(); ++gi)
            if (cfg.model.effective_generator_name(gi) == part) {
              found = gi;
              break;
            }
          if (found < 0) {
            try {
              found = std::stoi(part);
            } catch (...) {
              throw Error(ErrorKind::ConfigError, "field 'construction.seed': unknown generator '" +
                                                      part + "'");
            }
          }
          w.push_back(static_cast<Letter>(found));
        }
        cfg.explicit_seed.push_back(std::move(w));
      }
    }
  }

  if (auto* fr = kvs.find("sequence.fractions"))
    for (const std::string& tok : split(*fr, ','))
      if (!tok.empty()) cfg.sequence_fractions.push_back(std::stod(tok));

  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

std::string point_pretty(const GroupModel& m, const CompactifiedPoint& p) {
  if (p.interior)
    return m.kind == ModelKind::FreeTree ? word_pretty(p.g.tree_value) : ("orbit:" + p.g.key);
  switch (m.kind) {
    case ModelKind::FreeTree:
      return "end:" + word_pretty(p.b.ray.substr(0, std::min<size_t>(p.b.ray.size(), 24))) + "...";
    case ModelKind::Fuchsian: {
      std::ostringstream os;
      os.precision(12);
      os << "angle:" << p.b.angle;
      return os.str();
    }
    case ModelKind::Linear:
      return "projective-point";
  }
  return "?";
}

Json profile_json(const CountingProfile& p) {
  Json j;
  j["convention"] = p.convention;
  j["deltaHat"] = num(p.delta_hat);
  j["residual"] = num(p.fit_residual);
  j["windowLo"] = p.window_lo;
  j["windowHi"] = p.window_hi;
  j["insufficientRange"] = p.insufficient_range;
  j["total"] = p.total;
  j["depth"] = p.depth;
  j["truncated"] = p.truncated;
  return j;
}

Json fit_json(const CocycleFit& f) {
  Json j;
  j["cocycle"] = f.cocycle;
  j["B1"] = num(f.slope);
  j["b1"] = num(f.offset);
  return j;
}

std::string seed_word_pretty(const GroupModel& m, const GroupElement& e) {
  if (m.kind == ModelKind::FreeTree) return word_pretty(e.tree_value);
  std::string s;
  for (size_t i = 0; i < e.word.size(); ++i) {
    if (i) s += '.';
    s += m.effective_generator_name(static_cast<int>(e.word[i]));
  }
  return s.empty() ? "id" : s;
}

struct StageLog {
  Json arr = Json::array();
  bool failed = false;
  void ok(const std::string& name) { arr.push_back(Json{{"name", name}, {"status", "ok"}}); }
  void fail(const std::string& name, const std::string& what) {
    arr.push_back(Json{{"name", name}, {"status", "failed"}, {"error", what}});
    failed = true;
  }
  void skip(const std::string& name, const std::string& why) {
    arr.push_back(Json{{"name", name}, {"status", "skipped"}, {"reason", why}});
  }
};

// One full construction run at a fixed delta target.  Returns the report
// fragment and an exit code.
std::pair<Json, int> run_single(const RunConfig& cfg, double delta_override) {
  Json doc;
  StageLog stages;
  int exit_code = 0;
  const GroupModel& m = cfg.model;

  Ball ball;
  CountingProfile gamma_profile;
  double delta = 0;
  AdjusterResult adjusters;
  std::optional<ConstructionScales> scales;
  std::vector<CompactifiedPoint> limit_samples;
  std::vector<GroupElement> seed;
  std::optional<SeedCertificate> cert;
  std::optional<Semigroup> sg;

  // --- enumerate the ambient ball ---
  try {
    ball = enumerate_ball(m, cfg.enumeration_depth, cfg.enumeration_cap);
    Json j;
    j["elements"] = ball.elements.size();
    j["radius"] = ball.radius;
    j["truncated"] = ball.truncated;
    doc["ball"] = j;
    stages.ok("enumerate");
  } catch (const std::exception& e) {
    stages.fail("enumerate", e.what());
  }

  // --- ambient growth profile ---
  if (!stages.failed) try {
      gamma_profile = counting_profile(m, ball.elements, cfg.sigma, ball.radius, ball.truncated);
      doc["gammaProfile"] = profile_json(gamma_profile);
      delta = delta_override > 0
                  ? delta_override
                  : (cfg.delta_auto ? cfg.delta_fraction * gamma_profile.delta_hat : cfg.delta);
      doc["deltaTarget"] = num(delta);
      stages.ok("gamma-profile");
    } catch (const std::exception& e) {
      stages.fail("gamma-profile", e.what());
    }

  bool constructive = m.kind != ModelKind::Linear;

  // --- adjusters and scales ---
  if (!stages.failed && constructive) try {
      adjusters = find_adjusters(m, ball, cfg.adjuster_depth);
      Json j;
      j["epsilonTilde"] = num(adjusters.epsilon_tilde);
      j["count"] = adjusters.adjusters.size();
      j["sampled"] = adjusters.sampled;
      j["empirical"] = true;
      Json names = Json::array();
      for (const GroupElement& f : adjusters.adjusters) names.push_back(seed_word_pretty(m, f));
      j["adjusters"] = names;
      doc["adjusters"] = j;
      stages.ok("adjusters");
    } catch (const std::exception& e) {
      stages.fail("adjusters", e.what());
    }

  if (!stages.failed && constructive) try {
      // x: attracting point of the largest-magnitude loxodromic; y: another
      // attracting fixed point at the largest admissible distance.
      double eps_eff = adjusters.epsilon_tilde / cfg.safety;
      const GroupElement* best = nullptr;
      double best_mag = -1;
      std::optional<LoxodromicData> best_data;
      for (const GroupElement& e : ball.elements) {
        if (e.length == 0) continue;
        double v = magnitude(m, e, cfg.sigma);
        if (v <= best_mag) continue;
        auto data = loxodromic_data(m, e);
        if (!data) continue;
        best = &e;
        best_mag = v;
        best_data = data;
      }
      if (!best) throw Error(ErrorKind::NoSamples, "no loxodromic element in the ball");
      CompactifiedPoint x = boundary(m, best_data->attracting);
      if (!cfg.explicit_seed.empty()) {
        GroupElement s0 = model_element_from_word(m, cfg.explicit_seed.front());
        auto data = loxodromic_data(m, s0);
        if (data) x = boundary(m, data->attracting);
      }
      for (const GroupElement& e : ball.elements) {
        if (e.length == 0) continue;
        auto data = loxodromic_data(m, e);
        if (data) limit_samples.push_back(boundary(m, data->attracting));
      }
      const CompactifiedPoint* y = nullptr;
      double best_d = 0;
      for (const CompactifiedPoint& cand : limit_samples) {
        double d = dist(m, cand, x);
        if (d > best_d && d < eps_eff / 4) {
          best_d = d;
          y = &cand;
        }
      }
      if (!y) throw Error(ErrorKind::ScaleInfeasible, "no admissible y near x");
      scales = derive_scales(m, x, *y, eps_eff);
      Json j;
      j["x"] = point_pretty(m, scales->x);
      j["y"] = point_pretty(m, scales->y);
      j["d"] = num(scales->base_distance);
      j["t0"] = num(scales->t0);
      j["s1"] = num(scales->s1);
      j["s2"] = num(scales->s2);
      j["epsilon0"] = num(scales->epsilon0);
      j["epsilonTildeEffective"] = num(scales->epsilon_tilde);
      j["metric"] = m.kind == ModelKind::FreeTree ? "2^-cpl ultrametric"
                                                  : "chordal metric on the Cayley disk";
      doc["scales"] = j;
      stages.ok("scales");
    } catch (const std::exception& e) {
      stages.fail("scales", e.what());
    }

  SeedThresholds thresholds;
  if (!stages.failed && constructive) try {
      TripleConstant triple = estimate_triple_constant(m, cfg.sigma, scales->t0, ball,
                                                       cfg.pair_budget, cfg.rng_seed);
      double c_finite_raw =
          estimate_finite_constant(m, cfg.sigma, ball, adjusters.adjusters);
      double window = 2 * c_finite_raw + 1;
      double c_shadow_raw = estimate_shadow_separation_constant(
          m, cfg.sigma, ball, scales->t0 / 8, window, cfg.pair_budget, cfg.rng_seed + 1);
      thresholds.safety = cfg.safety;
      thresholds.c_finite = c_finite_raw * cfg.safety;
      thresholds.c_upper = triple.upper * cfg.safety;
      thresholds.coloring = c_shadow_raw * cfg.safety + 2 * thresholds.c_finite;
      if (thresholds.coloring <= 0) thresholds.coloring = 1.0;
      Json j;
      j["cTripleLower"] = num(triple.lower);
      j["cTripleUpper"] = num(triple.upper);
      j["cTriplePairs"] = triple.pairs;
      j["cFinite"] = num(c_finite_raw);
      j["cShadow"] = num(c_shadow_raw);
      j["coloringThreshold"] = num(thresholds.coloring);
      j["safety"] = num(cfg.safety);
      j["empirical"] = true;
      doc["constants"] = j;
      stages.ok("constants");
    } catch (const std::exception& e) {
      stages.fail("constants", e.what());
    }

  // --- seed: explicit or searched ---
  if (!stages.failed) try {
      if (!cfg.explicit_seed.empty()) {
        for (const Word& w : cfg.explicit_seed) {
          GroupElement e = model_element_from_word(m, w);
          e.length = static_cast<int>(w.size());
          seed.push_back(std::move(e));
        }
        Json j;
        j["mode"] = "explicit";
        Json words = Json::array();
        for (const GroupElement& s : seed) words.push_back(seed_word_pretty(m, s));
        j["seed"] = words;
        doc["selection"] = j;
        stages.ok("select-seed");
      } else if (!constructive) {
        throw Error(ErrorKind::ModelMismatch,
                    "the linear model needs an explicit seed (no compactified metric)");
      } else {
        AnnulusSupplier supplier =
            (m.kind == ModelKind::FreeTree && cfg.sigma.kind == CocycleKind::BusemannTree)
                ? annuli_from_cylinder(m, cfg.sigma, *scales)
                : annuli_from_ball(m, ball, cfg.sigma, *scales);
        int annulus_max = cfg.annulus_budget > 0 ? cfg.annulus_budget : cfg.enumeration_depth;
        if (!(m.kind == ModelKind::FreeTree && cfg.sigma.kind == CocycleKind::BusemannTree)) {
          // only annuli fully inside the enumerated ball are complete
          double frontier = std::numeric_limits<double>::infinity();
          for (const GroupElement& e : ball.elements)
            if (e.length == ball.radius)
              frontier = std::min(frontier, magnitude(m, e, cfg.sigma));
          if (std::isfinite(frontier))
            annulus_max = std::min(annulus_max, static_cast<int>(std::floor(frontier)) - 1);
        }
        // empirical start depth: past these magnitudes, right-multiplying by
        // any adjuster keeps B_{t0/2}(x) inside B_{t0}(x)
        int annulus_min = 1;
        for (const GroupElement& e : ball.elements) {
          if (e.length == 0) continue;
          if (dist(m, compactify(m, e), scales->x) >= scales->t0 / 2) continue;
          for (const GroupElement& f : adjusters.adjusters) {
            GroupElement ef = f.is_identity() ? e : multiply(m, e, f);
            if (dist(m, compactify(m, ef), scales->x) >= scales->t0)
              annulus_min = std::max(
                  annulus_min, static_cast<int>(std::floor(magnitude(m, e, cfg.sigma))) + 1);
          }
        }
        SeedSelection sel = select_seed(m, cfg.sigma, delta, *scales, adjusters, thresholds,
                                        supplier, annulus_min, annulus_max);
        Json j;
        j["mode"] = "searched";
        j["status"] = sel.status;
        j["threshold"] = num(sel.threshold);
        j["annulusMin"] = annulus_min;
        j["annulusMax"] = annulus_max;
        Json trace = Json::array();
        for (const WTraceEntry& t : sel.trace) {
          Json e;
          e["annulus"] = t.annulus;
          e["class"] = t.color_class;
          e["adjuster"] = t.adjuster;
          e["W"] = num(t.weight);
          e["candidates"] = t.candidates;
          trace.push_back(e);
        }
        j["wTrace"] = trace;
        if (sel.found) {
          j["annulus"] = sel.annulus;
          j["class"] = sel.color_class;
          j["adjuster"] = sel.adjuster;
          j["W"] = num(sel.weight);
          Json words = Json::array();
          for (const GroupElement& s : sel.seed) words.push_back(seed_word_pretty(m, s));
          j["seed"] = words;
          seed = sel.seed;
        }
        doc["selection"] = j;
        if (!sel.found) {
          exit_code = 3;
          stages.fail("select-seed", "seed-not-found");
        } else {
          stages.ok("select-seed");
        }
      }
    } catch (const std::exception& e) {
      stages.fail("select-seed", e.what());
    }

  // --- certification ---
  if (!stages.failed && constructive) try {
      cert = certify(m, cfg.sigma, cfg.registered, seed, *scales, delta, cfg.certification_depth);
      Json j;
      j["pass"] = cert->pass;
      j["delta"] = num(cert->delta);
      j["depth"] = cert->depth;
      j["sigma"] = cert->sigma_name;
      j["seedSize"] = seed.size();
      j["nodes"] = cert->nodes;
      j["D0"] = num(cert->max_inverse_magnitude);
      j["r"] = num(cert->min_branch_separation);
      j["property4MinSlack"] = num(cert->property4_min_slack);
      j["freenessDepth"] = cert->freeness_depth;
      j["refinements"] = cert->refinement_count;
      Json checks = Json::array();
      for (const PropertyCheck& c : cert->checks) {
        Json cj;
        cj["name"] = c.name;
        cj["pass"] = c.pass;
        cj["checked"] = c.checked;
        if (!c.counterexample.empty()) cj["counterexample"] = c.counterexample;
        checks.push_back(cj);
      }
      j["checks"] = checks;
      Json fits = Json::array();
      for (const CocycleFit& f : cert->fits) fits.push_back(fit_json(f));
      j["fits"] = fits;
      Json words = Json::array();
      for (const GroupElement& s : seed) words.push_back(seed_word_pretty(m, s));
      j["seed"] = words;
      doc["certificate"] = j;
      if (!cert->pass) {
        exit_code = 2;
        stages.fail("certify", "certification FAIL");
      } else {
        stages.ok("certify");
      }
    } catch (const std::exception& e) {
      stages.fail("certify", e.what());
    }

  // --- semigroup enumeration and growth data ---
  bool semigroup_ok = !seed.empty() && (!constructive || (cert && cert->pass));
  CountingProfile semi_profile, semi_shallow;
  if (semigroup_ok && !stages.failed) try {
      sg = semigroup_enumerate(m, seed, cfg.certification_depth);
      Json j;
      j["elements"] = sg->elements.size();
      j["dedupCollisions"] = sg->dedup_collisions;
      j["depth"] = sg->depth;
      auto exact = free_word_length_exponent(*sg, static_cast<int>(seed.size()));
      if (exact) j["wordLengthExponent"] = num(*exact);
      doc["semigroup"] = j;

      semi_profile = counting_profile(m, sg->elements, cfg.sigma, sg->depth, false);
      doc["semigroupProfile"] = profile_json(semi_profile);
      std::vector<GroupElement> shallow;
      for (const GroupElement& e : sg->elements)
        if (e.length <= cfg.certification_depth - 2) shallow.push_back(e);
      semi_shallow = counting_profile(m, shallow, cfg.sigma, sg->depth - 2, false);
      doc["semigroupProfileShallow"] = profile_json(semi_shallow);

      Json fits = Json::array();
      for (const CocycleSpec& spec : cfg.registered)
        fits.push_back(fit_json(fit_word_magnitude(m, *sg, spec)));
      doc["semigroupFits"] = fits;
      if (cfg.registered.size() >= 2) {
        CocycleFit f1 = fit_word_magnitude(m, *sg, cfg.registered[0]);
        CocycleFit f2 = fit_word_magnitude(m, *sg, cfg.registered[1]);
        Json two;
        two["first"] = f1.cocycle;
        two["second"] = f2.cocycle;
        two["B2"] = num(f1.slope * f2.slope);
        two["b2"] = num(f1.slope * f2.offset + f1.offset);
        doc["twoCocycleComparability"] = two;
      }
      stages.ok("semigroup");
    } catch (const std::exception& e) {
      stages.fail("semigroup", e.what());
    }
  else if (!semigroup_ok)
    stages.skip("semigroup", "no certified seed");

  // --- gap report ---
  if (sg && !stages.failed) try {
      double b1 = 1;
      if (cert) {
        for (const CocycleFit& f : cert->fits)
          if (f.cocycle == cfg.sigma.name()) b1 = f.slope;
      } else {
        b1 = fit_word_magnitude(m, *sg, cfg.sigma).slope;
      }
      GapReport gap = gap_report(gamma_profile, semi_profile, delta, b1,
                                 static_cast<int>(seed.size()), cfg.gap_tolerance, cfg.gap_margin);
      Json j;
      j["deltaTarget"] = num(gap.delta_target);
      j["deltaHatSemigroup"] = num(gap.delta_hat_semigroup);
      j["deltaHatGroup"] = num(gap.delta_hat_group);
      j["B1"] = num(gap.word_slope);
      j["seedSize"] = gap.seed_size;
      j["allPass"] = gap.all_pass;
      Json arr = Json::array();
      for (const GapBand& b : gap.assertions) {
        Json bj;
        bj["name"] = b.name;
        bj["lhs"] = num(b.lhs);
        bj["rhs"] = num(b.rhs);
        bj["pass"] = b.pass;
        arr.push_back(bj);
      }
      j["assertions"] = arr;
      doc["gap"] = j;
      stages.ok("gap-report");
    } catch (const std::exception& e) {
      stages.fail("gap-report", e.what());
    }

  // --- E/E' separation ---
  if (sg && scales && !stages.failed) try {
      SeparationReport sep = separation_report(m, *sg, *scales, limit_samples);
      Json j;
      j["productsNearX"] = sep.products_near_x;
      j["inversesFarFromX"] = sep.inverses_far_from_x;
      j["witnessMeetsLimitSet"] = sep.witness_meets_limit_set;
      j["witnessAvoidsSemigroup"] = sep.witness_avoids_semigroup;
      j["maxProductDistance"] = num(sep.max_product_distance);
      j["minInverseDistance"] = num(sep.min_inverse_distance);
      j["pass"] = sep.pass();
      doc["separation"] = j;
      stages.ok("separation");
    } catch (const std::exception& e) {
      stages.fail("separation", e.what());
    }

  // --- truncated Patterson-Sullivan measures ---
  if (sg && scales && !stages.failed) try {
      Json schedule = Json::array();
      double dh = semi_profile.delta_hat;
      for (double off : {0.3, 0.15, 0.05}) {
        double s = dh + off;
        MeasureTruncation nu = ps_truncation(m, sg->elements, cfg.sigma, s, dh);
        double wsum = 0;
        for (double w : nu.weights) wsum += w;
        double c1 = 0;
        for (const GroupElement& g : seed) {
          Shadow sh = shadow(m, g, scales->t0 / 2);
          double mass = shadow_measure(m, nu, sg->elements, sh);
          c1 = std::max(c1, mass * std::exp(delta * magnitude(m, g, cfg.sigma)));
        }
        Json e;
        e["s"] = num(s);
        e["normalizer"] = num(nu.normalizer);
        e["weightSum"] = num(wsum);
        e["firstGenerationC1"] = num(c1);
        schedule.push_back(e);
      }
      doc["psTruncation"] = Json{{"deltaHat", num(dh)}, {"schedule", schedule}};
      stages.ok("ps-truncation");
    } catch (const std::exception& e) {
      stages.fail("ps-truncation", e.what());
    }

  // --- growth lower bound ---
  if (sg && !stages.failed) try {
      GrowthCheck g = growth_lower_bound_check(semi_profile, semi_shallow, semi_profile.delta_hat);
      Json j;
      j["cDeep"] = num(g.c_deep);
      j["cShallow"] = num(g.c_shallow);
      j["pass"] = g.pass;
      doc["growthLowerBound"] = j;
      stages.ok("growth-bound");
    } catch (const std::exception& e) {
      stages.fail("growth-bound", e.what());
    }

  // --- root gaps, cones, coarse triangle data (matrix models) ---
  if (sg && m.is_matrix_model() && !stages.failed) try {
      std::vector<int> theta = cfg.sigma.theta;
      if (theta.empty())
        for (int i = 1; i < m.dim; ++i) theta.push_back(i);
      AnosovFit fit = anosov_fit(m, sg->elements, theta, sg->depth);
      Json j;
      j["theta"] = theta;
      j["noGap"] = fit.no_gap;
      j["C"] = num(fit.slope);
      j["c"] = num(fit.offset);
      j["recheckPass"] = fit.recheck_pass;
      Json hull = Json::array();
      for (auto [k, v] : fit.lower_hull) hull.push_back(Json{{"len", k}, {"minRoot", num(v)}});
      j["lowerHull"] = hull;
      doc["anosovFit"] = j;
      if (!fit.no_gap) {
        ConeSpec cone = cone_sweep(m, *sg, theta);
        Json cj;
        cj["B"] = cone.separation_distance;
        cj["b"] = num(cone.wall_margin);
        cj["pairs"] = cone.pairs;
        cj["iotaClosed"] = cone.iota_closed;
        cj["hullWallSeparated"] = cone.hull_wall_separated;
        cj["thetaAdmissible"] = cone.theta_admissible;
        cj["storedGenerators"] = cone.generators.size();
        doc["cone"] = cj;
        LinearFunctional phi = cfg.sigma.kind == CocycleKind::CartanMagnitude
                                   ? cfg.sigma.phi
                                   : LinearFunctional::omega1(m.dim);
        DphiReport dr = triangle_defect(m, *sg, phi, cone);
        Json dj;
        dj["phi"] = dr.phi;
        dj["maxDefect"] = num(dr.max_defect);
        dj["triples"] = dr.triples;
        dj["Q"] = num(dr.qi_upper);
        dj["q"] = num(dr.qi_offset);
        dj["phiConeMin"] = num(dr.phi_cone_min);
        doc["dphi"] = dj;
      }
      stages.ok("anosov-cone");
    } catch (const std::exception& e) {
      stages.fail("anosov-cone", e.what());
    }
  else if (sg && !m.is_matrix_model())
    stages.skip("anosov-cone", "tree model has no Cartan data");

  doc["stages"] = stages.arr;
  if (stages.failed && exit_code == 0) exit_code = 1;
  return {doc, exit_code};
}

}  // namespace

RunReport run_pipeline(const RunConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  Json& doc = rep.doc;
  doc["configText"] = cfg.text;
  Json model;
  model["kind"] = model_kind_name(cfg.model.kind);
  model["mode"] = cfg.model.mode == GenerationMode::Group ? "group" : "semigroup";
  model["arith"] = cfg.model.arith == Arithmetic::ExactRational ? "exact" : "float";
  if (cfg.model.kind == ModelKind::FreeTree)
    model["rank"] = cfg.model.rank;
  else {
    model["dim"] = cfg.model.dim;
    Json gens = Json::array();
    for (const RatMat& g : cfg.model.generators) gens.push_back(rat_mat_pretty(g));
    model["generators"] = gens;
  }
  doc["model"] = model;
  doc["sigma"] = cfg.sigma.name();

  if (cfg.sequence_fractions.empty()) {
    doc["mode"] = "single";
    auto [single, code] = run_single(cfg, 0);
    doc.update(single);
    rep.exit_code = code;
  } else {
    doc["mode"] = "sequence";
    Json runs = Json::array();
    double prev = -std::numeric_limits<double>::infinity();
    bool increasing = true, below_group = true;
    int worst = 0;
    for (double f : cfg.sequence_fractions) {
      RunConfig sub = cfg;
      sub.sequence_fractions.clear();
      sub.delta_auto = true;
      sub.delta_fraction = f;
      auto [single, code] = run_single(sub, 0);
      Json entry;
      entry["fraction"] = num(f);
      entry["exitCode"] = code;
      entry["deltaTarget"] = single.contains("deltaTarget") ? single["deltaTarget"] : Json();
      if (single.contains("semigroupProfile")) {
        double dh = single["semigroupProfile"]["deltaHat"].get<double>();
        double dg = single["gammaProfile"]["deltaHat"].get<double>();
        entry["deltaHatSemigroup"] = num(dh);
        entry["deltaHatGroup"] = num(dg);
        if (dh <= prev) increasing = false;
        if (dh >= dg) below_group = false;
        prev = dh;
      } else {
        increasing = false;
      }
      entry["report"] = single;
      runs.push_back(entry);
      worst = std::max(worst, code);
    }
    doc["sequence"] = runs;
    doc["sequenceStrictlyIncreasing"] = increasing;
    doc["sequenceBelowGroup"] = below_group;
    rep.exit_code = worst;
  }

  auto t1 = std::chrono::steady_clock::now();
  doc["telemetry"] = Json{
      {"wallMs", std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()}};
  return rep;
}

std::vector<std::string> emit(const RunReport& report, const RunConfig& cfg, EmitFormat format) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create output dir: " + cfg.output_dir);

  auto write_file = [&](const std::string& name, const std::string& body) {
    std::string path = cfg.output_dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write: " + path);
    out << body;
    written.push_back(path);
  };

  if (format != EmitFormat::CsvOnly) write_file("report.json", canonical_dump(report.doc) + "\n");

  if (format != EmitFormat::JsonOnly) {
    // Re-derive the CSV bundle from the config for full fidelity.
    RunConfig sub = cfg;
    sub.sequence_fractions.clear();
    const GroupModel& m = sub.model;
    Ball ball = enumerate_ball(m, std::min(sub.enumeration_depth, 8), sub.enumeration_cap);
    write_file("elements.csv", ball_to_csv(ball));
    CountingProfile p = counting_profile(m, ball.elements, sub.sigma, ball.radius, ball.truncated);
    write_file("profile_gamma.csv", profile_to_csv(p));
    if (report.doc.contains("certificate") && report.doc["certificate"].contains("seed")) {
      std::vector<GroupElement> seed;
      for (const auto& w : report.doc["certificate"]["seed"]) {
        if (m.kind == ModelKind::FreeTree)
          seed.push_back(model_element_from_word(m, word_from_pretty(w.get<std::string>())));
        else {
          Word letters;
          for (const std::string& tok : split(w.get<std::string>(), '.'))
            for (int gi = 0; gi < m.effective_generator_count(); ++gi)
              if (m.effective_generator_name(gi) == tok) letters.push_back(static_cast<Letter>(gi));
          seed.push_back(model_element_from_word(m, letters));
        }
      }
      if (!seed.empty() && report.doc.contains("scales")) {
        double t0 = report.doc["scales"]["t0"].get<double>();
        std::vector<Shadow> shs;
        for (const GroupElement& s : seed) shs.push_back(shadow(m, s, t0 / 2));
        write_file("shadows.csv", shadows_to_csv(m, shs));
        Semigroup sg = semigroup_enumerate(m, seed, sub.certification_depth);
        CountingProfile sp = counting_profile(m, sg.elements, sub.sigma, sg.depth, false);
        write_file("profile_semigroup.csv", profile_to_csv(sp));
        if (m.is_matrix_model()) {
          std::vector<int> theta = sub.sigma.theta;
          if (theta.empty())
            for (int i = 1; i < m.dim; ++i) theta.push_back(i);
          AnosovFit fit = anosov_fit(m, sg.elements, theta, sg.depth);
          write_file("hull.csv", hull_to_csv(fit));
          if (!fit.no_gap) write_file("cone.csv", cone_to_csv(cone_sweep(m, sg, theta)));
        }
      }
    }
  }
  return written;
}

namespace {

bool json_close(const Json& a, const Json& b, std::string path, std::string* where) {
  if (path == "/telemetry") return true;  // wall clock is not reproducible
  if (a.is_number_float() || b.is_number_float()) {
    if (!(a.is_number() && b.is_number())) {
      *where = path;
      return false;
    }
    double x = a.get<double>(), y = b.get<double>();
    if (std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)})) return true;
    *where = path;
    return false;
  }
  if (a.type() != b.type()) {
    *where = path;
    return false;
  }
  if (a.is_object()) {
    if (a.size() != b.size()) {
      *where = path;
      return false;
    }
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key())) {
        *where = path + "/" + it.key();
        return false;
      }
      if (!json_close(it.value(), b[it.key()], path + "/" + it.key(), where)) return false;
    }
    return true;
  }
  if (a.is_array()) {
    if (a.size() != b.size()) {
      *where = path;
      return false;
    }
    for (size_t i = 0; i < a.size(); ++i)
      if (!json_close(a[i], b[i], path + "/" + std::to_string(i), where)) return false;
    return true;
  }
  if (a == b) return true;
  *where = path;
  return false;
}

}  // namespace

ReplayResult replay(const std::string& report_path) {
  std::ifstream in(report_path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read report: " + report_path);
  Json old = Json::parse(in, nullptr, true, true);
  if (!old.contains("configText"))
    throw Error(ErrorKind::IoError, "report carries no config echo: " + report_path);
  RunConfig cfg = parse_config(old["configText"].get<std::string>());
  ReplayResult out;
  out.fresh = run_pipeline(cfg);
  std::string where;
  out.match = json_close(old, out.fresh.doc, "", &where);
  out.first_mismatch = where;
  return out;
}

}  // namespace bjs
