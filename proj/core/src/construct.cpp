#include "bjs/construct.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "bjs/errors.hpp"

namespace bjs {

namespace {

std::string describe(const GroupModel& m, const GroupElement& g) {
  if (m.kind == ModelKind::FreeTree) return word_pretty(g.tree_value);
  std::string s;
  for (size_t i = 0; i < g.word.size(); ++i) {
    if (i) s += '.';
    s += m.effective_generator_name(static_cast<int>(g.word[i]));
  }
  return s.empty() ? "id" : s;
}

// min of the four separations of an adjusted element: fixed-point spread and
// the distances of the orbit point and its inverse to the repelling point.
double loxodromic_separation(const GroupModel& m, const GroupElement& g) {
  auto data = loxodromic_data(m, g);
  if (!data) return -1.0;
  CompactifiedPoint att = boundary(m, data->attracting);
  CompactifiedPoint rep = boundary(m, data->repelling);
  CompactifiedPoint pg = compactify(m, g);
  CompactifiedPoint pgi = compactify(m, inverse(m, g));
  double v = dist(m, att, rep);
  v = std::min(v, dist(m, pg, rep));
  v = std::min(v, dist(m, att, pgi));
  v = std::min(v, dist(m, pg, pgi));
  return v;
}

}  // namespace

AdjusterResult find_adjusters(const GroupModel& m, const Ball& ball, int candidate_depth) {
  if (m.kind == ModelKind::Linear)
    throw Error(ErrorKind::ModelMismatch, "adjuster search needs a compactified metric");
  std::vector<const GroupElement*> sample;
  for (const GroupElement& e : ball.elements)
    if (e.length >= 1 && e.length <= candidate_depth) sample.push_back(&e);
  if (sample.empty()) throw Error(ErrorKind::NoSamples, "empty adjuster sample");

  int f_budget = std::max(1, candidate_depth / 2);
  std::vector<const GroupElement*> candidates;
  candidates.push_back(nullptr);  // identity
  for (const GroupElement& e : ball.elements)
    if (e.length >= 1 && e.length <= f_budget) candidates.push_back(&e);

  GroupElement id = model_identity(m);
  auto adjusted_sep = [&](const GroupElement& g, const GroupElement* f) {
    return loxodromic_separation(m, f ? multiply(m, g, *f) : g);
  };

  // Greedy cover: start from F = {id} and add the candidate that most raises
  // the worst-case separation, until no candidate improves it.
  std::vector<const GroupElement*> F{nullptr};
  std::vector<double> best_sep(sample.size());
  for (size_t i = 0; i < sample.size(); ++i) best_sep[i] = adjusted_sep(*sample[i], nullptr);

  auto worst = [&]() { return *std::min_element(best_sep.begin(), best_sep.end()); };

  const size_t f_cap = 9;
  while (F.size() < f_cap) {
    double current = worst();
    double best_gain = current;
    const GroupElement* best_candidate = nullptr;
    std::vector<double> best_vec;
    for (const GroupElement* cand : candidates) {
      if (!cand) continue;
      std::vector<double> trial = best_sep;
      for (size_t i = 0; i < sample.size(); ++i)
        trial[i] = std::max(trial[i], adjusted_sep(*sample[i], cand));
      double w = *std::min_element(trial.begin(), trial.end());
      if (w > best_gain + 1e-12) {
        best_gain = w;
        best_candidate = cand;
        best_vec = std::move(trial);
      }
    }
    if (!best_candidate) break;
    F.push_back(best_candidate);
    best_sep = std::move(best_vec);
  }

  AdjusterResult out;
  out.epsilon_tilde = worst();
  out.sampled = sample.size();
  if (out.epsilon_tilde <= 0)
    throw Error(ErrorKind::AmsSearchFailed,
                "no adjuster set within depth budget " + std::to_string(f_budget));
  for (const GroupElement* f : F) out.adjusters.push_back(f ? *f : id);
  return out;
}

ConstructionScales derive_scales(const GroupModel& m, const CompactifiedPoint& x,
                                 const CompactifiedPoint& y, double epsilon_tilde) {
  ConstructionScales s;
  s.x = x;
  s.y = y;
  s.epsilon_tilde = epsilon_tilde;
  s.base_distance = dist(m, y, x);
  if (!(s.base_distance > 0) || !(s.base_distance < epsilon_tilde / 4))
    throw Error(ErrorKind::ScaleInfeasible,
                "need 0 < d(y,x) < epsilon~/4, have d=" + std::to_string(s.base_distance) +
                    " epsilon~=" + std::to_string(epsilon_tilde));
  double d = s.base_distance;
  s.t0 = 2.0 / 3.0 * d;
  s.s1 = 3.0 / 4.0 * d;
  s.s2 = 5.0 / 4.0 * d;
  s.epsilon0 = d / 13.0;
  bool chain = 0 < s.t0 && s.t0 < s.s1 && s.s1 < d && d < s.s2 && s.s2 < 2 * s.t0 &&
               s.t0 < epsilon_tilde / 4 && s.epsilon0 < d / 12.0;
  if (!chain) throw Error(ErrorKind::ScaleInfeasible, "scale chain violated");
  return s;
}

double estimate_shadow_separation_constant(const GroupModel& m, const CocycleSpec& sigma,
                                           const Ball& ball, double eps, double mag_window,
                                           size_t max_pairs, uint64_t seed) {
  size_t n = ball.elements.size();
  if (n == 0) throw Error(ErrorKind::NoSamples, "empty ball");
  std::vector<double> mags(n);
  std::vector<Shadow> shadows(n);
  for (size_t i = 0; i < n; ++i) {
    mags[i] = magnitude(m, ball.elements[i], sigma);
    shadows[i] = shadow(m, ball.elements[i], eps);
  }
  double worst = 0;
  size_t seen = 0;
  auto consider = [&](size_t i, size_t j) {
    if (i == j) return;
    if (std::abs(mags[i] - mags[j]) > mag_window) return;
    if (disjoint(m, shadows[i], shadows[j]) == Tri::True) return;
    GroupElement rel = multiply(m, inverse(m, ball.elements[i]), ball.elements[j]);
    worst = std::max(worst, magnitude(m, rel, sigma));
    ++seen;
  };
  if (n * n <= max_pairs) {
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) consider(i, j);
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, n - 1);
    for (size_t s2 = 0; s2 < max_pairs; ++s2) consider(pick(rng), pick(rng));
  }
  (void)seen;
  return worst;
}

AnnulusSupplier annuli_from_ball(const GroupModel& m, const Ball& ball, const CocycleSpec& sigma,
                                 const ConstructionScales& scales) {
  // Shared snapshot; the supplier is called once per annulus level.
  auto model = std::make_shared<GroupModel>(m);
  auto elems = std::make_shared<std::vector<GroupElement>>();
  auto mags = std::make_shared<std::vector<double>>();
  CompactifiedPoint x = scales.x;
  double radius = scales.t0 / 2;
  for (const GroupElement& e : ball.elements) {
    if (e.length == 0) continue;
    if (dist(m, compactify(m, e), x) >= radius) continue;
    elems->push_back(e);
    mags->push_back(magnitude(m, e, sigma));
  }
  return [model, elems, mags](int n) {
    std::vector<GroupElement> out;
    for (size_t i = 0; i < elems->size(); ++i)
      if ((*mags)[i] >= n && (*mags)[i] < n + 1) out.push_back((*elems)[i]);
    return out;
  };
}

AnnulusSupplier annuli_from_cylinder(const GroupModel& m, const CocycleSpec& sigma,
                                     const ConstructionScales& scales) {
  if (m.kind != ModelKind::FreeTree || sigma.kind != CocycleKind::BusemannTree)
    throw Error(ErrorKind::ModelMismatch, "cylinder annuli need the tree model");
  if (scales.x.interior) throw Error(ErrorKind::ConfigError, "x must be a boundary point");
  // d(w, x) < t0/2  <=>  w extends the prefix of x of length c.
  int c = 0;
  while (std::ldexp(1.0, -c) >= scales.t0 / 2) ++c;
  Word prefix = scales.x.b.ray.substr(0, static_cast<size_t>(c));
  if (static_cast<int>(prefix.size()) < c)
    throw Error(ErrorKind::ConfigError, "boundary ray truncated too early for this scale");
  auto model = std::make_shared<GroupModel>(m);
  return [model, prefix](int n) {
    std::vector<GroupElement> out;
    if (n <= static_cast<int>(prefix.size())) return out;
    // Depth-first lexicographic extension of the prefix to length n.
    int letters = model->mode == GenerationMode::Group ? 2 * model->rank : model->rank;
    Word w = prefix;
    std::vector<int> stack{-1};
    while (!stack.empty()) {
      if (static_cast<int>(w.size()) == n) {
        GroupElement e;
        e.tree_value = w;
        e.word = w;
        e.key = w;
        e.length = n;
        out.push_back(std::move(e));
        // backtrack
        w.pop_back();
        stack.pop_back();
        continue;
      }
      int next = ++stack.back();
      if (next >= letters) {
        stack.pop_back();
        if (!w.empty() && static_cast<int>(w.size()) > static_cast<int>(prefix.size())) w.pop_back();
        else break;
        continue;
      }
      Letter l = model->tree_letter(next);
      if (!w.empty() && w.back() == letter_inverse(l)) continue;
      w.push_back(l);
      stack.push_back(-1);
    }
    return out;
  };
}

SeedSelection select_seed(const GroupModel& m, const CocycleSpec& sigma, double delta,
                          const ConstructionScales& scales, const AdjusterResult& adjusters,
                          const SeedThresholds& thresholds, const AnnulusSupplier& annuli,
                          int annulus_min, int annulus_max) {
  SeedSelection sel;
  sel.threshold = std::exp(delta * (thresholds.c_finite + thresholds.c_upper));
  for (int n = annulus_min; n <= annulus_max; ++n) {
    std::vector<GroupElement> ring = annuli(n);
    if (ring.empty()) continue;
    ColoringPartition part = magnitude_partition(m, ring, thresholds.coloring, sigma);
    WTraceEntry best{n, -1, -1, 0.0, 0};
    for (int ci = 0; ci < static_cast<int>(part.classes.size()); ++ci) {
      for (int fi = 0; fi < static_cast<int>(adjusters.adjusters.size()); ++fi) {
        const GroupElement& f = adjusters.adjusters[static_cast<size_t>(fi)];
        std::vector<GroupElement> cand;
        double w = 0;
        for (int idx : part.classes[static_cast<size_t>(ci)]) {
          GroupElement gf = f.is_identity() ? ring[static_cast<size_t>(idx)]
                                            : multiply(m, ring[static_cast<size_t>(idx)], f);
          if (loxodromic_separation(m, gf) <= scales.epsilon_tilde) continue;
          if (dist(m, compactify(m, gf), scales.x) >= scales.t0) continue;
          w += std::exp(-delta * magnitude(m, gf, sigma));
          cand.push_back(std::move(gf));
        }
        if (w > best.weight) best = {n, ci, fi, w, static_cast<int>(cand.size())};
        if (w >= sel.threshold && cand.size() >= 2) {
          sel.found = true;
          sel.status = "ok";
          sel.seed = std::move(cand);
          sel.annulus = n;
          sel.color_class = ci;
          sel.adjuster = fi;
          sel.weight = w;
          sel.trace.push_back(best);
          return sel;
        }
      }
    }
    sel.trace.push_back(best);
  }
  sel.status = "seed-not-found";
  return sel;
}

SeedCertificate certify(const GroupModel& m, const CocycleSpec& sigma,
                        const std::vector<CocycleSpec>& registered,
                        const std::vector<GroupElement>& seed, const ConstructionScales& scales,
                        double delta, int L) {
  if (seed.empty()) throw Error(ErrorKind::ConfigError, "empty seed");
  if (L < 2) throw Error(ErrorKind::ConfigError, "certification depth must be >= 2");

  SeedCertificate cert;
  cert.delta = delta;
  cert.depth = L;
  cert.scales = scales;
  cert.sigma_name = sigma.name();
  cert.seed = seed;

  std::vector<GroupElement> seed_inv;
  std::vector<double> seed_inv_mag;
  for (const GroupElement& s : seed) {
    seed_inv.push_back(inverse(m, s));
    seed_inv_mag.push_back(magnitude(m, seed_inv.back(), sigma));
  }
  cert.max_inverse_magnitude = *std::max_element(seed_inv_mag.begin(), seed_inv_mag.end());

  PropertyCheck nesting{"shadow-nesting", true, 0, ""};
  PropertyCheck disjointness{"sibling-disjointness", true, 0, ""};
  PropertyCheck inv_mag{"inverse-magnitude-bound", true, 0, ""};
  PropertyCheck weighted{"weighted-sum", true, 0, ""};
  PropertyCheck avoid{"inverse-ball-avoidance", true, 0, ""};
  PropertyCheck freeness{"freeness", true, 0, ""};

  std::vector<CompactifiedPoint> seed_inv_pts;
  for (const GroupElement& si : seed_inv) seed_inv_pts.push_back(compactify(m, si));

  struct Node {
    GroupElement g;
    double mag;
    int first_letter;
    int generation;
  };
  std::vector<Node> layer{{model_identity(m), magnitude(m, model_identity(m), sigma), -1, 0}};
  std::unordered_set<std::string> keys{layer.front().g.key};
  cert.nodes = 1;
  cert.property4_min_slack = std::numeric_limits<double>::infinity();

  std::vector<Node> all_nodes = layer;

  for (int depth = 0; depth < L; ++depth) {
    std::vector<Node> next;
    next.reserve(layer.size() * seed.size());
    for (const Node& node : layer) {
      Shadow parent_shadow = shadow(m, node.g, scales.t0 / 2);
      std::vector<Shadow> child_shadows;
      std::vector<Node> children;
      double sum = 0;
      for (size_t si = 0; si < seed.size(); ++si) {
        GroupElement child = multiply(m, node.g, seed[si]);
        double mag_child = magnitude(m, child, sigma);
        sum += std::exp(-delta * mag_child);
        child_shadows.push_back(shadow(m, child, scales.t0 / 4));
        children.push_back({std::move(child), mag_child,
                            node.first_letter < 0 ? static_cast<int>(si) : node.first_letter,
                            depth + 1});
      }
      // (1) every child shadow nests in the parent shadow
      for (size_t si = 0; si < children.size(); ++si) {
        ++nesting.checked;
        if (nested(m, child_shadows[si], parent_shadow) != Tri::True && nesting.pass) {
          nesting.pass = false;
          nesting.counterexample = describe(m, children[si].g) + " vs " + describe(m, node.g);
        }
      }
      // (2) sibling shadows pairwise disjoint
      for (size_t a = 0; a < children.size(); ++a)
        for (size_t b = a + 1; b < children.size(); ++b) {
          ++disjointness.checked;
          if (disjoint(m, child_shadows[a], child_shadows[b]) != Tri::True && disjointness.pass) {
            disjointness.pass = false;
            disjointness.counterexample =
                describe(m, children[a].g) + " vs " + describe(m, children[b].g);
          }
        }
      // (3) ||eta^-1 gamma|| <= D0, recomputed from the actual product
      for (size_t si = 0; si < children.size(); ++si) {
        ++inv_mag.checked;
        double v = magnitude(m, multiply(m, inverse(m, children[si].g), node.g), sigma);
        if (v > cert.max_inverse_magnitude + 1e-9 && inv_mag.pass) {
          inv_mag.pass = false;
          inv_mag.counterexample = describe(m, children[si].g);
        }
      }
      // (4) weighted-sum inequality at this node
      ++weighted.checked;
      double slack = sum * std::exp(delta * node.mag) - 1.0;
      cert.property4_min_slack = std::min(cert.property4_min_slack, slack);
      if (sum + 1e-15 < std::exp(-delta * node.mag) && weighted.pass) {
        weighted.pass = false;
        weighted.counterexample = describe(m, node.g);
      }
      for (Node& c : children) {
        // freeness: canonical keys stay distinct through depth L
        ++freeness.checked;
        if (!keys.insert(c.g.key).second && freeness.pass) {
          freeness.pass = false;
          freeness.counterexample = describe(m, c.g);
        }
        // inverse-ball avoidance at scale epsilon0
        CompactifiedPoint pc = compactify(m, c.g);
        for (const CompactifiedPoint& ip : seed_inv_pts) {
          ++avoid.checked;
          if (dist(m, pc, ip) < scales.epsilon0 && avoid.pass) {
            avoid.pass = false;
            avoid.counterexample = describe(m, c.g);
          }
        }
        next.push_back(std::move(c));
      }
    }
    cert.nodes += next.size();
    all_nodes.insert(all_nodes.end(), next.begin(), next.end());
    layer = std::move(next);
  }

  // r: minimal distance between branches with distinct first letters.
  double r = std::numeric_limits<double>::infinity();
  {
    const size_t cap = 4000;
    std::vector<const Node*> pool;
    for (const Node& n : all_nodes)
      if (n.first_letter >= 0) pool.push_back(&n);
    size_t stride = std::max<size_t>(1, pool.size() / cap);
    std::vector<const Node*> sub;
    for (size_t i = 0; i < pool.size(); i += stride) sub.push_back(pool[i]);
    for (size_t i = 0; i < sub.size(); ++i)
      for (size_t j = i + 1; j < sub.size(); ++j) {
        if (sub[i]->first_letter == sub[j]->first_letter) continue;
        r = std::min(r, dist(m, compactify(m, sub[i]->g), compactify(m, sub[j]->g)));
      }
    if (!std::isfinite(r)) r = 0;
  }
  cert.min_branch_separation = r;

  // Word-magnitude comparability fits over the certified tree: the minimal
  // slope B1 with (1/B1)|gamma|_S - b1 <= ||gamma|| <= B1 |gamma|_S + b1.
  for (const CocycleSpec& spec : registered) {
    double up = 1.0, need_b = 0.0;
    for (const Node& n : all_nodes) {
      if (n.generation == 0) continue;
      double v = magnitude(m, n.g, spec);
      up = std::max(up, v / n.generation);
      if (v > 0)
        up = std::max(up, static_cast<double>(n.generation) / v);
      else
        need_b = std::max(need_b, static_cast<double>(n.generation) / up);
    }
    cert.fits.push_back({spec.name(), up, need_b});
  }

  cert.freeness_depth = freeness.pass ? L : 0;
  cert.checks = {nesting, disjointness, inv_mag, weighted, avoid, freeness};
  cert.pass = nesting.pass && disjointness.pass && inv_mag.pass && weighted.pass && avoid.pass &&
              freeness.pass;
  return cert;
}

Semigroup semigroup_enumerate(const GroupModel& m, const std::vector<GroupElement>& seed, int L) {
  if (seed.empty()) throw Error(ErrorKind::ConfigError, "empty seed");
  Semigroup sg;
  sg.depth = L;
  GroupElement id = model_identity(m);
  sg.elements.push_back(id);
  sg.seed_words.emplace_back();
  std::unordered_map<std::string, int> index{{id.key, 0}};
  size_t shell_begin = 0, shell_end = 1;
  for (int depth = 1; depth <= L; ++depth) {
    for (size_t p = shell_begin; p < shell_end; ++p) {
      GroupElement parent = sg.elements[p];
      Word parent_word = sg.seed_words[p];
      for (size_t si = 0; si < seed.size(); ++si) {
        GroupElement child = multiply(m, parent, seed[si]);
        child.length = depth;
        auto [it, inserted] = index.emplace(child.key, static_cast<int>(sg.elements.size()));
        if (!inserted) {
          ++sg.dedup_collisions;
          continue;
        }
        sg.elements.push_back(std::move(child));
        sg.seed_words.push_back(parent_word + static_cast<Letter>(si));
      }
    }
    shell_begin = shell_end;
    shell_end = sg.elements.size();
  }
  return sg;
}

SeparationReport separation_report(const GroupModel& m, const Semigroup& sg,
                                   const ConstructionScales& scales,
                                   const std::vector<CompactifiedPoint>& limit_set_samples) {
  SeparationReport rep;
  rep.products_near_x = true;
  rep.inverses_far_from_x = true;
  rep.min_inverse_distance = std::numeric_limits<double>::infinity();
  double near = scales.t0 + scales.epsilon0;
  for (const GroupElement& g : sg.elements) {
    if (g.length == 0) continue;
    double dp = dist(m, compactify(m, g), scales.x);
    rep.max_product_distance = std::max(rep.max_product_distance, dp);
    if (dp > near) rep.products_near_x = false;
    double di = dist(m, compactify(m, inverse(m, g)), scales.x);
    rep.min_inverse_distance = std::min(rep.min_inverse_distance, di);
    if (di <= 2 * scales.t0) rep.inverses_far_from_x = false;
  }
  // Annular witness region around x between s1 and s2.
  auto in_witness = [&](const CompactifiedPoint& p) {
    double d = dist(m, p, scales.x);
    return d > scales.s1 && d < scales.s2;
  };
  rep.witness_meets_limit_set = false;
  for (const CompactifiedPoint& p : limit_set_samples)
    if (in_witness(p)) {
      rep.witness_meets_limit_set = true;
      break;
    }
  rep.witness_avoids_semigroup = true;
  for (const GroupElement& g : sg.elements) {
    if (g.length < std::max(1, sg.depth - 1)) continue;  // deep elements proxy accumulation
    if (in_witness(compactify(m, g)) ||
        in_witness(compactify(m, inverse(m, g)))) {
      rep.witness_avoids_semigroup = false;
      break;
    }
  }
  return rep;
}

CocycleFit fit_word_magnitude(const GroupModel& m, const Semigroup& sg, const CocycleSpec& spec) {
  double up = 1.0, need_b = 0.0;
  for (const GroupElement& g : sg.elements) {
    if (g.length == 0) continue;
    double v = magnitude(m, g, spec);
    up = std::max(up, v / g.length);
    if (v > 0)
      up = std::max(up, g.length / v);
    else
      need_b = std::max(need_b, static_cast<double>(g.length));
  }
  return {spec.name(), up, need_b};
}

}  // namespace bjs
