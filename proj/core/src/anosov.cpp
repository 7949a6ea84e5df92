#include "bjs/anosov.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "bjs/errors.hpp"

namespace bjs {

namespace {

MatD to_matd(const GroupModel& m, const GroupElement& g) {
  return m.arith == Arithmetic::ExactRational ? rat_to_double(g.mat) : g.matf;
}

VecD kappa_of(const MatD& A) {
  if (A.rows() == 2) {
    // closed form for det = +-1
    double s = A.squaredNorm();
    double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    double disc = std::sqrt(std::max(0.0, s * s - 4 * det * det));
    double l1 = 0.5 * std::log((s + disc) / 2);
    VecD k(2);
    k << l1, -l1;
    return k;
  }
  return cartan_projection(A).entries;
}

double min_root_value(const VecD& k, const std::vector<int>& theta) {
  double best = std::numeric_limits<double>::infinity();
  for (int i : theta) best = std::min(best, k(i - 1) - k(i));
  return best;
}

int tree_distance(const Word& a, const Word& b) {
  int cpl = common_prefix_length(a, b);
  return static_cast<int>(a.size()) + static_cast<int>(b.size()) - 2 * cpl;
}

}  // namespace

AnosovFit anosov_fit(const GroupModel& m, const std::vector<GroupElement>& elements,
                     const std::vector<int>& theta, int depth) {
  if (!m.is_matrix_model())
    throw Error(ErrorKind::ModelMismatch, "root-gap fits need a matrix model");
  if (theta.empty()) throw Error(ErrorKind::ConfigError, "theta must be nonempty");
  AnosovFit fit;
  fit.theta = theta;
  fit.depth = depth;

  std::vector<double> min_by_len(static_cast<size_t>(depth) + 1,
                                 std::numeric_limits<double>::infinity());
  std::vector<VecD> kappas(elements.size());
  for (size_t i = 0; i < elements.size(); ++i) {
    kappas[i] = kappa_of(to_matd(m, elements[i]));
    int len = elements[i].length;
    if (len < 0 || len > depth) continue;
    double v = min_root_value(kappas[i], theta);
    min_by_len[static_cast<size_t>(len)] = std::min(min_by_len[static_cast<size_t>(len)], v);
  }

  // Lower convex hull of (length, min root value) by monotone chain.
  std::vector<std::pair<int, double>> hull;
  for (int k = 0; k <= depth; ++k) {
    double v = min_by_len[static_cast<size_t>(k)];
    if (!std::isfinite(v)) continue;
    while (hull.size() >= 2) {
      auto [x1, y1] = hull[hull.size() - 2];
      auto [x2, y2] = hull[hull.size() - 1];
      // keep the chain convex from below
      if ((y2 - y1) * (k - x1) >= (v - y1) * (x2 - x1)) hull.pop_back();
      else break;
    }
    hull.emplace_back(k, v);
  }
  fit.lower_hull = hull;
  if (hull.size() < 2) {
    fit.no_gap = true;
    return fit;
  }
  auto [xa, ya] = hull[hull.size() - 2];
  auto [xb, yb] = hull[hull.size() - 1];
  fit.slope = (yb - ya) / (xb - xa);
  if (!(fit.slope > 0)) {
    fit.no_gap = true;
    fit.slope = 0;
    return fit;
  }
  double c = 0;
  for (int k = 0; k <= depth; ++k) {
    double v = min_by_len[static_cast<size_t>(k)];
    if (!std::isfinite(v)) continue;
    c = std::max(c, fit.slope * k - v);
  }
  fit.offset = c;

  fit.recheck_pass = true;
  for (size_t i = 0; i < elements.size(); ++i) {
    for (int t : theta) {
      double root = kappas[i](t - 1) - kappas[i](t);
      if (root + 1e-9 < fit.slope * elements[i].length - fit.offset) {
        fit.recheck_pass = false;
        break;
      }
    }
    if (!fit.recheck_pass) break;
  }
  return fit;
}

ConeSpec cone_build(const GroupModel& m, const Semigroup& sg, const std::vector<int>& theta, int B,
                    size_t max_pairs, uint64_t seed) {
  if (!m.is_matrix_model()) throw Error(ErrorKind::ModelMismatch, "cones need a matrix model");
  if (B < 1) throw Error(ErrorKind::ConfigError, "separation distance must be >= 1");
  ConeSpec cone;
  cone.theta = theta;
  cone.separation_distance = B;

  size_t n = sg.elements.size();
  std::vector<MatD> mats(n);
  std::vector<MatD> inverses(n);
  for (size_t i = 0; i < n; ++i) {
    mats[i] = to_matd(m, sg.elements[i]);
    inverses[i] = mats[i].inverse();
  }

  auto margin_of = [&](const VecD& v) {
    double nv = v.norm();
    if (nv < 1e-300) return 0.0;
    CartanVector kv;
    kv.entries = v;
    return min_theta_root(kv, theta) / nv;
  };

  // The margin is audited over every admissible pair; only a capped subset
  // of the projected vectors is stored as the cone's generating set.
  const size_t store_cap = 20000;
  std::vector<VecD> vecs;
  double min_margin = std::numeric_limits<double>::infinity();
  size_t admissible = 0;
  auto consider = [&](size_t i, size_t j) {
    if (i == j) return;
    if (tree_distance(sg.seed_words[i], sg.seed_words[j]) < B) return;
    VecD k = kappa_of(inverses[i] * mats[j]);
    CartanVector kv;
    kv.entries = k;
    VecD v = partial_projection(kv, theta).entries;
    min_margin = std::min(min_margin, margin_of(v));
    min_margin = std::min(min_margin, margin_of(iota(v)));
    if (vecs.size() < store_cap) vecs.push_back(std::move(v));
    ++admissible;
    ++cone.pairs;
  };
  if (n * n <= max_pairs) {
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) consider(i, j);
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, n - 1);
    for (size_t s = 0; s < max_pairs; ++s) consider(pick(rng), pick(rng));
  }
  if (admissible == 0) throw Error(ErrorKind::NoSamples, "no pairs at the requested tree distance");

  // Close the stored set under the opposition involution.
  size_t base = vecs.size();
  for (size_t i = 0; i < base; ++i) vecs.push_back(iota(vecs[i]));
  cone.generators = std::move(vecs);
  cone.wall_margin = std::isfinite(min_margin) ? min_margin : 0;

  cone.iota_closed = true;  // by construction; verified by exact index check
  for (size_t i = 0; i < base && cone.iota_closed; ++i) {
    VecD want = iota(cone.generators[i]);
    if ((cone.generators[base + i] - want).cwiseAbs().maxCoeff() > 0) cone.iota_closed = false;
  }

  // Convexified wall separation, checked on pairwise midpoints and sampled
  // hull points.
  cone.hull_wall_separated = cone.wall_margin > 0;
  if (cone.hull_wall_separated) {
    std::mt19937_64 rng(seed + 1);
    std::uniform_int_distribution<size_t> pick(0, cone.generators.size() - 1);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    size_t midpoint_budget = std::min<size_t>(20000, cone.generators.size() * cone.generators.size());
    for (size_t s = 0; s < midpoint_budget && cone.hull_wall_separated; ++s) {
      const VecD& a = cone.generators[pick(rng)];
      const VecD& b = cone.generators[pick(rng)];
      double t = (s % 2 == 0) ? 0.5 : u01(rng);
      VecD mid = t * a + (1 - t) * b;
      if (mid.norm() < 1e-12) continue;
      if (margin_of(mid) <= 0) cone.hull_wall_separated = false;
    }
  }
  cone.theta_admissible = cone.iota_closed && cone.hull_wall_separated && cone.wall_margin > 0;
  return cone;
}

ConeSpec cone_sweep(const GroupModel& m, const Semigroup& sg, const std::vector<int>& theta) {
  ConeSpec last;
  for (int B : {2, 3, 4, 5}) {
    try {
      last = cone_build(m, sg, theta, B);
    } catch (const Error&) {
      continue;
    }
    if (last.wall_margin > 0) return last;
  }
  return last;
}

double dphi(const GroupModel& m, const LinearFunctional& phi, const GroupElement& g1,
            const GroupElement& g2) {
  MatD rel = to_matd(m, g1).inverse() * to_matd(m, g2);
  return phi(kappa_of(rel));
}

DphiReport triangle_defect(const GroupModel& m, const Semigroup& sg, const LinearFunctional& phi,
                           const ConeSpec& cone, size_t max_triples, uint64_t seed) {
  DphiReport rep;
  rep.phi = phi.label;

  rep.phi_cone_min = std::numeric_limits<double>::infinity();
  for (const VecD& v : cone.generators) {
    double nv = v.norm();
    if (nv < 1e-300) continue;
    rep.phi_cone_min = std::min(rep.phi_cone_min, phi(v) / nv);
  }
  if (!std::isfinite(rep.phi_cone_min)) rep.phi_cone_min = 0;
  if (rep.phi_cone_min <= 0)
    throw Error(ErrorKind::PhiConeMismatch, "phi is not positive on the built cone");

  size_t n = sg.elements.size();
  std::vector<MatD> mats(n), inverses(n);
  for (size_t i = 0; i < n; ++i) {
    mats[i] = to_matd(m, sg.elements[i]);
    inverses[i] = mats[i].inverse();
  }
  // Pairwise d_phi and QI data.
  std::vector<double> dp(n * n, 0.0);
  rep.qi_upper = 1.0;
  std::vector<double> dx(n * n, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      VecD k = kappa_of(inverses[i] * mats[j]);
      dp[i * n + j] = phi(k);
      double dist_x = k.norm();
      dx[i * n + j] = dist_x;
      int dist_t = tree_distance(sg.seed_words[i], sg.seed_words[j]);
      if (dist_t > 0) rep.qi_upper = std::max(rep.qi_upper, dist_x / dist_t);
    }
  rep.qi_offset = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      int dist_t = tree_distance(sg.seed_words[i], sg.seed_words[j]);
      rep.qi_offset = std::max(rep.qi_offset, dist_t / rep.qi_upper - dx[i * n + j]);
    }

  auto defect = [&](size_t a, size_t b, size_t c) {
    return dp[a * n + c] - dp[a * n + b] - dp[b * n + c];
  };
  if (n * n * n <= max_triples) {
    for (size_t a = 0; a < n; ++a)
      for (size_t b = 0; b < n; ++b)
        for (size_t c = 0; c < n; ++c) {
          rep.max_defect = std::max(rep.max_defect, defect(a, b, c));
          ++rep.triples;
        }
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, n - 1);
    for (size_t s = 0; s < max_triples; ++s) {
      rep.max_defect = std::max(rep.max_defect, defect(pick(rng), pick(rng), pick(rng)));
      ++rep.triples;
    }
  }
  return rep;
}

std::string cone_to_csv(const ConeSpec& cone) {
  std::ostringstream os;
  os.precision(17);
  os << "index";
  if (!cone.generators.empty())
    for (int i = 0; i < cone.generators.front().size(); ++i) os << ",v" << i;
  os << '\n';
  for (size_t i = 0; i < cone.generators.size(); ++i) {
    os << i;
    for (int j = 0; j < cone.generators[i].size(); ++j) os << ',' << cone.generators[i](j);
    os << '\n';
  }
  return os.str();
}

std::string hull_to_csv(const AnosovFit& fit) {
  std::ostringstream os;
  os.precision(17);
  os << "wordLength,minRoot\n";
  for (auto [k, v] : fit.lower_hull) os << k << ',' << v << '\n';
  return os.str();
}

}  // namespace bjs
