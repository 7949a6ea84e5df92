#include "bjs/shadow.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include "bjs/errors.hpp"

namespace bjs {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

double normalize_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a;
}

// Smallest c >= 0 with 2^-c < eps; boundary points within distance < eps of
// a word agree with it on at least c letters.
int tree_cutoff(double eps) {
  int c = 0;
  while (std::ldexp(1.0, -c) >= eps) {
    ++c;
    if (c > 1100) break;
  }
  return c;
}

bool angle_in_arc(double theta, double start, double extent) {
  double rel = normalize_angle(theta - start);
  return rel <= extent;
}

// CCW arc containment: [s2, s2+e2] inside [s1, s1+e1].
bool arc_subset(double s2, double e2, double s1, double e1) {
  double off = normalize_angle(s2 - s1);
  return off <= e1 && off + e2 <= e1;
}

bool arcs_disjoint(double s1, double e1, double s2, double e2) {
  double off = normalize_angle(s2 - s1);
  if (off <= e1) return false;              // start of 2 inside 1
  if (normalize_angle(s1 - s2) <= e2) return false;  // start of 1 inside 2
  return true;
}

double projective_distance(const VecD& a, const VecD& b) {
  double dot = std::min(std::abs(a.dot(b)), 1.0);
  return std::sqrt(std::max(0.0, 1.0 - dot * dot));
}

}  // namespace

Shadow shadow(const GroupModel& m, const GroupElement& gamma, double epsilon, int cap_samples,
              uint64_t cap_seed) {
  if (epsilon <= 0) throw Error(ErrorKind::ConfigError, "shadow scale must be positive");
  Shadow s;
  s.kind = m.kind;
  s.gamma = gamma;
  s.epsilon = epsilon;
  switch (m.kind) {
    case ModelKind::FreeTree: {
      int len = static_cast<int>(gamma.tree_value.size());
      int c = tree_cutoff(epsilon);
      if (c == 0) {
        s.body = ShadowBody::Empty;  // the ball swallowed the whole boundary
        break;
      }
      if (c > len) {
        s.body = ShadowBody::Full;  // the ball missed the boundary entirely
        break;
      }
      s.body = ShadowBody::Cylinder;
      s.prefix = gamma.tree_value.substr(0, static_cast<size_t>(len - c + 1));
      break;
    }
    case ModelKind::Fuchsian: {
      GroupElement gi = inverse(m, gamma);
      std::complex<double> q = fuchsian_disk_point(m, gi);
      double r = std::abs(q);
      if (r < 1e-15) {
        s.body = epsilon > 1.0 ? ShadowBody::Empty : ShadowBody::Full;
        break;
      }
      double rhs = (1.0 + r * r - epsilon * epsilon) / (2.0 * r);
      if (rhs >= 1.0) {
        s.body = ShadowBody::Full;
        break;
      }
      if (rhs <= -1.0) {
        s.body = ShadowBody::Empty;
        break;
      }
      double phi = std::arg(q);
      double psi = std::acos(rhs);
      // Complement of the ball-arc, mapped through the boundary action;
      // conformal disk maps preserve the circle orientation, and the image
      // of a source midpoint pins the orientation down numerically.
      double a0 = phi + psi, a1 = phi + kTwoPi - psi;
      double ia0 = fuchsian_circle_act(m, gamma, a0);
      double ia1 = fuchsian_circle_act(m, gamma, a1);
      double extent = normalize_angle(ia1 - ia0);
      if (extent == 0) extent = kTwoPi;
      double mid = fuchsian_circle_act(m, gamma, phi + kPi);
      if (!angle_in_arc(mid, ia0, extent)) {
        ia0 = ia1;
        extent = kTwoPi - extent;
      }
      s.body = ShadowBody::Arc;
      s.arc_start = normalize_angle(ia0);
      s.arc_extent = extent;
      s.arc_wraps = s.arc_start + s.arc_extent > kTwoPi;
      break;
    }
    case ModelKind::Linear: {
      MatD A = (m.arith == Arithmetic::ExactRational) ? rat_to_double(gamma.mat) : gamma.matf;
      Eigen::JacobiSVD<MatD> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
      s.body = ShadowBody::SampledCap;
      s.cap_center = svd.matrixU().col(0);
      s.cap_excluded = svd.matrixV().col(A.rows() - 1);  // attracting direction of gamma^-1
      s.cap_resolution = cap_samples;
      s.cap_margin = 2.0 / std::sqrt(static_cast<double>(std::max(cap_samples, 1)));
      std::mt19937_64 rng(cap_seed);
      std::normal_distribution<double> gauss(0.0, 1.0);
      s.cap_samples.reserve(static_cast<size_t>(cap_samples));
      while (static_cast<int>(s.cap_samples.size()) < cap_samples) {
        VecD v(A.rows());
        for (int i = 0; i < v.size(); ++i) v(i) = gauss(rng);
        double n = v.norm();
        if (n < 1e-9) continue;
        v /= n;
        if (projective_distance(v, s.cap_excluded) < epsilon) continue;
        VecD w = A * v;
        w.normalize();
        s.cap_samples.push_back(w);
      }
      break;
    }
  }
  return s;
}

bool shadow_contains(const GroupModel& m, const Shadow& s, const CompactifiedPoint& x) {
  if (x.interior) throw Error(ErrorKind::ModelMismatch, "shadow membership is a boundary predicate");
  if (s.body == ShadowBody::Full) return true;
  if (s.body == ShadowBody::Empty) return false;
  switch (s.body) {
    case ShadowBody::Cylinder:
      return word_has_prefix(x.b.ray, s.prefix);
    case ShadowBody::Arc:
      return angle_in_arc(x.b.angle, s.arc_start, s.arc_extent);
    case ShadowBody::SampledCap: {
      GroupElement gi = inverse(m, s.gamma);
      CompactifiedPoint pre = act(m, gi, x);
      return projective_distance(pre.b.dir, s.cap_excluded) >= s.epsilon;
    }
    default:
      return false;
  }
}

Tri nested(const GroupModel& m, const Shadow& inner, const Shadow& outer) {
  if (inner.kind != outer.kind) throw Error(ErrorKind::ModelMismatch, "shadows of different models");
  if (outer.body == ShadowBody::Full) return Tri::True;
  if (inner.body == ShadowBody::Empty) return Tri::True;
  if (inner.body == ShadowBody::Full) return Tri::False;
  if (outer.body == ShadowBody::Empty) return Tri::False;
  switch (inner.kind) {
    case ModelKind::FreeTree:
      return word_has_prefix(inner.prefix, outer.prefix) ? Tri::True : Tri::False;
    case ModelKind::Fuchsian:
      return arc_subset(inner.arc_start, inner.arc_extent, outer.arc_start, outer.arc_extent)
                 ? Tri::True
                 : Tri::False;
    case ModelKind::Linear: {
      GroupElement gi = inverse(m, outer.gamma);
      bool boundary_close = false;
      for (const VecD& w : inner.cap_samples) {
        CompactifiedPoint x;
        x.kind = ModelKind::Linear;
        x.interior = false;
        x.b = projective_point(w);
        CompactifiedPoint pre = act(m, gi, x);
        double dp = projective_distance(pre.b.dir, outer.cap_excluded);
        if (dp < outer.epsilon - outer.cap_margin) return Tri::False;
        if (dp < outer.epsilon + outer.cap_margin) boundary_close = true;
      }
      return boundary_close ? Tri::Unresolved : Tri::True;
    }
  }
  return Tri::Unresolved;
}

Tri disjoint(const GroupModel& m, const Shadow& a, const Shadow& b) {
  if (a.kind != b.kind) throw Error(ErrorKind::ModelMismatch, "shadows of different models");
  if (a.body == ShadowBody::Empty || b.body == ShadowBody::Empty) return Tri::True;
  if (a.body == ShadowBody::Full || b.body == ShadowBody::Full) return Tri::False;
  switch (a.kind) {
    case ModelKind::FreeTree: {
      bool meet = word_has_prefix(a.prefix, b.prefix) || word_has_prefix(b.prefix, a.prefix);
      return meet ? Tri::False : Tri::True;
    }
    case ModelKind::Fuchsian:
      return arcs_disjoint(a.arc_start, a.arc_extent, b.arc_start, b.arc_extent) ? Tri::True
                                                                                 : Tri::False;
    case ModelKind::Linear: {
      auto side = [&](const Shadow& s1, const Shadow& s2) -> Tri {
        GroupElement gi = inverse(m, s2.gamma);
        Tri out = Tri::True;
        for (const VecD& w : s1.cap_samples) {
          CompactifiedPoint x;
          x.kind = ModelKind::Linear;
          x.interior = false;
          x.b = projective_point(w);
          CompactifiedPoint pre = act(m, gi, x);
          double dp = projective_distance(pre.b.dir, s2.cap_excluded);
          if (dp >= s2.epsilon + s2.cap_margin) return Tri::False;  // sample inside s2
          if (dp >= s2.epsilon - s2.cap_margin) out = Tri::Unresolved;
        }
        return out;
      };
      Tri ab = side(a, b);
      if (ab == Tri::False) return Tri::False;
      Tri ba = side(b, a);
      if (ba == Tri::False) return Tri::False;
      return (ab == Tri::Unresolved || ba == Tri::Unresolved) ? Tri::Unresolved : Tri::True;
    }
  }
  return Tri::Unresolved;
}

double diameter(const GroupModel& m, const Shadow& s) {
  (void)m;
  if (s.body == ShadowBody::Empty) return 0.0;
  switch (s.kind) {
    case ModelKind::FreeTree:
      if (s.body == ShadowBody::Full) return 1.0;
      return std::ldexp(1.0, -static_cast<int>(s.prefix.size()));
    case ModelKind::Fuchsian: {
      if (s.body == ShadowBody::Full) return 2.0;
      if (s.arc_extent > kPi) return 2.0;
      return std::abs(std::polar(1.0, s.arc_start) - std::polar(1.0, s.arc_start + s.arc_extent));
    }
    case ModelKind::Linear: {
      if (s.body == ShadowBody::Full) return 1.0;
      double best = 0;
      for (size_t i = 0; i < s.cap_samples.size(); ++i)
        for (size_t j = i + 1; j < s.cap_samples.size(); ++j)
          best = std::max(best, projective_distance(s.cap_samples[i], s.cap_samples[j]));
      return best;
    }
  }
  return 0.0;
}

ShadowAudit shadow_magnitude_audit(const GroupModel& m, const GroupElement& gamma, double epsilon,
                                   const CocycleSpec& spec, size_t samples, uint64_t seed) {
  Shadow s = shadow(m, gamma, epsilon);
  if (s.body == ShadowBody::Empty) throw Error(ErrorKind::NoSamples, "empty shadow");
  ShadowAudit audit;
  double mg = magnitude(m, gamma, spec);
  GroupElement gi = inverse(m, gamma);
  std::mt19937_64 rng(seed);
  auto record = [&](const CompactifiedPoint& x) {
    CompactifiedPoint pre = act(m, gi, x);
    double v = cocycle_value(m, gamma, pre, spec);
    audit.max_defect = std::max(audit.max_defect, std::abs(v - mg));
    ++audit.samples;
  };
  switch (m.kind) {
    case ModelKind::FreeTree: {
      int rank_letters = m.mode == GenerationMode::Group ? 2 * m.rank : m.rank;
      std::uniform_int_distribution<int> pick(0, rank_letters - 1);
      for (size_t i = 0; i < samples; ++i) {
        Word ray = (s.body == ShadowBody::Cylinder) ? s.prefix : Word{};
        int want = static_cast<int>(ray.size()) + 48;
        while (static_cast<int>(ray.size()) < want) {
          Letter l = m.tree_letter(pick(rng));
          if (!ray.empty() && ray.back() == letter_inverse(l)) continue;
          ray.push_back(l);
        }
        record(boundary(m, tree_end(ray, want)));
      }
      break;
    }
    case ModelKind::Fuchsian: {
      double start = (s.body == ShadowBody::Arc) ? s.arc_start : 0.0;
      double extent = (s.body == ShadowBody::Arc) ? s.arc_extent : kTwoPi;
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (size_t i = 0; i < samples; ++i)
        record(boundary(m, circle_point(start + extent * u(rng))));
      break;
    }
    case ModelKind::Linear: {
      for (const VecD& w : s.cap_samples) {
        if (audit.samples >= samples) break;
        record(boundary(m, projective_point(w)));
      }
      break;
    }
  }
  return audit;
}

ConicalWitness conical_trace(const GroupModel& m, const std::vector<GroupElement>& ray,
                             const std::vector<GroupElement>& seed, double epsilon) {
  if (ray.size() < 2) throw Error(ErrorKind::NotGeodesic, "ray too short");
  for (size_t i = 0; i + 1 < ray.size(); ++i) {
    GroupElement step = multiply(m, inverse(m, ray[i]), ray[i + 1]);
    bool in_seed = false;
    for (const GroupElement& s : seed)
      if (s.key == step.key) {
        in_seed = true;
        break;
      }
    if (!in_seed)
      throw Error(ErrorKind::NotGeodesic, "step " + std::to_string(i) + " is not a seed letter");
  }

  std::vector<Shadow> shadows;
  shadows.reserve(ray.size());
  for (const GroupElement& g : ray) shadows.push_back(shadow(m, g, epsilon));

  ConicalWitness w;
  w.epsilon = epsilon;
  w.sequence = ray;
  double prev_diam = std::numeric_limits<double>::infinity();
  bool seen_proper = false;
  for (size_t i = 0; i < shadows.size(); ++i) {
    if (i > 0 && nested(m, shadows[i], shadows[i - 1]) != Tri::True)
      throw Error(ErrorKind::NotGeodesic, "shadows fail to nest at step " + std::to_string(i));
    double dia = diameter(m, shadows[i]);
    w.diameters.push_back(dia);
    if (shadows[i].body == ShadowBody::Full) continue;  // leading degenerate shadows carry no information
    if (seen_proper && dia >= prev_diam)
      throw Error(ErrorKind::NotGeodesic, "shadow diameters fail to decrease at step " + std::to_string(i));
    prev_diam = dia;
    seen_proper = true;
  }
  if (!seen_proper) throw Error(ErrorKind::NotGeodesic, "all shadows along the ray are degenerate");

  const Shadow& last = shadows.back();
  CompactifiedPoint pt;
  switch (m.kind) {
    case ModelKind::FreeTree: {
      Word end = last.prefix;
      int want = static_cast<int>(end.size()) + 48;
      int letters = m.mode == GenerationMode::Group ? 2 * m.rank : m.rank;
      while (static_cast<int>(end.size()) < want)
        for (int li = 0; li < letters; ++li) {
          Letter l = m.tree_letter(li);
          if (end.empty() || end.back() != letter_inverse(l)) {
            end.push_back(l);
            break;
          }
        }
      pt = boundary(m, tree_end(end, want));
      break;
    }
    case ModelKind::Fuchsian:
      pt = boundary(m, circle_point(last.arc_start + last.arc_extent / 2));
      break;
    case ModelKind::Linear:
      if (last.cap_samples.empty()) throw Error(ErrorKind::NoSamples, "empty cap");
      pt = boundary(m, projective_point(last.cap_samples.front()));
      break;
  }
  for (size_t i = 0; i < shadows.size(); ++i) {
    if (shadows[i].body == ShadowBody::Full) continue;
    if (!shadow_contains(m, shadows[i], pt))
      throw Error(ErrorKind::NotGeodesic, "witness escaped shadow " + std::to_string(i));
  }
  w.point = pt;
  return w;
}

std::string shadows_to_csv(const GroupModel& m, const std::vector<Shadow>& shadows) {
  std::ostringstream os;
  os << "element,epsilon,body,data\n";
  for (const Shadow& s : shadows) {
    std::string elem = m.kind == ModelKind::FreeTree ? word_pretty(s.gamma.tree_value)
                                                     : ("len" + std::to_string(s.gamma.length));
    os << elem << ',' << s.epsilon << ',';
    switch (s.body) {
      case ShadowBody::Cylinder:
        os << "cylinder," << word_pretty(s.prefix);
        break;
      case ShadowBody::Arc:
        os << "arc," << s.arc_start << ';' << s.arc_extent;
        break;
      case ShadowBody::SampledCap:
        os << "cap,samples=" << s.cap_samples.size();
        break;
      case ShadowBody::Full:
        os << "full,";
        break;
      case ShadowBody::Empty:
        os << "empty,";
        break;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace bjs
