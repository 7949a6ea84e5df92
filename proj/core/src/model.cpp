#include "bjs/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bjs/errors.hpp"

namespace bjs {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr int kDefaultRayDepth = 96;

double normalize_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a;
}

}  // namespace

const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::FreeTree: return "free-tree";
    case ModelKind::Fuchsian: return "fuchsian";
    case ModelKind::Linear: return "linear";
  }
  return "?";
}

GroupModel GroupModel::free_tree(int rank, GenerationMode mode) {
  GroupModel m;
  m.kind = ModelKind::FreeTree;
  m.mode = mode;
  m.rank = rank;
  m.validate();
  return m;
}

GroupModel GroupModel::fuchsian(std::vector<RatMat> gens, GenerationMode mode, Arithmetic arith) {
  GroupModel m;
  m.kind = ModelKind::Fuchsian;
  m.mode = mode;
  m.arith = arith;
  m.dim = 2;
  m.generators = std::move(gens);
  m.validate();
  return m;
}

GroupModel GroupModel::linear(int dim, std::vector<RatMat> gens, GenerationMode mode, Arithmetic arith) {
  GroupModel m;
  m.kind = ModelKind::Linear;
  m.mode = mode;
  m.arith = arith;
  m.dim = dim;
  m.generators = std::move(gens);
  m.validate();
  return m;
}

int GroupModel::effective_generator_count() const {
  if (kind == ModelKind::FreeTree)
    return mode == GenerationMode::Group ? 2 * rank : rank;
  int n = static_cast<int>(generators.size());
  return mode == GenerationMode::Group ? 2 * n : n;
}

Letter GroupModel::tree_letter(int idx) const {
  if (mode == GenerationMode::Group) return static_cast<Letter>(idx);
  return positive_letter(idx);
}

RatMat GroupModel::effective_generator(int idx) const {
  int n = static_cast<int>(generators.size());
  if (idx < n) return generators[static_cast<size_t>(idx)];
  return rat_inverse(generators[static_cast<size_t>(idx - n)]);
}

std::string GroupModel::effective_generator_name(int idx) const {
  if (kind == ModelKind::FreeTree) {
    Word w(1, tree_letter(idx));
    return word_pretty(w);
  }
  int n = static_cast<int>(generators.size());
  auto base = [&](int i) {
    if (i < static_cast<int>(generator_names.size()) && !generator_names[static_cast<size_t>(i)].empty())
      return generator_names[static_cast<size_t>(i)];
    return std::string("g") + std::to_string(i);
  };
  if (idx < n) return base(idx);
  return base(idx - n) + "^-1";
}

void GroupModel::validate() const {
  if (kind == ModelKind::FreeTree) {
    if (rank < 2) throw Error(ErrorKind::ConfigError, "free-tree rank must be >= 2");
    return;
  }
  if (generators.empty()) throw Error(ErrorKind::ConfigError, "matrix model needs generators");
  for (const RatMat& g : generators) {
    if (g.d != dim)
      throw Error(ErrorKind::ConfigError, "generator dimension mismatch: " + rat_mat_pretty(g));
    Rational det = rat_det(g);
    if (arith == Arithmetic::ExactRational) {
      if (det != 1)
        throw Error(ErrorKind::ConfigError,
                    "generator determinant is " + rational_to_string(det) + ", expected 1: " +
                        rat_mat_pretty(g));
    } else if (std::abs(to_double(det) - 1.0) > float_tolerance) {
      throw Error(ErrorKind::ConfigError,
                  "generator determinant out of tolerance: " + rat_mat_pretty(g));
    }
  }
}

namespace {

void fill_key(const GroupModel& m, GroupElement& e) {
  switch (m.kind) {
    case ModelKind::FreeTree:
      e.key = e.tree_value;
      break;
    case ModelKind::Fuchsian:
    case ModelKind::Linear:
      if (m.arith == Arithmetic::ExactRational)
        e.key = rat_key(e.mat);
      else
        e.key = matd_key(e.matf, m.key_grid);
      break;
  }
}

}  // namespace

GroupElement model_identity(const GroupModel& m) {
  GroupElement e;
  if (m.is_matrix_model()) {
    if (m.arith == Arithmetic::ExactRational)
      e.mat = RatMat::identity(m.dim);
    else
      e.matf = MatD::Identity(m.dim, m.dim);
  }
  fill_key(m, e);
  e.length = 0;
  return e;
}

GroupElement model_generator(const GroupModel& m, int idx) {
  GroupElement e;
  if (m.kind == ModelKind::FreeTree) {
    e.word = Word(1, m.tree_letter(idx));
    e.tree_value = e.word;
  } else {
    e.word = Word(1, static_cast<Letter>(idx));
    RatMat g = m.effective_generator(idx);
    if (m.arith == Arithmetic::ExactRational)
      e.mat = g;
    else
      e.matf = rat_to_double(g);
  }
  fill_key(m, e);
  e.length = 1;
  return e;
}

GroupElement multiply(const GroupModel& m, const GroupElement& a, const GroupElement& b) {
  GroupElement e;
  if (m.kind == ModelKind::FreeTree) {
    e.tree_value = word_mul(a.tree_value, b.tree_value);
    e.word = e.tree_value;
    e.length = static_cast<int>(e.tree_value.size());
  } else {
    e.word = a.word + b.word;
    if (m.arith == Arithmetic::ExactRational)
      e.mat = rat_mul(a.mat, b.mat);
    else
      e.matf = a.matf * b.matf;
    e.length = a.length + b.length;
  }
  fill_key(m, e);
  return e;
}

GroupElement inverse(const GroupModel& m, const GroupElement& a) {
  GroupElement e;
  if (m.kind == ModelKind::FreeTree) {
    e.tree_value = word_inverse(a.tree_value);
    e.word = e.tree_value;
    e.length = static_cast<int>(e.tree_value.size());
  } else {
    e.word.reserve(a.word.size());
    int n = static_cast<int>(m.generators.size());
    for (auto it = a.word.rbegin(); it != a.word.rend(); ++it) {
      int idx = static_cast<int>(*it);
      e.word.push_back(static_cast<Letter>(idx < n ? idx + n : idx - n));
    }
    if (m.arith == Arithmetic::ExactRational)
      e.mat = rat_inverse(a.mat);
    else
      e.matf = a.matf.inverse();
    e.length = a.length;
  }
  fill_key(m, e);
  return e;
}

GroupElement model_element_from_word(const GroupModel& m, const Word& w) {
  GroupElement e = model_identity(m);
  for (Letter l : w) {
    int idx = static_cast<int>(l);
    if (m.kind == ModelKind::FreeTree) {
      GroupElement g;
      g.word = Word(1, l);
      g.tree_value = g.word;
      g.length = 1;
      e = multiply(m, e, g);
    } else {
      e = multiply(m, e, model_generator(m, idx));
    }
  }
  return e;
}

Ball enumerate_ball(const GroupModel& m, int radius, size_t element_cap) {
  m.validate();
  Ball ball;
  ball.model = m;
  ball.radius = radius;

  GroupElement id = model_identity(m);
  ball.elements.push_back(id);
  ball.index.emplace(id.key, 0);

  int gen_count = m.effective_generator_count();
  size_t shell_begin = 0, shell_end = 1;
  for (int depth = 1; depth <= radius && !ball.truncated; ++depth) {
    for (size_t p = shell_begin; p < shell_end && !ball.truncated; ++p) {
      // Copy, not reference: push_back below may reallocate.
      GroupElement parent = ball.elements[p];
      for (int gi = 0; gi < gen_count; ++gi) {
        if (m.kind == ModelKind::FreeTree) {
          Letter l = m.tree_letter(gi);
          if (!parent.tree_value.empty() && parent.tree_value.back() == letter_inverse(l))
            continue;  // would backtrack; the reduced word was seen earlier
          GroupElement child;
          child.tree_value = parent.tree_value + l;
          child.word = child.tree_value;
          child.key = child.tree_value;
          child.length = depth;
          ball.index.emplace(child.key, static_cast<int>(ball.elements.size()));
          ball.elements.push_back(std::move(child));
        } else {
          GroupElement child = multiply(m, parent, model_generator(m, gi));
          auto [it, inserted] = ball.index.emplace(child.key, static_cast<int>(ball.elements.size()));
          if (!inserted) continue;
          child.length = depth;
          ball.elements.push_back(std::move(child));
        }
        if (ball.elements.size() >= element_cap) {
          ball.truncated = true;
          break;
        }
      }
    }
    shell_begin = shell_end;
    shell_end = ball.elements.size();
    if (shell_begin == shell_end) break;  // no growth (finite closure)
  }
  return ball;
}

BoundaryPoint tree_end(const Word& ray, int truncation) {
  BoundaryPoint b;
  b.kind = ModelKind::FreeTree;
  b.ray = ray;
  b.truncation = truncation;
  return b;
}

BoundaryPoint circle_point(double angle) {
  BoundaryPoint b;
  b.kind = ModelKind::Fuchsian;
  b.angle = normalize_angle(angle);
  return b;
}

BoundaryPoint projective_point(const VecD& v) {
  BoundaryPoint b;
  b.kind = ModelKind::Linear;
  VecD u = v / v.norm();
  for (int i = 0; i < u.size(); ++i) {
    if (u(i) == 0.0) continue;
    if (u(i) < 0) u = -u;
    break;
  }
  b.dir = u;
  return b;
}

BoundaryPoint projective_point(const VecD& v, const VecD& dual) {
  BoundaryPoint b = projective_point(v);
  VecD w = dual / dual.norm();
  for (int i = 0; i < w.size(); ++i) {
    if (w(i) == 0.0) continue;
    if (w(i) < 0) w = -w;
    break;
  }
  b.dual = w;
  return b;
}

CompactifiedPoint compactify(const GroupModel& m, const GroupElement& g) {
  CompactifiedPoint p;
  p.kind = m.kind;
  p.interior = true;
  p.g = g;
  return p;
}

CompactifiedPoint boundary(const GroupModel& m, const BoundaryPoint& b) {
  if (b.kind != m.kind) throw Error(ErrorKind::ModelMismatch, "boundary point from another model");
  CompactifiedPoint p;
  p.kind = m.kind;
  p.interior = false;
  p.b = b;
  return p;
}

std::complex<double> fuchsian_disk_point(const GroupModel& m, const GroupElement& g) {
  // z = g.i = ((ac+bd) + i det)/(c^2+d^2); then the Cayley transform
  // w = (z-i)/(z+i) lands in the closed unit disk.
  if (m.arith == Arithmetic::ExactRational) {
    const RatMat& M = g.mat;
    const Rational &a = M.at(0, 0), &b = M.at(0, 1), &c = M.at(1, 0), &d = M.at(1, 1);
    Rational den = c * c + d * d;
    Rational x = (a * c + b * d) / den;
    Rational y = (a * d - b * c) / den;
    Rational wden = x * x + (y + 1) * (y + 1);
    Rational wre = (x * x + y * y - 1) / wden;
    Rational wim = -2 * x / wden;
    return {to_double(wre), to_double(wim)};
  }
  const MatD& M = g.matf;
  double a = M(0, 0), b = M(0, 1), c = M(1, 0), d = M(1, 1);
  double den = c * c + d * d;
  double x = (a * c + b * d) / den;
  double y = (a * d - b * c) / den;
  double wden = x * x + (y + 1) * (y + 1);
  return {(x * x + y * y - 1) / wden, -2 * x / wden};
}

namespace {

// Half-plane boundary coordinate of a circle point; infinity encoded as NaN.
double circle_to_halfplane(double angle) {
  double s = std::sin(angle / 2), c = std::cos(angle / 2);
  if (std::abs(s) < 1e-300) return std::nan("");
  return -c / s;
}

double halfplane_to_circle(double t) {
  if (std::isnan(t) || std::abs(t) > 1e150) return 0.0;  // infinity -> Cayley(inf) = 1
  return normalize_angle(std::atan2(-2 * t, t * t - 1));
}

}  // namespace

double fuchsian_circle_act(const GroupModel& m, const GroupElement& g, double angle) {
  double a, b, c, d;
  if (m.arith == Arithmetic::ExactRational) {
    a = to_double(g.mat.at(0, 0));
    b = to_double(g.mat.at(0, 1));
    c = to_double(g.mat.at(1, 0));
    d = to_double(g.mat.at(1, 1));
  } else {
    a = g.matf(0, 0);
    b = g.matf(0, 1);
    c = g.matf(1, 0);
    d = g.matf(1, 1);
  }
  double t = circle_to_halfplane(angle);
  double image;
  if (std::isnan(t)) {
    image = (c == 0.0) ? std::nan("") : a / c;
  } else {
    double den = c * t + d;
    image = (std::abs(den) < 1e-300) ? std::nan("") : (a * t + b) / den;
  }
  return halfplane_to_circle(image);
}

double dist(const GroupModel& m, const CompactifiedPoint& p, const CompactifiedPoint& q) {
  if (p.kind != q.kind || p.kind != m.kind)
    throw Error(ErrorKind::ModelMismatch, "distance between points of different models");
  switch (m.kind) {
    case ModelKind::FreeTree: {
      const Word& u = p.interior ? p.g.tree_value : p.b.ray;
      const Word& v = q.interior ? q.g.tree_value : q.b.ray;
      if (p.interior == q.interior && u == v) return 0.0;
      int cpl = common_prefix_length(u, v);
      return std::ldexp(1.0, -cpl);
    }
    case ModelKind::Fuchsian: {
      std::complex<double> zp = p.interior ? fuchsian_disk_point(m, p.g)
                                           : std::polar(1.0, p.b.angle);
      std::complex<double> zq = q.interior ? fuchsian_disk_point(m, q.g)
                                           : std::polar(1.0, q.b.angle);
      return std::abs(zp - zq);
    }
    case ModelKind::Linear: {
      if (p.interior || q.interior)
        throw Error(ErrorKind::ModelMismatch,
                    "the linear model defines no compactified metric for interior points");
      double dot = std::abs(p.b.dir.dot(q.b.dir));
      dot = std::min(dot, 1.0);
      return std::sqrt(std::max(0.0, 1.0 - dot * dot));
    }
  }
  return 0.0;
}

CompactifiedPoint act(const GroupModel& m, const GroupElement& g, const CompactifiedPoint& p) {
  if (p.kind != m.kind) throw Error(ErrorKind::ModelMismatch, "acting on a point of another model");
  if (p.interior) return compactify(m, multiply(m, g, p.g));
  CompactifiedPoint out;
  out.kind = m.kind;
  out.interior = false;
  switch (m.kind) {
    case ModelKind::FreeTree: {
      int c = word_cancellation(g.tree_value, p.b.ray);
      out.b = tree_end(word_mul(g.tree_value, p.b.ray),
                       static_cast<int>(g.tree_value.size()) + p.b.truncation - 2 * c);
      break;
    }
    case ModelKind::Fuchsian:
      out.b = circle_point(fuchsian_circle_act(m, g, p.b.angle));
      break;
    case ModelKind::Linear: {
      MatD A = (m.arith == Arithmetic::ExactRational) ? rat_to_double(g.mat) : g.matf;
      VecD v = A * p.b.dir;
      if (p.b.dual.size() > 0) {
        VecD w = A.inverse().transpose() * p.b.dual;
        out.b = projective_point(v, w);
      } else {
        out.b = projective_point(v);
      }
      break;
    }
  }
  return out;
}

std::optional<LoxodromicData> loxodromic_data(const GroupModel& m, const GroupElement& g) {
  switch (m.kind) {
    case ModelKind::FreeTree: {
      if (g.tree_value.empty()) return std::nullopt;
      auto [u, c] = word_cyclic_reduce(g.tree_value);
      Word cinv = word_inverse(c);
      int depth = kDefaultRayDepth;
      LoxodromicData data{
          tree_end(word_mul(u, word_periodic_ray(c, depth)), static_cast<int>(u.size()) + depth),
          tree_end(word_mul(u, word_periodic_ray(cinv, depth)), static_cast<int>(u.size()) + depth)};
      return data;
    }
    case ModelKind::Fuchsian: {
      double a, b, c, d;
      if (m.arith == Arithmetic::ExactRational) {
        a = to_double(g.mat.at(0, 0));
        b = to_double(g.mat.at(0, 1));
        c = to_double(g.mat.at(1, 0));
        d = to_double(g.mat.at(1, 1));
      } else {
        a = g.matf(0, 0);
        b = g.matf(0, 1);
        c = g.matf(1, 0);
        d = g.matf(1, 1);
      }
      double tr = a + d;
      double disc = tr * tr - 4.0;
      if (!(std::abs(tr) > 2.0) || disc <= m.float_tolerance) return std::nullopt;
      double sq = std::sqrt(disc);
      double l1 = (tr + sq) / 2, l2 = (tr - sq) / 2;
      double l_att = std::abs(l1) > std::abs(l2) ? l1 : l2;
      double l_rep = std::abs(l1) > std::abs(l2) ? l2 : l1;
      auto fixed_point = [&](double lam) -> double {
        if (std::abs(c) > 1e-14) return (lam - d) / c;
        if (std::abs(b) > 1e-14) return b / (lam - a);
        // diagonal: fixed points 0 and infinity
        return std::abs(a) >= std::abs(lam) ? std::nan("") : 0.0;
      };
      auto fixed_diag = [&](double lam) -> double {
        if (std::abs(c) > 1e-14 || std::abs(b) > 1e-14) return fixed_point(lam);
        return std::abs(lam - a) < std::abs(lam - d) ? std::nan("") : 0.0;
      };
      LoxodromicData data{circle_point(halfplane_to_circle(fixed_diag(l_att))),
                          circle_point(halfplane_to_circle(fixed_diag(l_rep)))};
      return data;
    }
    case ModelKind::Linear: {
      MatD A = (m.arith == Arithmetic::ExactRational) ? rat_to_double(g.mat) : g.matf;
      auto power_limit = [&](const MatD& M) -> std::optional<VecD> {
        VecD v(M.rows());
        for (int i = 0; i < v.size(); ++i) v(i) = 1.0 + 0.137 * (i + 1);
        v.normalize();
        double step = 1.0;
        for (int it = 0; it < 600; ++it) {
          VecD w = M * v;
          double n = w.norm();
          if (!std::isfinite(n) || n < 1e-300) return std::nullopt;
          w /= n;
          if (w.dot(v) < 0) w = -w;
          step = (w - v).norm();
          v = w;
          if (step < 1e-14 && it > 8) return v;
        }
        return std::nullopt;
      };
      auto va = power_limit(A);
      auto vr = power_limit(A.inverse());
      if (!va || !vr) return std::nullopt;
      // Degenerate gap: attracting and repelling directions must differ.
      if (std::abs(va->dot(*vr)) > 1.0 - 1e-9) return std::nullopt;
      MatD AinvT = A.inverse().transpose();
      auto da = power_limit(AinvT);
      auto dr = power_limit(AinvT.inverse());
      LoxodromicData data{
          da ? projective_point(*va, *da) : projective_point(*va),
          dr ? projective_point(*vr, *dr) : projective_point(*vr)};
      return data;
    }
  }
  return std::nullopt;
}

std::string ball_to_csv(const Ball& ball) {
  std::ostringstream os;
  os << "canonicalKey,word,wordLength\n";
  for (const GroupElement& e : ball.elements) {
    std::string word_str;
    if (ball.model.kind == ModelKind::FreeTree) {
      word_str = word_pretty(e.tree_value);
      os << word_str << ',' << word_str << ',' << e.length << '\n';
    } else {
      for (size_t i = 0; i < e.word.size(); ++i) {
        if (i) word_str += '.';
        word_str += ball.model.effective_generator_name(static_cast<int>(e.word[i]));
      }
      if (word_str.empty()) word_str = "id";
      std::string key = e.key;
      for (char& ch : key)
        if (ch == ',') ch = ';';
      os << key << ',' << word_str << ',' << e.length << '\n';
    }
  }
  return os.str();
}

}  // namespace bjs
