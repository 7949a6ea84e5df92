#include "bjs/cocycle.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>

#include "bjs/errors.hpp"

namespace bjs {

double simple_root(const CartanVector& k, int i) {
  if (i < 1 || i >= k.d())
    throw Error(ErrorKind::ConfigError, "simple root index out of range");
  return k.entries(i - 1) - k.entries(i);
}

double min_theta_root(const CartanVector& k, const std::vector<int>& theta) {
  double best = std::numeric_limits<double>::infinity();
  for (int i : theta) best = std::min(best, simple_root(k, i));
  return best;
}

VecD iota(const VecD& v) {
  VecD out(v.size());
  for (int i = 0; i < v.size(); ++i) out(i) = -v(v.size() - 1 - i);
  return out;
}

std::vector<int> iota_star(const std::vector<int>& theta, int d) {
  std::vector<int> out;
  out.reserve(theta.size());
  for (int i : theta) out.push_back(d - i);
  std::sort(out.begin(), out.end());
  return out;
}

CartanVector cartan_projection(const MatD& g) {
  Eigen::JacobiSVD<MatD> svd(g);
  VecD sv = svd.singularValues();
  CartanVector k;
  k.entries.resize(sv.size());
  for (int i = 0; i < sv.size(); ++i) {
    double v = std::log(sv(i));
    if (!std::isfinite(v))
      throw Error(ErrorKind::LinearAlgebraFailure, "non-finite log singular value");
    k.entries(i) = v;
  }
  return k;
}

CartanVector cartan_projection(const GroupModel& m, const GroupElement& g) {
  if (!m.is_matrix_model())
    throw Error(ErrorKind::ModelMismatch, "Cartan projection needs a matrix model");
  if (m.arith == Arithmetic::ExactRational) {
    if (m.dim == 2) {
      // Closed form for SL(2): sigma1^2 = (s + sqrt(s^2-4 det^2))/2 with s
      // the squared Frobenius norm, evaluated exactly before the final log.
      const RatMat& M = g.mat;
      Rational s = 0;
      for (const Rational& v : M.a) s += v * v;
      Rational det = M.at(0, 0) * M.at(1, 1) - M.at(0, 1) * M.at(1, 0);
      double sd = to_double(s);
      double dd = to_double(det);
      double disc = std::sqrt(std::max(0.0, sd * sd - 4 * dd * dd));
      double s1sq = (sd + disc) / 2;
      double l1 = 0.5 * std::log(s1sq);
      CartanVector k;
      k.entries.resize(2);
      k.entries << l1, -l1;
      return k;
    }
    return cartan_projection(rat_to_double(g.mat));
  }
  return cartan_projection(g.matf);
}

CartanVector partial_projection(const CartanVector& k, const std::vector<int>& theta) {
  int d = k.d();
  // Roots outside theta glue neighbouring coordinates into blocks; the
  // orthogonal projection onto the resulting subspace averages each block.
  std::vector<bool> in_theta(static_cast<size_t>(d), false);
  for (int i : theta) {
    if (i < 1 || i > d - 1) throw Error(ErrorKind::ConfigError, "theta root index out of range");
    in_theta[static_cast<size_t>(i)] = true;
  }
  CartanVector out;
  out.entries.resize(d);
  out.theta = theta;
  int start = 0;
  while (start < d) {
    int end = start + 1;
    while (end < d && !in_theta[static_cast<size_t>(end)]) ++end;
    double sum = 0;
    for (int i = start; i < end; ++i) sum += k.entries(i);
    double avg = sum / (end - start);
    for (int i = start; i < end; ++i) out.entries(i) = avg;
    start = end;
  }
  return out;
}

LinearFunctional LinearFunctional::omega1(int d) {
  LinearFunctional f;
  f.coeffs = VecD::Zero(d);
  f.coeffs(0) = 1.0;
  f.label = "omega1";
  return f;
}

LinearFunctional LinearFunctional::root(int d, int i) {
  LinearFunctional f;
  f.coeffs = VecD::Zero(d);
  f.coeffs(i - 1) = 1.0;
  f.coeffs(i) = -1.0;
  f.label = "alpha" + std::to_string(i);
  return f;
}

bool LinearFunctional::iota_invariant(int d) const {
  for (int i = 0; i < d; ++i)
    if (std::abs(coeffs(i) + coeffs(d - 1 - i)) > 1e-12) return false;
  return true;
}

bool verify_theta_compatible(const LinearFunctional& phi, const std::vector<int>& theta, int d,
                             int samples, uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int s = 0; s < samples; ++s) {
    VecD v(d);
    for (int i = 0; i < d; ++i) v(i) = u(rng);
    std::sort(v.data(), v.data() + d, std::greater<double>());
    v.array() -= v.mean();
    CartanVector k;
    k.entries = v;
    CartanVector p = partial_projection(k, theta);
    if (std::abs(phi(k) - phi(p)) > tol) return false;
  }
  return true;
}

std::string CocycleSpec::name() const {
  switch (kind) {
    case CocycleKind::BusemannTree: return "busemann-tree";
    case CocycleKind::BusemannFuchsian: return "busemann-fuchsian";
    case CocycleKind::ProjectiveOmega1: return "projective-omega1";
    case CocycleKind::DualProjective: return "dual-projective";
    case CocycleKind::CartanMagnitude: return "cartan-" + phi.label;
  }
  return "?";
}

CocycleSpec CocycleSpec::busemann_tree() {
  CocycleSpec s;
  s.kind = CocycleKind::BusemannTree;
  return s;
}
CocycleSpec CocycleSpec::busemann_fuchsian() {
  CocycleSpec s;
  s.kind = CocycleKind::BusemannFuchsian;
  return s;
}
CocycleSpec CocycleSpec::projective_omega1() {
  CocycleSpec s;
  s.kind = CocycleKind::ProjectiveOmega1;
  return s;
}
CocycleSpec CocycleSpec::dual_projective() {
  CocycleSpec s;
  s.kind = CocycleKind::DualProjective;
  return s;
}
CocycleSpec CocycleSpec::cartan(LinearFunctional phi, std::vector<int> theta) {
  CocycleSpec s;
  s.kind = CocycleKind::CartanMagnitude;
  s.phi = std::move(phi);
  s.theta = std::move(theta);
  return s;
}

double magnitude(const GroupModel& m, const GroupElement& g, const CocycleSpec& spec) {
  switch (spec.kind) {
    case CocycleKind::BusemannTree:
      if (m.kind != ModelKind::FreeTree)
        throw Error(ErrorKind::ModelMismatch, "busemann-tree magnitude on a matrix model");
      return static_cast<double>(g.tree_value.size());
    case CocycleKind::BusemannFuchsian: {
      CartanVector k = cartan_projection(m, g);
      return 2.0 * k.entries(0);
    }
    case CocycleKind::ProjectiveOmega1: {
      CartanVector k = cartan_projection(m, g);
      return k.entries(0);
    }
    case CocycleKind::DualProjective: {
      CartanVector k = cartan_projection(m, g);
      return -k.entries(k.d() - 1);  // log sigma1(g^-1)
    }
    case CocycleKind::CartanMagnitude: {
      CartanVector k = cartan_projection(m, g);
      CartanVector p = spec.theta.empty() ? k : partial_projection(k, spec.theta);
      return spec.phi(p);
    }
  }
  return 0.0;
}

namespace {

void require_boundary(const CompactifiedPoint& x, const char* who) {
  if (x.interior) throw Error(ErrorKind::ModelMismatch, std::string(who) + " needs a boundary point");
}

double busemann_disk(const GroupModel& m, const GroupElement& g, double angle) {
  // b_x(q) = log(|x - q|^2 / (1 - |q|^2)) with q the disk point of g^-1.
  GroupElement gi = inverse(m, g);
  std::complex<double> q = fuchsian_disk_point(m, gi);
  std::complex<double> x = std::polar(1.0, angle);
  double num = std::norm(x - q);
  double den = 1.0 - std::norm(q);
  if (den <= 0 || num <= 0)
    throw Error(ErrorKind::LinearAlgebraFailure, "busemann evaluation out of the open disk");
  return std::log(num / den);
}

MatD element_matrix(const GroupModel& m, const GroupElement& g) {
  return m.arith == Arithmetic::ExactRational ? rat_to_double(g.mat) : g.matf;
}

}  // namespace

double busemann(const GroupModel& m, const GroupElement& g, const CompactifiedPoint& x) {
  require_boundary(x, "busemann");
  switch (m.kind) {
    case ModelKind::FreeTree: {
      Word gi = word_inverse(g.tree_value);
      int cpl = common_prefix_length(gi, x.b.ray);
      return static_cast<double>(static_cast<int>(gi.size()) - 2 * cpl);
    }
    case ModelKind::Fuchsian:
      return busemann_disk(m, g, x.b.angle);
    case ModelKind::Linear:
      throw Error(ErrorKind::ModelMismatch, "no busemann cocycle in the linear model");
  }
  return 0.0;
}

double gromov_product(const GroupModel& m, const CompactifiedPoint& x, const CompactifiedPoint& y) {
  require_boundary(x, "gromov_product");
  require_boundary(y, "gromov_product");
  switch (m.kind) {
    case ModelKind::FreeTree: {
      if (x.b.ray == y.b.ray) throw Error(ErrorKind::DegeneratePair, "coincident tree ends");
      return 2.0 * common_prefix_length(x.b.ray, y.b.ray);
    }
    case ModelKind::Fuchsian: {
      double chord = std::abs(std::polar(1.0, x.b.angle) - std::polar(1.0, y.b.angle));
      if (chord <= 0) throw Error(ErrorKind::DegeneratePair, "coincident circle points");
      return 2.0 * std::log(2.0 / chord);
    }
    case ModelKind::Linear: {
      double dot = std::abs(x.b.dir.dot(y.b.dir));
      if (dot <= 0) throw Error(ErrorKind::DegeneratePair, "orthogonal (non-transverse) pair");
      return -std::log(dot);
    }
  }
  return 0.0;
}

double cocycle_value(const GroupModel& m, const GroupElement& g, const CompactifiedPoint& x,
                     const CocycleSpec& spec) {
  switch (spec.kind) {
    case CocycleKind::BusemannTree:
    case CocycleKind::BusemannFuchsian:
      return busemann(m, g, x);
    case CocycleKind::ProjectiveOmega1: {
      require_boundary(x, "projective cocycle");
      MatD A = element_matrix(m, g);
      return std::log((A * x.b.dir).norm());
    }
    case CocycleKind::DualProjective: {
      require_boundary(x, "dual-projective cocycle");
      MatD A = element_matrix(m, g);
      return std::log((A.inverse().transpose() * x.b.dir).norm());
    }
    case CocycleKind::CartanMagnitude:
      throw Error(ErrorKind::ModelMismatch, "cartan magnitudes have no pointwise cocycle here");
  }
  return 0.0;
}

VecD iwasawa_cocycle(const MatD& g, const MatD& frame, double tol) {
  MatD gram = frame.transpose() * frame - MatD::Identity(frame.rows(), frame.cols());
  if (gram.cwiseAbs().maxCoeff() > tol)
    throw Error(ErrorKind::LinearAlgebraFailure, "frame is not orthonormal");
  Eigen::HouseholderQR<MatD> qr(g * frame);
  MatD R = qr.matrixQR().triangularView<Eigen::Upper>();
  VecD out(R.rows());
  for (int i = 0; i < R.rows(); ++i) {
    double r = std::abs(R(i, i));
    if (r < 1e-300) throw Error(ErrorKind::LinearAlgebraFailure, "rank-deficient iwasawa factor");
    out(i) = std::log(r);
  }
  return out;
}

GPSTriple gps_tree() { return {CocycleSpec::busemann_tree(), CocycleSpec::busemann_tree()}; }
GPSTriple gps_fuchsian() {
  return {CocycleSpec::busemann_fuchsian(), CocycleSpec::busemann_fuchsian()};
}
GPSTriple gps_projective() {
  return {CocycleSpec::dual_projective(), CocycleSpec::projective_omega1()};
}

double gps_pairing(const GroupModel& m, const GPSTriple& t, const CompactifiedPoint& x,
                   const CompactifiedPoint& y) {
  if (t.sigma.kind == CocycleKind::ProjectiveOmega1) {
    // x carries a covector, y a vector; G = -log |<w, v>| for unit w, v.
    double dot = std::abs(x.b.dir.dot(y.b.dir));
    if (dot <= 0) throw Error(ErrorKind::DegeneratePair, "non-transverse projective pair");
    return -std::log(dot);
  }
  return gromov_product(m, x, y);
}

namespace {

CompactifiedPoint gps_act(const GroupModel& m, const GPSTriple& t, const GroupElement& g,
                          const CompactifiedPoint& x, bool bar_side) {
  if (bar_side && t.sigma_bar.kind == CocycleKind::DualProjective) {
    MatD A = element_matrix(m, g);
    VecD w = A.inverse().transpose() * x.b.dir;
    CompactifiedPoint out = x;
    out.b = projective_point(w);
    return out;
  }
  return act(m, g, x);
}

}  // namespace

double gps_defect(const GroupModel& m, const GPSTriple& t, const std::vector<GPSSample>& samples) {
  double worst = 0.0;
  for (const GPSSample& s : samples) {
    double lhs = cocycle_value(m, s.g, s.x, t.sigma_bar) + cocycle_value(m, s.g, s.y, t.sigma);
    CompactifiedPoint gx = gps_act(m, t, s.g, s.x, true);
    CompactifiedPoint gy = gps_act(m, t, s.g, s.y, false);
    double rhs = gps_pairing(m, t, gx, gy) - gps_pairing(m, t, s.x, s.y);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

TripleConstant estimate_triple_constant(const GroupModel& m, const CocycleSpec& spec, double eps,
                                        const Ball& ball, size_t max_pairs, uint64_t seed) {
  if (ball.elements.empty()) throw Error(ErrorKind::NoSamples, "empty ball");
  size_t n = ball.elements.size();
  std::vector<double> mags(n);
  std::vector<GroupElement> invs(n);
  std::vector<CompactifiedPoint> inv_pts(n);
  for (size_t i = 0; i < n; ++i) {
    mags[i] = magnitude(m, ball.elements[i], spec);
    invs[i] = inverse(m, ball.elements[i]);
    inv_pts[i] = compactify(m, invs[i]);
  }
  TripleConstant out;
  out.epsilon = eps;
  auto consider = [&](size_t i, size_t j) {
    CompactifiedPoint pj = compactify(m, ball.elements[j]);
    if (dist(m, inv_pts[i], pj) < eps) return;
    GroupElement ab = multiply(m, ball.elements[i], ball.elements[j]);
    double diff = magnitude(m, ab, spec) - mags[i] - mags[j];
    out.upper = std::max(out.upper, diff);
    out.lower = std::max(out.lower, -diff);
    ++out.pairs;
  };
  if (n * n <= max_pairs) {
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) consider(i, j);
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, n - 1);
    for (size_t s = 0; s < max_pairs; ++s) consider(pick(rng), pick(rng));
  }
  return out;
}

double estimate_finite_constant(const GroupModel& m, const CocycleSpec& spec, const Ball& ball,
                                const std::vector<GroupElement>& F) {
  if (ball.elements.empty()) throw Error(ErrorKind::NoSamples, "empty ball");
  std::vector<GroupElement> fs;
  for (const GroupElement& f : F) {
    fs.push_back(f);
    fs.push_back(inverse(m, f));
  }
  double worst = 0.0;
  for (const GroupElement& g : ball.elements) {
    double mg = magnitude(m, g, spec);
    for (const GroupElement& f : fs) {
      worst = std::max(worst, std::abs(magnitude(m, multiply(m, g, f), spec) - mg));
      worst = std::max(worst, std::abs(magnitude(m, multiply(m, f, g), spec) - mg));
    }
  }
  return worst;
}

int properness_threshold(const GroupModel& m, const CocycleSpec& spec, const Ball& ball) {
  if (ball.elements.empty()) throw Error(ErrorKind::NoSamples, "empty ball");
  std::vector<double> shell_min;
  for (const GroupElement& g : ball.elements) {
    size_t depth = static_cast<size_t>(g.length);
    if (shell_min.size() <= depth)
      shell_min.resize(depth + 1, std::numeric_limits<double>::infinity());
    shell_min[depth] = std::min(shell_min[depth], magnitude(m, g, spec));
  }
  int threshold = 0;
  for (size_t dpt = 1; dpt < shell_min.size(); ++dpt)
    if (shell_min[dpt] < shell_min[dpt - 1]) threshold = static_cast<int>(dpt);
  return threshold;
}

CocycleConstants estimate_cocycle_constants(const GroupModel& m, const CocycleSpec& spec, double eps,
                                            const Ball& ball, const std::vector<GroupElement>& F,
                                            size_t max_pairs, uint64_t seed) {
  CocycleConstants out;
  out.triple = estimate_triple_constant(m, spec, eps, ball, max_pairs, seed);
  out.finite = estimate_finite_constant(m, spec, ball, F);
  out.properness_depth = properness_threshold(m, spec, ball);
  return out;
}

}  // namespace bjs
