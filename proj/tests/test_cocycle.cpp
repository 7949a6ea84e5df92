#include <doctest.h>

#include <cmath>
#include <random>

#include "bjs/cocycle.hpp"
#include "bjs/errors.hpp"
#include "test_helpers.hpp"

using namespace bjs;
using namespace bjs::testing;

namespace {

// Test-only oracle: cyclic Jacobi eigenvalues of a symmetric matrix,
// independent of the SVD route used by the implementation.
std::vector<double> jacobi_eigenvalues(MatD a) {
  int n = static_cast<int>(a.rows());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-28) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        double c = 1 / std::sqrt(t * t + 1), s = t * c;
        MatD rot = MatD::Identity(n, n);
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = s;
        rot(q, p) = -s;
        a = rot.transpose() * a * rot;
      }
  }
  std::vector<double> ev(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) ev[static_cast<size_t>(i)] = a(i, i);
  std::sort(ev.begin(), ev.end(), std::greater<double>());
  return ev;
}

VecD gram_oracle_kappa(const MatD& g) {
  auto ev = jacobi_eigenvalues(g * g.transpose());
  VecD k(g.rows());
  for (int i = 0; i < g.rows(); ++i) k(i) = 0.5 * std::log(ev[static_cast<size_t>(i)]);
  return k;
}

}  // namespace

TEST_CASE("cartan projection basic values") {
  CartanVector kid = cartan_projection(MatD::Identity(2, 2));
  CHECK(kid.entries(0) == 0.0);
  CHECK(kid.entries(1) == 0.0);

  MatD diag(2, 2);
  diag << 2, 0, 0, 0.5;
  CartanVector kd = cartan_projection(diag);
  CHECK(kd.entries(0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(simple_root(kd, 1) == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));

  // characteristic polynomial oracle: g g^T = [[2,1],[1,1]] has eigenvalues
  // (3 +- sqrt5)/2, so kappa_1 = log((1+sqrt5)/2)
  MatD u(2, 2);
  u << 1, 1, 0, 1;
  CartanVector ku = cartan_projection(u);
  CHECK(ku.entries(0) == doctest::Approx(std::log((1 + std::sqrt(5.0)) / 2)).epsilon(1e-12));
  CHECK(ku.entries(0) == doctest::Approx(0.481211825060).epsilon(1e-9));
}

TEST_CASE("cartan projection matches the Gram-eigenvalue oracle") {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 300; ++i) {
    MatD g = random_sl2(rng);
    VecD mine = cartan_projection(g).entries;
    VecD oracle = gram_oracle_kappa(g);
    CHECK((mine - oracle).cwiseAbs().maxCoeff() < 1e-9);
  }
  for (int i = 0; i < 300; ++i) {
    MatD g = random_sl3(rng);
    VecD mine = cartan_projection(g).entries;
    VecD oracle = gram_oracle_kappa(g);
    CHECK((mine - oracle).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("opposition involution against inverses") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    MatD g = random_sl3(rng);
    VecD a = iota(cartan_projection(g).entries);
    VecD b = cartan_projection(MatD(g.inverse())).entries;
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("partial projection: identity cases and the rank-one block") {
  CartanVector k;
  k.entries.resize(3);
  k.entries << 2, 1, -3;

  // theta = all roots: identity on the Cartan space
  CartanVector full = partial_projection(k, {1, 2});
  CHECK((full.entries - k.entries).cwiseAbs().maxCoeff() == 0.0);

  // theta = {alpha_1}: orthogonal projection onto span{(2,-1,-1)}.
  // oracle: <k,u> u / <u,u> with u = (2,-1,-1):
  VecD u(3);
  u << 2, -1, -1;
  VecD oracle = (k.entries.dot(u) / u.dot(u)) * u;
  CartanVector p = partial_projection(k, {1});
  CHECK((p.entries - oracle).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(p.entries(0) == doctest::Approx(2.0));
  CHECK(p.entries(1) == doctest::Approx(-1.0));

  // idempotent, and commutes with iota for symmetric theta
  CartanVector pp = partial_projection(p, {1});
  CHECK((pp.entries - p.entries).cwiseAbs().maxCoeff() < 1e-12);

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> udist(-2, 2);
  for (int trial = 0; trial < 200; ++trial) {
    VecD v(4);
    for (int i = 0; i < 4; ++i) v(i) = udist(rng);
    std::sort(v.data(), v.data() + 4, std::greater<double>());
    v.array() -= v.mean();
    CartanVector kv;
    kv.entries = v;
    std::vector<int> theta{1, 3};  // iota-symmetric for d = 4
    VecD left = partial_projection(kv, theta).entries;
    CartanVector ki;
    ki.entries = iota(v);
    VecD right = iota(partial_projection(ki, iota_star(theta, 4)).entries);
    CHECK((left - right).cwiseAbs().maxCoeff() < 1e-9);
    CartanVector again;
    again.entries = left;
    CHECK((partial_projection(again, theta).entries - left).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("theta compatibility of omega1") {
  CHECK(verify_theta_compatible(LinearFunctional::omega1(3), {1}, 3, 200, 3));
  CHECK(verify_theta_compatible(LinearFunctional::omega1(4), {1, 3}, 4, 200, 3));
  LinearFunctional bad;
  bad.coeffs = VecD(3);
  bad.coeffs << 0, 1, 0;
  bad.label = "e2";
  CHECK(!verify_theta_compatible(bad, {1}, 3, 200, 3));
}

TEST_CASE("magnitudes in the three models") {
  GroupModel tree = GroupModel::free_tree(2);
  GroupElement aba = model_element_from_word(tree, word_from_pretty("aba"));
  CHECK(magnitude(tree, aba, CocycleSpec::busemann_tree()) == 3.0);

  GroupModel fuch = schottky_model();
  GroupElement diag = model_identity(fuch);
  diag.mat = rm2("2", "0", "0", "1/2");
  diag.key = rat_key(diag.mat);
  // oracle: hyperbolic distance d(i, 4i) = acosh(1 + |4i-i|^2/(2*4)) = log 4
  double oracle = std::acosh(1.0 + 9.0 / 8.0);
  CHECK(magnitude(fuch, diag, CocycleSpec::busemann_fuchsian()) ==
        doctest::Approx(oracle).epsilon(1e-12));
  CHECK(oracle == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));

  GroupModel lin = GroupModel::linear(2, {rm2("2", "1", "1", "1")});
  double omega1 = magnitude(lin, model_generator(lin, 0), CocycleSpec::projective_omega1());
  CHECK(omega1 == doctest::Approx(0.5 * std::log((7 + 3 * std::sqrt(5.0)) / 2)).epsilon(1e-12));
  CHECK(omega1 == doctest::Approx(0.962423650119).epsilon(1e-9));
}

TEST_CASE("tree busemann cocycle and gromov product are exact integers") {
  GroupModel tree = GroupModel::free_tree(2);
  GroupElement a = model_element_from_word(tree, word_from_pretty("a"));
  CompactifiedPoint xa = boundary(tree, tree_end(word_periodic_ray(word_from_pretty("ab"), 40), 40));
  CompactifiedPoint xA =
      boundary(tree, tree_end(word_periodic_ray(word_from_pretty("Ab"), 40), 40));
  CHECK(busemann(tree, a, xa) == 1.0);
  CHECK(busemann(tree, a, xA) == -1.0);
  CHECK(busemann(tree, model_identity(tree), xa) == 0.0);

  CompactifiedPoint y =
      boundary(tree, tree_end(word_from_pretty("aB") + word_periodic_ray(word_from_pretty("a"), 30), 32));
  CHECK(gromov_product(tree, xa, y) == 2.0);  // common prefix "a"
  CHECK_THROWS_AS(gromov_product(tree, xa, xa), Error);
}

TEST_CASE("busemann cocycle identity is exact on the tree") {
  GroupModel tree = GroupModel::free_tree(2);
  Ball ball = enumerate_ball(tree, 5);
  std::mt19937_64 rng(91);
  std::uniform_int_distribution<size_t> pick(0, ball.elements.size() - 1);
  std::uniform_int_distribution<int> letter(0, 3);
  for (int trial = 0; trial < 2000; ++trial) {
    const GroupElement& g1 = ball.elements[pick(rng)];
    const GroupElement& g2 = ball.elements[pick(rng)];
    Word ray;
    while (static_cast<int>(ray.size()) < 48) {
      Letter l = static_cast<Letter>(letter(rng));
      if (!ray.empty() && ray.back() == letter_inverse(l)) continue;
      ray.push_back(l);
    }
    CompactifiedPoint x = boundary(tree, tree_end(ray, 48));
    double lhs = busemann(tree, multiply(tree, g1, g2), x);
    double rhs = busemann(tree, g1, act(tree, g2, x)) + busemann(tree, g2, x);
    CHECK(lhs == rhs);  // exact integers
  }
}

TEST_CASE("GPS defect: tree exact, fuchsian and projective within float error") {
  GroupModel tree = GroupModel::free_tree(2);
  Ball ball = enumerate_ball(tree, 4);
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<size_t> pick(0, ball.elements.size() - 1);
  std::uniform_int_distribution<int> letter(0, 3);
  auto random_ray = [&]() {
    Word ray;
    while (static_cast<int>(ray.size()) < 48) {
      Letter l = static_cast<Letter>(letter(rng));
      if (!ray.empty() && ray.back() == letter_inverse(l)) continue;
      ray.push_back(l);
    }
    return ray;
  };
  std::vector<GPSSample> samples;
  while (samples.size() < 500) {
    Word r1 = random_ray(), r2 = random_ray();
    if (common_prefix_length(r1, r2) >= 40) continue;
    samples.push_back({ball.elements[pick(rng)], boundary(tree, tree_end(r1, 48)),
                       boundary(tree, tree_end(r2, 48))});
  }
  CHECK(gps_defect(tree, gps_tree(), samples) == 0.0);

  GPSSample idsample{model_identity(tree), samples[0].x, samples[0].y};
  CHECK(gps_defect(tree, gps_tree(), {idsample}) == 0.0);

  GroupModel fuch = schottky_model();
  Ball fball = enumerate_ball(fuch, 3);
  std::uniform_int_distribution<size_t> fpick(0, fball.elements.size() - 1);
  std::uniform_real_distribution<double> ang(0, 6.283185307179586);
  std::vector<GPSSample> fsamples;
  while (fsamples.size() < 500) {
    double a1 = ang(rng), a2 = ang(rng);
    if (std::abs(std::polar(1.0, a1) - std::polar(1.0, a2)) < 0.05) continue;
    GPSSample s{fball.elements[fpick(rng)], boundary(fuch, circle_point(a1)),
                boundary(fuch, circle_point(a2))};
    // keep the image pair well separated; the chordal log degrades once the
    // image points nearly coincide
    double b1 = fuchsian_circle_act(fuch, s.g, a1);
    double b2 = fuchsian_circle_act(fuch, s.g, a2);
    if (std::abs(std::polar(1.0, b1) - std::polar(1.0, b2)) < 1e-3) continue;
    fsamples.push_back(s);
  }
  CHECK(gps_defect(fuch, gps_fuchsian(), fsamples) < 1e-8);

  GroupModel lin = GroupModel::linear(3, {rm3({"1", "1", "0", "0", "1", "1", "0", "0", "1"}),
                                          rm3({"1", "0", "0", "1", "1", "0", "1", "1", "1"})},
                                      GenerationMode::Semigroup);
  Ball lball = enumerate_ball(lin, 3);
  std::uniform_int_distribution<size_t> lpick(0, lball.elements.size() - 1);
  std::normal_distribution<double> gauss(0, 1);
  std::vector<GPSSample> lsamples;
  while (lsamples.size() < 500) {
    VecD v(3), w(3);
    for (int i = 0; i < 3; ++i) {
      v(i) = gauss(rng);
      w(i) = gauss(rng);
    }
    v.normalize();
    w.normalize();
    if (std::abs(v.dot(w)) < 0.05) continue;  // keep the pairing transverse
    GPSSample s{lball.elements[lpick(rng)], boundary(lin, projective_point(w)),
                boundary(lin, projective_point(v))};
    // the image pair must stay transverse as well, or the pairing itself
    // is ill-conditioned
    MatD A = rat_to_double(s.g.mat);
    VecD gv = (A * v).normalized();
    VecD gw = (A.inverse().transpose() * w).normalized();
    if (std::abs(gv.dot(gw)) < 0.05) continue;
    lsamples.push_back(s);
  }
  CHECK(gps_defect(lin, gps_projective(), lsamples) < 1e-8);
}

TEST_CASE("iwasawa cocycle values and first-column consistency") {
  MatD id2 = MatD::Identity(2, 2);
  CHECK(iwasawa_cocycle(id2, id2).cwiseAbs().maxCoeff() == 0.0);

  MatD diag(2, 2);
  diag << 2, 0, 0, 0.5;
  VecD b = iwasawa_cocycle(diag, id2);
  CHECK(b(0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(b(1) == doctest::Approx(-std::log(2.0)).epsilon(1e-12));

  MatD unip(2, 2);
  unip << 1, 1, 0, 1;
  CHECK(iwasawa_cocycle(unip, id2).cwiseAbs().maxCoeff() < 1e-12);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    MatD g = random_sl3(rng);
    MatD q = Eigen::HouseholderQR<MatD>(random_sl3(rng)).householderQ();
    VecD v = iwasawa_cocycle(g, q);
    CHECK(v(0) == doctest::Approx(std::log((g * q.col(0)).norm())).epsilon(1e-9));
  }

  MatD skew(2, 2);
  skew << 1, 1, 1, 1;
  CHECK_THROWS_AS(iwasawa_cocycle(diag, skew), Error);
}

TEST_CASE("empirical cocycle constants on the tree are the exact word bounds") {
  GroupModel tree = GroupModel::free_tree(2);
  Ball ball = enumerate_ball(tree, 5);
  // eps = 2^-2: pairs with cpl(alpha^-1, beta) <= 2, so the lower triple
  // constant is exactly 4 and the upper one 0
  TripleConstant t = estimate_triple_constant(tree, CocycleSpec::busemann_tree(), 0.25, ball,
                                              ball.elements.size() * ball.elements.size(), 1);
  CHECK(t.lower == 4.0);
  CHECK(t.upper == 0.0);

  CHECK(estimate_finite_constant(tree, CocycleSpec::busemann_tree(), ball,
                                 {model_identity(tree)}) == 0.0);

  CHECK(properness_threshold(tree, CocycleSpec::busemann_tree(), ball) == 0);
}

TEST_CASE("modular triple constant is stable between depths") {
  GroupModel mod = modular_model();
  CocycleSpec spec = CocycleSpec::busemann_fuchsian();
  Ball b7 = enumerate_ball(mod, 7);
  Ball b8 = enumerate_ball(mod, 8);
  auto full = [&](const Ball& b) {
    return estimate_triple_constant(mod, spec, 0.3, b, b.elements.size() * b.elements.size(), 1);
  };
  TripleConstant c7 = full(b7), c8 = full(b8);
  CHECK(c7.lower > 0);
  CHECK(c8.lower >= c7.lower);  // max over a superset
  CHECK(c8.lower <= 1.1 * c7.lower);
  CHECK(c8.upper <= c7.upper + 1.1 * std::max(1.0, c7.upper) * 0.1 + 1e-9);
}

TEST_CASE("magnitude subadditivity against the estimated constant") {
  GroupModel mod = modular_model();
  CocycleSpec spec = CocycleSpec::busemann_fuchsian();
  Ball ball = enumerate_ball(mod, 6);
  double eps = 0.3;
  TripleConstant t = estimate_triple_constant(mod, spec, eps, ball,
                                              ball.elements.size() * ball.elements.size(), 1);
  std::mt19937_64 rng(19);
  std::uniform_int_distribution<size_t> pick(0, ball.elements.size() - 1);
  for (int trial = 0; trial < 4000; ++trial) {
    const GroupElement& a = ball.elements[pick(rng)];
    const GroupElement& b = ball.elements[pick(rng)];
    CompactifiedPoint ai = compactify(mod, inverse(mod, a));
    if (dist(mod, ai, compactify(mod, b)) < eps) continue;
    double lhs = magnitude(mod, multiply(mod, a, b), spec);
    CHECK(lhs <= magnitude(mod, a, spec) + magnitude(mod, b, spec) + t.upper + 1e-9);
  }
}
