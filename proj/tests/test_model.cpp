#include <doctest.h>

#include <complex>
#include <random>
#include <set>

#include "bjs/errors.hpp"
#include "bjs/model.hpp"
#include "test_helpers.hpp"

using namespace bjs;
using namespace bjs::testing;

TEST_CASE("multiply: cancellation, identity, integer matrices") {
  GroupModel tree = GroupModel::free_tree(2);
  GroupElement ab = model_element_from_word(tree, word_from_pretty("ab"));
  GroupElement Ba = model_element_from_word(tree, word_from_pretty("Ba"));
  CHECK(word_pretty(multiply(tree, ab, Ba).tree_value) == "aa");

  GroupElement id = model_identity(tree);
  CHECK(multiply(tree, id, ab).key == ab.key);

  // hand oracle: [[2,1],[1,1]]*[[1,1],[1,2]] = [[3,4],[2,3]]
  GroupModel lin = GroupModel::linear(2, {rm2("2", "1", "1", "1"), rm2("1", "1", "1", "2")});
  GroupElement p = multiply(lin, model_generator(lin, 0), model_generator(lin, 1));
  CHECK(p.mat.at(0, 0) == 3);
  CHECK(p.mat.at(0, 1) == 4);
  CHECK(p.mat.at(1, 0) == 2);
  CHECK(p.mat.at(1, 1) == 3);
}

TEST_CASE("enumerate_ball: free tree counts and dedup") {
  GroupModel tree = GroupModel::free_tree(2);
  Ball b0 = enumerate_ball(tree, 0);
  CHECK(b0.elements.size() == 1);

  Ball b2 = enumerate_ball(tree, 2);
  CHECK(b2.elements.size() == 17);  // 1 + 4 + 12 reduced words

  for (const GroupElement& e : b2.elements)
    CHECK(e.length == static_cast<int>(e.tree_value.size()));

  Ball again = enumerate_ball(tree, 2);
  REQUIRE(again.elements.size() == b2.elements.size());
  for (size_t i = 0; i < again.elements.size(); ++i) {
    CHECK(again.elements[i].key == b2.elements[i].key);
    CHECK(again.elements[i].length == b2.elements[i].length);
  }
}

namespace {

// Independent brute-force count of the modular ball at depth 2: products of
// at most two generators as integer matrices, deduplicated modulo sign.
int modular_ball2_oracle() {
  using M = std::array<long, 4>;
  auto mul = [](const M& x, const M& y) {
    return M{x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
             x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
  };
  auto norm = [](M x) {
    for (long v : x) {
      if (v == 0) continue;
      if (v < 0)
        for (auto& w : x) w = -w;
      break;
    }
    return x;
  };
  std::vector<M> gens{{0, -1, 1, 0}, {1, 1, 0, 1}, {0, 1, -1, 0}, {1, -1, 0, 1}};
  std::set<M> seen;
  M id{1, 0, 0, 1};
  seen.insert(norm(id));
  for (const M& g : gens) seen.insert(norm(g));
  for (const M& g : gens)
    for (const M& h : gens) seen.insert(norm(mul(g, h)));
  return static_cast<int>(seen.size());
}

}  // namespace

TEST_CASE("enumerate_ball: modular group dedup against the brute-force oracle") {
  GroupModel mod = modular_model();
  Ball b = enumerate_ball(mod, 2);
  CHECK(static_cast<int>(b.elements.size()) == modular_ball2_oracle());

  GroupElement S = model_generator(mod, 0), T = model_generator(mod, 1);
  GroupElement ST = multiply(mod, S, T), TS = multiply(mod, T, S);
  CHECK(ST.key != TS.key);
  CHECK(b.find(ST.key) != nullptr);
  CHECK(b.find(TS.key) != nullptr);
}

TEST_CASE("compactify and dist") {
  GroupModel tree = GroupModel::free_tree(2);
  CompactifiedPoint pa = compactify(tree, model_element_from_word(tree, word_from_pretty("a")));
  CompactifiedPoint end = boundary(tree, tree_end(word_from_pretty("ab") + word_periodic_ray(word_from_pretty("ab"), 30), 32));
  CHECK(dist(tree, pa, end) == 0.5);  // common prefix "a"
  CHECK(dist(tree, pa, pa) == 0.0);

  GroupModel fuch = schottky_model();
  GroupElement diag = model_identity(fuch);
  diag.mat = rm2("2", "0", "0", "1/2");
  diag.key = rat_key(diag.mat);
  std::complex<double> w = fuchsian_disk_point(fuch, diag);
  CHECK(std::abs(w - std::complex<double>(0.6, 0.0)) < 1e-15);

  CHECK_THROWS_AS(
      dist(GroupModel::free_tree(2), pa, boundary(fuch, circle_point(0.0))),
      Error);
}

TEST_CASE("loxodromic data in the three models") {
  GroupModel fuch = schottky_model();
  GroupElement diag = model_identity(fuch);
  diag.mat = rm2("2", "0", "0", "1/2");
  diag.key = rat_key(diag.mat);
  auto data = loxodromic_data(fuch, diag);
  REQUIRE(data.has_value());
  // fixed points of z -> 4z: attracting infinity -> Cayley(inf) = 1, repelling 0 -> -1
  CHECK(std::abs(std::polar(1.0, data->attracting.angle) - std::complex<double>(1, 0)) < 1e-12);
  CHECK(std::abs(std::polar(1.0, data->repelling.angle) - std::complex<double>(-1, 0)) < 1e-12);

  GroupElement parab = model_identity(fuch);
  parab.mat = rm2("1", "1", "0", "1");
  parab.key = rat_key(parab.mat);
  CHECK(!loxodromic_data(fuch, parab).has_value());

  GroupModel tree = GroupModel::free_tree(2);
  GroupElement ab = model_element_from_word(tree, word_from_pretty("ab"));
  auto tdata = loxodromic_data(tree, ab);
  REQUIRE(tdata.has_value());
  CHECK(word_has_prefix(tdata->attracting.ray, word_from_pretty("ababab")));
  CHECK(word_has_prefix(tdata->repelling.ray, word_from_pretty("BABABA")));

  GroupModel lin = GroupModel::linear(2, {rm2("2", "1", "1", "1")});
  auto ldata = loxodromic_data(lin, model_generator(lin, 0));
  REQUIRE(ldata.has_value());
  // attracting direction of [[2,1],[1,1]]: eigenvector for (3+sqrt5)/2
  double lam = (3 + std::sqrt(5.0)) / 2;
  VecD v(2);
  v << 1.0, lam - 2.0;
  v.normalize();
  CHECK(std::abs(std::abs(v.dot(ldata->attracting.dir)) - 1.0) < 1e-9);
}

TEST_CASE("metric axioms on sampled triples") {
  GroupModel tree = GroupModel::free_tree(2);
  Ball ball = enumerate_ball(tree, 6);
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<size_t> pick(0, ball.elements.size() - 1);
  auto point = [&](size_t i) { return compactify(tree, ball.elements[i]); };
  for (int trial = 0; trial < 10000; ++trial) {
    CompactifiedPoint p = point(pick(rng)), q = point(pick(rng)), r = point(pick(rng));
    double pq = dist(tree, p, q), qr = dist(tree, q, r), pr = dist(tree, p, r);
    CHECK(pq == dist(tree, q, p));
    CHECK(pr <= std::max(pq, qr));  // ultrametric, exact
    if (p.g.key == q.g.key) CHECK(pq == 0.0);
    if (pq == 0.0) CHECK(p.g.key == q.g.key);
  }

  GroupModel fuch = schottky_model();
  Ball fball = enumerate_ball(fuch, 4);
  std::uniform_int_distribution<size_t> fpick(0, fball.elements.size() - 1);
  auto fpoint = [&](size_t i) { return compactify(fuch, fball.elements[i]); };
  for (int trial = 0; trial < 10000; ++trial) {
    CompactifiedPoint p = fpoint(fpick(rng)), q = fpoint(fpick(rng)), r = fpoint(fpick(rng));
    double pq = dist(fuch, p, q), qr = dist(fuch, q, r), pr = dist(fuch, p, r);
    CHECK(pq == dist(fuch, q, p));
    CHECK(pr <= pq + qr + 1e-9);
  }
}

TEST_CASE("source-sink contraction past an empirical threshold") {
  // For gamma with d(gamma, gamma^-1) >= 2 eps and word length above a
  // threshold, points eps-away from gamma^-1 land eps-close to gamma.
  GroupModel tree = GroupModel::free_tree(2);
  Ball ball = enumerate_ball(tree, 7);
  double eps = 0.25;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<size_t> pick(0, ball.elements.size() - 1);

  auto holds_for = [&](const GroupElement& g) {
    CompactifiedPoint pg = compactify(tree, g);
    GroupElement gi = inverse(tree, g);
    CompactifiedPoint pgi = compactify(tree, gi);
    if (dist(tree, pg, pgi) < 2 * eps) return true;  // hypothesis empty
    for (int s = 0; s < 200; ++s) {
      CompactifiedPoint p = compactify(tree, ball.elements[pick(rng)]);
      if (dist(tree, p, pgi) < eps) continue;
      if (dist(tree, act(tree, g, p), pg) >= eps) return false;
    }
    return true;
  };

  int threshold = 0;
  for (const GroupElement& g : ball.elements)
    if (!holds_for(g)) threshold = std::max(threshold, g.length + 1);
  CHECK(threshold <= 5);
  for (const GroupElement& g : ball.elements)
    if (g.length >= threshold) CHECK(holds_for(g));
}

TEST_CASE("ball csv export shape") {
  GroupModel tree = GroupModel::free_tree(2);
  Ball ball = enumerate_ball(tree, 2);
  std::string csv = ball_to_csv(ball);
  CHECK(csv.find("canonicalKey,word,wordLength") == 0);
  CHECK(csv.find("\nab,ab,2") != std::string::npos);
}

TEST_CASE("element cap produces a flagged partial result") {
  GroupModel tree = GroupModel::free_tree(2);
  Ball ball = enumerate_ball(tree, 5, 20);
  CHECK(ball.truncated);
  CHECK(ball.elements.size() <= 21);
}

TEST_CASE("float arithmetic keys quantize and detect overflow") {
  GroupModel lin = GroupModel::linear(2, {rm2("2", "1", "1", "1"), rm2("1", "1", "1", "2")},
                                      GenerationMode::Semigroup, Arithmetic::Float);
  Ball b = enumerate_ball(lin, 3);
  CHECK(b.elements.size() == 1 + 2 + 4 + 8);  // free positive products, no collisions
  MatD huge = MatD::Identity(2, 2) * 1e40;
  CHECK_THROWS_AS(matd_key(huge, 0x1p-40), Error);
}

TEST_CASE("generator determinant validation names the matrix") {
  std::vector<RatMat> bad{rm2("2", "0", "0", "1")};
  try {
    GroupModel::fuchsian(std::move(bad));
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
    CHECK(std::string(e.what()).find("[[2,0],[0,1]]") != std::string::npos);
  }
}
