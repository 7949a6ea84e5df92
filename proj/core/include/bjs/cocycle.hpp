#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bjs/model.hpp"

namespace bjs {

// Vector of log singular values in weakly descending order; the value of
// the Cartan projection kappa(g) for SL(d,R) (and the pair (t,-t) for the
// fuchsian model).  Simple roots are indexed 1..d-1: alpha_i = k_i - k_{i+1}.
struct CartanVector {
  VecD entries;
  std::vector<int> theta;  // root indices of a partial projection, empty = full

  int d() const { return static_cast<int>(entries.size()); }
};

double simple_root(const CartanVector& k, int root_index_1based);
double min_theta_root(const CartanVector& k, const std::vector<int>& theta);

// reverse-and-negate; realizes the opposition involution on the Cartan space.
VecD iota(const VecD& v);
std::vector<int> iota_star(const std::vector<int>& theta, int d);

CartanVector cartan_projection(const MatD& g);
CartanVector cartan_projection(const GroupModel& m, const GroupElement& g);

// Orthogonal projection onto the partial Cartan subspace cut out by the
// roots outside theta (coordinates become constant on the induced blocks).
// Idempotent, fixes the subspace pointwise.
CartanVector partial_projection(const CartanVector& k, const std::vector<int>& theta);

struct LinearFunctional {
  VecD coeffs;
  std::string label;

  double operator()(const VecD& v) const { return coeffs.dot(v); }
  double operator()(const CartanVector& k) const { return coeffs.dot(k.entries); }

  static LinearFunctional omega1(int d);          // first coordinate
  static LinearFunctional root(int d, int i);     // alpha_i
  bool iota_invariant(int d) const;
};

// phi o p_theta == phi, verified on random descending trace-zero samples.
bool verify_theta_compatible(const LinearFunctional& phi, const std::vector<int>& theta, int d,
                             int samples, uint64_t seed, double tol = 1e-9);

enum class CocycleKind {
  BusemannTree,
  BusemannFuchsian,
  ProjectiveOmega1,
  DualProjective,
  CartanMagnitude,
};

struct CocycleSpec {
  CocycleKind kind = CocycleKind::BusemannTree;
  LinearFunctional phi;    // CartanMagnitude only
  std::vector<int> theta;  // CartanMagnitude only (1-based root indices)
  double coarse_constant = 0.0;  // reported kappa; 0 for the continuous instances

  std::string name() const;
  static CocycleSpec busemann_tree();
  static CocycleSpec busemann_fuchsian();
  static CocycleSpec projective_omega1();
  static CocycleSpec dual_projective();
  static CocycleSpec cartan(LinearFunctional phi, std::vector<int> theta);
};

// The sigma-magnitude ||gamma||_sigma.
double magnitude(const GroupModel& m, const GroupElement& g, const CocycleSpec& spec);

// sigma(gamma, x) for boundary x.  For DualProjective the boundary point
// carries the covector in `dir` and the action is by inverse-transpose.
double cocycle_value(const GroupModel& m, const GroupElement& g, const CompactifiedPoint& x,
                     const CocycleSpec& spec);

// Busemann cocycle and Gromov product in the tree and fuchsian models.
// Tree values are exact integers.
double busemann(const GroupModel& m, const GroupElement& g, const CompactifiedPoint& x);
double gromov_product(const GroupModel& m, const CompactifiedPoint& x, const CompactifiedPoint& y);

// Iwasawa cocycle: gk = K exp(B) N with B = log of the positive diagonal of
// the triangular factor of g*k.  The frame k must be orthonormal.
VecD iwasawa_cocycle(const MatD& g, const MatD& frame, double tol = 1e-8);

// A GPS system (sigma-bar, sigma, G); the pairing G is determined by the
// kind of the pair.
struct GPSTriple {
  CocycleSpec sigma_bar;
  CocycleSpec sigma;
};

GPSTriple gps_tree();
GPSTriple gps_fuchsian();
GPSTriple gps_projective();

double gps_pairing(const GroupModel& m, const GPSTriple& t, const CompactifiedPoint& x,
                   const CompactifiedPoint& y);

struct GPSSample {
  GroupElement g;
  CompactifiedPoint x;  // sigma-bar side
  CompactifiedPoint y;  // sigma side
};

// max over samples of |(sigma_bar(g,x) + sigma(g,y)) - (G(gx,gy) - G(x,y))|.
double gps_defect(const GroupModel& m, const GPSTriple& t, const std::vector<GPSSample>& samples);

// Empirical coarse constants of an expanding cocycle, estimated on a ball.
struct TripleConstant {
  double lower = 0.0;  // max of ||a||+||b|| - ||ab|| over admissible pairs
  double upper = 0.0;  // max of ||ab|| - ||a|| - ||b||
  double epsilon = 0.0;
  size_t pairs = 0;
};

struct CocycleConstants {
  TripleConstant triple;
  double finite = 0.0;       // C(F): max magnitude shift by elements of F u F^-1
  int properness_depth = 0;  // shell depth past which min magnitude is nondecreasing
  double safety = 1.5;       // multiplier applied when the constants are consumed
  bool empirical = true;
};

TripleConstant estimate_triple_constant(const GroupModel& m, const CocycleSpec& spec, double eps,
                                        const Ball& ball, size_t max_pairs, uint64_t seed);
double estimate_finite_constant(const GroupModel& m, const CocycleSpec& spec, const Ball& ball,
                                const std::vector<GroupElement>& F);
int properness_threshold(const GroupModel& m, const CocycleSpec& spec, const Ball& ball);

CocycleConstants estimate_cocycle_constants(const GroupModel& m, const CocycleSpec& spec, double eps,
                                            const Ball& ball, const std::vector<GroupElement>& F,
                                            size_t max_pairs = 200000, uint64_t seed = 1);

}  // namespace bjs
