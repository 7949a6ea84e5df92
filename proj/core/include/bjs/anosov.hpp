#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bjs/cocycle.hpp"
#include "bjs/construct.hpp"
#include "bjs/model.hpp"

namespace bjs {

// Uniform root-gap fit: alpha(kappa(gamma)) >= C |gamma|_S - c for all
// enumerated words and all alpha in theta.  C is the slope of the terminal
// segment of the lower convex hull of (word length, min root value); c is
// the smallest feasible offset for that slope.
struct AnosovFit {
  std::vector<int> theta;
  double slope = 0;   // C
  double offset = 0;  // c
  int depth = 0;
  bool no_gap = false;
  bool recheck_pass = false;  // full-coverage re-verification after fitting
  std::vector<std::pair<int, double>> lower_hull;
};

AnosovFit anosov_fit(const GroupModel& m, const std::vector<GroupElement>& elements,
                     const std::vector<int>& theta, int depth);

// theta-admissible cone data built from orbit pairs at tree distance >= B:
// the stored generators are the projected Cartan vectors of the relative
// positions, closed under the opposition involution.
struct ConeSpec {
  std::vector<int> theta;
  std::vector<VecD> generators;
  double wall_margin = 0;  // b: min over generators of min_alpha alpha(v)/|v|
  bool iota_closed = false;
  bool hull_wall_separated = false;
  bool theta_admissible = false;
  int separation_distance = 0;  // B
  size_t pairs = 0;
};

ConeSpec cone_build(const GroupModel& m, const Semigroup& sg, const std::vector<int>& theta, int B,
                    size_t max_pairs = 20000000, uint64_t seed = 11);

// Sweeps B over {2,3,4,5} and returns the first cone with positive margin.
ConeSpec cone_sweep(const GroupModel& m, const Semigroup& sg, const std::vector<int>& theta);

// d_phi(g1 o, g2 o) = phi(kappa(g1^-1 g2)).
double dphi(const GroupModel& m, const LinearFunctional& phi, const GroupElement& g1,
            const GroupElement& g2);

struct DphiReport {
  std::string phi;
  double max_defect = 0;  // D: max of d(1,3)-d(1,2)-d(2,3) over sampled triples
  size_t triples = 0;
  double qi_upper = 1;    // Q
  double qi_offset = 0;   // q
  double phi_cone_min = 0;  // min phi(v)/|v| over the cone generators
};

DphiReport triangle_defect(const GroupModel& m, const Semigroup& sg, const LinearFunctional& phi,
                           const ConeSpec& cone, size_t max_triples = 20000000, uint64_t seed = 13);

std::string cone_to_csv(const ConeSpec& cone);
std::string hull_to_csv(const AnosovFit& fit);

}  // namespace bjs
