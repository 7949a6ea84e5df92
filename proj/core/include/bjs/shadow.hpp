#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bjs/cocycle.hpp"
#include "bjs/model.hpp"

namespace bjs {

// Shadow of gamma at scale epsilon: the image under gamma of the complement
// of the epsilon-ball around gamma^-1 in the compactification.  Tree shadows
// are cylinders, fuchsian shadows are circular arcs, linear shadows are
// sampled caps.  Degenerate cases (the ball misses or covers the whole
// boundary) are legal flagged values.
enum class ShadowBody { Cylinder, Arc, SampledCap, Full, Empty };

struct Shadow {
  ModelKind kind = ModelKind::FreeTree;
  GroupElement gamma;
  double epsilon = 0;
  ShadowBody body = ShadowBody::Full;

  Word prefix;  // cylinder

  double arc_start = 0;   // arc, normalized to [0, 2pi)
  double arc_extent = 0;  // arc length in (0, 2pi)
  bool arc_wraps = false;

  VecD cap_center;             // sampled cap: attracting direction of gamma
  VecD cap_excluded;           // source direction removed before mapping
  std::vector<VecD> cap_samples;
  int cap_resolution = 0;
  double cap_margin = 0;  // resolution band for three-valued predicates

  bool degenerate() const { return body == ShadowBody::Full || body == ShadowBody::Empty; }
};

// Three-valued predicate result for sampled bodies; exact bodies only ever
// produce True or False.
enum class Tri { False = 0, True = 1, Unresolved = 2 };

Shadow shadow(const GroupModel& m, const GroupElement& gamma, double epsilon,
              int cap_samples = 1000, uint64_t cap_seed = 7);

bool shadow_contains(const GroupModel& m, const Shadow& s, const CompactifiedPoint& x);

Tri nested(const GroupModel& m, const Shadow& inner, const Shadow& outer);
Tri disjoint(const GroupModel& m, const Shadow& a, const Shadow& b);
double diameter(const GroupModel& m, const Shadow& s);

// Observed sharpness of the magnitude estimate on a shadow: the max over
// sampled x in S_eps(gamma) of |sigma(gamma, gamma^-1 x) - ||gamma||_sigma|.
struct ShadowAudit {
  double max_defect = 0;
  size_t samples = 0;
  bool empirical = true;
};

ShadowAudit shadow_magnitude_audit(const GroupModel& m, const GroupElement& gamma, double epsilon,
                                   const CocycleSpec& spec, size_t samples, uint64_t seed);

struct ConicalWitness {
  CompactifiedPoint point;
  std::vector<GroupElement> sequence;
  double epsilon = 0;
  std::vector<double> diameters;
};

// Follows a geodesic ray in the semigroup (gamma_{n+1} = gamma_n * s), checks
// the nesting of its shadows and strictly decreasing diameters, and returns a
// boundary point certified to lie in every stored shadow.
ConicalWitness conical_trace(const GroupModel& m, const std::vector<GroupElement>& ray,
                             const std::vector<GroupElement>& seed, double epsilon);

std::string shadows_to_csv(const GroupModel& m, const std::vector<Shadow>& shadows);

}  // namespace bjs
