#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bjs/cocycle.hpp"
#include "bjs/coloring.hpp"
#include "bjs/model.hpp"
#include "bjs/shadow.hpp"

namespace bjs {

// Adjusters: a finite set F such that every sampled gamma admits some f in F
// making gamma*f loxodromic with all four fixed-point/orbit distances above
// epsilon_tilde.  Purely empirical; certification downstream is what counts.
struct AdjusterResult {
  std::vector<GroupElement> adjusters;
  double epsilon_tilde = 0;
  size_t sampled = 0;
  bool empirical = true;
};

AdjusterResult find_adjusters(const GroupModel& m, const Ball& ball, int candidate_depth);

// Scales of the construction, all derived from d(y,x).
struct ConstructionScales {
  CompactifiedPoint x;
  CompactifiedPoint y;
  double epsilon_tilde = 0;  // effective value the scales were checked against
  double base_distance = 0;  // d(y,x)
  double t0 = 0, s1 = 0, s2 = 0, epsilon0 = 0;
};

ConstructionScales derive_scales(const GroupModel& m, const CompactifiedPoint& x,
                                 const CompactifiedPoint& y, double epsilon_tilde);

// Empirical constants feeding seed selection; every value is an estimate
// with the recorded safety factor already applied.
struct SeedThresholds {
  double c_finite = 0;      // magnitude shift by adjusters, C(F u F^-1)
  double c_upper = 0;       // one-sided subadditivity constant at scale t0
  double coloring = 1;      // C_shadow + 2 C_finite
  double safety = 1.5;
};

// max ||alpha^-1 beta||_sigma over sampled pairs whose shadows at scale eps
// intersect while their magnitudes differ by at most mag_window.
double estimate_shadow_separation_constant(const GroupModel& m, const CocycleSpec& sigma,
                                           const Ball& ball, double eps, double mag_window,
                                           size_t max_pairs, uint64_t seed);

// Complete list of A_{sigma,n} intersected with B_{t0/2}(x), any internal
// generation strategy.  Must be exhaustive for each requested n.
using AnnulusSupplier = std::function<std::vector<GroupElement>(int n)>;

// Builds the supplier by filtering a materialized ball.
AnnulusSupplier annuli_from_ball(const GroupModel& m, const Ball& ball, const CocycleSpec& sigma,
                                 const ConstructionScales& scales);
// Tree-only deep supplier: enumerates the annulus inside the cylinder around
// x directly, far beyond feasible ball depths.
AnnulusSupplier annuli_from_cylinder(const GroupModel& m, const CocycleSpec& sigma,
                                     const ConstructionScales& scales);

struct WTraceEntry {
  int annulus = 0;
  int color_class = 0;
  int adjuster = 0;
  double weight = 0;
  int candidates = 0;
};

struct SeedSelection {
  bool found = false;
  std::string status;  // "ok" or "seed-not-found"
  std::vector<GroupElement> seed;
  int annulus = -1;
  int color_class = -1;
  int adjuster = -1;
  double weight = 0;
  double threshold = 0;
  std::vector<WTraceEntry> trace;  // best weight per annulus
};

SeedSelection select_seed(const GroupModel& m, const CocycleSpec& sigma, double delta,
                          const ConstructionScales& scales, const AdjusterResult& adjusters,
                          const SeedThresholds& thresholds, const AnnulusSupplier& annuli,
                          int annulus_min, int annulus_max);

struct PropertyCheck {
  std::string name;
  bool pass = false;
  size_t checked = 0;
  std::string counterexample;
};

struct CocycleFit {
  std::string cocycle;
  double slope = 1;   // B1
  double offset = 0;  // b1
};

struct SeedCertificate {
  bool pass = false;
  double delta = 0;
  int depth = 0;  // certification depth L
  std::string sigma_name;
  ConstructionScales scales;
  std::vector<PropertyCheck> checks;
  double max_inverse_magnitude = 0;   // D0
  double min_branch_separation = 0;   // r
  double property4_min_slack = 0;     // min over nodes of sum * e^{delta ||gamma||} - 1
  int freeness_depth = 0;
  size_t nodes = 0;
  int refinement_count = 0;
  std::vector<CocycleFit> fits;
  std::vector<GroupElement> seed;
};

SeedCertificate certify(const GroupModel& m, const CocycleSpec& sigma,
                        const std::vector<CocycleSpec>& registered,
                        const std::vector<GroupElement>& seed, const ConstructionScales& scales,
                        double delta, int L);

struct Semigroup {
  std::vector<GroupElement> elements;  // id first, then by generation; length = |gamma|_S
  std::vector<Word> seed_words;        // aligned spellings in seed letters
  size_t dedup_collisions = 0;
  int depth = 0;
};

// Products of at most L seed letters with canonical dedup; collision count
// must be zero for a free seed.
Semigroup semigroup_enumerate(const GroupModel& m, const std::vector<GroupElement>& seed, int L);

// Accumulation-set separation: products stay near x, inverse products stay
// away, and the annular witness region around y meets the sampled limit set
// but no deep products.
struct SeparationReport {
  bool products_near_x = false;
  bool inverses_far_from_x = false;
  bool witness_meets_limit_set = false;
  bool witness_avoids_semigroup = false;
  double max_product_distance = 0;
  double min_inverse_distance = 0;
  bool pass() const {
    return products_near_x && inverses_far_from_x && witness_meets_limit_set &&
           witness_avoids_semigroup;
  }
};

SeparationReport separation_report(const GroupModel& m, const Semigroup& sg,
                                   const ConstructionScales& scales,
                                   const std::vector<CompactifiedPoint>& limit_set_samples);

// Word-magnitude comparability fit over an enumerated semigroup.
CocycleFit fit_word_magnitude(const GroupModel& m, const Semigroup& sg, const CocycleSpec& spec);

}  // namespace bjs
