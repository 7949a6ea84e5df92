#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bjs/cocycle.hpp"
#include "bjs/construct.hpp"
#include "bjs/model.hpp"
#include "bjs/shadow.hpp"

namespace bjs {

// Orbital counting data on a unit magnitude grid, with the regression
// estimate of the critical exponent over a stable window.
struct CountingProfile {
  std::string convention;        // magnitude convention (cocycle name)
  std::vector<size_t> counts;    // n(R) for R = 0,1,2,...
  std::vector<size_t> annuli;    // #A_n
  double delta_hat = 0;          // least-squares slope of log n(R) on the window
  double fit_residual = 0;       // rms residual of the fit
  int window_lo = 0, window_hi = 0;
  bool insufficient_range = false;
  int depth = 0;
  bool truncated = false;
  size_t total = 0;
};

CountingProfile counting_profile(const GroupModel& m, const std::vector<GroupElement>& elements,
                                 const CocycleSpec& spec, int depth = 0, bool truncated = false);

// Exact partial Poincare sum over the enumerated set, in canonical order.
double poincare_partial(const GroupModel& m, const std::vector<GroupElement>& elements,
                        const CocycleSpec& spec, double s);

// For a verified free seed the sphere counts are exactly (#S)^k, so the
// word-length critical exponent is log(#S) on the nose.
std::optional<double> free_word_length_exponent(const Semigroup& sg, int seed_size);

struct MeasureTruncation {
  double s = 0;
  std::vector<double> weights;  // aligned with the element list, sum to 1
  double normalizer = 0;        // Q(s)
};

MeasureTruncation ps_truncation(const GroupModel& m, const std::vector<GroupElement>& elements,
                                const CocycleSpec& spec, double s, double delta_hat);

// Mass the truncated measure puts on a shadow.  Interior orbit points count
// through the closure behaviour of the model: a tree element lies in a
// cylinder when its word extends the prefix; a disk point when it lies in
// the arc's chord sector.
double shadow_measure(const GroupModel& m, const MeasureTruncation& nu,
                      const std::vector<GroupElement>& elements, const Shadow& s);

struct GrowthCheck {
  double c_deep = 0;
  double c_shallow = 0;
  bool pass = false;
};

// Smallest C >= 1 with n(R) >= e^{delta_hat R} / C over both profile
// windows; passes when the two estimates agree within +-50%.
GrowthCheck growth_lower_bound_check(const CountingProfile& deep, const CountingProfile& shallow,
                                     double delta_hat);

struct GapBand {
  std::string name;
  double lhs = 0, rhs = 0;
  bool pass = false;
};

struct GapReport {
  double delta_target = 0;
  double delta_hat_semigroup = 0;
  double delta_hat_group = 0;
  double word_slope = 1;  // fitted B1
  int seed_size = 0;
  double tolerance = 0.05;
  double margin = 0.02;
  std::vector<GapBand> assertions;
  bool all_pass = false;
};

GapReport gap_report(const CountingProfile& group_profile, const CountingProfile& semigroup_profile,
                     double delta_target, double word_slope, int seed_size, double tolerance = 0.05,
                     double margin = 0.02);

std::string profile_to_csv(const CountingProfile& p);
CountingProfile profile_from_csv(const std::string& csv);

}  // namespace bjs
