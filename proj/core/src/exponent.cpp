#include "bjs/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "bjs/errors.hpp"

namespace bjs {

namespace {

// Window: drop the lowest 20% and the highest 10% of the populated grid
// range, then fit log n(R) against R by least squares.
void fit_profile(CountingProfile& p) {
  int grid = static_cast<int>(p.counts.size());
  int first = 0, last = grid - 1;
  while (first < grid && p.annuli[static_cast<size_t>(first)] == 0) ++first;
  while (last > first && p.annuli[static_cast<size_t>(last)] == 0) --last;
  double span = static_cast<double>(last - first);
  double lo = first + 0.2 * span;
  double hi = last - 0.1 * span;
  std::vector<std::pair<double, double>> pts;
  for (int r = 0; r < grid; ++r) {
    if (r < lo || r > hi) continue;
    if (p.counts[static_cast<size_t>(r)] == 0) continue;
    pts.emplace_back(static_cast<double>(r),
                     std::log(static_cast<double>(p.counts[static_cast<size_t>(r)])));
  }
  p.window_lo = pts.empty() ? 0 : static_cast<int>(pts.front().first);
  p.window_hi = pts.empty() ? 0 : static_cast<int>(pts.back().first);
  if (pts.size() < 4) {
    p.insufficient_range = true;
    p.delta_hat = 0;
    p.fit_residual = 0;
    return;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double n = static_cast<double>(pts.size());
  p.delta_hat = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double intercept = (sy - p.delta_hat * sx) / n;
  double ss = 0;
  for (auto [x, y] : pts) {
    double r = y - (p.delta_hat * x + intercept);
    ss += r * r;
  }
  p.fit_residual = std::sqrt(ss / n);
}

}  // namespace

CountingProfile counting_profile(const GroupModel& m, const std::vector<GroupElement>& elements,
                                 const CocycleSpec& spec, int depth, bool truncated) {
  if (elements.empty()) throw Error(ErrorKind::NoSamples, "empty element set");
  CountingProfile p;
  p.convention = spec.name();
  p.depth = depth;
  p.truncated = truncated;
  p.total = elements.size();

  // counts[R] accumulates the annuli: n(R) = #{gamma : ||gamma|| < R+1}.
  std::vector<int> buckets;
  buckets.reserve(elements.size());
  int grid = 1;
  for (const GroupElement& e : elements) {
    double v = magnitude(m, e, spec);
    int b = std::max(0, static_cast<int>(std::floor(v)));
    buckets.push_back(b);
    grid = std::max(grid, b + 1);
  }
  p.counts.assign(static_cast<size_t>(grid), 0);
  p.annuli.assign(static_cast<size_t>(grid), 0);
  for (int b : buckets) ++p.annuli[static_cast<size_t>(b)];
  size_t acc = 0;
  for (int r = 0; r < grid; ++r) {
    acc += p.annuli[static_cast<size_t>(r)];
    p.counts[static_cast<size_t>(r)] = acc;
  }
  fit_profile(p);
  return p;
}

double poincare_partial(const GroupModel& m, const std::vector<GroupElement>& elements,
                        const CocycleSpec& spec, double s) {
  if (s <= 0) throw Error(ErrorKind::ConfigError, "exponent must be positive");
  double sum = 0;
  for (const GroupElement& e : elements) sum += std::exp(-s * magnitude(m, e, spec));
  return sum;
}

std::optional<double> free_word_length_exponent(const Semigroup& sg, int seed_size) {
  if (sg.dedup_collisions != 0) return std::nullopt;
  std::vector<size_t> per_generation(static_cast<size_t>(sg.depth) + 1, 0);
  for (const GroupElement& e : sg.elements) ++per_generation[static_cast<size_t>(e.length)];
  size_t expect = 1;
  for (size_t g = 0; g < per_generation.size(); ++g) {
    if (per_generation[g] != expect) return std::nullopt;
    expect *= static_cast<size_t>(seed_size);
  }
  return std::log(static_cast<double>(seed_size));
}

MeasureTruncation ps_truncation(const GroupModel& m, const std::vector<GroupElement>& elements,
                                const CocycleSpec& spec, double s, double delta_hat) {
  if (!(s > delta_hat)) throw Error(ErrorKind::SubcriticalS, "s must exceed the current deltaHat");
  if (elements.empty()) throw Error(ErrorKind::NoSamples, "empty element set");
  MeasureTruncation nu;
  nu.s = s;
  nu.weights.reserve(elements.size());
  for (const GroupElement& e : elements)
    nu.weights.push_back(std::exp(-s * magnitude(m, e, spec)));
  double q = 0;
  for (double w : nu.weights) q += w;
  nu.normalizer = q;
  for (double& w : nu.weights) w /= q;
  return nu;
}

namespace {

// Interior membership of an orbit point in a shadow body.
bool interior_in_shadow(const GroupModel& m, const Shadow& s, const GroupElement& g) {
  if (s.body == ShadowBody::Full) return true;
  if (s.body == ShadowBody::Empty) return false;
  switch (s.body) {
    case ShadowBody::Cylinder:
      return word_has_prefix(g.tree_value, s.prefix);
    case ShadowBody::Arc: {
      std::complex<double> z = fuchsian_disk_point(m, g);
      std::complex<double> u = std::polar(1.0, s.arc_start);
      std::complex<double> v = std::polar(1.0, s.arc_start + s.arc_extent);
      std::complex<double> mid = std::polar(1.0, s.arc_start + s.arc_extent / 2);
      auto cross = [](std::complex<double> a, std::complex<double> b) {
        return a.real() * b.imag() - a.imag() * b.real();
      };
      double side_mid = cross(v - u, mid - u);
      double side_z = cross(v - u, z - u);
      return side_mid * side_z > 0;
    }
    default:
      throw Error(ErrorKind::ModelMismatch, "interior membership undefined for sampled caps");
  }
}

}  // namespace

double shadow_measure(const GroupModel& m, const MeasureTruncation& nu,
                      const std::vector<GroupElement>& elements, const Shadow& s) {
  if (nu.weights.size() != elements.size())
    throw Error(ErrorKind::ConfigError, "weights and elements misaligned");
  double mass = 0;
  for (size_t i = 0; i < elements.size(); ++i)
    if (interior_in_shadow(m, s, elements[i])) mass += nu.weights[i];
  return mass;
}

namespace {

double smallest_growth_constant(const CountingProfile& p, double delta_hat) {
  double c = 1.0;
  for (int r = p.window_lo; r <= p.window_hi; ++r) {
    size_t n = p.counts[static_cast<size_t>(r)];
    if (n == 0) return std::numeric_limits<double>::infinity();
    c = std::max(c, std::exp(delta_hat * r) / static_cast<double>(n));
  }
  return c;
}

}  // namespace

GrowthCheck growth_lower_bound_check(const CountingProfile& deep, const CountingProfile& shallow,
                                     double delta_hat) {
  GrowthCheck g;
  g.c_deep = smallest_growth_constant(deep, delta_hat);
  g.c_shallow = smallest_growth_constant(shallow, delta_hat);
  bool finite = std::isfinite(g.c_deep) && std::isfinite(g.c_shallow);
  double ratio = finite ? g.c_deep / g.c_shallow : 0;
  g.pass = finite && ratio >= 0.5 && ratio <= 1.5;
  return g;
}

GapReport gap_report(const CountingProfile& group_profile, const CountingProfile& semigroup_profile,
                     double delta_target, double word_slope, int seed_size, double tolerance,
                     double margin) {
  if (group_profile.convention != semigroup_profile.convention)
    throw Error(ErrorKind::ConventionMismatch,
                group_profile.convention + " vs " + semigroup_profile.convention);
  GapReport rep;
  rep.delta_target = delta_target;
  rep.delta_hat_group = group_profile.delta_hat;
  rep.delta_hat_semigroup = semigroup_profile.delta_hat;
  rep.word_slope = word_slope;
  rep.seed_size = seed_size;
  rep.tolerance = tolerance;
  rep.margin = margin;

  auto push = [&](const std::string& name, double lhs, double rhs) {
    rep.assertions.push_back({name, lhs, rhs, lhs <= rhs});
  };
  push("target-below-semigroup", delta_target - tolerance, rep.delta_hat_semigroup);
  push("semigroup-below-group", rep.delta_hat_semigroup + margin, rep.delta_hat_group);
  double logS = std::log(static_cast<double>(seed_size));
  push("log-bound-lower", logS / word_slope, rep.delta_hat_semigroup);
  push("log-bound-upper", rep.delta_hat_semigroup, word_slope * logS);
  rep.all_pass = true;
  for (const GapBand& b : rep.assertions) rep.all_pass = rep.all_pass && b.pass;
  return rep;
}

std::string profile_to_csv(const CountingProfile& p) {
  std::ostringstream os;
  os << "R,n,logn\n";
  os.precision(17);
  for (size_t r = 0; r < p.counts.size(); ++r) {
    os << r << ',' << p.counts[r] << ',';
    if (p.counts[r] > 0)
      os << std::log(static_cast<double>(p.counts[r]));
    else
      os << "";
    os << '\n';
  }
  return os.str();
}

CountingProfile profile_from_csv(const std::string& csv) {
  CountingProfile p;
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto c1 = line.find(',');
    auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw Error(ErrorKind::IoError, "malformed profile row: " + line);
    p.counts.push_back(static_cast<size_t>(std::stoull(line.substr(c1 + 1, c2 - c1 - 1))));
  }
  // annuli recoverable from consecutive counts
  p.annuli.assign(p.counts.size(), 0);
  for (size_t r = 0; r < p.counts.size(); ++r)
    p.annuli[r] = p.counts[r] - (r ? p.counts[r - 1] : 0);
  p.total = p.counts.empty() ? 0 : p.counts.back();
  fit_profile(p);
  return p;
}

}  // namespace bjs
