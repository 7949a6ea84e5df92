#include "bjs/coloring.hpp"

#include <algorithm>

#include "bjs/errors.hpp"

namespace bjs {

namespace {

// Word-length magnitudes on equal-length reduced words make the conflict
// relation "shares a prefix of length >= p", an equivalence; greedy then
// numbers the members of each prefix class in input order.
bool equal_length_tree_fast_path(const GroupModel& m, const std::vector<GroupElement>& elements,
                                 const CocycleSpec& spec) {
  if (m.kind != ModelKind::FreeTree || spec.kind != CocycleKind::BusemannTree) return false;
  if (elements.empty()) return true;
  size_t len = elements.front().tree_value.size();
  if (len == 0) return false;
  for (const GroupElement& e : elements)
    if (e.tree_value.size() != len) return false;
  return true;
}

}  // namespace

ColoringPartition magnitude_partition(const GroupModel& m, const std::vector<GroupElement>& elements,
                                      double threshold, const CocycleSpec& spec) {
  if (threshold <= 0) throw Error(ErrorKind::ConfigError, "coloring threshold must be positive");
  ColoringPartition part;
  part.threshold = threshold;
  if (elements.empty()) return part;

  for (const GroupElement& e : elements)
    if (magnitude(m, e, spec) < threshold) ++part.conflict_set_size;

  size_t n = elements.size();
  std::vector<int> color(n, -1);
  int colors_used = 0;

  if (equal_length_tree_fast_path(m, elements, spec)) {
    int len = static_cast<int>(elements.front().tree_value.size());
    // conflict <=> 2 len - 2 cpl < threshold <=> cpl >= p
    int p = len + 1;
    while (p > 0 && 2.0 * len - 2.0 * (p - 1) < threshold) --p;
    if (p <= 0) {
      // every pair conflicts: all classes are singletons
      for (size_t i = 0; i < n; ++i) color[i] = static_cast<int>(i);
      colors_used = static_cast<int>(n);
    } else if (p > len) {
      for (size_t i = 0; i < n; ++i) color[i] = 0;  // no conflicts at all
      colors_used = 1;
    } else {
      std::unordered_map<std::string, int> group_rank;
      group_rank.reserve(n * 2);
      for (size_t i = 0; i < n; ++i) {
        std::string key = elements[i].tree_value.substr(0, static_cast<size_t>(p));
        int rank = group_rank[key]++;
        color[i] = rank;
        colors_used = std::max(colors_used, rank + 1);
      }
    }
  } else {
    std::vector<GroupElement> inverses;
    inverses.reserve(n);
    for (const GroupElement& e : elements) inverses.push_back(inverse(m, e));
    std::vector<char> taken;
    for (size_t i = 0; i < n; ++i) {
      taken.assign(static_cast<size_t>(colors_used) + 1, 0);
      for (size_t j = 0; j < i; ++j) {
        if (color[j] >= colors_used || taken[static_cast<size_t>(color[j])]) continue;
        GroupElement rel = multiply(m, inverses[j], elements[i]);
        if (rel.key == model_identity(m).key) continue;  // duplicate element, not a conflict edge
        if (magnitude(m, rel, spec) < threshold) taken[static_cast<size_t>(color[j])] = 1;
      }
      int c = 0;
      while (taken[static_cast<size_t>(c)]) ++c;
      color[i] = c;
      colors_used = std::max(colors_used, c + 1);
    }
  }

  part.classes.assign(static_cast<size_t>(colors_used), {});
  for (size_t i = 0; i < n; ++i) part.classes[static_cast<size_t>(color[i])].push_back(static_cast<int>(i));
  return part;
}

}  // namespace bjs
