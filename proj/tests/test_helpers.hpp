#pragma once

#include <random>
#include <string>
#include <vector>

#include "bjs/model.hpp"

namespace bjs::testing {

inline RatMat rm2(const std::string& a, const std::string& b, const std::string& c,
                  const std::string& d) {
  RatMat m(2);
  m.at(0, 0) = rational_from_string(a);
  m.at(0, 1) = rational_from_string(b);
  m.at(1, 0) = rational_from_string(c);
  m.at(1, 1) = rational_from_string(d);
  return m;
}

inline RatMat rm3(const std::vector<std::string>& entries) {
  RatMat m(3);
  for (int i = 0; i < 9; ++i) m.a[static_cast<size_t>(i)] = rational_from_string(entries[static_cast<size_t>(i)]);
  return m;
}

// Classical Schottky pair: two hyperbolic elements of SL(2,Q) whose four
// isometric circles ([-1,1/3], [2/3,2], [3,13/3], [14/3,6]) are pairwise
// disjoint, so the group is free and purely loxodromic.
inline GroupModel schottky_model(GenerationMode mode = GenerationMode::Group) {
  std::vector<RatMat> gens{rm2("2", "0", "3/2", "1/2"), rm2("8", "-30", "3/2", "-11/2")};
  GroupModel m = GroupModel::fuchsian(std::move(gens), mode);
  m.generator_names = {"A", "B"};
  return m;
}

// The modular group generators S (order 4) and T (parabolic).
inline GroupModel modular_model() {
  std::vector<RatMat> gens{rm2("0", "-1", "1", "0"), rm2("1", "1", "0", "1")};
  GroupModel m = GroupModel::fuchsian(std::move(gens), GenerationMode::Group);
  m.generator_names = {"S", "T"};
  return m;
}

// Random SL(2,R) matrix with moderate condition number, via K A K.
inline MatD random_sl2(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  std::uniform_real_distribution<double> logsv(0.0, 3.0);
  double a1 = angle(rng), a2 = angle(rng), t = logsv(rng);
  MatD k1(2, 2), k2(2, 2), d(2, 2);
  k1 << std::cos(a1), -std::sin(a1), std::sin(a1), std::cos(a1);
  k2 << std::cos(a2), -std::sin(a2), std::sin(a2), std::cos(a2);
  d << std::exp(t), 0, 0, std::exp(-t);
  return k1 * d * k2;
}

inline MatD random_sl3(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatD m(3, 3);
  do {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = g(rng);
  } while (std::abs(m.determinant()) < 0.05);
  double det = m.determinant();
  double scale = std::cbrt(std::abs(det));
  m /= scale;
  if (m.determinant() < 0) m.row(0) = -m.row(0);  // det +1
  return m;
}

}  // namespace bjs::testing
