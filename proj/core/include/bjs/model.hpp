#pragma once

#include <complex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bjs/matrix.hpp"
#include "bjs/words.hpp"

namespace bjs {

enum class ModelKind { FreeTree, Fuchsian, Linear };
enum class Arithmetic { ExactRational, Float };
enum class GenerationMode { Group, Semigroup };

const char* model_kind_name(ModelKind k);

// One of the three concrete models everything runs on:
//   free-tree : the free group/semigroup of rank k with ends boundary and
//               the ultrametric 2^(-cpl) on the end compactification,
//   fuchsian  : exact rational matrices in SL(2,R) acting on the closed unit
//               disk through the Cayley transform, chordal metric,
//   linear    : matrices in SL(d,R) acting projectively; no compactified
//               metric, only boundary-to-boundary projective distance.
struct GroupModel {
  ModelKind kind = ModelKind::FreeTree;
  Arithmetic arith = Arithmetic::ExactRational;
  GenerationMode mode = GenerationMode::Group;
  int rank = 2;  // free-tree
  int dim = 2;   // matrix models
  std::vector<RatMat> generators;          // matrix models, user-supplied list
  std::vector<std::string> generator_names;
  double float_tolerance = 1e-9;
  double key_grid = 0x1p-40;

  static GroupModel free_tree(int rank, GenerationMode mode = GenerationMode::Group);
  static GroupModel fuchsian(std::vector<RatMat> gens,
                             GenerationMode mode = GenerationMode::Group,
                             Arithmetic arith = Arithmetic::ExactRational);
  static GroupModel linear(int dim, std::vector<RatMat> gens,
                           GenerationMode mode = GenerationMode::Semigroup,
                           Arithmetic arith = Arithmetic::ExactRational);

  // Generator list actually used for products: closed under formal inverses
  // in group mode, verbatim in semigroup mode.
  int effective_generator_count() const;
  // Tree models index letters directly; matrix models index into this.
  RatMat effective_generator(int idx) const;
  Letter tree_letter(int idx) const;
  std::string effective_generator_name(int idx) const;

  bool is_matrix_model() const { return kind != ModelKind::FreeTree; }
  void validate() const;
};

struct GroupElement {
  Word word;        // spelling in effective-generator indices (shortest known)
  Word tree_value;  // free-tree: the reduced word (also the canonical value)
  RatMat mat;       // matrix models, exact arithmetic
  MatD matf;        // matrix models, float arithmetic
  std::string key;  // canonical dedup key
  int length = 0;   // |gamma|_S = BFS depth of first discovery

  bool is_identity() const { return length == 0 && word.empty(); }
};

struct BoundaryPoint {
  ModelKind kind = ModelKind::FreeTree;
  Word ray;           // tree: reduced prefix of an end
  int truncation = 0; // tree: intended depth of the stored prefix
  double angle = 0;   // fuchsian: the circle point e^{i angle}
  VecD dir;           // linear: unit vector modulo sign
  VecD dual;          // linear: optional dual covector (empty when unused)
};

struct CompactifiedPoint {
  ModelKind kind = ModelKind::FreeTree;
  bool interior = true;
  GroupElement g;   // interior representative
  BoundaryPoint b;  // boundary representative
};

GroupElement model_identity(const GroupModel& m);
GroupElement model_generator(const GroupModel& m, int effective_idx);
GroupElement model_element_from_word(const GroupModel& m, const Word& w);

// Product with canonical key recomputation.  Word length is the spelled
// length; enumeration replaces it by the first-discovery depth.
GroupElement multiply(const GroupModel& m, const GroupElement& a, const GroupElement& b);
GroupElement inverse(const GroupModel& m, const GroupElement& a);

struct Ball {
  GroupModel model;
  std::vector<GroupElement> elements;            // BFS order, lexicographic in shells
  std::unordered_map<std::string, int> index;    // canonical key -> position
  bool truncated = false;
  int radius = 0;

  const GroupElement* find(const std::string& key) const {
    auto it = index.find(key);
    return it == index.end() ? nullptr : &elements[static_cast<size_t>(it->second)];
  }
};

// Breadth-first closure of products of at most `radius` effective
// generators, deduplicated by canonical key.  Deterministic: shells are
// generated in lexicographic order, so first discovery realizes the
// shortest-then-lexicographic tie-break.
Ball enumerate_ball(const GroupModel& m, int radius, size_t element_cap = SIZE_MAX);

CompactifiedPoint compactify(const GroupModel& m, const GroupElement& g);
CompactifiedPoint boundary(const GroupModel& m, const BoundaryPoint& b);

BoundaryPoint tree_end(const Word& ray, int truncation);
BoundaryPoint circle_point(double angle);
BoundaryPoint projective_point(const VecD& v);
BoundaryPoint projective_point(const VecD& v, const VecD& dual);

// Compatible metric on the compactification (tree, fuchsian).  The linear
// model only defines boundary-to-boundary projective distance.
double dist(const GroupModel& m, const CompactifiedPoint& p, const CompactifiedPoint& q);

CompactifiedPoint act(const GroupModel& m, const GroupElement& g, const CompactifiedPoint& p);

// Unit-disk embedding used by the fuchsian model: Cayley(g . i).
std::complex<double> fuchsian_disk_point(const GroupModel& m, const GroupElement& g);
// Boundary circle action through the half-plane Moebius action.
double fuchsian_circle_act(const GroupModel& m, const GroupElement& g, double angle);

struct LoxodromicData {
  BoundaryPoint attracting;
  BoundaryPoint repelling;
};

// Fixed-point data of a loxodromic element, or nullopt ("not-loxodromic").
std::optional<LoxodromicData> loxodromic_data(const GroupModel& m, const GroupElement& g);

// CSV export: canonicalKey, word, wordLength.
std::string ball_to_csv(const Ball& ball);

}  // namespace bjs
