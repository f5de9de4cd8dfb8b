// Reduction of an overdetermined system G (n rows) to a well-constrained one
// A * G with k rows.
#pragma once

#include <vector>

#include "adaptrack/linalg.hpp"
#include "adaptrack/random.hpp"

namespace adaptrack {

enum class RandomizerKind { Fixed, Pseudoinverse, LeverageScore };

/// Nonzero A(output, input) = weight of a row-selecting randomizer.
struct SelectedRow {
  Index output = 0;
  Index input = 0;
  double weight = 1.0;
};

class RandomizerState {
 public:
  RandomizerState() = default;

  static RandomizerState dense(RandomizerKind kind, CMatrix a);
  static RandomizerState selection(Index inputs, std::vector<SelectedRow> rows);

  RandomizerKind kind() const { return kind_; }
  Index outputs() const { return outputs_; }
  Index inputs() const { return inputs_; }
  bool is_selection() const { return kind_ == RandomizerKind::LeverageScore; }
  const std::vector<SelectedRow>& selected() const { return selected_; }

  /// Dense k x n matrix (materialised for selections).
  CMatrix matrix() const;

  /// Rows of G that must be evaluated, in the order `apply_compact` expects.
  const std::vector<Index>& required_inputs() const { return required_; }

  CVector apply(const CVector& g) const;
  CMatrix apply(const CMatrix& jg) const;
  /// As `apply`, with G already restricted to `required_inputs()`.
  CVector apply_compact(const CVector& g_required) const;
  CMatrix apply_compact(const CMatrix& jg_required) const;

 private:
  RandomizerKind kind_ = RandomizerKind::Fixed;
  Index outputs_ = 0;
  Index inputs_ = 0;
  CMatrix dense_;
  std::vector<SelectedRow> selected_;
  std::vector<Index> required_;
};

/// A = [I Q] with Q of unit-modulus random entries; A = I when k == n.
RandomizerState fixed_randomizer(Index k, Index n, Rng& rng);
/// A = [I Q] for an explicit Q (k x (n-k)).
RandomizerState fixed_randomizer_from_q(const CMatrix& q);
/// Explicit dense A.
RandomizerState fixed_randomizer_from_matrix(CMatrix a);

/// A = pinv(Jg), so that A * Jg = I at the build point.
RandomizerState pinv_randomizer(const CMatrix& jg);

struct LeverageSelection {
  RVector scores;
  std::vector<Index> order;     // rows by descending score, ties in original order
  std::vector<Index> selected;  // chosen rows of Jg, one per output
  RandomizerState randomizer;
};

/// Greedy leverage-score row selection: scan rows by descending score and
/// keep each row independent of those already kept.  Output r takes row
/// selected[r] scaled by its inverse 2-norm.
LeverageSelection leverage_selection(const CMatrix& jg);
RandomizerState leverage_randomizer(const CMatrix& jg);

}  // namespace adaptrack
