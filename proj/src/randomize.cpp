#include "adaptrack/randomize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace adaptrack {

RandomizerState RandomizerState::dense(RandomizerKind kind, CMatrix a) {
  RandomizerState s;
  s.kind_ = kind;
  s.outputs_ = a.rows();
  s.inputs_ = a.cols();
  s.dense_ = std::move(a);
  s.required_.resize(static_cast<std::size_t>(s.inputs_));
  std::iota(s.required_.begin(), s.required_.end(), Index{0});
  return s;
}

RandomizerState RandomizerState::selection(Index inputs, std::vector<SelectedRow> rows) {
  RandomizerState s;
  s.kind_ = RandomizerKind::LeverageScore;
  s.outputs_ = static_cast<Index>(rows.size());
  s.inputs_ = inputs;
  std::sort(rows.begin(), rows.end(),
            [](const SelectedRow& a, const SelectedRow& b) { return a.output < b.output; });
  for (const auto& r : rows) {
    if (r.input < 0 || r.input >= inputs) throw DimensionMismatch("selection: bad input row");
    s.required_.push_back(r.input);
  }
  s.selected_ = std::move(rows);
  return s;
}

CMatrix RandomizerState::matrix() const {
  if (!is_selection()) return dense_;
  CMatrix a = CMatrix::Zero(outputs_, inputs_);
  for (const auto& r : selected_) a(r.output, r.input) = r.weight;
  return a;
}

CVector RandomizerState::apply(const CVector& g) const {
  if (g.size() != inputs_) throw DimensionMismatch("randomizer apply: wrong input length");
  if (!is_selection()) return dense_ * g;
  CVector out(outputs_);
  for (const auto& r : selected_) out(r.output) = r.weight * g(r.input);
  return out;
}

CMatrix RandomizerState::apply(const CMatrix& jg) const {
  if (jg.rows() != inputs_) throw DimensionMismatch("randomizer apply: wrong row count");
  if (!is_selection()) return dense_ * jg;
  CMatrix out(outputs_, jg.cols());
  for (const auto& r : selected_) out.row(r.output) = r.weight * jg.row(r.input);
  return out;
}

CVector RandomizerState::apply_compact(const CVector& g) const {
  if (!is_selection()) return apply(g);
  if (g.size() != outputs_) throw DimensionMismatch("randomizer apply: wrong compact length");
  CVector out(outputs_);
  for (const auto& r : selected_) out(r.output) = r.weight * g(r.output);
  return out;
}

CMatrix RandomizerState::apply_compact(const CMatrix& jg) const {
  if (!is_selection()) return apply(jg);
  if (jg.rows() != outputs_) throw DimensionMismatch("randomizer apply: wrong compact rows");
  CMatrix out(outputs_, jg.cols());
  for (const auto& r : selected_) out.row(r.output) = r.weight * jg.row(r.output);
  return out;
}

RandomizerState fixed_randomizer(Index k, Index n, Rng& rng) {
  if (k > n || k < 1) throw DimensionMismatch("fixed_randomizer: need 1 <= k <= n");
  return fixed_randomizer_from_q(random_unit_matrix(k, n - k, rng));
}

RandomizerState fixed_randomizer_from_q(const CMatrix& q) {
  const Index k = q.rows();
  CMatrix a(k, k + q.cols());
  a.leftCols(k).setIdentity();
  a.rightCols(q.cols()) = q;
  return RandomizerState::dense(RandomizerKind::Fixed, std::move(a));
}

RandomizerState fixed_randomizer_from_matrix(CMatrix a) {
  return RandomizerState::dense(RandomizerKind::Fixed, std::move(a));
}

RandomizerState pinv_randomizer(const CMatrix& jg) {
  return RandomizerState::dense(RandomizerKind::Pseudoinverse, pseudoinverse(jg));
}

LeverageSelection leverage_selection(const CMatrix& jg) {
  const Index n = jg.rows();
  const Index k = jg.cols();
  LeverageSelection sel;
  sel.scores = leverage_scores(jg);

  // Scores equal up to rounding keep their original order.
  std::vector<double> key(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) key[static_cast<std::size_t>(i)] = std::round(sel.scores(i) * 1e10);
  sel.order.resize(static_cast<std::size_t>(n));
  std::iota(sel.order.begin(), sel.order.end(), Index{0});
  std::stable_sort(sel.order.begin(), sel.order.end(), [&](Index a, Index b) {
    return key[static_cast<std::size_t>(a)] > key[static_cast<std::size_t>(b)];
  });

  if (!(sel.scores(sel.order.front()) > 0.0)) {
    throw RankDeficient("leverage_selection: top leverage score is zero");
  }

  // Orthonormal basis of the kept rows, grown by two-pass Gram-Schmidt.
  CMatrix basis(k, k);
  Index rank = 0;
  std::vector<SelectedRow> rows;
  for (Index candidate : sel.order) {
    if (rank == k) break;
    const CVector row = jg.row(candidate).transpose();
    const double row_norm = row.norm();
    if (!(row_norm > 0.0)) continue;
    CVector res = row;
    for (int pass = 0; pass < 2; ++pass) {
      for (Index b = 0; b < rank; ++b) res -= basis.col(b) * basis.col(b).dot(res);
    }
    const double res_norm = res.norm();
    if (res_norm <= 1e-10 * row_norm) continue;
    basis.col(rank) = res / res_norm;
    rows.push_back(SelectedRow{rank, candidate, 1.0 / row_norm});
    sel.selected.push_back(candidate);
    ++rank;
  }
  if (rank < k) throw RankDeficient("leverage_selection: rows do not span the column space");
  sel.randomizer = RandomizerState::selection(n, std::move(rows));
  return sel;
}

RandomizerState leverage_randomizer(const CMatrix& jg) {
  return leverage_selection(jg).randomizer;
}

}  // namespace adaptrack
