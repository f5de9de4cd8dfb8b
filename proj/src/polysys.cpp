#include "adaptrack/polysys.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

namespace adaptrack {

VarStructure::VarStructure(std::vector<VariableGroup> groups, Index parameter_count)
    : groups_(std::move(groups)), parameter_count_(parameter_count) {
  if (groups_.empty()) throw Error("VarStructure: at least one variable group required");
  if (parameter_count_ < 0) throw Error("VarStructure: negative parameter count");
  Index offset = 0;
  for (const auto& g : groups_) {
    if (g.size < 1) throw Error("VarStructure: group sizes must be positive");
    offsets_.push_back(offset);
    offset += g.size;
  }
  variable_count_ = offset;
}

std::vector<std::size_t> VarStructure::projective_groups() const {
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (groups_[g].kind == GroupKind::Projective) out.push_back(g);
  }
  return out;
}

Polynomial::Polynomial(Index arity, std::vector<Term> terms)
    : arity_(arity), terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (static_cast<Index>(t.exponents.size()) != arity_) {
      throw DimensionMismatch("Polynomial: exponent vector length " +
                              std::to_string(t.exponents.size()) + " != arity " +
                              std::to_string(arity_));
    }
    for (int e : t.exponents) {
      if (e < 0) throw Error("Polynomial: negative exponent");
    }
  }
  canonicalize();
}

Polynomial Polynomial::constant(Index arity, Complex c) {
  return Polynomial(arity, {Term{c, Exponents(static_cast<std::size_t>(arity), 0)}});
}

Polynomial Polynomial::variable(Index arity, Index index, int power) {
  Exponents e(static_cast<std::size_t>(arity), 0);
  e.at(static_cast<std::size_t>(index)) = power;
  return Polynomial(arity, {Term{Complex(1.0), std::move(e)}});
}

void Polynomial::canonicalize() {
  std::map<Exponents, Complex> merged;
  for (auto& t : terms_) merged[std::move(t.exponents)] += t.coeff;
  terms_.clear();
  for (auto& [e, c] : merged) {
    if (c != Complex(0.0)) terms_.push_back(Term{c, e});
  }
}

int Polynomial::degree_in(Index begin, Index end) const {
  int best = 0;
  for (const auto& t : terms_) {
    best = std::max(best, std::accumulate(t.exponents.begin() + begin,
                                          t.exponents.begin() + end, 0));
  }
  return best;
}

std::optional<int> Polynomial::homogeneous_degree_in(Index begin, Index end) const {
  std::optional<int> degree;
  for (const auto& t : terms_) {
    const int d =
        std::accumulate(t.exponents.begin() + begin, t.exponents.begin() + end, 0);
    if (degree && *degree != d) return std::nullopt;
    degree = d;
  }
  return degree ? degree : std::optional<int>(0);
}

Polynomial Polynomial::derivative(Index index) const {
  std::vector<Term> out;
  for (const auto& t : terms_) {
    const int e = t.exponents[static_cast<std::size_t>(index)];
    if (e == 0) continue;
    Term d{t.coeff * double(e), t.exponents};
    d.exponents[static_cast<std::size_t>(index)] = e - 1;
    out.push_back(std::move(d));
  }
  return Polynomial(arity_, std::move(out));
}

Polynomial Polynomial::substitute_tail(Index values_begin, const CVector& values) const {
  if (values_begin + values.size() != arity_) {
    throw DimensionMismatch("substitute_tail: value count does not match arity");
  }
  std::vector<Term> out;
  for (const auto& t : terms_) {
    Complex c = t.coeff;
    for (Index k = 0; k < values.size(); ++k) {
      const int e = t.exponents[static_cast<std::size_t>(values_begin + k)];
      if (e > 0) c *= std::pow(values(k), e);
    }
    out.push_back(Term{c, Exponents(t.exponents.begin(), t.exponents.begin() + values_begin)});
  }
  return Polynomial(values_begin, std::move(out));
}

Polynomial Polynomial::extend(Index new_arity) const {
  if (new_arity < arity_) throw DimensionMismatch("extend: arity can only grow");
  std::vector<Term> out = terms_;
  for (auto& t : out) t.exponents.resize(static_cast<std::size_t>(new_arity), 0);
  return Polynomial(new_arity, std::move(out));
}

Complex Polynomial::evaluate(std::span<const Complex> point) const {
  if (static_cast<Index>(point.size()) != arity_) {
    throw DimensionMismatch("Polynomial::evaluate: point has wrong length");
  }
  Complex sum = 0.0;
  for (const auto& t : terms_) {
    Complex m = t.coeff;
    for (std::size_t k = 0; k < point.size(); ++k) {
      if (t.exponents[k] > 0) m *= std::pow(point[k], t.exponents[k]);
    }
    sum += m;
  }
  return sum;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.arity_ != arity_) throw DimensionMismatch("Polynomial +: arity mismatch");
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  canonicalize();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  return *this += other * Complex(-1.0);
}

Polynomial& Polynomial::operator*=(Complex s) {
  for (auto& t : terms_) t.coeff *= s;
  canonicalize();
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.arity_ != b.arity_) throw DimensionMismatch("Polynomial *: arity mismatch");
  std::vector<Term> out;
  out.reserve(a.terms_.size() * b.terms_.size());
  for (const auto& ta : a.terms_) {
    for (const auto& tb : b.terms_) {
      Exponents e(ta.exponents.size());
      for (std::size_t k = 0; k < e.size(); ++k) e[k] = ta.exponents[k] + tb.exponents[k];
      out.push_back(Term{ta.coeff * tb.coeff, std::move(e)});
    }
  }
  return Polynomial(a.arity_, std::move(out));
}

ParamPolySystem::ParamPolySystem(VarStructure structure, std::vector<Polynomial> polys)
    : structure_(std::move(structure)), polys_(std::move(polys)) {
  const Index arity = structure_.arity();
  for (const auto& p : polys_) {
    if (p.arity() != arity) {
      throw DimensionMismatch("ParamPolySystem: polynomial arity " +
                              std::to_string(p.arity()) + " != " + std::to_string(arity));
    }
    for (const auto& t : p.terms()) {
      for (int e : t.exponents) max_exponent_ = std::max(max_exponent_, e);
    }
  }
  factor_begin_.clear();
  compiled_.reserve(polys_.size());
  for (const auto& p : polys_) {
    Compiled c;
    c.value = compile(p);
    for (Index j = 0; j < structure_.variable_count(); ++j) {
      c.d_var.push_back(compile(p.derivative(j)));
    }
    for (Index k = 0; k < structure_.parameter_count(); ++k) {
      c.d_param.push_back(compile(p.derivative(structure_.parameter_offset() + k)));
    }
    compiled_.push_back(std::move(c));
  }
}

ParamPolySystem::TermRange ParamPolySystem::compile(const Polynomial& poly) {
  TermRange range;
  range.begin = static_cast<std::uint32_t>(coeffs_.size());
  for (const auto& t : poly.terms()) {
    coeffs_.push_back(t.coeff);
    factor_begin_.push_back(static_cast<std::uint32_t>(factor_index_.size()));
    for (std::size_t k = 0; k < t.exponents.size(); ++k) {
      if (t.exponents[k] == 0) continue;
      factor_index_.push_back(static_cast<std::uint16_t>(k));
      factor_power_.push_back(static_cast<std::uint16_t>(t.exponents[k]));
    }
    factor_end_.push_back(static_cast<std::uint32_t>(factor_index_.size()));
  }
  range.end = static_cast<std::uint32_t>(coeffs_.size());
  return range;
}

Complex ParamPolySystem::eval_range(TermRange range, const Complex* powers,
                                    std::uint64_t& ops) const {
  const std::size_t stride = static_cast<std::size_t>(max_exponent_) + 1;
  Complex sum = 0.0;
  for (std::uint32_t t = range.begin; t < range.end; ++t) {
    Complex m = coeffs_[t];
    for (std::uint32_t f = factor_begin_[t]; f < factor_end_[t]; ++f) {
      m *= powers[factor_index_[f] * stride + factor_power_[f]];
    }
    ops += 1 + (factor_end_[t] - factor_begin_[t]);
    sum += m;
  }
  return sum;
}

void ParamPolySystem::check_dims(const CVector& x, const CVector& p) const {
  if (x.size() != structure_.variable_count() || p.size() != structure_.parameter_count()) {
    throw DimensionMismatch("ParamPolySystem: expected " +
                            std::to_string(structure_.variable_count()) + " variables and " +
                            std::to_string(structure_.parameter_count()) +
                            " parameters, got " + std::to_string(x.size()) + " and " +
                            std::to_string(p.size()));
  }
}

void ParamPolySystem::evaluate_into(const CVector& x, const CVector& p,
                                    const EvalRequest& request, EvalResult& out,
                                    EvalWorkspace& ws) const {
  check_dims(x, p);
  if (request.param_dir && request.param_dir->size() != structure_.parameter_count()) {
    throw DimensionMismatch("jacobian_p_dir: direction length != parameter count");
  }
  const Index nvars = structure_.variable_count();
  const std::size_t stride = static_cast<std::size_t>(max_exponent_) + 1;
  const Index arity = structure_.arity();
  ws.powers.resize(static_cast<std::size_t>(arity) * stride);
  for (Index k = 0; k < arity; ++k) {
    const Complex z = k < nvars ? x(k) : p(k - nvars);
    Complex* row = ws.powers.data() + static_cast<std::size_t>(k) * stride;
    row[0] = 1.0;
    for (std::size_t e = 1; e < stride; ++e) row[e] = row[e - 1] * z;
  }
  ws.ops += static_cast<std::uint64_t>(arity) * (stride > 2 ? stride - 2 : 0);

  const Index nrows = request.rows.empty() ? size() : static_cast<Index>(request.rows.size());
  if (request.value) out.value.resize(nrows);
  if (request.jacobian) out.jacobian.setZero(nrows, nvars);
  if (request.param_dir) out.param_deriv.resize(nrows);

  const Complex* powers = ws.powers.data();
  for (Index r = 0; r < nrows; ++r) {
    const Index i = request.rows.empty() ? r : request.rows[static_cast<std::size_t>(r)];
    const Compiled& c = compiled_[static_cast<std::size_t>(i)];
    if (request.value) out.value(r) = eval_range(c.value, powers, ws.ops);
    if (request.jacobian) {
      for (Index j = 0; j < nvars; ++j) {
        const TermRange range = c.d_var[static_cast<std::size_t>(j)];
        if (!range.empty()) out.jacobian(r, j) = eval_range(range, powers, ws.ops);
      }
    }
    if (request.param_dir) {
      Complex acc = 0.0;
      for (Index k = 0; k < structure_.parameter_count(); ++k) {
        const Complex d = (*request.param_dir)(k);
        const TermRange range = c.d_param[static_cast<std::size_t>(k)];
        if (d == Complex(0.0) || range.empty()) continue;
        acc += d * eval_range(range, powers, ws.ops);
        ++ws.ops;
      }
      out.param_deriv(r) = acc;
    }
  }
}

CVector ParamPolySystem::evaluate(const CVector& x, const CVector& p) const {
  EvalWorkspace ws;
  EvalResult out;
  evaluate_into(x, p, EvalRequest{}, out, ws);
  return out.value;
}

CMatrix ParamPolySystem::jacobian_x(const CVector& x, const CVector& p) const {
  EvalWorkspace ws;
  EvalResult out;
  evaluate_into(x, p, EvalRequest{.value = false, .jacobian = true, .param_dir = nullptr, .rows = {}}, out, ws);
  return out.jacobian;
}

CVector ParamPolySystem::jacobian_p_dir(const CVector& x, const CVector& p,
                                        const CVector& dir) const {
  EvalWorkspace ws;
  EvalResult out;
  evaluate_into(x, p, EvalRequest{.value = false, .jacobian = false, .param_dir = &dir, .rows = {}}, out, ws);
  return out.param_deriv;
}

HomogeneityProfile ParamPolySystem::homogeneity() const {
  HomogeneityProfile profile;
  const auto proj = structure_.projective_groups();
  for (const auto& poly : polys_) {
    std::vector<std::optional<int>> row;
    for (std::size_t g : proj) {
      const Index begin = structure_.group_offset(g);
      row.push_back(poly.homogeneous_degree_in(begin, begin + structure_.groups()[g].size));
    }
    profile.push_back(std::move(row));
  }
  return profile;
}

int ParamPolySystem::max_degree() const {
  int d = 0;
  for (const auto& poly : polys_) d = std::max(d, poly.degree_in(0, structure_.variable_count()));
  return d;
}

ParamPolySystem ParamPolySystem::append(std::vector<Polynomial> extra) const {
  std::vector<Polynomial> all = polys_;
  for (auto& p : extra) {
    if (p.arity() != structure_.arity()) {
      throw DimensionMismatch("append: polynomial arity does not match structure");
    }
    all.push_back(std::move(p));
  }
  return ParamPolySystem(structure_, std::move(all));
}

}  // namespace adaptrack
