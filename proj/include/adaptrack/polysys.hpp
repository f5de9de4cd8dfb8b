// Sparse polynomial systems F(x; p), polynomial in the variables x and in the
// parameters p, over products of projective and affine spaces.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "adaptrack/linalg.hpp"

namespace adaptrack {

enum class GroupKind { Projective, Affine };

struct VariableGroup {
  GroupKind kind = GroupKind::Projective;
  Index size = 0;  // homogeneous coordinates for projective groups

  bool operator==(const VariableGroup&) const = default;
};

/// Ordered variable groups plus the parameter count.  Exponent vectors use a
/// flat layout: all variables group by group, then all parameters.
class VarStructure {
 public:
  VarStructure() = default;
  VarStructure(std::vector<VariableGroup> groups, Index parameter_count);

  const std::vector<VariableGroup>& groups() const { return groups_; }
  Index parameter_count() const { return parameter_count_; }
  Index variable_count() const { return variable_count_; }
  Index arity() const { return variable_count_ + parameter_count_; }
  Index group_offset(std::size_t g) const { return offsets_[g]; }
  Index parameter_offset() const { return variable_count_; }
  std::vector<std::size_t> projective_groups() const;
  std::size_t projective_count() const { return projective_groups().size(); }

  bool operator==(const VarStructure&) const = default;

 private:
  std::vector<VariableGroup> groups_;
  std::vector<Index> offsets_;
  Index parameter_count_ = 0;
  Index variable_count_ = 0;
};

using Exponents = std::vector<int>;

struct Term {
  Complex coeff;
  Exponents exponents;
};

/// Canonical sparse polynomial: terms sorted by exponent vector, no
/// duplicates, no zero coefficients.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(Index arity) : arity_(arity) {}
  Polynomial(Index arity, std::vector<Term> terms);

  static Polynomial constant(Index arity, Complex c);
  static Polynomial variable(Index arity, Index index, int power = 1);

  Index arity() const { return arity_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  /// Maximum over terms of the exponent sum restricted to [begin, end).
  int degree_in(Index begin, Index end) const;
  int total_degree() const { return degree_in(0, arity_); }
  /// Common degree of every term in [begin, end), if there is one.
  std::optional<int> homogeneous_degree_in(Index begin, Index end) const;

  Polynomial derivative(Index index) const;
  /// Substitutes values for the trailing coordinates [values_begin, arity).
  Polynomial substitute_tail(Index values_begin, const CVector& values) const;
  /// Pads every exponent vector with zeros up to new_arity.
  Polynomial extend(Index new_arity) const;

  /// Term-by-term evaluation with std::pow; reference path for tests.
  Complex evaluate(std::span<const Complex> point) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(Complex s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, Complex s) { return a *= s; }
  friend Polynomial operator*(Complex s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

 private:
  void canonicalize();

  Index arity_ = 0;
  std::vector<Term> terms_;
};

/// Per polynomial, per projective group: the common degree or nullopt when
/// the polynomial is inhomogeneous in that group.
using HomogeneityProfile = std::vector<std::vector<std::optional<int>>>;

/// Scratch space and the multiply-add counter for one evaluating worker.
struct EvalWorkspace {
  std::vector<Complex> powers;
  std::uint64_t ops = 0;
};

struct EvalRequest {
  bool value = true;
  bool jacobian = false;
  const CVector* param_dir = nullptr;  // requests J_p F * dir
  std::span<const Index> rows;          // empty selects every polynomial
};

struct EvalResult {
  CVector value;
  CMatrix jacobian;
  CVector param_deriv;
};

class ParamPolySystem {
 public:
  ParamPolySystem() = default;
  ParamPolySystem(VarStructure structure, std::vector<Polynomial> polys);

  const VarStructure& structure() const { return structure_; }
  const std::vector<Polynomial>& polys() const { return polys_; }
  Index size() const { return static_cast<Index>(polys_.size()); }
  Index variable_count() const { return structure_.variable_count(); }
  Index parameter_count() const { return structure_.parameter_count(); }

  void evaluate_into(const CVector& x, const CVector& p, const EvalRequest& request,
                     EvalResult& out, EvalWorkspace& ws) const;

  CVector evaluate(const CVector& x, const CVector& p) const;
  CMatrix jacobian_x(const CVector& x, const CVector& p) const;
  CVector jacobian_p_dir(const CVector& x, const CVector& p, const CVector& dir) const;

  HomogeneityProfile homogeneity() const;
  /// Largest total degree in the variables over all polynomials.
  int max_degree() const;
  ParamPolySystem append(std::vector<Polynomial> extra) const;

 private:
  struct TermRange {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    bool empty() const { return begin == end; }
  };
  struct Compiled {
    TermRange value;
    std::vector<TermRange> d_var;    // one per variable
    std::vector<TermRange> d_param;  // one per parameter
  };

  TermRange compile(const Polynomial& poly);
  Complex eval_range(TermRange range, const Complex* powers, std::uint64_t& ops) const;
  void check_dims(const CVector& x, const CVector& p) const;

  VarStructure structure_;
  std::vector<Polynomial> polys_;
  std::vector<Compiled> compiled_;
  std::vector<Complex> coeffs_;
  std::vector<std::uint32_t> factor_begin_;  // per compiled term
  std::vector<std::uint32_t> factor_end_;
  std::vector<std::uint16_t> factor_index_;
  std::vector<std::uint16_t> factor_power_;
  int max_exponent_ = 0;
};

}  // namespace adaptrack
