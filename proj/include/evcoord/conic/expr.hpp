#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace evcoord::conic {

/// Opaque handle to a decision variable of one ConicProgram.
struct VariableRef {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Sparse affine expression: sum of coef*var plus a constant.
/// Terms may repeat; consumers call compacted() to sort and merge.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double constant) : constant_(constant) {}  // NOLINT(google-explicit-constructor)
  LinExpr(VariableRef v) {                           // NOLINT(google-explicit-constructor)
    if (!v.valid()) throw std::invalid_argument("LinExpr: invalid variable ref");
    terms_.emplace_back(v.id, 1.0);
  }

  static LinExpr term(VariableRef v, double coef) {
    LinExpr e;
    if (!v.valid()) throw std::invalid_argument("LinExpr::term: invalid variable ref");
    if (!std::isfinite(coef)) throw std::invalid_argument("LinExpr::term: non-finite coefficient");
    e.terms_.emplace_back(v.id, coef);
    return e;
  }

  LinExpr& operator+=(const LinExpr& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    constant_ += o.constant_;
    return *this;
  }
  LinExpr& operator-=(const LinExpr& o) {
    terms_.reserve(terms_.size() + o.terms_.size());
    for (const auto& [v, c] : o.terms_) terms_.emplace_back(v, -c);
    constant_ -= o.constant_;
    return *this;
  }
  LinExpr& operator*=(double k) {
    if (!std::isfinite(k)) throw std::invalid_argument("LinExpr: non-finite scale");
    for (auto& [v, c] : terms_) c *= k;
    constant_ *= k;
    return *this;
  }

  const std::vector<std::pair<int, double>>& terms() const { return terms_; }
  double constant() const { return constant_; }

  /// Sorted by variable id with duplicates merged and exact zeros dropped.
  LinExpr compacted() const;

  /// Value of the expression at a full assignment (indexed by variable id).
  double evaluate(const std::vector<double>& values) const;

  bool is_constant() const { return terms_.empty(); }

 private:
  std::vector<std::pair<int, double>> terms_;
  double constant_ = 0.0;
};

inline LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
inline LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
inline LinExpr operator*(double k, LinExpr e) { return e *= k; }
inline LinExpr operator*(LinExpr e, double k) { return e *= k; }
inline LinExpr operator-(LinExpr e) { return e *= -1.0; }

}  // namespace evcoord::conic
