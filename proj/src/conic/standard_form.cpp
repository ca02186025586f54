#include "standard_form.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace evcoord::conic::detail {

namespace {

struct WorkRow {
  std::vector<std::pair<int, double>> terms;  // compacted, no fixed vars
  double rhs = 0.0;
  bool alive = true;
  int orig_idx = -1;
};

struct Presolve {
  std::vector<double> lo, up;
  std::vector<char> fixed;
  std::vector<double> fixval;
  std::vector<WorkRow> eqs, ineqs;
  bool infeasible = false;
  std::string reason;

  void mark_infeasible(std::string why) {
    if (!infeasible) reason = std::move(why);
    infeasible = true;
  }

  static double feps(double ref) { return 1e-9 * (1.0 + std::abs(ref)); }

  // Drops fixed variables from a row, folding them into the rhs.
  void substitute(WorkRow& r) {
    size_t keep = 0;
    for (size_t i = 0; i < r.terms.size(); ++i) {
      const auto [v, c] = r.terms[i];
      if (fixed[static_cast<size_t>(v)])
        r.rhs -= c * fixval[static_cast<size_t>(v)];
      else
        r.terms[keep++] = r.terms[i];
    }
    r.terms.resize(keep);
  }

  bool fix_settled_vars() {
    bool changed = false;
    for (size_t j = 0; j < lo.size(); ++j) {
      if (fixed[j]) continue;
      if (lo[j] > up[j] + feps(std::abs(lo[j]) + std::abs(up[j]))) {
        mark_infeasible("conflicting bounds on variable " + std::to_string(j));
        return false;
      }
      if (up[j] - lo[j] <= 0.0) {
        fixed[j] = 1;
        fixval[j] = lo[j];
        changed = true;
      }
    }
    return changed;
  }

  void run() {
    if (fix_settled_vars() && infeasible) return;
    bool changed = true;
    while (changed && !infeasible) {
      changed = false;
      for (auto& r : eqs) {
        if (!r.alive) continue;
        substitute(r);
        if (r.terms.empty()) {
          if (std::abs(r.rhs) > feps(r.rhs)) {
            mark_infeasible("inconsistent equality row");
            return;
          }
          r.alive = false;
          changed = true;
        } else if (r.terms.size() == 1) {
          const auto [v, c] = r.terms[0];
          const double val = r.rhs / c;
          const auto j = static_cast<size_t>(v);
          if (val < lo[j] - feps(val) || val > up[j] + feps(val)) {
            mark_infeasible("equality pins variable outside its bounds");
            return;
          }
          lo[j] = up[j] = val;
          r.alive = false;
          changed = true;
        }
      }
      for (auto& r : ineqs) {
        if (!r.alive) continue;
        substitute(r);
        if (r.terms.empty()) {
          if (r.rhs < -feps(r.rhs)) {
            mark_infeasible("inconsistent inequality row");
            return;
          }
          r.alive = false;
          changed = true;
        } else if (r.terms.size() == 1) {
          const auto [v, c] = r.terms[0];
          const auto j = static_cast<size_t>(v);
          const double bound = r.rhs / c;
          if (c > 0.0)
            up[j] = std::min(up[j], bound);
          else
            lo[j] = std::max(lo[j], bound);
          r.alive = false;
          changed = true;
        }
      }
      if (fix_settled_vars()) changed = true;
      if (infeasible) return;
    }
  }
};

// Affine expression over surviving columns plus a constant.
struct ReducedExpr {
  std::vector<std::pair<int, double>> cols;
  double constant = 0.0;
};

ReducedExpr reduce_expr(const LinExpr& e, const Presolve& ps, const std::vector<int>& var_col) {
  ReducedExpr out;
  const LinExpr c = e.compacted();
  out.constant = c.constant();
  for (const auto& [v, coef] : c.terms()) {
    const auto j = static_cast<size_t>(v);
    if (ps.fixed[j])
      out.constant += coef * ps.fixval[j];
    else
      out.cols.emplace_back(var_col[j], coef);
  }
  return out;
}

}  // namespace

StandardForm build_standard_form(const ConicProgram& prog) {
  StandardForm sf;
  sf.n_orig = prog.num_variables();

  Presolve ps;
  ps.lo.reserve(prog.variables().size());
  for (const auto& v : prog.variables()) {
    ps.lo.push_back(v.lower);
    ps.up.push_back(v.upper);
  }
  ps.fixed.assign(ps.lo.size(), 0);
  ps.fixval.assign(ps.lo.size(), 0.0);
  for (int i = 0; i < prog.num_equalities(); ++i)
    ps.eqs.push_back(WorkRow{prog.equalities()[static_cast<size_t>(i)].terms,
                             prog.equalities()[static_cast<size_t>(i)].rhs, true, i});
  for (const auto& r : prog.inequalities()) ps.ineqs.push_back(WorkRow{r.terms, r.rhs, true, -1});
  ps.run();
  if (ps.infeasible) {
    sf.presolve_infeasible = true;
    sf.presolve_reason = ps.reason;
    return sf;
  }

  // Column layout: surviving variables, then one epigraph var per quadratic term.
  sf.var_col.assign(ps.lo.size(), -1);
  sf.var_fixed.assign(ps.lo.size(), 0.0);
  int ncol = 0;
  for (size_t j = 0; j < ps.lo.size(); ++j) {
    if (ps.fixed[j])
      sf.var_fixed[j] = ps.fixval[j];
    else
      sf.var_col[j] = ncol++;
  }
  const int n_main = ncol;

  sf.obj_const = prog.constant_cost();
  std::map<int, double> cost;  // column -> coefficient
  for (const auto& [v, coef] : prog.linear_cost()) {
    const auto j = static_cast<size_t>(v);
    if (ps.fixed[j])
      sf.obj_const += coef * ps.fixval[j];
    else
      cost[sf.var_col[j]] += coef;
  }

  struct EpiCone {
    int zcol;
    ReducedExpr expr;
  };
  std::vector<EpiCone> epi;
  for (const auto& q : prog.quadratic_cost()) {
    ReducedExpr e = reduce_expr(q.expr, ps, sf.var_col);
    if (e.cols.empty()) {
      sf.obj_const += q.weight * e.constant * e.constant;
      continue;
    }
    // Fold the weight into the expression so the epigraph variable stays at
    // unit scale regardless of how small the weight is.
    const double root = std::sqrt(q.weight);
    for (auto& [col, c] : e.cols) c *= root;
    e.constant *= root;
    const int zcol = ncol++;
    cost[zcol] += 1.0;
    epi.push_back(EpiCone{zcol, std::move(e)});
  }
  sf.n = ncol;

  // Equalities.
  std::vector<Eigen::Triplet<double>> at;
  std::vector<double> bvals;
  sf.eq_row.assign(static_cast<size_t>(prog.num_equalities()), -1);
  for (const auto& r : ps.eqs) {
    if (!r.alive) continue;
    const int row = static_cast<int>(bvals.size());
    sf.eq_row[static_cast<size_t>(r.orig_idx)] = row;
    for (const auto& [v, c] : r.terms) at.emplace_back(row, sf.var_col[static_cast<size_t>(v)], c);
    bvals.push_back(r.rhs);
  }
  sf.p = static_cast<int>(bvals.size());

  // Cone rows of G: nonnegative orthant first (bounds, then inequalities),
  // then the second-order blocks.
  std::vector<Eigen::Triplet<double>> gt;
  std::vector<double> hvals;
  auto push_lp_row = [&](const std::vector<std::pair<int, double>>& cols, double rhs) {
    const int row = static_cast<int>(hvals.size());
    for (const auto& [col, c] : cols) gt.emplace_back(row, col, c);
    hvals.push_back(rhs);
  };
  for (size_t j = 0; j < ps.lo.size(); ++j) {
    if (ps.fixed[j]) continue;
    const int col = sf.var_col[j];
    if (ps.lo[j] != -kInf) push_lp_row({{col, -1.0}}, -ps.lo[j]);
    if (ps.up[j] != kInf) push_lp_row({{col, 1.0}}, ps.up[j]);
  }
  for (const auto& r : ps.ineqs) {
    if (!r.alive) continue;
    std::vector<std::pair<int, double>> cols;
    cols.reserve(r.terms.size());
    for (const auto& [v, c] : r.terms) cols.emplace_back(sf.var_col[static_cast<size_t>(v)], c);
    push_lp_row(cols, r.rhs);
  }
  sf.l = static_cast<int>(hvals.size());

  // s_row = expr(x)  becomes  G_row = -coefs, h_row = constant.
  auto push_cone_row = [&](const ReducedExpr& e) {
    const int row = static_cast<int>(hvals.size());
    for (const auto& [col, c] : e.cols) gt.emplace_back(row, col, -c);
    hvals.push_back(e.constant);
  };
  auto scaled = [](ReducedExpr e, double k) {
    for (auto& [col, c] : e.cols) c *= k;
    e.constant *= k;
    return e;
  };
  auto sum = [](const ReducedExpr& a, const ReducedExpr& b, double kb) {
    ReducedExpr out = a;
    for (const auto& [col, c] : b.cols) out.cols.emplace_back(col, kb * c);
    out.constant += kb * b.constant;
    return out;
  };

  for (const auto& ec : epi) {
    // z*1 >= expr^2  ->  (z+1, z-1, 2 expr) in SOC3
    push_cone_row(ReducedExpr{{{ec.zcol, 1.0}}, 1.0});
    push_cone_row(ReducedExpr{{{ec.zcol, 1.0}}, -1.0});
    push_cone_row(scaled(ec.expr, 2.0));
    sf.soc_dims.push_back(3);
  }
  for (const auto& cone : prog.cones()) {
    const ReducedExpr t = reduce_expr(cone.t, ps, sf.var_col);
    const ReducedExpr u = reduce_expr(cone.u, ps, sf.var_col);
    std::vector<ReducedExpr> w;
    w.reserve(cone.w.size());
    for (const auto& e : cone.w) w.push_back(reduce_expr(e, ps, sf.var_col));
    const bool all_const = t.cols.empty() && u.cols.empty() &&
                           std::all_of(w.begin(), w.end(), [](const ReducedExpr& e) { return e.cols.empty(); });
    if (all_const) {
      double wsq = 0.0;
      for (const auto& e : w) wsq += e.constant * e.constant;
      const double margin = 1e-9 * (1.0 + std::abs(t.constant * u.constant) + wsq);
      if (t.constant < -margin || u.constant < -margin || t.constant * u.constant < wsq - margin) {
        sf.presolve_infeasible = true;
        sf.presolve_reason = "constant rotated cone violated";
        return sf;
      }
      continue;
    }
    push_cone_row(sum(t, u, 1.0));   // t + u
    push_cone_row(sum(t, u, -1.0));  // t - u
    for (const auto& e : w) push_cone_row(scaled(e, 2.0));
    sf.soc_dims.push_back(2 + static_cast<int>(w.size()));
  }
  sf.m = static_cast<int>(hvals.size());

  sf.A.resize(sf.p, sf.n);
  sf.A.setFromTriplets(at.begin(), at.end());
  sf.G.resize(sf.m, sf.n);
  sf.G.setFromTriplets(gt.begin(), gt.end());
  sf.b = Eigen::Map<Eigen::VectorXd>(bvals.data(), sf.p);
  sf.h = Eigen::Map<Eigen::VectorXd>(hvals.data(), sf.m);
  sf.c = Eigen::VectorXd::Zero(sf.n);
  for (const auto& [col, v] : cost) sf.c[col] = v;

  // Ruiz equilibration; rows of one SOC block share a factor so the block
  // stays a valid cone.
  sf.col_scale = Eigen::VectorXd::Ones(sf.n);
  sf.eq_scale = Eigen::VectorXd::Ones(sf.p);
  sf.cone_scale = Eigen::VectorXd::Ones(sf.m);
  for (int pass = 0; pass < 3; ++pass) {
    Eigen::VectorXd rA = Eigen::VectorXd::Zero(sf.p);
    Eigen::VectorXd rG = Eigen::VectorXd::Zero(sf.m);
    Eigen::VectorXd col = Eigen::VectorXd::Zero(sf.n);
    for (int k = 0; k < sf.A.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(sf.A, k); it; ++it) {
        rA[it.row()] = std::max(rA[it.row()], std::abs(it.value()));
        col[it.col()] = std::max(col[it.col()], std::abs(it.value()));
      }
    for (int k = 0; k < sf.G.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(sf.G, k); it; ++it) {
        rG[it.row()] = std::max(rG[it.row()], std::abs(it.value()));
        col[it.col()] = std::max(col[it.col()], std::abs(it.value()));
      }
    int row0 = sf.l;
    for (const int dim : sf.soc_dims) {
      const double blk = rG.segment(row0, dim).maxCoeff();
      rG.segment(row0, dim).setConstant(blk);
      row0 += dim;
    }
    auto inv_sqrt = [](Eigen::VectorXd& v) {
      for (int i = 0; i < v.size(); ++i) v[i] = (v[i] > 0.0) ? 1.0 / std::sqrt(v[i]) : 1.0;
    };
    inv_sqrt(rA);
    inv_sqrt(rG);
    inv_sqrt(col);
    sf.eq_scale.array() *= rA.array();
    sf.cone_scale.array() *= rG.array();
    sf.col_scale.array() *= col.array();
    sf.A = rA.asDiagonal() * sf.A * col.asDiagonal();
    sf.G = rG.asDiagonal() * sf.G * col.asDiagonal();
  }
  sf.b.array() *= sf.eq_scale.array();
  sf.h.array() *= sf.cone_scale.array();
  sf.c.array() *= sf.col_scale.array();

  (void)n_main;
  return sf;
}

}  // namespace evcoord::conic::detail
