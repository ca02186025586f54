#include "hsd_solver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace evcoord::conic::detail {

namespace {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

constexpr double kHuge = std::numeric_limits<double>::infinity();

struct SocScaling {
  double eta = 1.0;  // W = eta * What
  double a = 1.0;    // What = [[a, q'], [q, I + q q'/(1+a)]]
  VectorXd q;
};

// Nesterov-Todd scaling W with the defining property W z = W^{-1} s = lambda.
struct Scaling {
  int l = 0;
  std::vector<int> dims;
  VectorXd wlp;  // sqrt(s_i / z_i) on the LP block
  std::vector<SocScaling> soc;

  void set_identity(int l_, const std::vector<int>& dims_) {
    l = l_;
    dims = dims_;
    wlp = VectorXd::Ones(l);
    soc.clear();
    for (const int d : dims) {
      SocScaling sc;
      sc.q = VectorXd::Zero(d - 1);
      soc.push_back(std::move(sc));
    }
  }

  bool update(const VectorXd& s, const VectorXd& z) {
    for (int i = 0; i < l; ++i) {
      if (s[i] <= 0.0 || z[i] <= 0.0) return false;
      wlp[i] = std::sqrt(s[i] / z[i]);
    }
    int at = l;
    for (size_t k = 0; k < dims.size(); ++k) {
      const int d = dims[k];
      const auto s0 = s[at];
      const auto z0 = z[at];
      const auto s1 = s.segment(at + 1, d - 1);
      const auto z1 = z.segment(at + 1, d - 1);
      const double sres = s0 * s0 - s1.squaredNorm();
      const double zres = z0 * z0 - z1.squaredNorm();
      if (sres <= 0.0 || zres <= 0.0 || s0 <= 0.0 || z0 <= 0.0) return false;
      const double snorm = std::sqrt(sres);
      const double znorm = std::sqrt(zres);
      const double sb0 = s0 / snorm;
      const double zb0 = z0 / znorm;
      const VectorXd sb1 = s1 / snorm;
      const VectorXd zb1 = z1 / znorm;
      const double gamma = std::sqrt(0.5 * (1.0 + sb0 * zb0 + sb1.dot(zb1)));
      SocScaling& sc = soc[k];
      sc.a = (sb0 + zb0) / (2.0 * gamma);
      sc.q = (sb1 - zb1) / (2.0 * gamma);
      sc.eta = std::sqrt(snorm / znorm);
      at += d;
    }
    return true;
  }

  // out = W v
  void apply(const VectorXd& v, VectorXd& out) const {
    out.resize(v.size());
    out.head(l) = wlp.cwiseProduct(v.head(l));
    int at = l;
    for (size_t k = 0; k < dims.size(); ++k) {
      const int d = dims[k];
      const SocScaling& sc = soc[k];
      const auto v1 = v.segment(at + 1, d - 1);
      const double zeta = sc.q.dot(v1);
      out[at] = sc.eta * (sc.a * v[at] + zeta);
      out.segment(at + 1, d - 1) = sc.eta * (v1 + (v[at] + zeta / (1.0 + sc.a)) * sc.q);
      at += d;
    }
  }

  // out = W^{-1} v
  void apply_inv(const VectorXd& v, VectorXd& out) const {
    out.resize(v.size());
    out.head(l) = v.head(l).cwiseQuotient(wlp);
    int at = l;
    for (size_t k = 0; k < dims.size(); ++k) {
      const int d = dims[k];
      const SocScaling& sc = soc[k];
      const auto v1 = v.segment(at + 1, d - 1);
      const double zeta = sc.q.dot(v1);
      out[at] = (sc.a * v[at] - zeta) / sc.eta;
      out.segment(at + 1, d - 1) = (v1 + (-v[at] + zeta / (1.0 + sc.a)) * sc.q) / sc.eta;
      at += d;
    }
  }
};

// Jordan product u o v.
void jprod(const Scaling& sc, const VectorXd& u, const VectorXd& v, VectorXd& out) {
  out.resize(u.size());
  out.head(sc.l) = u.head(sc.l).cwiseProduct(v.head(sc.l));
  int at = sc.l;
  for (const int d : sc.dims) {
    const auto u1 = u.segment(at + 1, d - 1);
    const auto v1 = v.segment(at + 1, d - 1);
    out[at] = u[at] * v[at] + u1.dot(v1);
    out.segment(at + 1, d - 1) = u[at] * v1 + v[at] * u1;
    at += d;
  }
}

// Solve lambda o x = d for x.
void jdiv(const Scaling& sc, const VectorXd& lambda, const VectorXd& d, VectorXd& out) {
  out.resize(d.size());
  out.head(sc.l) = d.head(sc.l).cwiseQuotient(lambda.head(sc.l));
  int at = sc.l;
  for (const int dim : sc.dims) {
    const auto l1 = lambda.segment(at + 1, dim - 1);
    const auto d1 = d.segment(at + 1, dim - 1);
    const double den = lambda[at] * lambda[at] - l1.squaredNorm();
    const double x0 = (lambda[at] * d[at] - l1.dot(d1)) / den;
    out[at] = x0;
    out.segment(at + 1, dim - 1) = (d1 - x0 * l1) / lambda[at];
    at += dim;
  }
}

// Identity element of the cone.
VectorXd cone_e(int l, const std::vector<int>& dims, int m) {
  VectorXd e = VectorXd::Zero(m);
  e.head(l).setOnes();
  int at = l;
  for (const int d : dims) {
    e[at] = 1.0;
    at += d;
  }
  return e;
}

// Shifts v into the interior of the cone along the identity element.
void bring_to_cone(int l, const std::vector<int>& dims, VectorXd& v) {
  double deficit = -kHuge;
  for (int i = 0; i < l; ++i) deficit = std::max(deficit, -v[i]);
  int at = l;
  for (const int d : dims) {
    deficit = std::max(deficit, v.segment(at + 1, d - 1).norm() - v[at]);
    at += d;
  }
  if (deficit > -1e-8) {
    const double shift = deficit + 1.0;
    v.head(l).array() += shift;
    at = l;
    for (const int d : dims) {
      v[at] += shift;
      at += d;
    }
  }
}

// Largest step with lam + alpha*d staying in the cone (lam strictly interior).
double max_step(int l, const std::vector<int>& dims, const VectorXd& lam, const VectorXd& d) {
  double alpha = kHuge;
  for (int i = 0; i < l; ++i)
    if (d[i] < 0.0) alpha = std::min(alpha, -lam[i] / d[i]);
  int at = l;
  for (const int dim : dims) {
    const auto l1 = lam.segment(at + 1, dim - 1);
    const auto d1 = d.segment(at + 1, dim - 1);
    const double a2 = d[at] * d[at] - d1.squaredNorm();
    const double b = lam[at] * d[at] - l1.dot(d1);
    const double c = lam[at] * lam[at] - l1.squaredNorm();
    // f(t) = a2 t^2 + 2 b t + c, f(0) = c > 0; feasible until the first positive root.
    double root = kHuge;
    if (std::abs(a2) < 1e-14) {
      if (b < 0.0) root = -c / (2.0 * b);
    } else {
      const double disc = b * b - a2 * c;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double r1 = (-b - sq) / a2;
        const double r2 = (-b + sq) / a2;
        for (const double r : {r1, r2})
          if (r > 0.0) root = std::min(root, r);
        if (a2 > 0.0 && b >= 0.0) root = kHuge;  // parabola opens up, min behind us
      }
    }
    alpha = std::min(alpha, root);
    at += dim;
  }
  return alpha;
}

struct Kkt {
  const StandardForm& sf;
  double reg;
  int N;
  SpMat K;  // lower triangle
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt;
  bool analyzed = false;

  explicit Kkt(const StandardForm& sf_, double reg_) : sf(sf_), reg(reg_), N(sf_.n + sf_.p + sf_.m) {}

  bool assemble_and_factor(const Scaling& w) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<size_t>(sf.A.nonZeros() + sf.G.nonZeros() + N + 16 * static_cast<int>(w.dims.size())));
    for (int j = 0; j < sf.n; ++j) t.emplace_back(j, j, reg);
    for (int k = 0; k < sf.A.outerSize(); ++k)
      for (SpMat::InnerIterator it(sf.A, k); it; ++it)
        t.emplace_back(sf.n + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int i = 0; i < sf.p; ++i) t.emplace_back(sf.n + i, sf.n + i, -reg);
    const int zoff = sf.n + sf.p;
    for (int k = 0; k < sf.G.outerSize(); ++k)
      for (SpMat::InnerIterator it(sf.G, k); it; ++it)
        t.emplace_back(zoff + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int i = 0; i < w.l; ++i)
      t.emplace_back(zoff + i, zoff + i, -(w.wlp[i] * w.wlp[i]) - reg);
    int at = w.l;
    for (size_t k = 0; k < w.dims.size(); ++k) {
      const int d = w.dims[k];
      const SocScaling& sc = w.soc[k];
      Eigen::MatrixXd what(d, d);
      what(0, 0) = sc.a;
      what.block(0, 1, 1, d - 1) = sc.q.transpose();
      what.block(1, 0, d - 1, 1) = sc.q;
      what.block(1, 1, d - 1, d - 1) =
          Eigen::MatrixXd::Identity(d - 1, d - 1) + sc.q * sc.q.transpose() / (1.0 + sc.a);
      Eigen::MatrixXd w2 = (sc.eta * sc.eta) * (what * what);
      for (int r = 0; r < d; ++r)
        for (int cidx = 0; cidx <= r; ++cidx)
          t.emplace_back(zoff + at + r, zoff + at + cidx, -w2(r, cidx) - (r == cidx ? reg : 0.0));
      at += d;
    }
    K.resize(N, N);
    K.setFromTriplets(t.begin(), t.end());
    if (!analyzed) {
      ldlt.analyzePattern(K);
      analyzed = true;
    }
    ldlt.factorize(K);
    return ldlt.info() == Eigen::Success;
  }

  // Solves the unregularized KKT system by iterative refinement against
  // the regularized factorization.
  VectorXd solve(const VectorXd& rhs) const {
    VectorXd u = ldlt.solve(rhs);
    for (int it = 0; it < 4; ++it) {
      VectorXd r = rhs - K.selfadjointView<Eigen::Lower>() * u;
      r.head(sf.n) += reg * u.head(sf.n);
      r.tail(sf.p + sf.m) -= reg * u.tail(sf.p + sf.m);
      const double rn = r.lpNorm<Eigen::Infinity>();
      if (rn <= 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) break;
      u += ldlt.solve(r);
    }
    return u;
  }
};

struct Iterate {
  VectorXd x, y, z, s;
  double tau = 1.0, kap = 1.0;
};

}  // namespace

HsdResult solve_hsd(const StandardForm& sf, const HsdSettings& st) {
  const int n = sf.n, p = sf.p, m = sf.m;
  HsdResult res;

  const double nb = sf.b.size() ? sf.b.norm() : 0.0;
  const double nh = sf.h.size() ? sf.h.norm() : 0.0;
  const double nc = sf.c.norm();
  const int nu = sf.l + static_cast<int>(sf.soc_dims.size());
  const VectorXd e = cone_e(sf.l, sf.soc_dims, m);

  Scaling w;
  w.set_identity(sf.l, sf.soc_dims);

  double reg = st.static_reg;
  Kkt kkt(sf, reg);
  for (int tries = 0; !kkt.assemble_and_factor(w); ++tries) {
    if (tries >= 3) return res;
    kkt.reg = (reg *= 100.0);
  }

  auto kkt3 = [&](const VectorXd& rx, const VectorXd& ry, const VectorXd& rz) {
    VectorXd rhs(n + p + m);
    rhs.head(n) = rx;
    rhs.segment(n, p) = ry;
    rhs.tail(m) = rz;
    return kkt.solve(rhs);
  };

  Iterate it;
  {
    // Primal start: least-norm (x, s) with A x = b, G x + s = h; shift s into the cone.
    VectorXd q = kkt3(VectorXd::Zero(n), sf.b, sf.h);
    it.x = q.head(n);
    it.s = -q.tail(m);
    bring_to_cone(sf.l, sf.soc_dims, it.s);
    // Dual start: least-norm (y, z) with A'y + G'z = -c; shift z into the cone.
    q = kkt3(-sf.c, VectorXd::Zero(p), VectorXd::Zero(m));
    it.y = q.segment(n, p);
    it.z = q.tail(m);
    bring_to_cone(sf.l, sf.soc_dims, it.z);
  }

  VectorXd lambda(m), rx(n), ry(p), rz(m);
  Iterate best = it;
  double best_score = kHuge;
  double mu_prev = kHuge;
  int slow = 0;

  auto finish_optimal = [&](const Iterate& v, double gap, double pres, double dres, int k) {
    res.status = HsdResult::Status::optimal;
    res.x = v.x / v.tau;
    res.y = v.y / v.tau;
    res.z = v.z / v.tau;
    res.s = v.s / v.tau;
    res.gap = gap;
    res.pres = pres;
    res.dres = dres;
    res.iterations = k;
    return res;
  };

  struct Stats {
    double pres, dres, gap, relgap, pinfres, dinfres, mu;
  };
  auto compute = [&](const Iterate& v, Stats& out) {
    rx = -sf.G.transpose() * v.z - v.tau * sf.c;
    if (p > 0) rx -= sf.A.transpose() * v.y;
    ry = (p > 0) ? VectorXd(sf.A * v.x - v.tau * sf.b) : VectorXd();
    rz = v.s + sf.G * v.x - v.tau * sf.h;
    const double cx = sf.c.dot(v.x);
    const double by = (p > 0) ? sf.b.dot(v.y) : 0.0;
    const double hz = sf.h.dot(v.z);
    const double pcost = cx / v.tau;
    out.mu = (v.s.dot(v.z) + v.tau * v.kap) / (nu + 1);
    out.gap = v.s.dot(v.z) / (v.tau * v.tau);
    out.relgap = out.gap / std::max(1.0, std::abs(pcost));
    out.pres = std::max(p > 0 ? ry.norm() / (1.0 + nb) : 0.0, rz.norm() / (1.0 + nh)) / v.tau;
    out.dres = rx.norm() / (1.0 + nc) / v.tau;
    const double mhat = -(by + hz);
    VectorXd dual_res = sf.G.transpose() * v.z;
    if (p > 0) dual_res += sf.A.transpose() * v.y;
    out.pinfres = (mhat > 0.0) ? dual_res.norm() / (1.0 + nc) / mhat : kHuge;
    const double mcx = -cx;
    if (mcx > 0.0) {
      const double pr = std::max(p > 0 ? (sf.A * v.x).norm() / (1.0 + nb) : 0.0,
                                 (sf.G * v.x + v.s).norm() / (1.0 + nh));
      out.dinfres = pr / mcx;
    } else {
      out.dinfres = kHuge;
    }
    return cx;
  };

  int k = 0;
  for (; k <= st.max_iter; ++k) {
    Stats stt;
    compute(it, stt);

    const double score = std::max({stt.pres, stt.dres, std::min(stt.gap, stt.relgap)});
    if (score < best_score) {
      best_score = score;
      best = it;
    }

    auto classify = [&](double feastol, double abstol, double reltol) -> int {
      if (stt.pres <= feastol && stt.dres <= feastol && (stt.gap <= abstol || stt.relgap <= reltol))
        return 1;  // optimal
      if (stt.pinfres <= feastol && it.tau < it.kap) return 2;
      if (stt.dinfres <= feastol && it.tau < it.kap) return 3;
      return 0;
    };
    int cls = classify(st.feastol, st.abstol, st.reltol);
    const bool stalled = (k > 0 && (stt.mu > 0.995 * mu_prev)) ? (++slow >= 4) : (slow = 0, false);
    if (cls == 0 && (k == st.max_iter || stalled))
      cls = classify(st.feastol_reduced, st.abstol_reduced, st.reltol_reduced);
    if (cls == 1) return finish_optimal(it, stt.gap, stt.pres, stt.dres, k);
    if (cls == 2 || cls == 3) {
      res.status = (cls == 2) ? HsdResult::Status::primal_infeasible : HsdResult::Status::dual_infeasible;
      res.x = it.x;
      res.y = it.y;
      res.z = it.z;
      res.s = it.s;
      res.iterations = k;
      return res;
    }
    if (k == st.max_iter || stalled) break;
    mu_prev = stt.mu;

    if (!w.update(it.s, it.z)) break;
    w.apply(it.z, lambda);
    if (!kkt.assemble_and_factor(w)) {
      kkt.reg = (reg *= 100.0);
      if (!kkt.assemble_and_factor(w)) break;
    }

    const VectorXd q1 = kkt3(-sf.c, sf.b, sf.h);
    const double bar1 = sf.c.dot(q1.head(n)) + (p > 0 ? sf.b.dot(q1.segment(n, p)) : 0.0) + sf.h.dot(q1.tail(m));
    const double rtau = it.kap + sf.c.dot(it.x) + (p > 0 ? sf.b.dot(it.y) : 0.0) + sf.h.dot(it.z);

    struct Dir {
      VectorXd x, y, z, s;
      double tau, kap;
    };
    auto direction = [&](double sigma, const VectorXd& dtil, double dkap) {
      VectorXd wd;
      w.apply(dtil, wd);
      const double f = 1.0 - sigma;
      const VectorXd q2 = kkt3(f * rx, -f * ry, -f * rz + wd);
      const double bar2 =
          sf.c.dot(q2.head(n)) + (p > 0 ? sf.b.dot(q2.segment(n, p)) : 0.0) + sf.h.dot(q2.tail(m));
      Dir d;
      const double denom = it.kap - it.tau * bar1;
      d.tau = (std::abs(denom) > 1e-300) ? (it.tau * (f * rtau + bar2) - dkap) / denom : 0.0;
      d.x = q2.head(n) + d.tau * q1.head(n);
      d.y = q2.segment(n, p) + d.tau * q1.segment(n, p);
      d.z = q2.tail(m) + d.tau * q1.tail(m);
      VectorXd w2dz;
      w.apply(d.z, w2dz);
      VectorXd tmp;
      w.apply(w2dz, tmp);
      d.s = -wd - tmp;
      d.kap = -(dkap + it.kap * d.tau) / it.tau;
      return d;
    };

    auto boundary = [&](const Dir& d, VectorXd& dsbar, VectorXd& dzbar) {
      w.apply_inv(d.s, dsbar);
      w.apply(d.z, dzbar);
      double a = std::min(max_step(sf.l, sf.soc_dims, lambda, dsbar),
                          max_step(sf.l, sf.soc_dims, lambda, dzbar));
      if (d.tau < 0.0) a = std::min(a, -it.tau / d.tau);
      if (d.kap < 0.0) a = std::min(a, -it.kap / d.kap);
      return a;
    };

    // Predictor.
    const Dir aff = direction(0.0, lambda, it.tau * it.kap);
    VectorXd dsb, dzb;
    const double alpha_aff = std::min(1.0, boundary(aff, dsb, dzb));
    const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3.0), 1e-8, 1.0 - 1e-8);

    // Corrector.
    VectorXd comb, dtil;
    jprod(w, lambda, lambda, comb);
    VectorXd cross;
    jprod(w, dsb, dzb, cross);
    comb += cross - sigma * stt.mu * e;
    jdiv(w, lambda, comb, dtil);
    const double dkap = it.tau * it.kap + aff.tau * aff.kap - sigma * stt.mu;
    const Dir dir = direction(sigma, dtil, dkap);
    double alpha = st.step_frac * boundary(dir, dsb, dzb);
    alpha = std::min(alpha, 1.0);
    if (!std::isfinite(alpha) || alpha < 1e-10) break;

    it.x += alpha * dir.x;
    it.y += alpha * dir.y;
    it.z += alpha * dir.z;
    it.s += alpha * dir.s;
    it.tau += alpha * dir.tau;
    it.kap += alpha * dir.kap;
  }

  // Stalled or hit the cap: report the best iterate at reduced accuracy.
  Stats stt;
  compute(best, stt);
  if (stt.pres <= st.feastol_reduced && stt.dres <= st.feastol_reduced &&
      (stt.gap <= st.abstol_reduced || stt.relgap <= st.reltol_reduced))
    return finish_optimal(best, stt.gap, stt.pres, stt.dres, k);
  if (stt.pinfres <= st.feastol_reduced && best.tau < best.kap) {
    res.status = HsdResult::Status::primal_infeasible;
  } else if (stt.dinfres <= st.feastol_reduced && best.tau < best.kap) {
    res.status = HsdResult::Status::dual_infeasible;
  } else {
    res.status = HsdResult::Status::max_iter;
  }
  res.x = best.x;
  res.y = best.y;
  res.z = best.z;
  res.s = best.s;
  res.iterations = k;
  res.gap = stt.gap;
  res.pres = stt.pres;
  res.dres = stt.dres;
  return res;
}

}  // namespace evcoord::conic::detail
