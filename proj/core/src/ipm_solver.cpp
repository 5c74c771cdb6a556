#include "qkdrate/ipm_solver.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "instantiate.hpp"

namespace qkdrate {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::near_optimal: return "near_optimal";
    case SolveStatus::infeasible_detected: return "infeasible_detected";
    case SolveStatus::iteration_limit: return "iteration_limit";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

template <typename T>
Index ConicProblem<T>::num_vars() const {
  return c.size();
}

template <typename T>
void ConicProblem<T>::validate() const {
  Index total = 0;
  for (const auto& d : cones) total += d.dim();
  if (total != c.size())
    throw DimensionError("problem: cone dimensions sum to " + std::to_string(total) + " but c has length " +
                         std::to_string(c.size()));
  if (A.cols() != c.size()) throw DimensionError("problem: A has the wrong number of columns");
  if (A.rows() != b.size()) throw DimensionError("problem: A and b disagree on the number of rows");
  if (cones.empty()) throw DimensionError("problem: no cones");
  if (!c.allFinite() || !b.allFinite() || !A.allFinite()) throw DomainError("problem: non-finite data");
}

template <typename T>
std::vector<Index> ConicProblem<T>::offsets() const {
  std::vector<Index> out;
  Index off = 0;
  for (const auto& d : cones) {
    out.push_back(off);
    off += d.dim();
  }
  return out;
}

template <typename Real>
SolverOptions<Real> SolverOptions<Real>::defaults() {
  using std::pow;
  using std::sqrt;
  SolverOptions o;
  if constexpr (std::is_same_v<Real, double>) {
    o.tol_gap = 1e-8;
    o.tol_feas = 1e-8;
  } else {
    o.tol_gap = sqrt(machine_epsilon<Real>());
    o.tol_feas = sqrt(machine_epsilon<Real>());
  }
  o.rank_tol = pow(machine_epsilon<Real>(), Real(0.75));
  return o;
}

template <typename Real>
Real dual_lower_bound(const SolveReport<Real>& r) {
  if (r.status != SolveStatus::optimal && r.status != SolveStatus::near_optimal)
    throw ContractViolation("dual_lower_bound: solve did not converge (" + to_string(r.status) + ")");
  return r.dual_obj;
}

template <typename T>
Vec<RealOf<T>> PreprocessResult<T>::recover_dual(const Vec<RealOf<T>>& y) const {
  using Real = RealOf<T>;
  if (y.size() != Index(kept_rows.size())) throw DimensionError("recover_dual: wrong length");
  Vec<Real> out = Vec<Real>::Zero(original_rows);
  for (std::size_t k = 0; k < kept_rows.size(); ++k) out(kept_rows[k]) = y(Index(k)) / row_norms(Index(k));
  return out;
}

template <typename T>
PreprocessResult<T> preprocess(const ConicProblem<T>& p, const SolverOptions<RealOf<T>>& opts) {
  using Real = RealOf<T>;
  p.validate();
  PreprocessResult<T> out;
  out.original_rows = p.A.rows();
  out.problem.c = p.c;
  out.problem.cones = p.cones;
  const Index m = p.A.rows();
  const Index n = p.A.cols();
  if (m == 0) {
    out.problem.A = p.A;
    out.problem.b = p.b;
    out.row_norms.resize(0);
    return out;
  }

  // Normalize rows first so the rank decision is scale free.
  Vec<Real> norms(m);
  Mat<Real> a = p.A;
  Vec<Real> bb = p.b;
  for (Index i = 0; i < m; ++i) {
    norms(i) = p.A.row(i).norm();
    if (norms(i) > Real(0)) {
      a.row(i) /= norms(i);
      bb(i) /= norms(i);
    }
  }

  Eigen::ColPivHouseholderQR<Mat<Real>> qr(a.transpose());
  qr.setThreshold(opts.rank_tol);
  const Index rank = qr.rank();
  std::vector<Index> kept;
  for (Index k = 0; k < rank; ++k) kept.push_back(qr.colsPermutation().indices()(k));
  std::sort(kept.begin(), kept.end());

  Mat<Real> ak(Index(kept.size()), n);
  Vec<Real> bk(Index(kept.size()));
  Vec<Real> nk(Index(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    ak.row(Index(k)) = a.row(kept[k]);
    bk(Index(k)) = bb(kept[k]);
    nk(Index(k)) = norms(kept[k]);
  }

  // Consistency of the dropped rows: least-norm solution of the kept rows.
  if (rank < m) {
    Vec<Real> x0 = Vec<Real>::Zero(n);
    if (rank > 0) {
      Mat<Real> gram = ak * ak.transpose();
      x0 = ak.transpose() * gram.ldlt().solve(bk);
    }
    Vec<Real> r = a * x0 - bb;
    Real scale = std::max(Real(1), bb.cwiseAbs().maxCoeff());
    out.inconsistency = r.cwiseAbs().maxCoeff() / scale;
    out.consistent = !(out.inconsistency > opts.tol_feas);
    for (Index i = 0; i < m; ++i)
      if (norms(i) == Real(0) && p.b(i) != Real(0)) out.consistent = false;
  }

  out.problem.A = std::move(ak);
  out.problem.b = std::move(bk);
  out.kept_rows = std::move(kept);
  out.row_norms = std::move(nk);
  return out;
}

namespace {

template <typename Real>
double dbl(const Real& v) {
  return to_double(v);
}

template <typename Real>
struct Iterate {
  Vec<Real> x, y, s;
  Real tau{1}, kappa{1};
};

template <typename Real>
struct Direction {
  Vec<Real> x, y, s;
  Real tau{0}, kappa{0};

  void add(const Direction& o, const Real& w) {
    x += w * o.x;
    y += w * o.y;
    s += w * o.s;
    tau += w * o.tau;
    kappa += w * o.kappa;
  }
};

// Right-hand side of the Newton system
//   A dx - b dtau                  = rp
//  -A'dy + c dtau - ds             = rd
//   b'dy - c'dx - dkappa           = rg
//   ds + mu H dx                   = rs
//   kappa dtau + tau dkappa        = rk
template <typename Real>
struct Rhs {
  Vec<Real> rp, rd, rs;
  Real rg{0}, rk{0};
};

template <typename Real>
class Engine {
 public:
  Engine(const Mat<Real>& A, const Vec<Real>& b, const Vec<Real>& c, std::vector<std::unique_ptr<Cone<Real>>> cones,
         const SolverOptions<Real>& opts)
      : A_(A), b_(b), c_(c), cones_(std::move(cones)), opts_(opts) {
    Index off = 0;
    for (const auto& k : cones_) {
      offsets_.push_back(off);
      off += k->dim();
      nu_ += k->nu();
      third_ = third_ && k->has_third_order();
    }
    third_ = third_ && opts.third_order;
    n_ = off;
    m_ = A.rows();
    bnorm_ = std::max(Real(1), b_.size() ? b_.cwiseAbs().maxCoeff() : Real(0));
    cnorm_ = std::max(Real(1), c_.cwiseAbs().maxCoeff());
  }

  SolveReport<Real> run();

 private:
  auto seg(Vec<Real>& v, std::size_t k) const { return v.segment(offsets_[k], cones_[k]->dim()); }
  auto seg(const Vec<Real>& v, std::size_t k) const { return v.segment(offsets_[k], cones_[k]->dim()); }

  bool set_all(const Vec<Real>& x) {
    for (std::size_t k = 0; k < cones_.size(); ++k)
      if (!cones_[k]->set_point(seg(x, k))) return false;
    return true;
  }

  Vec<Real> gradient() const {
    Vec<Real> g(n_);
    for (std::size_t k = 0; k < cones_.size(); ++k) g.segment(offsets_[k], cones_[k]->dim()) = cones_[k]->gradient();
    return g;
  }

  Mat<Real> hess(const Mat<Real>& d) const {
    Mat<Real> out(n_, d.cols());
    for (std::size_t k = 0; k < cones_.size(); ++k)
      out.middleRows(offsets_[k], cones_[k]->dim()) =
          cones_[k]->hess_prod(d.middleRows(offsets_[k], cones_[k]->dim()));
    return out;
  }

  Mat<Real> inv_hess(const Mat<Real>& d) const {
    Mat<Real> out(n_, d.cols());
    for (std::size_t k = 0; k < cones_.size(); ++k)
      out.middleRows(offsets_[k], cones_[k]->dim()) =
          cones_[k]->inv_hess_prod(d.middleRows(offsets_[k], cones_[k]->dim()));
    return out;
  }

  Vec<Real> third(const Vec<Real>& d) const {
    Vec<Real> out(n_);
    for (std::size_t k = 0; k < cones_.size(); ++k)
      out.segment(offsets_[k], cones_[k]->dim()) = cones_[k]->third_order(seg(d, k));
    return out;
  }

  Real mu_of(const Iterate<Real>& z) const { return (z.s.dot(z.x) + z.tau * z.kappa) / (nu_ + Real(1)); }

  // Requires the cones to be positioned at z.x.
  Real proximity(const Iterate<Real>& z, const Real& mu) const {
    if (!(mu > Real(0))) return std::numeric_limits<Real>::infinity();
    Vec<Real> psi = z.s / mu + gradient();
    Vec<Real> hpsi = inv_hess(psi);
    Real sq = psi.dot(hpsi);
    Real t = z.tau * z.kappa / mu - Real(1);
    sq += t * t;
    using std::sqrt;
    if (!(sq >= Real(0)) || !std::isfinite(dbl(sq))) return std::numeric_limits<Real>::infinity();
    return sqrt(sq);
  }

  void factor(const Iterate<Real>& z, const Real& mu);
  Direction<Real> solve_once(const Rhs<Real>& r) const;
  Direction<Real> solve(const Rhs<Real>& r) const;
  Rhs<Real> residual(const Rhs<Real>& r, const Direction<Real>& d) const;
  static Real rhs_norm(const Rhs<Real>& r);

  Real boundary_step(const Iterate<Real>& z, const Direction<Real>& d) const;
  bool try_step(const Iterate<Real>& z, const Direction<Real>& d, const Direction<Real>* adj, bool predictor,
                const Real& prox_now, Iterate<Real>& out, Real& mu_out, Real& prox_out, Real& alpha_out);

  const Mat<Real>& A_;
  const Vec<Real>& b_;
  const Vec<Real>& c_;
  std::vector<std::unique_ptr<Cone<Real>>> cones_;
  SolverOptions<Real> opts_;
  std::vector<Index> offsets_;
  Index n_ = 0, m_ = 0;
  Real nu_{0};
  bool third_ = true;
  Real bnorm_{1}, cnorm_{1};

  // Newton system factorization at the current iterate.
  Real mu_{1}, tau_{1}, kappa_{1};
  Mat<Real> qat_;  // (mu H)^-1 A'
  Vec<Real> qc_;   // (mu H)^-1 c
  Eigen::LDLT<Mat<Real>> schur_;
  Vec<Real> v1_, bmaqc_;
  Real denom_{1};
};

template <typename Real>
void Engine<Real>::factor(const Iterate<Real>& z, const Real& mu) {
  mu_ = mu;
  tau_ = z.tau;
  kappa_ = z.kappa;
  Mat<Real> rhs(n_, m_ + 1);
  rhs.leftCols(m_) = A_.transpose();
  rhs.col(m_) = c_;
  Mat<Real> q = inv_hess(rhs) / mu;
  qat_ = q.leftCols(m_);
  qc_ = q.col(m_);
  if (m_ > 0) {
    Mat<Real> s = A_ * qat_;
    s = (s + s.transpose()).eval() / Real(2);
    schur_.compute(s);
    if (schur_.info() != Eigen::Success) throw NumericalError("Schur complement factorization failed");
    v1_ = schur_.solve(A_ * qc_ + b_);
    bmaqc_ = b_ - A_ * qc_;
  } else {
    v1_.resize(0);
    bmaqc_.resize(0);
  }
  // Equal to kappa/tau + b'S^-1 b + |c - A'S^-1 A Q c|_Q^2, written so the
  // large terms of (b - AQc)'v1 + c'Qc do not cancel.
  Real proj = c_.dot(qc_);
  Real bsb{0};
  if (m_ > 0) {
    Vec<Real> t = schur_.solve(A_ * qc_);
    Vec<Real> qw = qc_ - qat_ * t;
    proj = c_.dot(qw) - t.dot(A_ * qw);
    bsb = b_.dot(schur_.solve(b_));
  }
  denom_ = kappa_ / tau_ + bsb + std::max(Real(0), proj);
  if (!(denom_ > Real(0))) throw NumericalError("degenerate tau pivot in the Newton system");
}

template <typename Real>
Direction<Real> Engine<Real>::solve_once(const Rhs<Real>& r) const {
  Direction<Real> d;
  Vec<Real> q = inv_hess(r.rd + r.rs) / mu_;
  Vec<Real> w = m_ > 0 ? Vec<Real>(schur_.solve(r.rp - A_ * q)) : Vec<Real>();
  Real num = r.rk / tau_ + c_.dot(q) + r.rg - (m_ > 0 ? bmaqc_.dot(w) : Real(0));
  d.tau = num / denom_;
  d.y = m_ > 0 ? Vec<Real>(w + v1_ * d.tau) : Vec<Real>();
  d.x = q - qc_ * d.tau;
  if (m_ > 0) d.x += qat_ * d.y;
  d.s = c_ * d.tau - r.rd;
  if (m_ > 0) d.s -= A_.transpose() * d.y;
  d.kappa = (r.rk - kappa_ * d.tau) / tau_;
  return d;
}

template <typename Real>
Rhs<Real> Engine<Real>::residual(const Rhs<Real>& r, const Direction<Real>& d) const {
  Rhs<Real> e;
  e.rp = r.rp - (A_ * d.x - b_ * d.tau);
  e.rd = r.rd - (c_ * d.tau - d.s);
  if (m_ > 0) e.rd += A_.transpose() * d.y;
  e.rg = r.rg - ((m_ > 0 ? b_.dot(d.y) : Real(0)) - c_.dot(d.x) - d.kappa);
  e.rs = r.rs - (d.s + mu_ * hess(d.x));
  e.rk = r.rk - (kappa_ * d.tau + tau_ * d.kappa);
  return e;
}

template <typename Real>
Real Engine<Real>::rhs_norm(const Rhs<Real>& r) {
  using std::abs;
  Real v = std::max(abs(r.rg), abs(r.rk));
  if (r.rp.size()) v = std::max(v, r.rp.cwiseAbs().maxCoeff());
  if (r.rd.size()) v = std::max(v, r.rd.cwiseAbs().maxCoeff());
  if (r.rs.size()) v = std::max(v, r.rs.cwiseAbs().maxCoeff());
  return v;
}

template <typename Real>
Direction<Real> Engine<Real>::solve(const Rhs<Real>& r) const {
  Direction<Real> d = solve_once(r);
  Rhs<Real> e = residual(r, d);
  Real err = rhs_norm(e);
  for (int it = 0; it < opts_.refinement_steps; ++it) {
    if (!(err > Real(0))) break;
    Direction<Real> cand = d;
    cand.add(solve_once(e), Real(1));
    Rhs<Real> e2 = residual(r, cand);
    Real err2 = rhs_norm(e2);
    if (!(err2 < err)) break;
    d = std::move(cand);
    e = std::move(e2);
    err = err2;
  }
  return d;
}

template <typename Real>
Real Engine<Real>::boundary_step(const Iterate<Real>& z, const Direction<Real>& d) const {
  Real a = std::numeric_limits<Real>::infinity();
  if (d.tau < Real(0)) a = std::min(a, -z.tau / d.tau);
  if (d.kappa < Real(0)) a = std::min(a, -z.kappa / d.kappa);
  for (std::size_t k = 0; k < cones_.size(); ++k) {
    const auto& cone = *cones_[k];
    a = std::min(a, cone.max_step(seg(z.x, k), seg(d.x, k)));
    // Nonneg and second-order cones are self dual.
    if (cone.kind() == ConeKind::nonneg || cone.kind() == ConeKind::second_order)
      a = std::min(a, cone.max_step(seg(z.s, k), seg(d.s, k)));
  }
  return a;
}

template <typename Real>
bool Engine<Real>::try_step(const Iterate<Real>& z, const Direction<Real>& d, const Direction<Real>* adj,
                            bool predictor, const Real& prox_now, Iterate<Real>& out, Real& mu_out, Real& prox_out,
                            Real& alpha_out) {
  static constexpr std::array<double, 24> kSchedule = {0.9999, 0.999, 0.995, 0.99, 0.98, 0.97, 0.95, 0.92,
                                                       0.9,    0.85,  0.8,   0.7,  0.6,  0.5,  0.4,  0.3,
                                                       0.2,    0.15,  0.1,   0.07, 0.05, 0.02, 0.01, 0.001};
  Real cap = boundary_step(z, d);
  Real limit = std::min(Real(1), Real(0.99) * cap);
  for (double a_d : kSchedule) {
    Real a(a_d);
    if (a > limit) continue;
    Iterate<Real> cand;
    Real a2 = adj ? a * a : Real(0);
    cand.x = z.x + a * d.x;
    cand.y = z.y + a * d.y;
    cand.s = z.s + a * d.s;
    cand.tau = z.tau + a * d.tau;
    cand.kappa = z.kappa + a * d.kappa;
    if (adj) {
      cand.x += a2 * adj->x;
      cand.y += a2 * adj->y;
      cand.s += a2 * adj->s;
      cand.tau += a2 * adj->tau;
      cand.kappa += a2 * adj->kappa;
    }
    if (!(cand.tau > Real(0)) || !(cand.kappa > Real(0))) continue;
    if (!set_all(cand.x)) continue;
    Real mu = mu_of(cand);
    if (!(mu > Real(0))) continue;
    Real prox = proximity(cand, mu);
    bool ok = predictor ? prox <= opts_.eta : (prox <= opts_.eta || prox < prox_now) && prox < Real(0.99);
    if (!ok) continue;
    out = std::move(cand);
    mu_out = mu;
    prox_out = prox;
    alpha_out = a;
    return true;
  }
  return false;
}

template <typename Real>
SolveReport<Real> Engine<Real>::run() {
  using std::abs;
  using std::max;
  using std::min;
  SolveReport<Real> rep;

  Iterate<Real> z;
  z.x.resize(n_);
  for (std::size_t k = 0; k < cones_.size(); ++k) seg(z.x, k) = cones_[k]->initial_point();
  if (!set_all(z.x)) throw NumericalError("initial point is not interior");
  z.s = -gradient();
  z.y = Vec<Real>::Zero(m_);
  z.tau = Real(1);
  z.kappa = Real(1);
  Real mu = mu_of(z);
  Real prox = proximity(z, mu);

  // Status bookkeeping of the most recent iterate.
  Real pobj{0}, dobj{0}, pres{0}, dres{0}, gap{0};
  auto measure = [&](const Iterate<Real>& it) {
    pobj = c_.dot(it.x) / it.tau;
    dobj = m_ > 0 ? Real(b_.dot(it.y) / it.tau) : Real(0);
    Vec<Real> p = A_ * it.x / it.tau - b_;
    Vec<Real> dd = it.s / it.tau - c_;
    if (m_ > 0) dd += A_.transpose() * it.y / it.tau;
    pres = m_ > 0 ? Real(p.cwiseAbs().maxCoeff() / bnorm_) : Real(0);
    dres = dd.cwiseAbs().maxCoeff() / cnorm_;
    gap = abs(pobj - dobj);
  };
  auto gap_ok = [&](const Real& scale) {
    return gap <= scale * opts_.tol_gap * max(Real(1), min(abs(pobj), abs(dobj)));
  };
  auto converged = [&](const Real& scale) {
    return pres <= scale * opts_.tol_feas && dres <= scale * opts_.tol_feas && gap_ok(scale);
  };

  auto finish = [&](SolveStatus st, const std::string& msg, int iters) {
    measure(z);
    if ((st == SolveStatus::iteration_limit || st == SolveStatus::numerical_failure) && converged(Real(1000)))
      st = SolveStatus::near_optimal;
    rep.status = st;
    rep.message = msg;
    rep.iterations = iters;
    rep.primal_obj = pobj;
    rep.dual_obj = dobj;
    rep.gap = gap;
    rep.primal_res = pres;
    rep.dual_res = dres;
    rep.x_opt = z.x / z.tau;
    rep.y_opt = z.y / z.tau;
    rep.s_opt = z.s / z.tau;
    return rep;
  };

  for (int iter = 0;; ++iter) {
    measure(z);
    IterationRecord rec;
    rec.iteration = iter;
    rec.mu = dbl(mu);
    rec.prox = dbl(prox);
    rec.primal_obj = dbl(pobj);
    rec.dual_obj = dbl(dobj);
    rec.primal_res = dbl(pres);
    rec.dual_res = dbl(dres);

    if (converged(Real(1))) return finish(SolveStatus::optimal, "converged", iter);

    // Certificates of infeasibility once tau has collapsed relative to kappa.
    if (z.tau < opts_.tol_feas * max(Real(1), z.kappa)) {
      Real by = m_ > 0 ? Real(b_.dot(z.y)) : Real(0);
      Real cx = c_.dot(z.x);
      Vec<Real> aty_s = z.s;
      if (m_ > 0) aty_s += A_.transpose() * z.y;
      Vec<Real> ax = m_ > 0 ? Vec<Real>(A_ * z.x) : Vec<Real>();
      bool primal_inf = by > Real(0) && aty_s.cwiseAbs().maxCoeff() <= opts_.tol_feas * by * cnorm_;
      bool dual_inf =
          cx < Real(0) && (m_ == 0 || ax.cwiseAbs().maxCoeff() <= opts_.tol_feas * (-cx) * bnorm_);
      if (primal_inf) return finish(SolveStatus::infeasible_detected, "primal infeasibility certificate", iter);
      if (dual_inf) {
        rep.dual_infeasible = true;
        return finish(SolveStatus::infeasible_detected, "dual infeasibility certificate", iter);
      }
    }
    if (iter >= opts_.max_iter) return finish(SolveStatus::iteration_limit, "iteration limit reached", iter);

    try {
      factor(z, mu);
      Iterate<Real> next;
      Real mu_next{0}, prox_next{0}, alpha{0};
      bool moved = false;

      if (prox <= opts_.predict_radius) {
        Rhs<Real> r;
        r.rp = -(A_ * z.x - b_ * z.tau);
        r.rd = z.s - c_ * z.tau;
        if (m_ > 0) r.rd += A_.transpose() * z.y;
        r.rg = -((m_ > 0 ? b_.dot(z.y) : Real(0)) - c_.dot(z.x) - z.kappa);
        r.rs = -z.s;
        r.rk = -z.tau * z.kappa;
        Direction<Real> d = solve(r);
        std::optional<Direction<Real>> adj;
        if (third_) {
          Rhs<Real> r2;
          r2.rp = Vec<Real>::Zero(m_);
          r2.rd = Vec<Real>::Zero(n_);
          r2.rg = Real(0);
          r2.rs = mu * (hess(d.x) - third(d.x) / Real(2));
          r2.rk = -d.tau * d.kappa;
          adj = solve(r2);
        }
        moved = try_step(z, d, adj ? &*adj : nullptr, true, prox, next, mu_next, prox_next, alpha);
        if (!moved && adj) moved = try_step(z, d, nullptr, true, prox, next, mu_next, prox_next, alpha);
        if (moved) rec.step = 'p';
        else if (!set_all(z.x)) throw NumericalError("lost the current iterate");
      }

      if (!moved) {
        Rhs<Real> r;
        r.rp = Vec<Real>::Zero(m_);
        r.rd = Vec<Real>::Zero(n_);
        r.rg = Real(0);
        r.rs = -z.s - mu * gradient();
        r.rk = mu - z.tau * z.kappa;
        Direction<Real> d = solve(r);
        std::optional<Direction<Real>> adj;
        if (third_) {
          Rhs<Real> r2;
          r2.rp = Vec<Real>::Zero(m_);
          r2.rd = Vec<Real>::Zero(n_);
          r2.rg = Real(0);
          r2.rs = -mu * third(d.x) / Real(2);
          r2.rk = -d.tau * d.kappa;
          adj = solve(r2);
        }
        moved = try_step(z, d, adj ? &*adj : nullptr, false, prox, next, mu_next, prox_next, alpha);
        if (!moved && adj) {
          if (!set_all(z.x)) throw NumericalError("lost the current iterate");
          moved = try_step(z, d, nullptr, false, prox, next, mu_next, prox_next, alpha);
        }
        rec.step = 'c';
      }
      if (!moved) {
        set_all(z.x);
        rep.log.push_back(rec);
        return finish(SolveStatus::numerical_failure, "no acceptable step length", iter);
      }
      rec.alpha = dbl(alpha);
      rep.log.push_back(rec);
      z = std::move(next);
      mu = mu_next;
      prox = prox_next;
    } catch (const NumericalError& e) {
      set_all(z.x);
      rep.log.push_back(rec);
      return finish(SolveStatus::numerical_failure, e.what(), iter);
    }
  }
}

}  // namespace

template <typename T>
SolveReport<RealOf<T>> solve(const ConicProblem<T>& p, const SolverOptions<RealOf<T>>& opts) {
  using Real = RealOf<T>;
  auto t0 = std::chrono::steady_clock::now();
  PreprocessResult<T> pre = preprocess(p, opts);
  SolveReport<Real> rep;
  if (!pre.consistent) {
    rep.status = SolveStatus::infeasible_detected;
    rep.message = "equality constraints are inconsistent (residual " + to_string(to_double(pre.inconsistency)) + ")";
    rep.rows_dropped = pre.original_rows - Index(pre.kept_rows.size());
    rep.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
  }
  std::vector<std::unique_ptr<Cone<Real>>> cones;
  for (const auto& d : pre.problem.cones) cones.push_back(make_cone<T>(d, opts.hessian_mode));
  Engine<Real> engine(pre.problem.A, pre.problem.b, pre.problem.c, std::move(cones), opts);
  rep = engine.run();
  rep.y_opt = pre.recover_dual(rep.y_opt);
  rep.rows_dropped = pre.original_rows - Index(pre.kept_rows.size());
  rep.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

#define QKDRATE_INSTANTIATE(R)                    \
  template struct SolverOptions<R>;               \
  template R dual_lower_bound<R>(const SolveReport<R>&);
QKDRATE_FOR_EACH_REAL(QKDRATE_INSTANTIATE)
#undef QKDRATE_INSTANTIATE

#define QKDRATE_INSTANTIATE(T)                                                                            \
  template struct ConicProblem<T>;                                                                        \
  template struct PreprocessResult<T>;                                                                    \
  template PreprocessResult<T> preprocess<T>(const ConicProblem<T>&, const SolverOptions<RealOf<T>>&);    \
  template SolveReport<RealOf<T>> solve<T>(const ConicProblem<T>&, const SolverOptions<RealOf<T>>&);
QKDRATE_FOR_EACH_ENTRY(QKDRATE_INSTANTIATE)
#undef QKDRATE_INSTANTIATE

}  // namespace qkdrate
