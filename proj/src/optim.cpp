#include "stlsynth/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "stlsynth/error.hpp"

namespace stlsynth::optim {

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

LinearProgram LinearProgram::with_variables(int n) {
  LinearProgram p;
  p.cost = VectorXd::Zero(n);
  p.eq_matrix = MatrixXd::Zero(0, n);
  p.eq_vector = VectorXd::Zero(0);
  p.lower = VectorXd::Constant(n, -kInf);
  p.upper = VectorXd::Constant(n, kInf);
  return p;
}

QuadraticProgram QuadraticProgram::with_variables(int n) {
  QuadraticProgram p;
  p.hessian = MatrixXd::Zero(n, n);
  p.linear = VectorXd::Zero(n);
  p.eq_matrix = MatrixXd::Zero(0, n);
  p.eq_vector = VectorXd::Zero(0);
  p.ineq_matrix = MatrixXd::Zero(0, n);
  p.ineq_lower = VectorXd::Zero(0);
  p.ineq_upper = VectorXd::Zero(0);
  p.lower = VectorXd::Constant(n, -kInf);
  p.upper = VectorXd::Constant(n, kInf);
  return p;
}

// ---------------------------------------------------------------------------
// Bounded-variable simplex
// ---------------------------------------------------------------------------

namespace {

enum class VarMap { Shift, Flip, Split };

struct Column {
  VarMap map;
  int source;
  double offset;  // lower (Shift) or upper (Flip)
};

enum class At { Lower, Upper, Basic };

class Tableau {
 public:
  Tableau(MatrixXd a, VectorXd b, VectorXd upper, int structural)
      : m_(static_cast<int>(a.rows())),
        n_(structural),
        total_(structural + static_cast<int>(a.rows())),
        t_(m_, total_),
        beta_(b),
        upper_(VectorXd::Constant(total_, kInf)),
        state_(total_, At::Lower),
        basis_(m_) {
    t_.leftCols(n_) = a;
    t_.rightCols(m_).setIdentity();
    upper_.head(n_) = upper;
    for (int i = 0; i < m_; ++i) {
      basis_[i] = n_ + i;
      state_[n_ + i] = At::Basic;
    }
  }

  // Returns Optimal, Unbounded, or throws on pivot budget.
  Status optimize(const VectorXd& cost, bool allow_artificial, int& pivots,
                  int max_pivots) {
    constexpr double kTol = 1e-9;
    while (true) {
      if (pivots >= max_pivots) {
        throw Error(ErrorKind::NumericalFailure,
                    "simplex pivot budget exhausted after " +
                        std::to_string(pivots) + " iterations");
      }
      VectorXd cb(m_);
      for (int i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
      const Eigen::RowVectorXd reduced =
          cost.transpose() - cb.transpose() * t_;

      int enter = -1;
      const int limit = allow_artificial ? total_ : n_;
      for (int j = 0; j < limit; ++j) {
        if (state_[j] == At::Basic || upper_[j] <= 0.0) continue;
        if ((state_[j] == At::Lower && reduced[j] < -kTol) ||
            (state_[j] == At::Upper && reduced[j] > kTol)) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::Optimal;

      const double dir = state_[enter] == At::Lower ? 1.0 : -1.0;
      double best = kInf;
      int leave_row = -1;
      bool leave_to_upper = false;
      for (int i = 0; i < m_; ++i) {
        const double a = dir * t_(i, enter);
        double lim;
        bool to_upper = false;
        if (a > kTol) {
          lim = std::max(beta_[i], 0.0) / a;
        } else if (a < -kTol && std::isfinite(upper_[basis_[i]])) {
          lim = std::max(upper_[basis_[i]] - beta_[i], 0.0) / -a;
          to_upper = true;
        } else {
          continue;
        }
        if (leave_row < 0 || lim < best - 1e-12 ||
            (lim <= best + 1e-12 && basis_[i] < basis_[leave_row])) {
          best = lim;
          leave_row = i;
          leave_to_upper = to_upper;
        }
      }
      if (upper_[enter] <= best) {
        best = upper_[enter];
        leave_row = -1;
      }
      if (!std::isfinite(best)) return Status::Unbounded;
      ++pivots;

      if (leave_row < 0) {
        // Bound flip of the entering variable.
        beta_ -= dir * best * t_.col(enter);
        state_[enter] = state_[enter] == At::Lower ? At::Upper : At::Lower;
        continue;
      }
      const double entering_value =
          state_[enter] == At::Lower ? best : upper_[enter] - best;
      beta_ -= dir * best * t_.col(enter);
      const int leaving = basis_[leave_row];
      state_[leaving] = leave_to_upper ? At::Upper : At::Lower;
      pivot(leave_row, enter);
      beta_[leave_row] = entering_value;
      state_[enter] = At::Basic;
      basis_[leave_row] = enter;
      for (int i = 0; i < m_; ++i) {
        if (beta_[i] < 0.0 && beta_[i] > -1e-11) beta_[i] = 0.0;
      }
    }
  }

  // Replaces basic artificials by structural columns where possible.
  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      for (int j = 0; j < n_; ++j) {
        if (state_[j] == At::Basic || std::abs(t_(i, j)) <= 1e-9) continue;
        const double value = state_[j] == At::Upper ? upper_[j] : 0.0;
        state_[basis_[i]] = At::Lower;
        pivot(i, j);
        beta_[i] = value;
        state_[j] = At::Basic;
        basis_[i] = j;
        break;
      }
    }
    for (int k = n_; k < total_; ++k) upper_[k] = 0.0;
  }

  double value_of(int j) const {
    switch (state_[j]) {
      case At::Lower: return 0.0;
      case At::Upper: return upper_[j];
      case At::Basic:
        for (int i = 0; i < m_; ++i)
          if (basis_[i] == j) return beta_[i];
    }
    return 0.0;
  }

  double artificial_sum() const {
    double s = 0.0;
    for (int k = n_; k < total_; ++k) s += std::abs(value_of(k));
    return s;
  }

 private:
  void pivot(int row, int col) {
    const double p = t_(row, col);
    t_.row(row) /= p;
    for (int i = 0; i < m_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
  }

  int m_, n_, total_;
  MatrixXd t_;
  VectorXd beta_;
  VectorXd upper_;
  std::vector<At> state_;
  std::vector<int> basis_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& p, int max_pivots) {
  const int n = static_cast<int>(p.cost.size());
  const int m = static_cast<int>(p.eq_matrix.rows());
  if (p.eq_matrix.cols() != n || p.eq_vector.size() != m ||
      p.lower.size() != n || p.upper.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "linear program dimensions");
  }

  LpResult result;
  for (int j = 0; j < n; ++j) {
    if (p.lower[j] > p.upper[j]) {
      result.status = Status::Infeasible;
      return result;
    }
  }

  std::vector<Column> cols;
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(p.lower[j])) {
      cols.push_back({VarMap::Shift, j, p.lower[j]});
    } else if (std::isfinite(p.upper[j])) {
      cols.push_back({VarMap::Flip, j, p.upper[j]});
    } else {
      cols.push_back({VarMap::Split, j, 0.0});
      cols.push_back({VarMap::Split, j, 1.0});  // negative part
    }
  }
  const int nn = static_cast<int>(cols.size());
  MatrixXd a(m, nn);
  VectorXd c(nn), up(nn);
  VectorXd b = p.eq_vector;
  for (int k = 0; k < nn; ++k) {
    const Column& col = cols[k];
    const auto src = p.eq_matrix.col(col.source);
    switch (col.map) {
      case VarMap::Shift:
        a.col(k) = src;
        c[k] = p.cost[col.source];
        up[k] = p.upper[col.source] - col.offset;
        b -= src * col.offset;
        break;
      case VarMap::Flip:
        a.col(k) = -src;
        c[k] = -p.cost[col.source];
        up[k] = kInf;
        b -= src * col.offset;
        break;
      case VarMap::Split: {
        const double sign = col.offset == 0.0 ? 1.0 : -1.0;
        a.col(k) = sign * src;
        c[k] = sign * p.cost[col.source];
        up[k] = kInf;
        break;
      }
    }
  }
  for (int i = 0; i < m; ++i) {
    if (b[i] < 0.0) {
      b[i] = -b[i];
      a.row(i) = -a.row(i);
    }
  }

  Tableau tab(a, b, up, nn);
  VectorXd phase1 = VectorXd::Zero(nn + m);
  phase1.tail(m).setOnes();
  int pivots = 0;
  tab.optimize(phase1, true, pivots, max_pivots);
  const double scale = 1.0 + (m > 0 ? b.lpNorm<Eigen::Infinity>() : 0.0);
  if (tab.artificial_sum() > 1e-8 * scale) {
    result.status = Status::Infeasible;
    result.iterations = pivots;
    return result;
  }
  tab.drive_out_artificials();

  VectorXd phase2 = VectorXd::Zero(nn + m);
  phase2.head(nn) = c;
  const Status st = tab.optimize(phase2, false, pivots, max_pivots);
  result.iterations = pivots;
  if (st == Status::Unbounded) {
    result.status = Status::Unbounded;
    return result;
  }

  result.x = VectorXd::Zero(n);
  for (int k = 0; k < nn; ++k) {
    const Column& col = cols[k];
    const double y = tab.value_of(k);
    switch (col.map) {
      case VarMap::Shift: result.x[col.source] = col.offset + y; break;
      case VarMap::Flip: result.x[col.source] = col.offset - y; break;
      case VarMap::Split:
        result.x[col.source] += col.offset == 0.0 ? y : -y;
        break;
    }
  }
  result.status = Status::Optimal;
  result.value = p.cost.dot(result.x);
  return result;
}

// ---------------------------------------------------------------------------
// ADMM quadratic programming
// ---------------------------------------------------------------------------

QpResult solve_qp(const QuadraticProgram& p, const QpOptions& opts) {
  const int n = static_cast<int>(p.linear.size());
  const int me = static_cast<int>(p.eq_matrix.rows());
  const int mi = static_cast<int>(p.ineq_matrix.rows());
  if (p.hessian.rows() != n || p.hessian.cols() != n ||
      p.eq_matrix.cols() != n || p.eq_vector.size() != me ||
      (mi > 0 && p.ineq_matrix.cols() != n) || p.ineq_lower.size() != mi ||
      p.ineq_upper.size() != mi || p.lower.size() != n ||
      p.upper.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "quadratic program dimensions");
  }

  // Stack all constraints as l <= C x <= u; bound rows only where finite.
  std::vector<int> bounded;
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(p.lower[j]) || std::isfinite(p.upper[j]))
      bounded.push_back(j);
  }
  const int mb = static_cast<int>(bounded.size());
  const int mt = me + mi + mb;
  MatrixXd C = MatrixXd::Zero(mt, n);
  VectorXd l(mt), u(mt);
  if (me > 0) {
    C.topRows(me) = p.eq_matrix;
    l.head(me) = p.eq_vector;
    u.head(me) = p.eq_vector;
  }
  if (mi > 0) {
    C.middleRows(me, mi) = p.ineq_matrix;
    l.segment(me, mi) = p.ineq_lower;
    u.segment(me, mi) = p.ineq_upper;
  }
  for (int k = 0; k < mb; ++k) {
    C(me + mi + k, bounded[k]) = 1.0;
    l[me + mi + k] = p.lower[bounded[k]];
    u[me + mi + k] = p.upper[bounded[k]];
  }

  auto row_rho = [&](double rho) {
    VectorXd r(mt);
    for (int i = 0; i < mt; ++i) {
      if (!std::isfinite(l[i]) && !std::isfinite(u[i])) r[i] = 1e-6;
      else if (l[i] == u[i]) r[i] = 1e3 * rho;
      else r[i] = rho;
    }
    return r;
  };

  double rho = opts.rho;
  VectorXd rho_vec = row_rho(rho);
  const MatrixXd& P = p.hessian;
  const VectorXd& q = p.linear;
  auto factor = [&](const VectorXd& rv) {
    MatrixXd kkt = P + opts.sigma * MatrixXd::Identity(n, n) +
                   C.transpose() * rv.asDiagonal() * C;
    return Eigen::LLT<MatrixXd>(kkt);
  };
  Eigen::LLT<MatrixXd> llt = factor(rho_vec);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NumericalFailure, "QP system is not positive definite");
  }

  VectorXd x = VectorXd::Zero(n);
  VectorXd z = VectorXd::Zero(mt);
  VectorXd y = VectorXd::Zero(mt);
  auto project = [&](VectorXd v) {
    for (int i = 0; i < mt; ++i) v[i] = std::clamp(v[i], l[i], u[i]);
    return v;
  };
  z = project(z);

  QpResult res;
  const double eps = opts.tolerance;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const VectorXd rhs = opts.sigma * x - q + C.transpose() * (rho_vec.cwiseProduct(z) - y);
    const VectorXd xt = llt.solve(rhs);
    const VectorXd zt = C * xt;
    const VectorXd x_next = opts.alpha * xt + (1.0 - opts.alpha) * x;
    const VectorXd zr = opts.alpha * zt + (1.0 - opts.alpha) * z;
    const VectorXd z_next = project(zr + y.cwiseQuotient(rho_vec));
    const VectorXd dy = rho_vec.cwiseProduct(zr - z_next);
    y += dy;
    x = x_next;
    z = z_next;

    const VectorXd Cx = C * x;
    const VectorXd Px = P * x;
    const VectorXd Cty = C.transpose() * y;
    const double r_prim = mt > 0 ? (Cx - z).lpNorm<Eigen::Infinity>() : 0.0;
    const double r_dual = (Px + q + Cty).lpNorm<Eigen::Infinity>();
    const double prim_scale =
        mt > 0 ? std::max(Cx.lpNorm<Eigen::Infinity>(), z.lpNorm<Eigen::Infinity>()) : 0.0;
    const double dual_scale = std::max({Px.lpNorm<Eigen::Infinity>(),
                                        Cty.lpNorm<Eigen::Infinity>(),
                                        q.size() ? q.lpNorm<Eigen::Infinity>() : 0.0});
    res.iterations = it;
    res.primal_residual = r_prim;
    res.dual_residual = r_dual;
    if (r_prim <= eps + eps * prim_scale && r_dual <= eps + eps * dual_scale) {
      res.status = Status::Optimal;
      break;
    }

    // Primal infeasibility certificate on the dual iterate increment.
    if (mt > 0 && it % 10 == 0) {
      const double dy_norm = dy.lpNorm<Eigen::Infinity>();
      if (dy_norm > 1e-12) {
        const double ct = (C.transpose() * dy).lpNorm<Eigen::Infinity>();
        double support = 0.0;
        bool finite = true;
        for (int i = 0; i < mt && finite; ++i) {
          if (dy[i] > 1e-14 * dy_norm) {
            if (!std::isfinite(u[i])) finite = false; else support += u[i] * dy[i];
          } else if (dy[i] < -1e-14 * dy_norm) {
            if (!std::isfinite(l[i])) finite = false; else support += l[i] * dy[i];
          }
        }
        if (finite && ct <= 1e-7 * dy_norm && support < -1e-7 * dy_norm) {
          res.status = Status::Infeasible;
          break;
        }
      }
    }

    if (it % 50 == 0 && mt > 0) {
      const double pn = r_prim / (prim_scale + 1e-12);
      const double dn = r_dual / (dual_scale + 1e-12);
      const double rho_new =
          std::clamp(rho * std::sqrt(pn / (dn + 1e-16)), 1e-6, 1e6);
      if (rho_new > 5.0 * rho || rho_new < 0.2 * rho) {
        rho = rho_new;
        rho_vec = row_rho(rho);
        llt = factor(rho_vec);
      }
    }
  }

  for (int j = 0; j < n; ++j) x[j] = std::clamp(x[j], p.lower[j], p.upper[j]);
  res.x = x;
  res.value = 0.5 * x.dot(P * x) + q.dot(x);
  return res;
}

// ---------------------------------------------------------------------------
// Riccati
// ---------------------------------------------------------------------------

void LqrWeights::validate(int n, int m) const {
  if (q.size() != n || r.size() != m) {
    throw Error(ErrorKind::DimensionMismatch, "LQR weight dimensions");
  }
  if ((q.array() < 0.0).any() || (r.array() <= 0.0).any()) {
    throw Error(ErrorKind::InvalidArgument,
                "LQR weights need diag(Q) >= 0 and diag(R) > 0");
  }
}

double dare_residual(const MatrixXd& Ad, const MatrixXd& Bd, const MatrixXd& Q,
                     const MatrixXd& R, const MatrixXd& P) {
  const MatrixXd S = R + Bd.transpose() * P * Bd;
  const MatrixXd BtPA = Bd.transpose() * P * Ad;
  const MatrixXd rhs = Ad.transpose() * P * Ad -
                       BtPA.transpose() * S.ldlt().solve(BtPA) + Q;
  return (rhs - P).lpNorm<Eigen::Infinity>();
}

DareResult dare(const MatrixXd& Ad, const MatrixXd& Bd, const LqrWeights& w,
                double tol, int max_iterations) {
  const int n = static_cast<int>(Ad.rows());
  const int m = static_cast<int>(Bd.cols());
  if (Ad.cols() != n || Bd.rows() != n) {
    throw Error(ErrorKind::DimensionMismatch, "dare: A/B dimensions");
  }
  w.validate(n, m);
  const MatrixXd Q = w.Q();
  const MatrixXd R = w.R();
  const MatrixXd I = MatrixXd::Identity(n, n);

  // Structure-preserving doubling.
  MatrixXd A = Ad;
  MatrixXd G = Bd * R.ldlt().solve(Bd.transpose());
  MatrixXd H = Q;
  DareResult out;
  int it = 0;
  for (; it < max_iterations; ++it) {
    const MatrixXd W = I + G * H;
    const Eigen::PartialPivLU<MatrixXd> lu(W);
    const MatrixXd WinvA = lu.solve(A);
    const MatrixXd WinvG = lu.solve(G);
    const MatrixXd H_next = H + A.transpose() * H * WinvA;
    const MatrixXd G_next = G + A * WinvG * A.transpose();
    const MatrixXd A_next = A * WinvA;
    const double change = (H_next - H).lpNorm<Eigen::Infinity>();
    H = 0.5 * (H_next + H_next.transpose());
    G = 0.5 * (G_next + G_next.transpose());
    A = A_next;
    if (!H.allFinite()) break;
    if (change <= 1e-14 * (1.0 + H.lpNorm<Eigen::Infinity>())) break;
  }
  MatrixXd P = H;
  // Fixed-point polish on the Riccati map.
  for (int k = 0; k < 5 && P.allFinite(); ++k) {
    const MatrixXd S = R + Bd.transpose() * P * Bd;
    const MatrixXd BtPA = Bd.transpose() * P * Ad;
    MatrixXd next = Ad.transpose() * P * Ad - BtPA.transpose() * S.ldlt().solve(BtPA) + Q;
    P = 0.5 * (next + next.transpose());
  }
  if (!P.allFinite()) {
    throw Error(ErrorKind::NoConvergence, "dare: iteration diverged (pair not stabilizable?)");
  }
  out.P = P;
  out.K = (R + Bd.transpose() * P * Bd).ldlt().solve(Bd.transpose() * P * Ad);
  out.residual = dare_residual(Ad, Bd, Q, R, P);
  out.iterations = it;
  const double scale = 1.0 + P.lpNorm<Eigen::Infinity>();
  if (out.residual > tol * scale) {
    throw Error(ErrorKind::NoConvergence,
                "dare: residual " + std::to_string(out.residual) + " above tolerance");
  }
  return out;
}

RiccatiSchedule finite_horizon_riccati(const MatrixXd& Ad, const MatrixXd& Bd,
                                       const LqrWeights& w, int steps) {
  const int n = static_cast<int>(Ad.rows());
  const int m = static_cast<int>(Bd.cols());
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "riccati: steps < 1");
  w.validate(n, m);
  const MatrixXd Q = w.Q();
  const MatrixXd R = w.R();
  RiccatiSchedule s;
  s.gains.assign(steps, MatrixXd::Zero(m, n));
  s.cost_to_go.assign(steps + 1, Q);
  MatrixXd P = Q;
  for (int k = steps - 1; k >= 0; --k) {
    const MatrixXd S = R + Bd.transpose() * P * Bd;
    const MatrixXd K = S.ldlt().solve(Bd.transpose() * P * Ad);
    MatrixXd next = Q + Ad.transpose() * P * (Ad - Bd * K);
    P = 0.5 * (next + next.transpose());
    s.gains[k] = K;
    s.cost_to_go[k] = P;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Matrix exponential
// ---------------------------------------------------------------------------

MatrixXd expm(const MatrixXd& M) {
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n) throw Error(ErrorKind::DimensionMismatch, "expm: non-square");
  if (n == 0) return M;
  // Pade(6,6) coefficients c_k = (12-k)! 6! / (12! k! (6-k)!).
  static constexpr double c[7] = {1.0,
                                  1.0 / 2.0,
                                  5.0 / 44.0,
                                  1.0 / 66.0,
                                  1.0 / 792.0,
                                  1.0 / 15840.0,
                                  1.0 / 665280.0};
  const double norm = M.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm > 0.5) s = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const MatrixXd X = M / std::ldexp(1.0, s);
  const MatrixXd I = MatrixXd::Identity(n, n);
  MatrixXd power = I;
  MatrixXd num = c[0] * I;
  MatrixXd den = c[0] * I;
  for (int k = 1; k <= 6; ++k) {
    power = power * X;
    num += c[k] * power;
    den += ((k % 2) ? -c[k] : c[k]) * power;
  }
  MatrixXd R = den.partialPivLu().solve(num);
  for (int k = 0; k < s; ++k) R = R * R;
  return R;
}

double spectral_radius(const MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace stlsynth::optim
