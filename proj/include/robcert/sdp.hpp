#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "robcert/matrix.hpp"

namespace robcert {

// ---------------------------------------------------------------------------
// Conic standard form
//
//   minimize    c^T x
//   subject to  G x + s = h,   s in K,
//
// where K is a product of PSD cones (svec coordinates, sqrt(2) scaling on
// off-diagonal entries so that <svec(A), svec(B)> = tr(A B)) and a
// nonnegative orthant. Nonnegative scalars are handled as 1x1 PSD blocks.
// ---------------------------------------------------------------------------

struct ConeDims {
  std::vector<int> psd;  // PSD block dimensions
  int nonneg = 0;        // trailing nonnegative scalars

  std::vector<int> allBlocks() const {
    std::vector<int> b = psd;
    b.insert(b.end(), static_cast<size_t>(nonneg), 1);
    return b;
  }
};

inline Index svecLen(int k) { return static_cast<Index>(k) * (k + 1) / 2; }

inline void svecInto(const Mat& m, Eigen::Ref<Vec> out) {
  const double rt2 = std::sqrt(2.0);
  Index at = 0;
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i <= j; ++i) {
      out(at++) = (i == j) ? m(i, j) : rt2 * 0.5 * (m(i, j) + m(j, i));
    }
  }
}

inline Vec svec(const Mat& m) {
  Vec out(svecLen(static_cast<int>(m.rows())));
  svecInto(m, out);
  return out;
}

inline Mat smat(const Eigen::Ref<const Vec>& v, int k) {
  const double inv_rt2 = 1.0 / std::sqrt(2.0);
  Mat m(k, k);
  Index at = 0;
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double val = v(at++);
      if (i == j) {
        m(i, j) = val;
      } else {
        m(i, j) = val * inv_rt2;
        m(j, i) = m(i, j);
      }
    }
  }
  return m;
}

struct ConicProgram {
  Vec c;           // objective, length m
  Mat g;           // stacked svec coefficients, (total svec dim) x m
  Vec h;           // stacked svec offsets
  ConeDims cones;

  Index numVars() const { return c.size(); }
};

enum class SolveStatus { Optimal, Infeasible, MaxIter, Numerical };

inline const char* toString(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::Numerical: return "numerical";
  }
  return "?";
}

struct SolveResult {
  SolveStatus status = SolveStatus::Numerical;
  Vec x;                  // primal decision vector (empty if infeasible)
  double objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double primal_residual = std::numeric_limits<double>::infinity();
  double dual_residual = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  std::string detail;
};

struct SolveOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iter = 200;
  double step_frac = 0.98;
  bool verbose = false;
};

/// Backend contract: submit a conic program, receive a SolveResult. The
/// built-in interior-point method is the default; an external conic solver
/// can be plugged in behind the same interface.
class SdpBackend {
 public:
  virtual ~SdpBackend() = default;
  virtual SolveResult solve(const ConicProgram& prog,
                            const SolveOptions& opts) const = 0;
  virtual std::string name() const = 0;
};

namespace detail {

struct BlockLayout {
  std::vector<int> dims;
  std::vector<Index> offsets;
  Index total = 0;
  Index nu = 0;  // sum of block dims (barrier parameter)

  explicit BlockLayout(const ConeDims& cones) {
    dims = cones.allBlocks();
    offsets.reserve(dims.size());
    for (int k : dims) {
      offsets.push_back(total);
      total += svecLen(k);
      nu += k;
    }
  }
};

// Per-block Nesterov-Todd scaling data: R with W = R R^T, W Z W = S, and
// R^{-1} S R^{-T} = R^T Z R = diag(lambda).
struct NtBlock {
  Mat r, ri;   // R and R^{-1}
  Vec lambda;
};

inline bool computeNt(const Mat& s, const Mat& z, NtBlock& out) {
  const Index k = s.rows();
  if (k == 1) {
    if (s(0, 0) <= 0.0 || z(0, 0) <= 0.0) return false;
    const double w = std::sqrt(s(0, 0) / z(0, 0));
    out.r = Mat::Constant(1, 1, std::sqrt(w));
    out.ri = Mat::Constant(1, 1, 1.0 / std::sqrt(w));
    out.lambda = Vec::Constant(1, std::sqrt(s(0, 0) * z(0, 0)));
    return true;
  }
  Eigen::LLT<Mat> ls(s), lz(z);
  if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
  Mat Ls = ls.matrixL(), Lz = lz.matrixL();
  Eigen::JacobiSVD<Mat> svd(Mat(Lz.transpose() * Ls),
                            Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec sig = svd.singularValues();
  if (sig.minCoeff() <= 0.0) return false;
  Vec isq = sig.cwiseSqrt().cwiseInverse();
  out.r = Ls * svd.matrixV() * isq.asDiagonal();
  // R^{-1} = Sigma^{-1/2} U^T Lz^T
  out.ri = isq.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
  out.lambda = sig;
  return true;
}

// Largest a with diag(lambda) + a * d_tilde > 0 (d_tilde symmetric).
inline double maxStep(const Vec& lambda, const Mat& d_tilde) {
  const Index k = lambda.size();
  if (k == 1) {
    const double r = d_tilde(0, 0) / lambda(0);
    return r >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / r;
  }
  Vec il = lambda.cwiseSqrt().cwiseInverse();
  Mat b = il.asDiagonal() * d_tilde * il.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat(0.5 * (b + b.transpose())),
                                        Eigen::EigenvaluesOnly);
  const double mn = es.eigenvalues().minCoeff();
  return mn >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / mn;
}

}  // namespace detail

/// Built-in dense primal-dual interior-point solver on the homogeneous
/// self-dual embedding, with NT scaling and a Mehrotra predictor-corrector.
class InteriorPointBackend final : public SdpBackend {
 public:
  std::string name() const override { return "interior-point"; }

  SolveResult solve(const ConicProgram& prog,
                    const SolveOptions& opts) const override {
    using detail::BlockLayout;
    using detail::NtBlock;

    const Index m = prog.numVars();
    BlockLayout L(prog.cones);
    if (prog.g.rows() != L.total || prog.h.size() != L.total) {
      SolveResult bad;
      bad.detail = "dimension mismatch between cones and data";
      return bad;
    }

    const Index nb = static_cast<Index>(L.dims.size());
    auto blockOf = [&](const Vec& v, Index b) {
      return smat(v.segment(L.offsets[b], svecLen(L.dims[b])), L.dims[b]);
    };

    Vec x = Vec::Zero(m);
    Vec s(L.total), z(L.total);
    for (Index b = 0; b < nb; ++b) {
      Vec id = svec(Mat::Identity(L.dims[b], L.dims[b]));
      s.segment(L.offsets[b], id.size()) = id;
      z.segment(L.offsets[b], id.size()) = id;
    }
    double tau = 1.0, kappa = 1.0;

    const double hnorm = std::max(1.0, prog.h.lpNorm<Eigen::Infinity>());
    const double cnorm = std::max(1.0, m > 0 ? prog.c.lpNorm<Eigen::Infinity>() : 0.0);

    SolveResult res;
    std::vector<NtBlock> nt(nb);
    Mat phi_g(L.total, m);

    auto finishAt = [&](SolveStatus st, int it, double pres, double dres,
                        double gp, const std::string& why) {
      res.status = st;
      res.iterations = it;
      res.x = x / tau;
      res.objective = m > 0 ? prog.c.dot(res.x) : 0.0;
      res.primal_residual = pres;
      res.dual_residual = dres;
      res.gap = gp;
      res.detail = why;
      return res;
    };

    double mu = (s.dot(z) + tau * kappa) / static_cast<double>(L.nu + 1);

    for (int iter = 0; iter <= opts.max_iter; ++iter) {
      // Skew self-dual residuals: G x + s - h tau, G^T z + c tau,
      // and kappa + c^T x + h^T z.
      Vec r_p = prog.g * x + s - prog.h * tau;
      Vec r_d = prog.g.transpose() * z + prog.c * tau;
      const double ctx = m > 0 ? prog.c.dot(x) : 0.0;
      const double htz = prog.h.dot(z);
      const double r_g = ctx + htz + kappa;

      const double pres = r_p.lpNorm<Eigen::Infinity>() / (tau * hnorm);
      const double dres = r_d.lpNorm<Eigen::Infinity>() / (tau * cnorm);
      const double pcost = ctx / tau;
      const double gap = s.dot(z) / (tau * tau);
      const double relgap = gap / std::max(1.0, std::abs(pcost));

      if (opts.verbose) {
        std::printf("it %3d  pres %9.2e dres %9.2e gap %9.2e tau %8.2e kap %8.2e\n",
                    iter, pres, dres, gap, tau, kappa);
      }

      if (pres <= opts.feas_tol && dres <= opts.feas_tol &&
          (gap <= opts.gap_tol || relgap <= opts.gap_tol)) {
        return finishAt(SolveStatus::Optimal, iter, pres, dres, gap, "");
      }

      // Infeasibility certificates once tau has collapsed relative to kappa.
      if (tau <= 1e-8 * std::max(1.0, kappa) ||
          mu <= 1e-12 * std::max(1.0, tau * tau)) {
        if (-htz > 0.0) {
          const double cert =
              (prog.g.transpose() * z).lpNorm<Eigen::Infinity>() / (-htz);
          if (cert <= 1e-6 * cnorm) {
            res.x = Vec();
            res.status = SolveStatus::Infeasible;
            res.iterations = iter;
            res.detail = "primal infeasibility certificate";
            res.primal_residual = pres;
            res.dual_residual = dres;
            res.gap = gap;
            return res;
          }
        }
        if (-ctx > 0.0) {
          const double cert =
              (prog.g * x + s).lpNorm<Eigen::Infinity>() / (-ctx);
          if (cert <= 1e-6 * hnorm) {
            res.x = Vec();
            res.status = SolveStatus::Infeasible;
            res.iterations = iter;
            res.detail = "dual infeasibility certificate (primal unbounded)";
            res.primal_residual = pres;
            res.dual_residual = dres;
            res.gap = gap;
            return res;
          }
        }
        return finishAt(SolveStatus::Numerical, iter, pres, dres, gap,
                        "tau collapsed without certificate");
      }

      if (iter == opts.max_iter) {
        return finishAt(SolveStatus::MaxIter, iter, pres, dres, gap,
                        "iteration limit");
      }

      // NT scaling
      for (Index b = 0; b < nb; ++b) {
        if (!detail::computeNt(blockOf(s, b), blockOf(z, b), nt[b])) {
          return finishAt(SolveStatus::Numerical, iter, pres, dres, gap,
                          "NT scaling failed (iterate left the cone)");
        }
      }

      auto phiInv = [&](const Vec& v) {
        Vec out(L.total);
        for (Index b = 0; b < nb; ++b) {
          const Index len = svecLen(L.dims[b]);
          Mat mv = smat(v.segment(L.offsets[b], len), L.dims[b]);
          Mat inner = nt[b].ri * mv * nt[b].ri.transpose();
          Mat outer = nt[b].ri.transpose() * inner * nt[b].ri;
          svecInto(outer, out.segment(L.offsets[b], len));
        }
        return out;
      };

      // Schur complement H = G^T Phi^{-1} G
      for (Index i = 0; i < m; ++i) phi_g.col(i) = phiInv(prog.g.col(i));
      Mat schur = prog.g.transpose() * phi_g;
      schur = 0.5 * (schur + schur.transpose().eval());

      Eigen::LLT<Mat> chol;
      double jitter = 0.0;
      const double base_jit =
          1e-14 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
      for (int attempt = 0; attempt < 12; ++attempt) {
        Mat trial = schur;
        if (jitter > 0.0) trial.diagonal().array() += jitter;
        chol.compute(trial);
        if (chol.info() == Eigen::Success) break;
        jitter = jitter == 0.0 ? base_jit : jitter * 100.0;
      }
      if (chol.info() != Eigen::Success) {
        return finishAt(SolveStatus::Numerical, iter, pres, dres, gap,
                        "Schur factorization failed");
      }

      Vec u_h = phiInv(prog.h);
      Vec gt_uh = prog.g.transpose() * u_h;
      const double h_uh = prog.h.dot(u_h);
      Vec dx_h = chol.solve(gt_uh - prog.c);

      Vec phi_rp = phiInv(r_p);
      const double h_phi_rp = prog.h.dot(phi_rp);
      Vec gt_phi_rp = prog.g.transpose() * phi_rp;

      std::vector<Mat> dS_aff(nb), dZ_aff(nb);
      Vec ds(L.total), dz(L.total), dx(m);
      double dtau = 0.0, dkappa = 0.0;

      auto linSolve = [&](double eta, const Vec& d0, double r_tk) {
        Vec rhs_r = -eta * r_d - prog.g.transpose() * d0 - eta * gt_phi_rp;
        Vec dx_r = chol.solve(rhs_r);
        const double denom = (m > 0 ? prog.c.dot(dx_h) + gt_uh.dot(dx_h) : 0.0) -
                             h_uh - kappa / tau;
        const double numer =
            -((m > 0 ? prog.c.dot(dx_r) + gt_uh.dot(dx_r) : 0.0) +
              prog.h.dot(d0) + eta * h_phi_rp + r_tk / tau + eta * r_g);
        dtau = numer / denom;
        if (!std::isfinite(dtau)) return false;
        dx = dx_r + dtau * dx_h;
        ds = -eta * r_p - prog.g * dx + prog.h * dtau;
        dz = d0 - phiInv(ds);
        dkappa = (r_tk - kappa * dtau) / tau;
        return true;
      };

      // Affine (predictor) direction: d0 = -z exactly.
      if (!linSolve(1.0, Vec(-z), -tau * kappa)) {
        return finishAt(SolveStatus::Numerical, iter, pres, dres, gap,
                        "affine direction solve failed");
      }

      double alpha_aff = 1.0;
      for (Index b = 0; b < nb; ++b) {
        dS_aff[b] = nt[b].ri * blockOf(ds, b) * nt[b].ri.transpose();
        dZ_aff[b] = nt[b].r.transpose() * blockOf(dz, b) * nt[b].r;
        alpha_aff = std::min(alpha_aff, detail::maxStep(nt[b].lambda, dS_aff[b]));
        alpha_aff = std::min(alpha_aff, detail::maxStep(nt[b].lambda, dZ_aff[b]));
      }
      if (dtau < 0.0) alpha_aff = std::min(alpha_aff, -tau / dtau);
      if (dkappa < 0.0) alpha_aff = std::min(alpha_aff, -kappa / dkappa);

      const double mu_aff =
          ((s + alpha_aff * ds).dot(z + alpha_aff * dz) +
           (tau + alpha_aff * dtau) * (kappa + alpha_aff * dkappa)) /
          static_cast<double>(L.nu + 1);
      double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);
      sigma = std::clamp(sigma, 0.0, 1.0);

      // dtau/dkappa still hold the affine direction here.
      const double r_tk = sigma * mu - tau * kappa - dtau * dkappa;

      Vec d0(L.total);
      for (Index b = 0; b < nb; ++b) {
        const Vec& lam = nt[b].lambda;
        Mat corr = 0.5 * (dS_aff[b] * dZ_aff[b] + dZ_aff[b] * dS_aff[b]);
        Mat rhs = -corr;
        rhs.diagonal().array() += sigma * mu;
        rhs.diagonal() -= lam.cwiseProduct(lam);
        Mat d = rhs;
        for (Index i = 0; i < d.rows(); ++i) {
          for (Index j = 0; j < d.cols(); ++j) {
            d(i, j) = 2.0 * rhs(i, j) / (lam(i) + lam(j));
          }
        }
        Mat d0b = nt[b].ri.transpose() * d * nt[b].ri;
        svecInto(0.5 * (d0b + d0b.transpose()),
                 d0.segment(L.offsets[b], svecLen(L.dims[b])));
      }

      if (!linSolve(1.0 - sigma, d0, r_tk)) {
        return finishAt(SolveStatus::Numerical, iter, pres, dres, gap,
                        "corrector solve failed");
      }

      double alpha_max = std::numeric_limits<double>::infinity();
      for (Index b = 0; b < nb; ++b) {
        Mat dS = nt[b].ri * blockOf(ds, b) * nt[b].ri.transpose();
        Mat dZ = nt[b].r.transpose() * blockOf(dz, b) * nt[b].r;
        alpha_max = std::min(alpha_max, detail::maxStep(nt[b].lambda, dS));
        alpha_max = std::min(alpha_max, detail::maxStep(nt[b].lambda, dZ));
      }
      if (dtau < 0.0) alpha_max = std::min(alpha_max, -tau / dtau);
      if (dkappa < 0.0) alpha_max = std::min(alpha_max, -kappa / dkappa);
      const double alpha = std::min(1.0, opts.step_frac * alpha_max);
      if (!(alpha > 1e-13)) {
        return finishAt(SolveStatus::Numerical, iter, pres, dres, gap,
                        "step length collapsed");
      }

      x += alpha * dx;
      s += alpha * ds;
      z += alpha * dz;
      tau += alpha * dtau;
      kappa += alpha * dkappa;
      mu = (s.dot(z) + tau * kappa) / static_cast<double>(L.nu + 1);
    }

    return res;  // unreachable
  }
};

/// Reference backend for tiny problems with a single decision variable:
/// feasibility of a fixed x is an eigenvalue check, so the optimum is found
/// by bisection. Used to cross-check the interior-point method.
class ScalarBisectionBackend final : public SdpBackend {
 public:
  std::string name() const override { return "scalar-bisection"; }

  SolveResult solve(const ConicProgram& prog,
                    const SolveOptions& opts) const override {
    SolveResult res;
    if (prog.numVars() != 1) {
      res.detail = "scalar-bisection backend handles exactly one variable";
      return res;
    }
    detail::BlockLayout L(prog.cones);
    auto feasible = [&](double v) {
      for (size_t b = 0; b < L.dims.size(); ++b) {
        const Index len = svecLen(L.dims[b]);
        Vec seg = prog.h.segment(L.offsets[b], len) -
                  prog.g.block(L.offsets[b], 0, len, 1) * v;
        if (minEig(smat(seg, L.dims[b])) < -1e-12) return false;
      }
      return true;
    };
    // Bracket the feasible set along the objective direction.
    const double dir = prog.c(0) >= 0.0 ? -1.0 : 1.0;  // improving direction
    double lo = 0.0;
    if (!feasible(lo)) {
      double span = 1.0;
      bool found = false;
      for (int i = 0; i < 60 && !found; ++i, span *= 2.0) {
        if (feasible(span)) { lo = span; found = true; }
        else if (feasible(-span)) { lo = -span; found = true; }
      }
      if (!found) {
        res.status = SolveStatus::Infeasible;
        res.detail = "no feasible point found by scan";
        return res;
      }
    }
    double hi = lo, span = 1.0;
    for (int i = 0; i < 200; ++i, span *= 2.0) {
      if (!feasible(lo + dir * span)) { hi = lo + dir * span; break; }
      lo = lo + dir * span;
      if (i == 199) {
        res.detail = "objective appears unbounded";
        return res;
      }
    }
    for (int i = 0; i < 200 && std::abs(hi - lo) > 1e-12 * (1 + std::abs(lo));
         ++i) {
      const double mid = 0.5 * (lo + hi);
      (feasible(mid) ? lo : hi) = mid;
    }
    res.status = SolveStatus::Optimal;
    res.x = Vec::Constant(1, lo);
    res.objective = prog.c(0) * lo;
    res.primal_residual = res.dual_residual = res.gap = 0.0;
    (void)opts;
    return res;
  }
};

}  // namespace robcert
