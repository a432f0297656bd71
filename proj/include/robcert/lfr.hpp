#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "robcert/matrix.hpp"

namespace robcert {

/// Thrown when I - D_zw Delta (or an interconnection loop) is numerically
/// singular.
struct WellPosednessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kWellPosedRcond = 1e-12;

struct Dims {
  Index n = 0, n_w = 0, n_z = 0, n_n = 0, n_r = 0, n_e = 0, n_y = 0;
};

/// Discrete-time (or continuous-time, before discretization) uncertain
/// interconnection
///
///   [x+; z; e; y] = [A  B_w  B_n  B_r;
///                    C_z D_zw D_zn D_zr;
///                    C_e D_ew D_en D_er;
///                    C_y D_yw D_yn D_yr] [x; w; n; r],   w = Delta z.
///
/// The noise-free case is n_n = 0, n_e = 0 (zero-width blocks).
struct LfrSystem {
  Mat a;
  Mat b_w, b_n, b_r;
  Mat c_z, c_e, c_y;
  Mat d_zw, d_zn, d_zr;
  Mat d_ew, d_en, d_er;
  Mat d_yw, d_yn, d_yr;

  Dims dims() const {
    return {a.rows(), b_w.cols(), c_z.rows(), b_n.cols(),
            b_r.cols(), c_e.rows(), c_y.rows()};
  }

  void validate() const {
    const Dims d = dims();
    auto check = [](const Mat& m, Index rows, Index cols, const char* name) {
      if (m.rows() != rows || m.cols() != cols) {
        throw std::invalid_argument(std::string("LfrSystem: block ") + name +
                                    " has inconsistent dimensions");
      }
    };
    check(a, d.n, d.n, "a");
    check(b_w, d.n, d.n_w, "b_w");
    check(b_n, d.n, d.n_n, "b_n");
    check(b_r, d.n, d.n_r, "b_r");
    check(c_z, d.n_z, d.n, "c_z");
    check(c_e, d.n_e, d.n, "c_e");
    check(c_y, d.n_y, d.n, "c_y");
    check(d_zw, d.n_z, d.n_w, "d_zw");
    check(d_zn, d.n_z, d.n_n, "d_zn");
    check(d_zr, d.n_z, d.n_r, "d_zr");
    check(d_ew, d.n_e, d.n_w, "d_ew");
    check(d_en, d.n_e, d.n_n, "d_en");
    check(d_er, d.n_e, d.n_r, "d_er");
    check(d_yw, d.n_y, d.n_w, "d_yw");
    check(d_yn, d.n_y, d.n_n, "d_yn");
    check(d_yr, d.n_y, d.n_r, "d_yr");
  }

  /// Zero-initialized system with the given channel widths.
  static LfrSystem zeros(const Dims& d) {
    LfrSystem s;
    s.a = Mat::Zero(d.n, d.n);
    s.b_w = Mat::Zero(d.n, d.n_w);
    s.b_n = Mat::Zero(d.n, d.n_n);
    s.b_r = Mat::Zero(d.n, d.n_r);
    s.c_z = Mat::Zero(d.n_z, d.n);
    s.c_e = Mat::Zero(d.n_e, d.n);
    s.c_y = Mat::Zero(d.n_y, d.n);
    s.d_zw = Mat::Zero(d.n_z, d.n_w);
    s.d_zn = Mat::Zero(d.n_z, d.n_n);
    s.d_zr = Mat::Zero(d.n_z, d.n_r);
    s.d_ew = Mat::Zero(d.n_e, d.n_w);
    s.d_en = Mat::Zero(d.n_e, d.n_n);
    s.d_er = Mat::Zero(d.n_e, d.n_r);
    s.d_yw = Mat::Zero(d.n_y, d.n_w);
    s.d_yn = Mat::Zero(d.n_y, d.n_n);
    s.d_yr = Mat::Zero(d.n_y, d.n_r);
    return s;
  }

  Mat bd() const { return hcat({b_n, b_r}); }
  Mat dZd() const { return hcat({d_zn, d_zr}); }
  Mat dEd() const { return hcat({d_en, d_er}); }
};

/// Block j is delta_j * I_repetition with delta_j in [lower, upper].
struct UncertaintyBlock {
  int repetition = 1;
  double lower = -1.0;
  double upper = 1.0;
};

struct UncertaintyStructure {
  std::vector<UncertaintyBlock> blocks;

  Index totalDim() const {
    Index t = 0;
    for (const auto& b : blocks) t += b.repetition;
    return t;
  }

  void validate() const {
    for (const auto& b : blocks) {
      if (b.repetition < 1) {
        throw std::invalid_argument("UncertaintyStructure: repetition < 1");
      }
      if (b.lower > b.upper) {
        throw std::invalid_argument("UncertaintyStructure: lower > upper");
      }
    }
  }

  bool isNormalized(double tol = 1e-12) const {
    for (const auto& b : blocks) {
      if (std::abs(b.lower + 1.0) > tol || std::abs(b.upper - 1.0) > tol) {
        return false;
      }
    }
    return true;
  }
};

/// One scalar per block. Checked construction verifies interval membership;
/// raw() skips the check (for oracle sweeps outside the set).
class Uncertainty {
 public:
  static Uncertainty inStructure(const UncertaintyStructure& u,
                                 std::vector<double> values) {
    if (values.size() != u.blocks.size()) {
      throw std::invalid_argument("Uncertainty: one value per block required");
    }
    for (size_t j = 0; j < values.size(); ++j) {
      if (values[j] < u.blocks[j].lower - 1e-12 ||
          values[j] > u.blocks[j].upper + 1e-12) {
        throw std::invalid_argument("Uncertainty: value outside block interval");
      }
    }
    return Uncertainty(std::move(values));
  }

  static Uncertainty raw(std::vector<double> values) {
    return Uncertainty(std::move(values));
  }

  const std::vector<double>& values() const { return values_; }

  /// Expands to the structured diagonal matrix diag(delta_j I_{r_j}).
  Mat matrix(const UncertaintyStructure& u) const {
    if (values_.size() != u.blocks.size()) {
      throw std::invalid_argument("Uncertainty: structure mismatch");
    }
    const Index d = u.totalDim();
    Mat m = Mat::Zero(d, d);
    Index at = 0;
    for (size_t j = 0; j < values_.size(); ++j) {
      for (int t = 0; t < u.blocks[j].repetition; ++t, ++at) {
        m(at, at) = values_[j];
      }
    }
    return m;
  }

 private:
  explicit Uncertainty(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

struct ClosedLoop {
  Mat a;  // n x n
  Mat b;  // n x (n_n + n_r)
  Mat c;  // (n_e + n_y) x n
  Mat d;  // (n_e + n_y) x (n_n + n_r)
  Index n_e = 0, n_y = 0, n_n = 0, n_r = 0;
};

/// Delta (I - D_zw Delta)^{-1}; throws WellPosednessError when the loop is
/// numerically singular.
inline Mat deltaCheck(const Mat& d_zw, const Mat& delta) {
  const Index nz = d_zw.rows();
  if (nz == 0) return Mat(delta.rows(), 0);
  Mat loop = Mat::Identity(nz, nz) - d_zw * delta;
  if (rcond(loop) < kWellPosedRcond) {
    throw WellPosednessError("I - D_zw Delta is numerically singular");
  }
  return delta * loop.inverse();
}

/// Eliminates the uncertainty loop w = Delta z; returns the state-space data
/// of the channels (n, r) -> (e, y).
inline ClosedLoop closeLoop(const LfrSystem& sys, const Mat& delta) {
  const Dims d = sys.dims();
  if (delta.rows() != d.n_w || delta.cols() != d.n_z) {
    throw std::invalid_argument("closeLoop: Delta must be n_w x n_z");
  }
  Mat dc = deltaCheck(sys.d_zw, delta);
  ClosedLoop cl;
  cl.n_e = d.n_e;
  cl.n_y = d.n_y;
  cl.n_n = d.n_n;
  cl.n_r = d.n_r;
  cl.a = sys.a + sys.b_w * dc * sys.c_z;
  cl.b = hcat({sys.b_n + sys.b_w * dc * sys.d_zn,
               sys.b_r + sys.b_w * dc * sys.d_zr});
  cl.c = vcat({sys.c_e + sys.d_ew * dc * sys.c_z,
               sys.c_y + sys.d_yw * dc * sys.c_z});
  cl.d = vcat({hcat({sys.d_en + sys.d_ew * dc * sys.d_zn,
                     sys.d_er + sys.d_ew * dc * sys.d_zr}),
               hcat({sys.d_yn + sys.d_yw * dc * sys.d_zn,
                     sys.d_yr + sys.d_yw * dc * sys.d_zr})});
  return cl;
}

inline ClosedLoop closeLoop(const LfrSystem& sys, const UncertaintyStructure& u,
                            const Uncertainty& delta) {
  return closeLoop(sys, delta.matrix(u));
}

/// Rewrites the LFR so every block interval becomes [-1, 1]: the center is
/// absorbed into the known part, the radius into B_w / D_.w. Closed-loop
/// responses are identical for corresponding parameters delta = c + r*dtilde.
inline std::pair<LfrSystem, UncertaintyStructure> normalizeIntervals(
    const LfrSystem& sys, const UncertaintyStructure& u) {
  const Dims d = sys.dims();
  if (u.totalDim() != d.n_w || d.n_w != d.n_z) {
    throw std::invalid_argument(
        "normalizeIntervals: square diagonal uncertainty required");
  }
  Vec center(d.n_w), radius(d.n_w);
  Index at = 0;
  for (const auto& b : u.blocks) {
    const double c = 0.5 * (b.lower + b.upper);
    const double r = 0.5 * (b.upper - b.lower);
    for (int t = 0; t < b.repetition; ++t, ++at) {
      center(at) = c;
      radius(at) = r;
    }
  }
  Mat cmat = center.asDiagonal();
  Mat loop = Mat::Identity(d.n_z, d.n_z) - sys.d_zw * cmat;
  if (rcond(loop) < kWellPosedRcond) {
    throw WellPosednessError("normalizeIntervals: centering is ill posed");
  }
  Mat k = loop.inverse();          // (I - D_zw C)^{-1}
  Mat ck = cmat * k;               // C (I - D_zw C)^{-1}
  Mat rscale = radius.asDiagonal();

  LfrSystem out = sys;
  out.a = sys.a + sys.b_w * ck * sys.c_z;
  out.b_w = sys.b_w * (Mat::Identity(d.n_w, d.n_w) + ck * sys.d_zw) * rscale;
  out.b_n = sys.b_n + sys.b_w * ck * sys.d_zn;
  out.b_r = sys.b_r + sys.b_w * ck * sys.d_zr;
  out.c_z = k * sys.c_z;
  out.d_zw = k * sys.d_zw * rscale;
  out.d_zn = k * sys.d_zn;
  out.d_zr = k * sys.d_zr;
  out.c_e = sys.c_e + sys.d_ew * ck * sys.c_z;
  out.d_ew = sys.d_ew * (Mat::Identity(d.n_w, d.n_w) + ck * sys.d_zw) * rscale;
  out.d_en = sys.d_en + sys.d_ew * ck * sys.d_zn;
  out.d_er = sys.d_er + sys.d_ew * ck * sys.d_zr;
  out.c_y = sys.c_y + sys.d_yw * ck * sys.c_z;
  out.d_yw = sys.d_yw * (Mat::Identity(d.n_w, d.n_w) + ck * sys.d_zw) * rscale;
  out.d_yn = sys.d_yn + sys.d_yw * ck * sys.d_zn;
  out.d_yr = sys.d_yr + sys.d_yw * ck * sys.d_zr;

  UncertaintyStructure nu = u;
  for (auto& b : nu.blocks) {
    b.lower = -1.0;
    b.upper = 1.0;
  }
  return {out, nu};
}

/// Plain state-space record used for controllers and weight filters.
struct StateSpace {
  Mat a, b, c, d;

  Index order() const { return a.rows(); }
  Index inputs() const { return d.cols(); }
  Index outputs() const { return d.rows(); }

  static StateSpace gain(const Mat& d) {
    return {Mat(0, 0), Mat(0, d.cols()), Mat(d.rows(), 0), d};
  }

  void validate() const {
    if (a.rows() != a.cols() || b.rows() != a.rows() || c.cols() != a.rows() ||
        d.rows() != c.rows() || d.cols() != b.cols()) {
      throw std::invalid_argument("StateSpace: inconsistent dimensions");
    }
  }
};

/// Static weights plus a dynamic tracking-error filter for the standard
/// weighted tracking configuration.
struct TrackingWeights {
  Mat w_r;        // reference scaling
  Mat w_n;        // noise scaling (applied to the plant noise port)
  Mat w_u;        // control-effort weight
  StateSpace w_e; // tracking-error filter (may be static)
};

/// Closes the feedback u = K(W_r r - v) around a plant with channels
/// (w, n, u) -> (z, v), absorbing controller and weights into the known
/// part. The uncertainty channel (w, z) is untouched. The result has
/// channels per the noisy interconnection:
///   inputs  w, n, r;  outputs  z, e = [W_e (W_r r - v); W_u u], y = [r; v].
inline LfrSystem connectController(
    const LfrSystem& plant, const StateSpace& k,
    const std::optional<TrackingWeights>& weights = {}) {
  plant.validate();
  k.validate();
  const Dims pd = plant.dims();
  const Index nv = pd.n_y;  // plant measurement v
  const Index nu = pd.n_r;  // plant control port

  TrackingWeights w;
  if (weights) {
    w = *weights;
  } else {
    w.w_r = Mat::Identity(nv, nv);
    w.w_n = Mat::Identity(pd.n_n, pd.n_n);
    w.w_u = Mat::Identity(nu, nu);
    w.w_e = StateSpace::gain(Mat::Identity(nv, nv));
  }
  w.w_e.validate();
  if (k.inputs() != nv || k.outputs() != nu) {
    throw std::invalid_argument("connectController: controller dims mismatch");
  }
  if (w.w_e.inputs() != nv || w.w_r.rows() != nv || w.w_r.cols() != nv) {
    throw std::invalid_argument("connectController: weight dims mismatch");
  }

  const Index nk = k.order();
  const Index ne_f = w.w_e.order();
  const Index n = pd.n + nk + ne_f;
  const Index n_noise = w.w_n.cols();

  // Static loop: u = C_K xK + D_K (W_r r - v), v = C_v x + D_vw w + D_vn W_n n
  // + D_vu u. Solve for u.
  Mat lam = Mat::Identity(nu, nu) + k.d * plant.d_yr;
  if (rcond(lam) < kWellPosedRcond) {
    throw WellPosednessError("connectController: algebraic loop singular");
  }
  Mat lami = lam.inverse();
  Mat u_x = -lami * k.d * plant.c_y;                    // from plant state
  Mat u_k = lami * k.c;                                 // from controller state
  Mat u_w = -lami * k.d * plant.d_yw;                   // from w
  Mat u_n = -lami * k.d * plant.d_yn * w.w_n;           // from n
  Mat u_r = lami * k.d * w.w_r;                         // from r

  // v and the tracking error eps = W_r r - v in terms of (x, xK, w, n, r).
  Mat v_x = plant.c_y + plant.d_yr * u_x;
  Mat v_k = plant.d_yr * u_k;
  Mat v_w = plant.d_yw + plant.d_yr * u_w;
  Mat v_n = plant.d_yn * w.w_n + plant.d_yr * u_n;
  Mat v_r = plant.d_yr * u_r;

  Mat e_x = -v_x, e_k = -v_k, e_w = -v_w, e_n = -v_n;
  Mat e_r = w.w_r - v_r;

  LfrSystem out = LfrSystem::zeros({n, pd.n_w, pd.n_z, n_noise, nv,
                                    w.w_e.outputs() + nu, nv + nv});

  // State update rows.
  out.a.topLeftCorner(pd.n, pd.n) = plant.a + plant.b_r * u_x;
  out.a.block(0, pd.n, pd.n, nk) = plant.b_r * u_k;
  out.b_w.topRows(pd.n) = plant.b_w + plant.b_r * u_w;
  out.b_n.topRows(pd.n) = plant.b_n * w.w_n + plant.b_r * u_n;
  out.b_r.topRows(pd.n) = plant.b_r * u_r;
  if (nk > 0) {
    out.a.block(pd.n, pd.n, nk, nk) = k.a;
    out.a.block(pd.n, 0, nk, pd.n) = k.b * e_x;
    out.a.block(pd.n, pd.n, nk, nk) += k.b * e_k;
    out.b_w.middleRows(pd.n, nk) = k.b * e_w;
    out.b_n.middleRows(pd.n, nk) = k.b * e_n;
    out.b_r.middleRows(pd.n, nk) = k.b * e_r;
  }
  if (ne_f > 0) {
    out.a.block(pd.n + nk, pd.n + nk, ne_f, ne_f) = w.w_e.a;
    out.a.block(pd.n + nk, 0, ne_f, pd.n) = w.w_e.b * e_x;
    out.a.block(pd.n + nk, pd.n, ne_f, nk) = w.w_e.b * e_k;
    out.b_w.bottomRows(ne_f) = w.w_e.b * e_w;
    out.b_n.bottomRows(ne_f) = w.w_e.b * e_n;
    out.b_r.bottomRows(ne_f) = w.w_e.b * e_r;
  }

  // z row: z = C_z x + D_zw w + D_zn W_n n + D_zu u (plant r-port is u).
  out.c_z.leftCols(pd.n) = plant.c_z + plant.d_zr * u_x;
  out.c_z.middleCols(pd.n, nk) = plant.d_zr * u_k;
  out.d_zw = plant.d_zw + plant.d_zr * u_w;
  out.d_zn = plant.d_zn * w.w_n + plant.d_zr * u_n;
  out.d_zr = plant.d_zr * u_r;

  // e = [W_e eps; W_u u].
  const Index ne1 = w.w_e.outputs();
  out.c_e.block(0, 0, ne1, pd.n) = w.w_e.d * e_x;
  out.c_e.block(0, pd.n, ne1, nk) = w.w_e.d * e_k;
  if (ne_f > 0) out.c_e.block(0, pd.n + nk, ne1, ne_f) = w.w_e.c;
  out.d_ew.topRows(ne1) = w.w_e.d * e_w;
  out.d_en.topRows(ne1) = w.w_e.d * e_n;
  out.d_er.topRows(ne1) = w.w_e.d * e_r;
  out.c_e.block(ne1, 0, nu, pd.n) = w.w_u * u_x;
  out.c_e.block(ne1, pd.n, nu, nk) = w.w_u * u_k;
  out.d_ew.bottomRows(nu) = w.w_u * u_w;
  out.d_en.bottomRows(nu) = w.w_u * u_n;
  out.d_er.bottomRows(nu) = w.w_u * u_r;

  // y = [r; v].
  out.d_yr.topRows(nv) = Mat::Identity(nv, nv);
  out.c_y.block(nv, 0, nv, pd.n) = v_x;
  out.c_y.block(nv, pd.n, nv, nk) = v_k;
  out.d_yw.bottomRows(nv) = v_w;
  out.d_yn.bottomRows(nv) = v_n;
  out.d_yr.bottomRows(nv) = v_r;

  out.validate();
  return out;
}

/// Zero-order-hold discretization: (a_d, b_d) from the top rows of
/// expm([[A, B], [0, 0]] ts).
inline std::pair<Mat, Mat> zohDiscretize(const Mat& a_c, const Mat& b_c,
                                         double ts) {
  if (ts <= 0.0) throw std::invalid_argument("zohDiscretize: ts must be > 0");
  if (a_c.rows() != a_c.cols() || b_c.rows() != a_c.rows()) {
    throw std::invalid_argument("zohDiscretize: dimension mismatch");
  }
  const Index n = a_c.rows(), m = b_c.cols();
  Mat big = Mat::Zero(n + m, n + m);
  big.topLeftCorner(n, n) = a_c * ts;
  big.topRightCorner(n, m) = b_c * ts;
  Mat e = expm(big);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

/// Applies ZOH discretization to the known part of an LFR, treating all
/// inputs (w, n, r) as held and all outputs as sampled.
inline LfrSystem zohDiscretize(const LfrSystem& sys, double ts) {
  const Dims d = sys.dims();
  Mat b = hcat({sys.b_w, sys.b_n, sys.b_r});
  auto [ad, bd] = zohDiscretize(sys.a, b, ts);
  LfrSystem out = sys;
  out.a = ad;
  out.b_w = bd.leftCols(d.n_w);
  out.b_n = bd.middleCols(d.n_w, d.n_n);
  out.b_r = bd.rightCols(d.n_r);
  return out;
}

/// Continuous-time LFR of the two-body flexible satellite with the joint
/// stiffness k and damping b pulled out as a 2-block diagonal uncertainty.
/// States: (theta2, theta2dot, theta1, theta1dot); inertias J1 = 1, J2 = 0.1.
/// Channels: w (2), n = disturbance torque on body 2 (1), r = control torque
/// on body 1 (1), y = theta2 (1); z = (theta1 - theta2, theta1dot -
/// theta2dot).
inline std::pair<LfrSystem, UncertaintyStructure> satelliteLfr() {
  const double j1 = 1.0, j2 = 0.1;
  LfrSystem s = LfrSystem::zeros({4, 2, 2, 1, 1, 0, 1});
  s.a(0, 1) = 1.0;
  s.a(2, 3) = 1.0;
  s.b_w(1, 0) = 1.0 / j2;
  s.b_w(1, 1) = 1.0 / j2;
  s.b_w(3, 0) = -1.0 / j1;
  s.b_w(3, 1) = -1.0 / j1;
  s.b_n(1, 0) = 1.0;
  s.b_r(3, 0) = 1.0 / j1;
  s.c_z(0, 0) = -1.0;
  s.c_z(0, 2) = 1.0;
  s.c_z(1, 1) = -1.0;
  s.c_z(1, 3) = 1.0;
  s.c_y(0, 0) = 1.0;
  UncertaintyStructure u;
  u.blocks = {{1, 0.08, 0.12}, {1, 0.0034, 0.02}};
  return {s, u};
}

}  // namespace robcert
