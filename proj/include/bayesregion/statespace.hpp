#ifndef BAYESREGION_STATESPACE_HPP
#define BAYESREGION_STATESPACE_HPP

// Convex parameter spaces: finite intervals and the flat (Lebesgue)
// parametrizations of qubit and qutrit density matrices.
//
// Qubit:  rho = [[r1, r2 - i r3], [r2 + i r3, 1 - r1]]   (d = 1, 2, 3 keeps the
//         first d coordinates, the rest fixed at 0)
// Qutrit: rho = [[r1, r3 + i r4, r5 + i r6],
//                [r3 - i r4, r2, r7 + i r8],
//                [r5 - i r6, r7 - i r8, 1 - r1 - r2]]

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bayesregion/common.hpp"
#include "bayesregion/specfun.hpp"

namespace bayesregion {

/// Pivot tolerance of the Cholesky positivity test.
inline constexpr double kPsdTolerance = 1e-14;

struct Bounds {
  double lo;
  double hi;
  double width() const { return hi - lo; }
};

/// Which proposal box rejection sampling draws from. `Paper` uses the ranges
/// r_diag in [0,1], r_offdiag in [-1,1]; `Tight` shrinks off-diagonal ranges to
/// [-1/2, 1/2], which still covers every state (|rho_ij| <= 1/2) and therefore
/// samples the same uniform distribution with a higher yield.
enum class SamplingBox { Paper, Tight };

namespace detail {

// In-place Cholesky positivity test on a small Hermitian matrix stored
// row-major in `a` (n <= 4). Pivots in [-tol, tol] are treated as zero and
// require a vanishing column below them.
inline bool cholesky_psd(Complex* a, int n, double tol) {
  for (int k = 0; k < n; ++k) {
    double pivot = a[k * n + k].real();
    for (int j = 0; j < k; ++j) pivot -= std::norm(a[k * n + j]);
    if (pivot < -tol) return false;
    if (pivot <= tol) {
      for (int i = k + 1; i < n; ++i) {
        Complex s = a[i * n + k];
        for (int j = 0; j < k; ++j) s -= a[i * n + j] * std::conj(a[k * n + j]);
        if (std::abs(s) > std::sqrt(tol)) return false;
        a[i * n + k] = 0.0;
      }
      a[k * n + k] = 0.0;
      continue;
    }
    const double lkk = std::sqrt(pivot);
    a[k * n + k] = lkk;
    for (int i = k + 1; i < n; ++i) {
      Complex s = a[i * n + k];
      for (int j = 0; j < k; ++j) s -= a[i * n + j] * std::conj(a[k * n + j]);
      a[i * n + k] = s / lkk;
    }
  }
  return true;
}

// Euclidean projection of v onto the probability simplex.
inline Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

}  // namespace detail

class StateSpace {
 public:
  /// The interval [a, b] with the identity parametrization.
  static StateSpace interval(double a, double b) {
    if (!(b > a)) throw ConfigError("interval space needs a < b");
    StateSpace s;
    s.label_ = "interval(" + fmt_num(a) + "," + fmt_num(b) + ")";
    s.dim_ = 1;
    s.volume_ = b - a;
    s.box_ = {{a, b}};
    s.tight_box_ = s.box_;
    s.metric_ = Matrix::Identity(1, 1);
    s.metric_inv_ = s.metric_;
    return s;
  }

  /// Qubit state space restricted to its first d in {1,2,3} coordinates.
  static StateSpace qubit(int d) {
    if (d < 1 || d > 3) throw ConfigError("qubit space dimension must be 1, 2 or 3");
    StateSpace s;
    s.label_ = "qubit" + std::to_string(d);
    s.dim_ = d;
    s.hilbert_ = 2;
    s.base_ = CMatrix::Zero(2, 2);
    s.base_(1, 1) = 1.0;
    const Complex i(0.0, 1.0);
    CMatrix e1 = CMatrix::Zero(2, 2), e2 = e1, e3 = e1;
    e1(0, 0) = 1.0;
    e1(1, 1) = -1.0;
    e2(0, 1) = 1.0;
    e2(1, 0) = 1.0;
    e3(0, 1) = -i;
    e3(1, 0) = i;
    const std::array<CMatrix, 3> all{e1, e2, e3};
    s.basis_.assign(all.begin(), all.begin() + d);
    constexpr std::array<double, 3> volumes{1.0, std::numbers::pi / 4.0,
                                            std::numbers::pi / 6.0};
    s.volume_ = volumes[d - 1];
    s.box_.push_back({0.0, 1.0});
    s.tight_box_.push_back({0.0, 1.0});
    for (int j = 1; j < d; ++j) {
      s.box_.push_back({-1.0, 1.0});
      s.tight_box_.push_back({-0.5, 0.5});
    }
    s.finish_matrix_setup();
    return s;
  }

  static StateSpace qutrit() {
    StateSpace s;
    s.label_ = "qutrit";
    s.dim_ = 8;
    s.hilbert_ = 3;
    s.base_ = CMatrix::Zero(3, 3);
    s.base_(2, 2) = 1.0;
    const Complex i(0.0, 1.0);
    auto diag = [](int k) {
      CMatrix e = CMatrix::Zero(3, 3);
      e(k, k) = 1.0;
      e(2, 2) = -1.0;
      return e;
    };
    auto re = [](int a, int b) {
      CMatrix e = CMatrix::Zero(3, 3);
      e(a, b) = 1.0;
      e(b, a) = 1.0;
      return e;
    };
    auto im = [&](int a, int b) {
      CMatrix e = CMatrix::Zero(3, 3);
      e(a, b) = i;
      e(b, a) = -i;
      return e;
    };
    s.basis_ = {diag(0), diag(1), re(0, 1), im(0, 1), re(0, 2), im(0, 2), re(1, 2), im(1, 2)};
    s.volume_ = lebesgue_volume(3);
    s.box_ = {{0, 1}, {0, 1}};
    s.tight_box_ = s.box_;
    for (int j = 2; j < 8; ++j) {
      s.box_.push_back({-1.0, 1.0});
      s.tight_box_.push_back({-0.5, 0.5});
    }
    s.finish_matrix_setup();
    return s;
  }

  /// Lebesgue volume of the D-dimensional density matrices,
  /// pi^{D(D-1)/2} prod_{j<D} j! / (D^2-1)!.
  static double lebesgue_volume(int D) {
    if (D < 2) throw ConfigError("lebesgue_volume needs Hilbert dimension D >= 2");
    double log_v = 0.5 * D * (D - 1) * std::log(std::numbers::pi);
    for (int j = 1; j < D; ++j) log_v += std::lgamma(j + 1.0);
    log_v -= std::lgamma(static_cast<double>(D * D - 1) + 1.0);
    return std::exp(log_v);
  }

  const std::string& label() const { return label_; }
  int dim() const { return dim_; }
  double volume() const { return volume_; }
  bool matrix_backed() const { return hilbert_ > 0; }
  int hilbert_dim() const { return hilbert_; }
  const std::vector<Bounds>& bounding_box() const { return box_; }
  const std::vector<Bounds>& box(SamplingBox which) const {
    return which == SamplingBox::Paper ? box_ : tight_box_;
  }
  double box_volume(SamplingBox which) const {
    double v = 1.0;
    for (const auto& b : box(which)) v *= b.width();
    return v;
  }

  /// Frobenius Gram matrix tr(E_i E_j) of the parametrization (identity for
  /// intervals). Steepest ascent in this metric is steepest ascent on matrices.
  const Matrix& metric() const { return metric_; }
  const Matrix& metric_inverse() const { return metric_inv_; }

  /// Maximally mixed state, or the interval midpoint.
  ParamVector center() const {
    if (!matrix_backed()) return ParamVector::Constant(1, 0.5 * (box_[0].lo + box_[0].hi));
    return from_matrix(CMatrix::Identity(hilbert_, hilbert_) / static_cast<double>(hilbert_));
  }

  CMatrix to_matrix(const ParamVector& r) const {
    require_matrix();
    check_dim(r);
    CMatrix h = base_;
    for (int j = 0; j < dim_; ++j) h += r[j] * basis_[j];
    return h;
  }

  /// Inverse of to_matrix for Hermitian unit-trace H in the span of the
  /// parametrization: r = G^{-1} [Re tr(E_j (H - base))].
  ParamVector from_matrix(const CMatrix& h) const {
    require_matrix();
    ParamVector rhs(dim_);
    const CMatrix diff = h - base_;
    for (int j = 0; j < dim_; ++j) rhs[j] = (basis_[j] * diff).trace().real();
    return metric_inv_ * rhs;
  }

  /// Membership test: Cholesky positivity with pivot tolerance kPsdTolerance
  /// for matrix spaces, a <= r <= b for intervals.
  bool is_physical(const ParamVector& r) const {
    check_dim(r);
    return is_physical_raw(r.data());
  }

  /// Same test on a raw coordinate array of length dim().
  bool is_physical_raw(const double* r) const {
    if (!matrix_backed()) return r[0] >= box_[0].lo && r[0] <= box_[0].hi;
    std::array<Complex, 16> a{};
    const int n = hilbert_;
    for (int k = 0; k < n * n; ++k) a[k] = flat_base_[k];
    for (int j = 0; j < dim_; ++j) {
      const double rj = r[j];
      if (rj == 0.0) continue;
      for (int k = 0; k < n * n; ++k) a[k] += rj * flat_basis_[j * n * n + k];
    }
    return detail::cholesky_psd(a.data(), n, kPsdTolerance);
  }

  /// Smallest eigenvalue of the represented matrix (distance to the nearer
  /// endpoint for intervals).
  double min_eigenvalue(const ParamVector& r) const {
    if (!matrix_backed()) return std::min(r[0] - box_[0].lo, box_[0].hi - r[0]);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(to_matrix(r), Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
  }

  /// True when r is interior: smallest eigenvalue (or endpoint distance)
  /// exceeds the positivity tolerance.
  bool strictly_inside(const ParamVector& r) const {
    return min_eigenvalue(r) > kPsdTolerance;
  }

  /// Nearest point of the space in the metric() norm: Frobenius projection onto
  /// density matrices (eigenvalues projected onto the simplex), or clamping.
  ParamVector project(const ParamVector& r) const {
    check_dim(r);
    if (!matrix_backed()) {
      return ParamVector::Constant(1, std::clamp(r[0], box_[0].lo, box_[0].hi));
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(to_matrix(r));
    const Eigen::VectorXd w = detail::project_simplex(es.eigenvalues());
    const CMatrix rho = es.eigenvectors() * w.cast<Complex>().asDiagonal() *
                        es.eigenvectors().adjoint();
    return from_matrix(rho);
  }

  /// Boundary map for nonpositive inputs: N[H - sigma_min 1], i.e. shift by
  /// the (negative) smallest eigenvalue and renormalize the trace. For
  /// intervals, clamps to the nearer endpoint. Throws if r is strictly inside.
  ParamVector project_to_boundary(const ParamVector& r) const {
    check_dim(r);
    if (!matrix_backed()) {
      const double x = r[0];
      if (x > box_[0].lo && x < box_[0].hi) {
        throw std::domain_error("project_to_boundary: point is strictly inside the interval");
      }
      return ParamVector::Constant(1, std::clamp(x, box_[0].lo, box_[0].hi));
    }
    const CMatrix h = to_matrix(r);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    const double smin = es.eigenvalues()[0];
    if (smin > kPsdTolerance) {
      throw std::domain_error("project_to_boundary: matrix is strictly positive");
    }
    CMatrix shifted = h - smin * CMatrix::Identity(hilbert_, hilbert_);
    shifted /= shifted.trace().real();
    return from_matrix(shifted);
  }

 private:
  StateSpace() = default;

  static std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  }

  void require_matrix() const {
    if (!matrix_backed()) throw std::logic_error(label_ + " is not matrix-backed");
  }

  void check_dim(const ParamVector& r) const {
    if (r.size() != dim_) {
      throw ConfigError("parameter dimension " + std::to_string(r.size()) +
                        " does not match space " + label_);
    }
  }

  void finish_matrix_setup() {
    metric_.resize(dim_, dim_);
    for (int a = 0; a < dim_; ++a)
      for (int b = 0; b < dim_; ++b) metric_(a, b) = (basis_[a] * basis_[b]).trace().real();
    metric_inv_ = metric_.inverse();
    const int n = hilbert_;
    flat_base_.resize(n * n);
    flat_basis_.resize(dim_ * n * n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        flat_base_[i * n + k] = base_(i, k);
        for (int j = 0; j < dim_; ++j) flat_basis_[j * n * n + i * n + k] = basis_[j](i, k);
      }
  }

  std::string label_;
  int dim_ = 0;
  int hilbert_ = 0;
  double volume_ = 0.0;
  std::vector<Bounds> box_;
  std::vector<Bounds> tight_box_;
  CMatrix base_;
  std::vector<CMatrix> basis_;
  std::vector<Complex> flat_base_;
  std::vector<Complex> flat_basis_;
  Matrix metric_;
  Matrix metric_inv_;
};

/// Builds a space from its label: qubit1, qubit2, qubit3, qutrit or
/// interval(a,b).
inline StateSpace make_space(const std::string& label) {
  if (label == "qubit1") return StateSpace::qubit(1);
  if (label == "qubit2") return StateSpace::qubit(2);
  if (label == "qubit3") return StateSpace::qubit(3);
  if (label == "qutrit") return StateSpace::qutrit();
  if (label.rfind("interval(", 0) == 0 && label.back() == ')') {
    const std::string body = label.substr(9, label.size() - 10);
    const auto comma = body.find(',');
    if (comma == std::string::npos) throw ConfigError("malformed interval label: " + label);
    try {
      std::size_t used_a = 0, used_b = 0;
      const std::string sa = body.substr(0, comma), sb = body.substr(comma + 1);
      const double a = std::stod(sa, &used_a);
      const double b = std::stod(sb, &used_b);
      if (used_a != sa.size() || used_b != sb.size()) throw std::invalid_argument("trailing");
      return StateSpace::interval(a, b);
    } catch (const std::invalid_argument&) {
      throw ConfigError("malformed interval label: " + label);
    }
  }
  throw ConfigError("unknown state space label: " + label);
}

inline double lebesgue_volume(int D) { return StateSpace::lebesgue_volume(D); }

inline bool is_physical(const StateSpace& space, const ParamVector& r) {
  return space.is_physical(r);
}

inline ParamVector project_to_boundary(const StateSpace& space, const ParamVector& r) {
  return space.project_to_boundary(r);
}

/// Accepted points (one row each) plus the bookkeeping needed to report yields.
struct SampleSet {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> points;
  std::uint64_t attempts = 0;
  std::uint64_t seed = 0;
  SamplingBox box = SamplingBox::Paper;
  std::string label;

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  double yield() const {
    return attempts == 0 ? 0.0 : static_cast<double>(points.rows()) / static_cast<double>(attempts);
  }
};

/// Number of independent sub-streams a sampling job is split into. Fixed so
/// that output never depends on the worker count.
inline constexpr std::size_t kSampleStreams = 64;

/// Uniform rejection sampling: draw uniformly from the proposal box and keep
/// physical points until `count` have been accepted.
inline SampleSet rejection_sample(const StateSpace& space, std::size_t count, std::uint64_t seed,
                                  SamplingBox which = SamplingBox::Paper) {
  if (count < 1) throw ConfigError("rejection_sample needs count >= 1");
  const int d = space.dim();
  const auto& box = space.box(which);
  const std::size_t streams = std::min(kSampleStreams, count);

  std::vector<std::vector<double>> accepted(streams);
  std::vector<std::uint64_t> attempts(streams, 0);

  parallel_for_chunks(streams, [&](std::size_t s) {
    const std::size_t quota = count / streams + (s < count % streams ? 1 : 0);
    auto rng = make_stream(seed, s);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> r(d);
    auto& out = accepted[s];
    out.reserve(quota * d);
    std::uint64_t tries = 0;
    std::size_t got = 0;
    while (got < quota) {
      for (int j = 0; j < d; ++j) r[j] = box[j].lo + box[j].width() * unit(rng);
      ++tries;
      if (space.is_physical_raw(r.data())) {
        out.insert(out.end(), r.begin(), r.end());
        ++got;
      } else if (tries >= 10'000'000 && static_cast<double>(got) / tries < 1e-9) {
        throw NumericalError("rejection_sample: yield below 1e-9 after 1e7 attempts");
      }
    }
    attempts[s] = tries;
  });

  SampleSet set;
  set.points.resize(static_cast<Eigen::Index>(count), d);
  set.seed = seed;
  set.box = which;
  set.label = space.label();
  Eigen::Index row = 0;
  for (std::size_t s = 0; s < streams; ++s) {
    set.attempts += attempts[s];
    const auto& v = accepted[s];
    for (std::size_t k = 0; k < v.size(); k += d, ++row) {
      for (int j = 0; j < d; ++j) set.points(row, j) = v[k + j];
    }
  }
  return set;
}

/// Monte Carlo volume estimate (box volume x yield) and its standard error.
struct VolumeEstimate {
  double volume;
  double stderr_;
};

inline VolumeEstimate mc_volume(const StateSpace& space, const SampleSet& set) {
  const double y = set.yield();
  const double bv = space.box_volume(set.box);
  return {bv * y, bv * std::sqrt(y * (1.0 - y) / static_cast<double>(set.attempts))};
}

}  // namespace bayesregion

#endif  // BAYESREGION_STATESPACE_HPP
