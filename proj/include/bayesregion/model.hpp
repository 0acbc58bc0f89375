#ifndef BAYESREGION_MODEL_HPP
#define BAYESREGION_MODEL_HPP

// Measurement models and multinomial data.
//
// A Pom maps parameters to outcome probabilities p(r) = b + A r. This covers
// every quantum measurement in a flat state parametrization, since
// p_k = tr(Pi_k rho(r)) is affine in r; gradients are the rows of A and all
// second derivatives vanish.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bayesregion/common.hpp"
#include "bayesregion/statespace.hpp"

namespace bayesregion {

/// Probabilities below this are treated as exactly zero.
inline constexpr double kProbabilityFloor = 1e-300;

class Pom {
 public:
  Pom(std::string name, Matrix jacobian, Eigen::VectorXd offset)
      : name_(std::move(name)), jac_(std::move(jacobian)), offset_(std::move(offset)) {
    if (jac_.rows() != offset_.size()) throw ConfigError("Pom: jacobian/offset size mismatch");
  }

  /// Builds p_k(r) = Re tr(Pi_k rho(r)) for a matrix-backed space.
  static Pom from_operators(std::string name, const StateSpace& space,
                            const std::vector<CMatrix>& ops) {
    if (!space.matrix_backed()) {
      throw ConfigError("POM " + name + " needs a matrix-backed space, got " + space.label());
    }
    const int m = static_cast<int>(ops.size());
    const int d = space.dim();
    Matrix a(m, d);
    Eigen::VectorXd b(m);
    const ParamVector zero = ParamVector::Zero(d);
    const CMatrix base = space.to_matrix(zero);
    for (int k = 0; k < m; ++k) {
      b[k] = (ops[k] * base).trace().real();
      for (int j = 0; j < d; ++j) {
        ParamVector e = ParamVector::Zero(d);
        e[j] = 1.0;
        a(k, j) = (ops[k] * (space.to_matrix(e) - base)).trace().real();
      }
    }
    return Pom(std::move(name), std::move(a), std::move(b));
  }

  const std::string& name() const { return name_; }
  int outcomes() const { return static_cast<int>(offset_.size()); }
  int dim() const { return static_cast<int>(jac_.cols()); }

  /// Row k is dp_k/dr.
  const Matrix& jacobian() const { return jac_; }
  const Eigen::VectorXd& offset() const { return offset_; }

  Eigen::VectorXd probabilities(const ParamVector& r) const {
    check(r);
    Eigen::VectorXd p = offset_ + jac_ * r;
    for (auto& v : p) {
      if (v < kProbabilityFloor) v = 0.0;
    }
    return p;
  }

  void check(const ParamVector& r) const {
    if (r.size() != dim()) {
      throw ConfigError("Pom " + name_ + " expects " + std::to_string(dim()) +
                        " parameters, got " + std::to_string(r.size()));
    }
  }

 private:
  std::string name_;
  Matrix jac_;
  Eigen::VectorXd offset_;
};

struct Dataset {
  std::string pom;
  std::vector<std::int64_t> counts;
  std::int64_t N = 0;

  Dataset() = default;
  Dataset(std::string pom_name, std::vector<std::int64_t> n)
      : pom(std::move(pom_name)), counts(std::move(n)) {
    for (auto c : counts) {
      if (c < 0) throw ConfigError("Dataset: negative count");
      N += c;
    }
  }
};

inline void to_json(nlohmann::json& j, const Dataset& d) {
  j = nlohmann::json{{"pom", d.pom}, {"N", d.N}, {"counts", d.counts}};
}

inline void from_json(const nlohmann::json& j, Dataset& d) {
  Dataset parsed(j.at("pom").get<std::string>(), j.at("counts").get<std::vector<std::int64_t>>());
  if (j.contains("N") && j.at("N").get<std::int64_t>() != parsed.N) {
    throw ConfigError("Dataset: N does not equal the sum of counts");
  }
  d = std::move(parsed);
}

namespace detail {

inline void check_data(const Pom& pom, const Dataset& data) {
  if (static_cast<int>(data.counts.size()) != pom.outcomes()) {
    throw ConfigError("dataset has " + std::to_string(data.counts.size()) +
                      " outcomes but POM " + pom.name() + " has " +
                      std::to_string(pom.outcomes()));
  }
}

}  // namespace detail

/// sum_k n_k log p_k(r); outcomes with n_k = 0 contribute nothing, and a
/// vanishing p_k with n_k > 0 gives -infinity.
inline double log_likelihood(const Pom& pom, const Dataset& data, const ParamVector& r) {
  detail::check_data(pom, data);
  const Eigen::VectorXd p = pom.probabilities(r);
  double ll = 0.0;
  for (int k = 0; k < p.size(); ++k) {
    const auto n = data.counts[k];
    if (n == 0) continue;
    if (p[k] <= 0.0) return -std::numeric_limits<double>::infinity();
    ll += static_cast<double>(n) * std::log(p[k]);
  }
  return ll;
}

/// Gradient of log_likelihood with respect to r.
inline Eigen::VectorXd log_likelihood_gradient(const Pom& pom, const Dataset& data,
                                               const ParamVector& r) {
  detail::check_data(pom, data);
  const Eigen::VectorXd p = pom.probabilities(r);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p.size());
  for (int k = 0; k < p.size(); ++k) {
    if (data.counts[k] == 0) continue;
    if (p[k] <= 0.0) throw NumericalError("log-likelihood gradient undefined where p_k = 0");
    w[k] = static_cast<double>(data.counts[k]) / p[k];
  }
  return pom.jacobian().transpose() * w;
}

/// F(r) = sum_k (N / p_k) grad p_k grad p_k^T.
inline Matrix fisher_information(const Pom& pom, const ParamVector& r, double N) {
  const Eigen::VectorXd p = pom.probabilities(r);
  Eigen::VectorXd w(p.size());
  for (int k = 0; k < p.size(); ++k) {
    if (p[k] <= 0.0) {
      throw NumericalError("fisher_information: singular model, p_" + std::to_string(k + 1) +
                           " vanishes");
    }
    w[k] = N / p[k];
  }
  const Matrix& a = pom.jacobian();
  return a.transpose() * w.asDiagonal() * a;
}

/// Negative Hessian of the log-likelihood. For affine POMs the curvature term
/// drops out and -H = sum_k (n_k / p_k^2) grad p_k grad p_k^T.
inline Matrix observed_hessian(const Pom& pom, const Dataset& data, const ParamVector& r) {
  detail::check_data(pom, data);
  const Eigen::VectorXd p = pom.probabilities(r);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p.size());
  for (int k = 0; k < p.size(); ++k) {
    if (p[k] <= 0.0) {
      throw NumericalError("observed_hessian: singular model, p_" + std::to_string(k + 1) +
                           " vanishes");
    }
    w[k] = static_cast<double>(data.counts[k]) / (p[k] * p[k]);
  }
  const Matrix& a = pom.jacobian();
  return a.transpose() * w.asDiagonal() * a;
}

/// n ~ Multinomial(N, p(r_true)), drawn as a chain of conditional binomials.
inline Dataset sample_dataset(const Pom& pom, const ParamVector& r_true, std::int64_t N,
                              std::uint64_t seed) {
  if (N < 0) throw ConfigError("sample_dataset: N must be nonnegative");
  const Eigen::VectorXd p = pom.probabilities(r_true);
  auto rng = make_stream(seed, 0);
  std::vector<std::int64_t> n(p.size(), 0);
  std::int64_t left = N;
  double mass_left = 1.0;
  for (int k = 0; k + 1 < p.size() && left > 0; ++k) {
    const double q = mass_left > 0.0 ? std::clamp(p[k] / mass_left, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::int64_t> draw(left, q);
    n[k] = draw(rng);
    left -= n[k];
    mass_left -= p[k];
  }
  if (p.size() > 0) n.back() += left;
  return Dataset(pom.name(), std::move(n));
}

/// Counts round(N p_k) adjusted by largest remainders so they sum to N.
inline Dataset deterministic_counts(const Pom& pom, const ParamVector& r_true, std::int64_t N) {
  const Eigen::VectorXd p = pom.probabilities(r_true);
  const int m = static_cast<int>(p.size());
  std::vector<std::int64_t> n(m);
  std::vector<double> rem(m);
  std::int64_t total = 0;
  for (int k = 0; k < m; ++k) {
    const double x = static_cast<double>(N) * p[k];
    n[k] = static_cast<std::int64_t>(std::floor(x));
    rem[k] = x - static_cast<double>(n[k]);
    total += n[k];
  }
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (int i = 0; total < N; ++i, ++total) ++n[order[i % m]];
  return Dataset(pom.name(), std::move(n));
}

// ---------------------------------------------------------------------------
// Bundled measurements

/// Projective sigma_z measurement on a one-parameter space: p = (r, 1 - r).
inline Pom sigma_z_pom() {
  Matrix a(2, 1);
  a << 1.0, -1.0;
  Eigen::VectorXd b(2);
  b << 0.0, 1.0;
  return Pom("sigma_z", a, b);
}

/// sigma_z and sigma_x eigenprojectors, each weighted 1/2 (qubit2).
inline Pom crosshair_pom(const StateSpace& space) {
  if (space.label() != "qubit2") throw ConfigError("crosshair POM is defined on qubit2, got " + space.label());
  CMatrix z0 = CMatrix::Zero(2, 2), z1 = z0, xp(2, 2), xm(2, 2);
  z0(0, 0) = 0.5;
  z1(1, 1) = 0.5;
  xp << 0.25, 0.25, 0.25, 0.25;
  xm << 0.25, -0.25, -0.25, 0.25;
  return Pom::from_operators("crosshair", space, {z0, z1, xp, xm});
}

/// Tetrahedron SIC measurement Pi_k = (1 + a_k . sigma) / 4 (qubit3).
inline Pom tetrahedron_pom(const StateSpace& space) {
  if (space.label() != "qubit3") throw ConfigError("tetrahedron POM is defined on qubit3, got " + space.label());
  const double s = 1.0 / std::sqrt(3.0);
  const double dirs[4][3] = {{s, s, s}, {-s, -s, s}, {-s, s, -s}, {s, -s, -s}};
  const Complex i(0.0, 1.0);
  CMatrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, -i, i, 0;
  sz << 1, 0, 0, -1;
  std::vector<CMatrix> ops;
  for (const auto& a : dirs) {
    ops.push_back(0.25 * (CMatrix::Identity(2, 2) + a[0] * sx + a[1] * sy + a[2] * sz));
  }
  return Pom::from_operators("tetrahedron", space, ops);
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix,
/// with the phases of R's diagonal absorbed into Q.
inline CMatrix haar_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix z(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) z(a, b) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < n; ++k) {
    const Complex d = r(k, k);
    q.col(k) *= d / std::abs(d);
  }
  return q;
}

inline constexpr std::uint64_t kDefaultPomSeed = 20181;

/// Overcomplete qutrit measurement: outcomes/3 Haar-random orthonormal bases,
/// every projector weighted 3/outcomes.
inline Pom random_bases_pom(const StateSpace& space, int outcomes = 90,
                            std::uint64_t seed = kDefaultPomSeed) {
  const int n = space.hilbert_dim();
  if (n <= 0 || outcomes <= 0 || outcomes % n != 0) {
    throw ConfigError("random_bases_pom: outcome count must be a positive multiple of the Hilbert dimension");
  }
  const int bases = outcomes / n;
  auto rng = make_stream(seed, 0);
  std::vector<CMatrix> ops;
  for (int b = 0; b < bases; ++b) {
    const CMatrix u = haar_unitary(n, rng);
    for (int k = 0; k < n; ++k) ops.push_back(u.col(k) * u.col(k).adjoint() / static_cast<double>(bases));
  }
  return Pom::from_operators("random_bases_" + std::to_string(outcomes), space, ops);
}

/// Looks up a bundled POM by name and checks it fits the space.
inline Pom make_pom(const std::string& name, const StateSpace& space, int outcomes = 90,
                    std::uint64_t seed = kDefaultPomSeed) {
  Pom pom = [&] {
    if (name == "sigma_z") return sigma_z_pom();
    if (name == "crosshair") return crosshair_pom(space);
    if (name == "tetrahedron") return tetrahedron_pom(space);
    if (name == "random_bases" || name.rfind("random_bases_", 0) == 0) {
      int m = outcomes;
      if (name.size() > 13) m = std::stoi(name.substr(13));
      return random_bases_pom(space, m, seed);
    }
    throw ConfigError("unknown POM: " + name);
  }();
  if (pom.dim() != space.dim()) {
    throw ConfigError("POM " + name + " has " + std::to_string(pom.dim()) +
                      " parameters but space " + space.label() + " has " +
                      std::to_string(space.dim()));
  }
  return pom;
}

}  // namespace bayesregion

#endif  // BAYESREGION_MODEL_HPP
