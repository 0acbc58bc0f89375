#ifndef BAYESREGION_MCVALIDATE_HPP
#define BAYESREGION_MCVALIDATE_HPP

// Reference values for region sizes and credibilities computed directly from
// the likelihood: uniform Monte Carlo over the space, trapezoid quadrature in
// one dimension, and a Monte Carlo volume for a cut ellipsoid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bayesregion/common.hpp"
#include "bayesregion/mle.hpp"
#include "bayesregion/model.hpp"
#include "bayesregion/specfun.hpp"
#include "bayesregion/statespace.hpp"

namespace bayesregion {

/// Fewer accepted points than this inside a region marks its estimate as unresolved.
inline constexpr std::size_t kMinShellSamples = 100;

struct McEstimate {
  std::vector<double> lambdas;
  std::vector<double> s_hat, s_stderr;
  std::vector<double> c_hat, c_stderr;
  std::vector<std::size_t> inside;   // samples (or grid nodes) with ratio >= lambda
  std::vector<bool> resolution_exhausted;
  double lambda_crit = 0.0;  // mean likelihood ratio, i.e. int L / (L_max V_R0)
  double lambda_crit_stderr = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::string pom;
  double N = 0.0;
  std::string method = "monte-carlo";

  bool any_exhausted() const {
    return std::any_of(resolution_exhausted.begin(), resolution_exhausted.end(), [](bool b) { return b; });
  }
};

namespace detail {

/// Weighted version of the region estimators. ratio_j = L_j / L_max; weights
/// are quadrature weights (all equal for Monte Carlo).
inline void fill_curve(McEstimate& est, const std::vector<double>& ratio, const std::vector<double>& weight,
                       double total_weight, bool with_stderr) {
  const std::size_t n = ratio.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ratio[a] > ratio[b]; });

  // prefix sums over samples sorted by decreasing ratio
  std::vector<double> cw(n + 1, 0.0), cl(n + 1, 0.0), cl2(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    cw[k + 1] = cw[k] + weight[j];
    cl[k + 1] = cl[k] + weight[j] * ratio[j];
    cl2[k + 1] = cl2[k] + weight[j] * ratio[j] * ratio[j];
  }
  const double sum_l = cl[n];
  const double sum_l2 = cl2[n];

  const std::size_t m = est.lambdas.size();
  est.s_hat.assign(m, 0.0);
  est.s_stderr.assign(m, 0.0);
  est.c_hat.assign(m, 0.0);
  est.c_stderr.assign(m, 0.0);
  est.inside.assign(m, 0);
  est.resolution_exhausted.assign(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    const double lam = est.lambdas[i];
    // number of samples with ratio >= lam
    const auto it = std::partition_point(order.begin(), order.end(), [&](std::size_t j) { return ratio[j] >= lam; });
    const std::size_t k = static_cast<std::size_t>(it - order.begin());
    est.inside[i] = k;
    est.s_hat[i] = cw[k] / total_weight;
    est.c_hat[i] = sum_l > 0.0 ? cl[k] / sum_l : 0.0;
    if (with_stderr) {
      const double s = est.s_hat[i];
      est.s_stderr[i] = std::sqrt(std::max(0.0, s * (1.0 - s)) / static_cast<double>(n));
      // ratio estimator A/B: var = sum (a_j - c b_j)^2 / (sum b_j)^2
      const double c = est.c_hat[i];
      const double in2 = cl2[k];
      const double out2 = sum_l2 - in2;
      est.c_stderr[i] = sum_l > 0.0 ? std::sqrt((1.0 - c) * (1.0 - c) * in2 + c * c * out2) / sum_l : 0.0;
      est.resolution_exhausted[i] = k < kMinShellSamples;
    }
  }
}

}  // namespace detail

/// Region curve from an existing uniform sample of the space.
template <LikelihoodModel Model>
McEstimate mc_region_curve_from_samples(const Model& model, double log_L_max, const SampleSet& samples,
                                        const std::vector<double>& lambdas) {
  const std::size_t n = samples.size();
  if (n == 0) throw ConfigError("mc_region_curve: empty sample set");
  std::vector<double> ratio(n);
  const std::size_t chunks = std::min<std::size_t>(n, kSampleStreams);
  parallel_for_chunks(chunks, [&](std::size_t c) {
    ParamVector r(samples.points.cols());
    for (std::size_t j = c; j < n; j += chunks) {
      r = samples.points.row(static_cast<Eigen::Index>(j)).transpose();
      ratio[j] = std::exp(model.log_likelihood(r) - log_L_max);
    }
  });

  McEstimate est;
  est.lambdas = lambdas;
  est.n_samples = n;
  est.seed = samples.seed;
  const std::vector<double> weight(n, 1.0);
  detail::fill_curve(est, ratio, weight, static_cast<double>(n), true);

  double mean = 0.0;
  for (double v : ratio) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : ratio) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n > 1 ? n - 1 : 1);
  est.lambda_crit = mean;
  est.lambda_crit_stderr = std::sqrt(var / static_cast<double>(n));
  return est;
}

/// Draws `n_samples` uniform physical points and estimates s and c on the grid.
inline McEstimate mc_region_curve(const Pom& pom, const Dataset& data, const StateSpace& space,
                                  const std::vector<double>& lambdas, std::size_t n_samples, std::uint64_t seed,
                                  double log_L_max, SamplingBox box = SamplingBox::Paper) {
  const SampleSet samples = rejection_sample(space, n_samples, seed, box);
  McEstimate est = mc_region_curve_from_samples(PomLikelihood{pom, data}, log_L_max, samples, lambdas);
  est.pom = pom.name();
  est.N = static_cast<double>(data.N);
  return est;
}

/// Same, with L_max taken from a fresh constrained ML fit.
inline McEstimate mc_region_curve(const Pom& pom, const Dataset& data, const StateSpace& space,
                                  const std::vector<double>& lambdas, std::size_t n_samples, std::uint64_t seed,
                                  SamplingBox box = SamplingBox::Paper) {
  const MlResult ml = maximize_likelihood(pom, data, space);
  return mc_region_curve(pom, data, space, lambdas, n_samples, seed, ml.log_L_max, box);
}

/// Deterministic trapezoid version for an interval space. L_max is the larger
/// of `log_L_max` and the best grid value.
template <LikelihoodModel Model>
McEstimate quadrature_curve_1d(const Model& model, const StateSpace& space, const std::vector<double>& lambdas,
                               std::size_t n_grid, double log_L_max = -std::numeric_limits<double>::infinity()) {
  if (space.dim() != 1 || space.matrix_backed()) throw ConfigError("quadrature_curve_1d needs an interval space");
  if (n_grid < 1000) throw ConfigError("quadrature_curve_1d needs at least 1000 grid points");
  const double a = space.bounding_box()[0].lo;
  const double b = space.bounding_box()[0].hi;
  const double h = (b - a) / static_cast<double>(n_grid - 1);

  std::vector<double> ll(n_grid);
  parallel_for_chunks(kSampleStreams, [&](std::size_t c) {
    ParamVector r(1);
    for (std::size_t i = c; i < n_grid; i += kSampleStreams) {
      r[0] = i + 1 == n_grid ? b : a + h * static_cast<double>(i);
      ll[i] = model.log_likelihood(r);
    }
  });
  for (double v : ll) log_L_max = std::max(log_L_max, v);

  std::vector<double> ratio(n_grid), weight(n_grid, h);
  weight.front() = weight.back() = 0.5 * h;
  for (std::size_t i = 0; i < n_grid; ++i) ratio[i] = std::exp(ll[i] - log_L_max);

  McEstimate est;
  est.lambdas = lambdas;
  est.n_samples = n_grid;
  est.method = "trapezoid";
  detail::fill_curve(est, ratio, weight, b - a, false);
  double integral = 0.0;
  for (std::size_t i = 0; i < n_grid; ++i) integral += weight[i] * ratio[i];
  est.lambda_crit = integral / (b - a);
  return est;
}

inline McEstimate quadrature_curve_1d(const Pom& pom, const Dataset& data, const StateSpace& space,
                                      const std::vector<double>& lambdas, std::size_t n_grid) {
  const MlResult ml = maximize_likelihood(pom, data, space);
  McEstimate est = quadrature_curve_1d(PomLikelihood{pom, data}, space, lambdas, n_grid, ml.log_L_max);
  est.pom = pom.name();
  est.N = static_cast<double>(data.N);
  return est;
}

struct Halfspace {
  Eigen::VectorXd normal;  // keeps points with normal.r <= offset
  double offset = 0.0;
};

/// Monte Carlo volume of {(r-c).F.(r-c) <= -2 log lambda} intersected with a
/// halfspace, sampling the ellipsoid's bounding box.
inline VolumeEstimate mc_truncated_ellipsoid_volume(const Matrix& F, const Eigen::VectorXd& center,
                                                    const Halfspace& plane, double lambda, std::size_t n_samples,
                                                    std::uint64_t seed) {
  const int d = static_cast<int>(F.rows());
  if (F.cols() != d || center.size() != d || plane.normal.size() != d) {
    throw ConfigError("mc_truncated_ellipsoid_volume: dimension mismatch");
  }
  if (plane.normal.norm() == 0.0) throw ConfigError("mc_truncated_ellipsoid_volume: zero plane normal");
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::domain_error("mc_truncated_ellipsoid_volume: lambda in (0,1)");
  Eigen::LLT<Matrix> llt(F);
  if (llt.info() != Eigen::Success) throw NumericalError("mc_truncated_ellipsoid_volume: F not positive definite");
  const double rad2 = -2.0 * std::log(lambda);
  const Matrix finv = llt.solve(Matrix::Identity(d, d));
  Eigen::VectorXd half(d);
  for (int i = 0; i < d; ++i) half[i] = std::sqrt(rad2 * finv(i, i));
  double box_volume = 1.0;
  for (int i = 0; i < d; ++i) box_volume *= 2.0 * half[i];

  const std::size_t streams = std::min(kSampleStreams, n_samples);
  std::vector<std::uint64_t> hits(streams, 0);
  parallel_for_chunks(streams, [&](std::size_t s) {
    const std::size_t quota = n_samples / streams + (s < n_samples % streams ? 1 : 0);
    auto rng = make_stream(seed, s);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::VectorXd u(d);
    for (std::size_t k = 0; k < quota; ++k) {
      for (int i = 0; i < d; ++i) u[i] = half[i] * unit(rng);
      if (u.dot(F * u) <= rad2 && plane.normal.dot(center + u) <= plane.offset) ++hits[s];
    }
  });
  const double total = static_cast<double>(std::accumulate(hits.begin(), hits.end(), std::uint64_t{0}));
  const double f = total / static_cast<double>(n_samples);
  return {box_volume * f, box_volume * std::sqrt(f * (1.0 - f) / static_cast<double>(n_samples))};
}

inline void write_csv(std::ostream& os, const McEstimate& est) {
  os.precision(17);
  os << "# method=" << est.method << " seed=" << est.seed << " n_samples=" << est.n_samples << " pom=" << est.pom
     << " N=" << est.N << '\n';
  os << "lambda,s_hat,s_stderr,c_hat,c_stderr\n";
  for (std::size_t i = 0; i < est.lambdas.size(); ++i) {
    os << est.lambdas[i] << ',' << est.s_hat[i] << ',' << est.s_stderr[i] << ',' << est.c_hat[i] << ','
       << est.c_stderr[i] << '\n';
  }
}

inline void to_json(nlohmann::json& j, const McEstimate& est) {
  std::vector<double> exhausted_lambdas;
  for (std::size_t i = 0; i < est.lambdas.size(); ++i) {
    if (est.resolution_exhausted[i]) exhausted_lambdas.push_back(est.lambdas[i]);
  }
  j = {{"method", est.method},
       {"seed", est.seed},
       {"n_samples", est.n_samples},
       {"pom", est.pom},
       {"N", est.N},
       {"lambda_crit", est.lambda_crit},
       {"lambda_crit_stderr", est.lambda_crit_stderr},
       {"resolution_exhausted", est.any_exhausted()},
       {"resolution_exhausted_lambdas", exhausted_lambdas},
       {"lambdas", est.lambdas},
       {"s_hat", est.s_hat},
       {"s_stderr", est.s_stderr},
       {"c_hat", est.c_hat},
       {"c_stderr", est.c_stderr}};
}

}  // namespace bayesregion

#endif  // BAYESREGION_MCVALIDATE_HPP
