#ifndef BAYESREGION_MLE_HPP
#define BAYESREGION_MLE_HPP

// Constrained maximum likelihood and the boundary quantities that decide which
// region formulas apply.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "bayesregion/common.hpp"
#include "bayesregion/model.hpp"
#include "bayesregion/statespace.hpp"

namespace bayesregion {

/// Anything with a log-likelihood and its gradient over r.
template <typename M>
concept LikelihoodModel = requires(const M& m, const ParamVector& r) {
  { m.log_likelihood(r) } -> std::convertible_to<double>;
  { m.gradient(r) } -> std::convertible_to<Eigen::VectorXd>;
};

/// Models that also expose the negative Hessian, enabling Newton steps.
template <typename M>
concept CurvedLikelihoodModel = LikelihoodModel<M> && requires(const M& m, const ParamVector& r) {
  { m.negative_hessian(r) } -> std::convertible_to<Matrix>;
};

/// Multinomial likelihood of a dataset under a POM.
struct PomLikelihood {
  const Pom& pom;
  const Dataset& data;

  double log_likelihood(const ParamVector& r) const { return bayesregion::log_likelihood(pom, data, r); }
  Eigen::VectorXd gradient(const ParamVector& r) const { return log_likelihood_gradient(pom, data, r); }
  Matrix negative_hessian(const ParamVector& r) const { return observed_hessian(pom, data, r); }
  double copies() const { return static_cast<double>(data.N); }
};

/// log L = log_peak - (r - center).F.(r - center) / 2, with no domain limits.
struct GaussianLikelihood {
  ParamVector center;
  Matrix fisher;
  double log_peak = 0.0;

  double log_likelihood(const ParamVector& r) const {
    const ParamVector delta = r - center;
    return log_peak - 0.5 * delta.dot(fisher * delta);
  }
  Eigen::VectorXd gradient(const ParamVector& r) const { return -fisher * (r - center); }
  Matrix negative_hessian(const ParamVector&) const { return fisher; }
};

enum class RegionCase { InteriorFull, InteriorTruncated, Boundary };

inline const char* to_string(RegionCase c) {
  switch (c) {
    case RegionCase::InteriorFull: return "interior-full";
    case RegionCase::InteriorTruncated: return "interior-truncated";
    case RegionCase::Boundary: return "boundary";
  }
  return "?";
}

inline RegionCase region_case_from_string(const std::string& s) {
  if (s == "interior-full") return RegionCase::InteriorFull;
  if (s == "interior-truncated") return RegionCase::InteriorTruncated;
  if (s == "boundary") return RegionCase::Boundary;
  throw ConfigError("unknown region case: " + s);
}

struct MlOptions {
  /// Convergence threshold on the projected gradient, per data copy.
  double tol_grad_per_copy = 1e-9;
  int max_iter = 20000;
  /// Inward retraction used to evaluate F where some p_k = 0.
  double retract_delta = 1e-6;
  /// Use the observed negative Hessian instead of the Fisher information.
  bool use_observed_hessian = false;
};

struct BoundarySearchOptions {
  int samples = 512;
  double eps_scale = 1.0;
  std::uint64_t seed = 1;
  /// Polishing stops once a round improves lambda_int by less than this.
  double rel_tol = 1e-4;
  int max_rounds = 60;
  /// Likelihood ratio below which truncation is not reported.
  double lambda_min = 1e-4;
};

/// Outcome of the constrained ascent.
struct AscentResult {
  ParamVector r;
  double value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd gradient;
  double gradient_norm = 0.0;            // metric norm of the unconstrained ascent direction
  double projected_gradient_norm = 0.0;  // metric norm of the gradient mapping
  int iterations = 0;
  bool converged = false;
  bool precision_limited = false;  // stopped because no step changes log L in double precision
};

struct BoundarySearchResult {
  bool found = false;
  ParamVector r_P;
  double lambda_int = 0.0;
  double initial_lambda_int = 0.0;
  int rounds = 0;
};

struct MlResult {
  ParamVector r_ml;
  double log_L_max = 0.0;
  bool on_boundary = false;
  Eigen::VectorXd g_ml;  // zero vector unless on the boundary
  Matrix F_ml;
  ParamVector fisher_point;  // where F_ml was evaluated (differs from r_ml after retraction)
  RegionCase region_case = RegionCase::InteriorFull;
  double lambda_int = 0.0;
  ParamVector r_P;
  double lambda_bd = 1.0;
  bool ellipsoid_exits = false;
  bool boundary_search_found = false;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  double projected_gradient_norm = 0.0;
  double N = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

inline double metric_norm(const StateSpace& space, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, v.dot(space.metric() * v)));
}

}  // namespace detail

/// Projected gradient ascent in the space's Frobenius metric with Armijo
/// backtracking and Barzilai-Borwein step lengths. Newton steps are tried
/// first whenever the model exposes curvature and the step stays physical.
template <LikelihoodModel Model>
AscentResult maximize(const Model& model, const StateSpace& space, double tol, int max_iter,
                      const ParamVector* start = nullptr) {
  const Matrix& ginv = space.metric_inverse();
  AscentResult res;
  ParamVector r = start ? space.project(*start) : space.center();
  double f = model.log_likelihood(r);
  if (!std::isfinite(f)) throw NumericalError("maximize: log-likelihood is not finite at the start point");
  Eigen::VectorXd g = model.gradient(r);
  Eigen::VectorXd dir = ginv * g;
  double t = 0.1 / std::max(1e-300, detail::metric_norm(space, dir));

  auto gradient_mapping = [&](const ParamVector& x, const Eigen::VectorXd& d, double step) {
    return detail::metric_norm(space, (space.project(x + step * d) - x) / step);
  };

  int it = 0;
  for (; it < max_iter; ++it) {
    const double pg = gradient_mapping(r, dir, t);
    if (pg <= tol) {
      res.converged = true;
      res.projected_gradient_norm = pg;
      break;
    }

    ParamVector next;
    double f_next = -std::numeric_limits<double>::infinity();
    bool accepted = false;

    if constexpr (CurvedLikelihoodModel<Model>) {
      Eigen::LDLT<Matrix> ldlt(model.negative_hessian(r));
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        const ParamVector cand = r + ldlt.solve(g);
        if (cand.allFinite() && space.strictly_inside(cand)) {
          const double fc = model.log_likelihood(cand);
          if (std::isfinite(fc) && fc >= f) {
            next = cand;
            f_next = fc;
            accepted = true;
          }
        }
      }
    }

    if (!accepted) {
      double step = t;
      for (int bt = 0; bt < 80; ++bt) {
        const ParamVector cand = space.project(r + step * dir);
        const double fc = model.log_likelihood(cand);
        if (std::isfinite(fc) && fc >= f + 1e-4 * g.dot(cand - r)) {
          next = cand;
          f_next = fc;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        // No representable ascent left. Accept when the remaining gradient
        // mapping is negligible next to the gradient itself.
        const double pg_now = gradient_mapping(r, dir, t);
        const double gn = detail::metric_norm(space, dir);
        if (pg_now <= 1e-6 * std::max(1.0, gn)) {
          res.converged = true;
          res.precision_limited = true;
          res.projected_gradient_norm = pg_now;
        }
        break;
      }
    }

    const ParamVector s = next - r;
    const Eigen::VectorXd g_next = model.gradient(next);
    const Eigen::VectorXd y = g - g_next;
    const double sy = s.dot(y);
    const double sgs = s.dot(space.metric() * s);
    if (sy > 0.0 && sgs > 0.0) {
      t = std::clamp(sgs / sy, 1e-300, 1e300);
    } else {
      t *= 2.0;
    }
    r = next;
    f = f_next;
    g = g_next;
    dir = ginv * g;
  }

  res.r = r;
  res.value = f;
  res.gradient = g;
  res.iterations = it;
  res.gradient_norm = detail::metric_norm(space, dir);
  if (!res.converged) res.projected_gradient_norm = gradient_mapping(r, dir, t);
  if (!res.converged && res.projected_gradient_norm <= tol) res.converged = true;
  return res;
}

/// Constrained ML over the space. F_ml is the Fisher information (or observed
/// negative Hessian on request) at r_ml, retracted inward by retract_delta
/// along -g when some p_k vanishes there.
inline MlResult maximize_likelihood(const Pom& pom, const Dataset& data, const StateSpace& space,
                                    const MlOptions& opts = {}) {
  if (pom.dim() != space.dim()) throw ConfigError("maximize_likelihood: POM and space dimensions differ");
  if (data.N <= 0) throw ConfigError("maximize_likelihood: dataset is empty");
  const PomLikelihood model{pom, data};
  const double tol = opts.tol_grad_per_copy * static_cast<double>(data.N);
  const AscentResult a = maximize(model, space, tol, opts.max_iter);

  MlResult ml;
  ml.N = static_cast<double>(data.N);
  ml.r_ml = a.r;
  ml.log_L_max = a.value;
  ml.iterations = a.iterations;
  ml.converged = a.converged;
  ml.gradient_norm = a.gradient_norm;
  ml.projected_gradient_norm = a.projected_gradient_norm;
  if (!a.converged) ml.warnings.push_back("ML ascent did not converge; reporting best iterate");

  if (a.precision_limited) {
    ml.warnings.push_back("ML ascent stopped at machine precision with projected gradient " +
                          std::to_string(a.projected_gradient_norm));
  }
  ml.on_boundary = a.gradient_norm > 10.0 * tol && a.converged;
  if (!a.converged && a.gradient_norm > 10.0 * tol && !space.strictly_inside(a.r)) ml.on_boundary = true;
  ml.g_ml = ml.on_boundary ? a.gradient : Eigen::VectorXd::Zero(space.dim());

  ml.fisher_point = a.r;
  const Eigen::VectorXd p = pom.probabilities(a.r);
  if ((p.array() <= 0.0).any()) {
    const Eigen::VectorXd dir = space.metric_inverse() * a.gradient;
    const double nrm = dir.norm();
    ParamVector inward = nrm > 0.0 ? ParamVector(a.r - opts.retract_delta * dir / nrm)
                                   : ParamVector(a.r + opts.retract_delta * (space.center() - a.r).normalized());
    ml.fisher_point = inward;
    ml.warnings.push_back("F_ml evaluated at r_ml retracted inward by " + std::to_string(opts.retract_delta));
  }
  ml.F_ml = opts.use_observed_hessian ? observed_hessian(pom, data, ml.fisher_point)
                                      : fisher_information(pom, ml.fisher_point, ml.N);
  return ml;
}

/// Appendix-style Monte Carlo search for the boundary point of largest
/// likelihood near an interior optimum: Gaussian kicks with covariance
/// eps_scale^2 F^{-1}, interior results discarded, the rest mapped onto the
/// boundary; then repeated at half the scale around the incumbent.
template <LikelihoodModel Model>
BoundarySearchResult estimate_boundary_max(const Model& model, const StateSpace& space,
                                           const ParamVector& center, const Matrix& fisher,
                                           double log_L_max, const BoundarySearchOptions& opts = {}) {
  const int d = space.dim();
  Eigen::LLT<Matrix> llt(fisher);
  if (llt.info() != Eigen::Success) throw NumericalError("estimate_boundary_max: F is not positive definite");
  const Matrix upper = llt.matrixU();

  BoundarySearchResult out;
  double best_ll = -std::numeric_limits<double>::infinity();
  ParamVector best;

  auto run_round = [&](const ParamVector& origin, double scale, std::uint64_t round) {
    auto rng = make_stream(opts.seed, round);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<ParamVector> kicks(opts.samples);
    for (auto& k : kicks) {
      Eigen::VectorXd z(d);
      for (int j = 0; j < d; ++j) z[j] = gauss(rng);
      // cov(eps) = scale^2 F^{-1}:  U eps = scale z with F = U^T U
      k = origin + upper.triangularView<Eigen::Upper>().solve(scale * z);
    }
    const std::size_t chunks = std::min<std::size_t>(kicks.size(), 16);
    std::vector<double> chunk_ll(chunks, -std::numeric_limits<double>::infinity());
    std::vector<ParamVector> chunk_pt(chunks);
    std::vector<int> chunk_hits(chunks, 0);
    parallel_for_chunks(chunks, [&](std::size_t c) {
      for (std::size_t j = c; j < kicks.size(); j += chunks) {
        if (space.strictly_inside(kicks[j])) continue;
        const ParamVector b = space.project_to_boundary(kicks[j]);
        const double ll = model.log_likelihood(b);
        ++chunk_hits[c];
        if (ll > chunk_ll[c] || chunk_pt[c].size() == 0) {
          chunk_ll[c] = ll;
          chunk_pt[c] = b;
        }
      }
    });
    int hits = 0;
    double round_best = -std::numeric_limits<double>::infinity();
    ParamVector round_pt;
    for (std::size_t c = 0; c < chunks; ++c) {
      hits += chunk_hits[c];
      if (chunk_hits[c] > 0 && (round_pt.size() == 0 || chunk_ll[c] > round_best)) {
        round_best = chunk_ll[c];
        round_pt = chunk_pt[c];
      }
    }
    return std::tuple{hits, round_best, round_pt};
  };

  auto [hits, ll0, pt0] = run_round(center, opts.eps_scale, 0);
  if (hits == 0) return out;
  out.found = true;
  best_ll = ll0;
  best = pt0;
  out.initial_lambda_int = std::exp(std::min(0.0, best_ll - log_L_max));

  double scale = opts.eps_scale;
  for (int round = 1; round <= opts.max_rounds; ++round) {
    scale *= 0.5;
    auto [h, ll, pt] = run_round(best, scale, static_cast<std::uint64_t>(round));
    out.rounds = round;
    const double before = std::exp(std::min(0.0, best_ll - log_L_max));
    if (h > 0 && ll > best_ll) {
      best_ll = ll;
      best = pt;
    }
    const double after = std::exp(std::min(0.0, best_ll - log_L_max));
    if (before > 0.0 ? (after - before) / before < opts.rel_tol : after == 0.0) break;
  }
  out.r_P = best;
  out.lambda_int = std::exp(std::min(0.0, best_ll - log_L_max));
  return out;
}

/// Pseudo-inverse of a symmetric matrix via its eigen-decomposition.
inline Matrix symmetric_pinv(const Matrix& a, double rel_cutoff = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const double cutoff = rel_cutoff * es.eigenvalues().cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = es.eigenvalues();
  for (auto& v : inv) v = std::abs(v) > cutoff ? 1.0 / v : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

struct BoundaryGradient {
  Eigen::VectorXd g_ml;
  double lambda_bd = 1.0;
  bool used_pseudo_inverse = false;
};

/// g_ml = grad log L at r_ml and lambda_bd = exp(-g.F^{-1}.g / 2).
inline BoundaryGradient boundary_gradient(const Pom& pom, const Dataset& data, const MlResult& ml) {
  BoundaryGradient out;
  out.g_ml = log_likelihood_gradient(pom, data, ml.r_ml);
  Eigen::LDLT<Matrix> ldlt(ml.F_ml);
  Eigen::VectorXd x;
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
      ldlt.vectorD().minCoeff() > 1e-12 * ldlt.vectorD().maxCoeff()) {
    x = ldlt.solve(out.g_ml);
  } else {
    x = symmetric_pinv(ml.F_ml) * out.g_ml;
    out.used_pseudo_inverse = true;
  }
  out.lambda_bd = std::exp(-0.5 * out.g_ml.dot(x));
  return out;
}

/// True when an end point of a principal axis of the lambda-ellipsoid
/// {Delta.F.Delta <= -2 log lambda} around `center` is unphysical.
inline bool ellipsoid_exits(const StateSpace& space, const ParamVector& center, const Matrix& fisher,
                            double lambda) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(fisher);
  const double rad2 = -2.0 * std::log(lambda);
  for (int i = 0; i < fisher.rows(); ++i) {
    const double mu = es.eigenvalues()[i];
    if (mu <= 0.0) return true;
    const ParamVector axis = std::sqrt(rad2 / mu) * es.eigenvectors().col(i);
    if (!space.is_physical(center + axis) || !space.is_physical(center - axis)) return true;
  }
  return false;
}

/// Case decision from the fields already stored in `ml`.
inline RegionCase classify_case(const MlResult& ml, double lambda_min) {
  if (ml.on_boundary) return RegionCase::Boundary;
  if (ml.boundary_search_found && ml.lambda_int > lambda_min) {
    if (ml.lambda_int >= 1.0 - 1e-9) return RegionCase::Boundary;
    return RegionCase::InteriorTruncated;
  }
  return RegionCase::InteriorFull;
}

/// Full pipeline: ML, boundary search for interior optima, case decision and
/// boundary gradient for boundary optima.
inline MlResult analyze(const Pom& pom, const Dataset& data, const StateSpace& space,
                        const MlOptions& ml_opts = {}, const BoundarySearchOptions& bs_opts = {}) {
  MlResult ml = maximize_likelihood(pom, data, space, ml_opts);
  if (!ml.on_boundary) {
    const PomLikelihood model{pom, data};
    ml.ellipsoid_exits = ellipsoid_exits(space, ml.r_ml, ml.F_ml, bs_opts.lambda_min);
    BoundarySearchResult bs = estimate_boundary_max(model, space, ml.r_ml, ml.F_ml, ml.log_L_max, bs_opts);
    if (!bs.found && ml.ellipsoid_exits) {
      // The boundary is within the lambda_min ellipsoid but beyond typical
      // kicks; widen them to that radius.
      BoundarySearchOptions wide = bs_opts;
      wide.eps_scale = bs_opts.eps_scale * std::sqrt(-2.0 * std::log(bs_opts.lambda_min));
      bs = estimate_boundary_max(model, space, ml.r_ml, ml.F_ml, ml.log_L_max, wide);
    }
    ml.boundary_search_found = bs.found;
    if (bs.found) {
      ml.lambda_int = bs.lambda_int;
      ml.r_P = bs.r_P;
    }
  }
  ml.region_case = classify_case(ml, bs_opts.lambda_min);
  if (ml.region_case == RegionCase::Boundary) {
    const BoundaryGradient bg = boundary_gradient(pom, data, ml);
    ml.g_ml = bg.g_ml;
    ml.lambda_bd = bg.lambda_bd;
    if (bg.used_pseudo_inverse) ml.warnings.push_back("F_ml singular; lambda_bd uses a pseudo-inverse");
  } else {
    ml.lambda_bd = 1.0;
  }
  if (ml.region_case != RegionCase::InteriorTruncated) {
    if (ml.region_case == RegionCase::InteriorFull) ml.lambda_int = 0.0;
  }
  return ml;
}

}  // namespace bayesregion

#endif  // BAYESREGION_MLE_HPP
