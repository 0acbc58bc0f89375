#ifndef BAYESREGION_REGIONS_HPP
#define BAYESREGION_REGIONS_HPP

// Closed-form sizes and credibilities of likelihood-contour regions under the
// Gaussian approximation, for interior, truncated and boundary estimators.

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include "bayesregion/common.hpp"
#include "bayesregion/mle.hpp"
#include "bayesregion/specfun.hpp"
#include "bayesregion/statespace.hpp"

namespace bayesregion {

namespace detail {

inline void require_lambda(double lambda, const char* where) {
  if (!(lambda > 0.0) || lambda > 1.0) {
    throw std::domain_error(std::string(where) + ": lambda must lie in (0, 1]");
  }
}

inline void require_dim(int d, const char* where) {
  if (d < 1) throw std::domain_error(std::string(where) + ": dimension must be positive");
}

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace detail

// ---------------------------------------------------------------------------
// Interior estimator, untruncated Gaussian

/// (V_d / V_R0) (-2 log lambda)^{d/2} det_F^{-1/2}
inline double case1_size(double lambda, int d, double det_F, double V_R0) {
  detail::require_lambda(lambda, "case1_size");
  detail::require_dim(d, "case1_size");
  if (!(det_F > 0.0)) throw std::domain_error("case1_size: det_F must be positive");
  if (lambda == 1.0) return 0.0;
  return specfun::unit_ball_volume(d) / V_R0 * std::pow(-2.0 * std::log(lambda), 0.5 * d) /
         std::sqrt(det_F);
}

/// 1 - Q(d/2, -log lambda); the chi-squared mass inside the contour.
inline double case1_credibility(double lambda, int d) {
  detail::require_lambda(lambda, "case1_credibility");
  detail::require_dim(d, "case1_credibility");
  if (lambda == 1.0) return 0.0;
  return specfun::regularized_gamma_p(0.5 * d, -std::log(lambda));
}

inline double case1_size_for_credibility(double c, int d, double det_F, double V_R0) {
  if (!(c > 0.0 && c < 1.0)) throw std::domain_error("case1_size_for_credibility: c must lie in (0, 1)");
  detail::require_dim(d, "case1_size_for_credibility");
  const double y = specfun::inverse_regularized_gamma_q(0.5 * d, 1.0 - c);
  return specfun::unit_ball_volume(d) / V_R0 * std::pow(2.0 * y, 0.5 * d) / std::sqrt(det_F);
}

struct LambdaCrit {
  double value = 0.0;
  bool gaussian_invalid = false;  // value >= 1: the Gaussian is not concentrated in the space
};

/// sqrt(det(2 pi F^{-1})) / V_R0
inline LambdaCrit case1_lambda_crit(int d, double det_F, double V_R0) {
  detail::require_dim(d, "case1_lambda_crit");
  if (!(det_F > 0.0)) throw std::domain_error("case1_lambda_crit: det_F must be positive");
  LambdaCrit out;
  out.value = std::pow(2.0 * std::numbers::pi, 0.5 * d) / std::sqrt(det_F) / V_R0;
  out.gaussian_invalid = out.value >= 1.0;
  return out;
}

struct PlausibleRegion {
  double lambda_crit = 0.0;
  double s_crit = detail::kNaN;  // NaN when the log bracket is negative
  double c_crit_exact = detail::kNaN;
  double c_crit_asymptotic = detail::kNaN;  // large-N approximation
  bool gaussian_invalid = false;
};

inline PlausibleRegion case1_plausible(int d, double det_F, double V_R0, double N) {
  const LambdaCrit lc = case1_lambda_crit(d, det_F, V_R0);
  PlausibleRegion out;
  out.lambda_crit = lc.value;
  out.gaussian_invalid = lc.gaussian_invalid;
  if (!lc.gaussian_invalid) {
    out.s_crit = case1_size(lc.value, d, det_F, V_R0);
    out.c_crit_exact = case1_credibility(lc.value, d);
  }
  if (N > 1.0) {
    const double h = 0.5 * d;
    out.c_crit_asymptotic =
        1.0 - std::pow(h, h - 1.0) / std::tgamma(h) * std::pow(std::log(N), h - 1.0) / std::pow(N, h);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Truncation by a supporting plane

/// Fraction of the lambda-ellipsoid left after cutting by a plane whose
/// closest point to the centre lies on the lambda_int contour.
inline double truncation_fraction_case2(double lambda, double lambda_int, int d) {
  detail::require_lambda(lambda, "truncation_fraction_case2");
  detail::require_dim(d, "truncation_fraction_case2");
  if (!(lambda_int > 0.0) || lambda_int > 1.0) {
    throw std::domain_error("truncation_fraction_case2: lambda_int must lie in (0, 1]");
  }
  if (lambda == 1.0) return 1.0;
  const double l = std::min(std::sqrt(std::log(lambda_int) / std::log(lambda)), 1.0);
  const double a = 0.5 * (d + 1);
  return 1.0 - specfun::regularized_incomplete_beta(0.5 * (1.0 - l), a, a);
}

inline double case2_size(double lambda, double lambda_int, int d, double det_F, double V_R0) {
  return truncation_fraction_case2(lambda, lambda_int, d) * case1_size(lambda, d, det_F, V_R0);
}

struct D1Quantities {
  double s = 0.0;
  double c = 0.0;
  double lambda_crit = 0.0;
};

/// Exact single-parameter truncated case. The likelihood beyond the boundary
/// point r_P is replaced by its tangent exponential with slope F |Delta|.
inline D1Quantities case2_d1_quantities(double lambda, double lambda_int, double F, double delta_rP,
                                        double V_R0) {
  detail::require_lambda(lambda, "case2_d1_quantities");
  if (!(F > 0.0)) throw std::domain_error("case2_d1_quantities: F must be positive");
  const double delta = std::abs(delta_rP);
  if (delta == 0.0) throw std::domain_error("case2_d1_quantities: |Delta(r_P)| = 0, use the boundary case");
  const double slope = F * delta;
  const bool cut = lambda < lambda_int;
  D1Quantities q;
  q.s = case1_size(lambda, 1, F, V_R0);
  if (cut) q.s += (std::log(lambda) - std::log(lambda_int)) / (V_R0 * slope);

  const double y = -std::log(lambda);
  const double gauss_part = delta * std::sqrt(2.0 * F) *
                            (std::sqrt(std::numbers::pi) - specfun::upper_incomplete_gamma(0.5, y));
  const double num = gauss_part + (cut ? lambda - lambda_int : 0.0);
  const double den = std::sqrt(2.0 * std::numbers::pi * F) * delta - lambda_int;
  q.c = lambda == 1.0 ? 0.0 : num / den;
  q.lambda_crit = std::sqrt(2.0 * std::numbers::pi) / (V_R0 * std::sqrt(F)) - lambda_int / (V_R0 * slope);
  return q;
}

/// Fraction of the effective ellipsoid on the inner side of the tangent plane
/// through a boundary estimator.
inline double truncation_fraction_case3(double lambda, double lambda_bd, int d) {
  detail::require_lambda(lambda, "truncation_fraction_case3");
  detail::require_dim(d, "truncation_fraction_case3");
  if (!(lambda_bd > 0.0) || lambda_bd > 1.0) {
    throw std::domain_error("truncation_fraction_case3: lambda_bd must lie in (0, 1]");
  }
  const double lambda_eff = lambda * lambda_bd;
  if (lambda_eff >= 1.0) throw std::domain_error("truncation_fraction_case3: lambda_eff >= 1");
  const double l = std::min(std::sqrt(std::log(lambda_bd) / std::log(lambda_eff)), 1.0);
  const double a = 0.5 * (d + 1);
  return specfun::regularized_incomplete_beta(0.5 * (1.0 - l), a, a);
}

inline double case3_size(double lambda, double lambda_bd, int d, double det_F, double V_R0) {
  const double gamma = truncation_fraction_case3(lambda, lambda_bd, d);
  if (gamma == 0.0) return 0.0;
  return gamma * case1_size(lambda * lambda_bd, d, det_F, V_R0);
}

/// Single-parameter boundary case: exponential likelihood with slope g_ml.
inline D1Quantities case3_d1_quantities(double lambda, double g_ml, double V_R0) {
  detail::require_lambda(lambda, "case3_d1_quantities");
  if (!(g_ml > 0.0)) throw std::domain_error("case3_d1_quantities: g_ml must be positive");
  D1Quantities q;
  q.s = -std::log(lambda) / (V_R0 * g_ml);
  q.c = 1.0 - lambda;
  q.lambda_crit = 1.0 / (V_R0 * g_ml);
  return q;
}

// ---------------------------------------------------------------------------
// Size-to-credibility relation and sample-size condition

/// c_lambda = [lambda s_lambda + int_lambda^1 s] / int_0^1 s over an ascending
/// grid. With y = -log(lambda) the integrals become int s e^{-y} dy; on each
/// cell s is interpolated linearly in y^tail_exponent and integrated exactly,
/// which is exact for Gaussian contours (tail_exponent = d/2). Below the first
/// grid point s is continued as K y^tail_exponent.
inline std::vector<double> credibility_from_sizes(const std::vector<double>& lambdas,
                                                  const std::vector<double>& sizes,
                                                  double tail_exponent) {
  if (lambdas.size() != sizes.size()) throw std::invalid_argument("credibility_from_sizes: size mismatch");
  if (lambdas.size() < 10) throw std::invalid_argument("credibility_from_sizes: need at least 10 grid points");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    detail::require_lambda(lambdas[i], "credibility_from_sizes");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1])) {
      throw std::invalid_argument("credibility_from_sizes: grid must be strictly increasing");
    }
  }
  if (!(tail_exponent > 0.0)) throw std::invalid_argument("credibility_from_sizes: tail exponent must be positive");
  std::vector<double> lam = lambdas;
  std::vector<double> s = sizes;
  if (lam.back() < 1.0) {
    lam.push_back(1.0);
    s.push_back(0.0);
  }
  const std::size_t n = lam.size();
  const double e = tail_exponent;
  // int_{ya}^{yb} y^e e^{-y} dy
  auto power_moment = [e](double ya, double yb) {
    return specfun::upper_incomplete_gamma(e + 1.0, ya) - specfun::upper_incomplete_gamma(e + 1.0, yb);
  };
  // above[i] = int_{lam[i]}^1 s dlambda
  std::vector<double> above(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;) {
    const double ya = -std::log(lam[i + 1]);
    const double yb = -std::log(lam[i]);
    const double ta = std::pow(ya, e);
    const double tb = std::pow(yb, e);
    const double beta = (s[i] - s[i + 1]) / (tb - ta);
    const double alpha = s[i + 1] - beta * ta;
    above[i] = above[i + 1] + alpha * (lam[i + 1] - lam[i]) + beta * power_moment(ya, yb);
  }
  double tail = 0.0;
  const double y0 = -std::log(lam[0]);
  if (y0 > 0.0 && s[0] > 0.0) {
    const double k = s[0] / std::pow(y0, e);
    tail = k * specfun::upper_incomplete_gamma(e + 1.0, y0);
  }
  const double total = above[0] + tail;
  if (!(total > 0.0)) throw NumericalError("credibility_from_sizes: integral of s vanishes");
  std::vector<double> c(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) c[i] = (lam[i] * s[i] + above[i]) / total;
  return c;
}

/// Copies needed before the lambda contour clears a boundary point at offset
/// Delta from the estimator: N Delta.F1.Delta = -2 log lambda.
inline double n_min(double lambda, const Matrix& F1, const Eigen::VectorXd& delta_rP) {
  detail::require_lambda(lambda, "n_min");
  const double q = delta_rP.dot(F1 * delta_rP);
  if (!(q > 0.0)) throw std::domain_error("n_min: Delta.F1.Delta must be positive");
  return -2.0 * std::log(lambda) / q;
}

// ---------------------------------------------------------------------------
// Curves

/// 400 points spaced evenly in log(lambda) over [1e-6, 1].
inline std::vector<double> default_lambda_grid(std::size_t n = 400, double lo = 1e-6, double hi = 1.0) {
  if (n < 2 || !(lo > 0.0) || !(hi > lo) || hi > 1.0) throw ConfigError("invalid lambda grid");
  std::vector<double> g(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

/// Everything the closed forms need from an estimate.
struct RegionInputs {
  RegionCase region_case = RegionCase::InteriorFull;
  int d = 1;
  double N = 0.0;
  Matrix F;
  double V_R0 = 1.0;
  double lambda_int = 0.0;
  double lambda_bd = 1.0;
  Eigen::VectorXd g_ml;      // boundary case
  Eigen::VectorXd delta_rP;  // truncated case: r_P - r_ml

  double det_F() const { return F.determinant(); }
};

inline RegionInputs region_inputs(const MlResult& ml, const StateSpace& space) {
  RegionInputs in;
  in.region_case = ml.region_case;
  in.d = space.dim();
  in.N = ml.N;
  in.F = ml.F_ml;
  in.V_R0 = space.volume();
  in.lambda_int = ml.lambda_int;
  in.lambda_bd = ml.lambda_bd;
  in.g_ml = ml.g_ml;
  in.delta_rP = ml.r_P.size() == ml.r_ml.size() ? Eigen::VectorXd(ml.r_P - ml.r_ml)
                                                  : Eigen::VectorXd::Zero(space.dim());
  return in;
}

struct RegionPoint {
  double s = 0.0;
  double gamma = 1.0;
};

/// Size (and truncation fraction) at one lambda for the case in `in`.
inline RegionPoint region_size(const RegionInputs& in, double lambda) {
  detail::require_lambda(lambda, "region_size");
  const double detF = in.det_F();
  RegionPoint p;
  switch (in.region_case) {
    case RegionCase::InteriorFull:
      p.s = case1_size(lambda, in.d, detF, in.V_R0);
      break;
    case RegionCase::InteriorTruncated:
      if (in.d == 1) {
        const auto q = case2_d1_quantities(lambda, in.lambda_int, in.F(0, 0), in.delta_rP[0], in.V_R0);
        p.s = q.s;
        p.gamma = q.s / std::max(case1_size(lambda, 1, detF, in.V_R0), std::numeric_limits<double>::min());
        if (lambda == 1.0) p.gamma = 1.0;
      } else {
        p.gamma = truncation_fraction_case2(lambda, in.lambda_int, in.d);
        p.s = p.gamma * case1_size(lambda, in.d, detF, in.V_R0);
      }
      break;
    case RegionCase::Boundary:
      if (in.d == 1) {
        p.s = case3_d1_quantities(lambda, std::abs(in.g_ml[0]), in.V_R0).s;
        p.gamma = detail::kNaN;
      } else if (in.lambda_bd >= 1.0) {
        // Vanishing gradient: the plane passes through the centre.
        p.gamma = 0.5;
        p.s = 0.5 * case1_size(lambda, in.d, detF, in.V_R0);
      } else {
        p.gamma = truncation_fraction_case3(lambda, in.lambda_bd, in.d);
        p.s = p.gamma == 0.0 ? 0.0 : p.gamma * case1_size(lambda * in.lambda_bd, in.d, detF, in.V_R0);
      }
      break;
  }
  return p;
}

namespace detail {

// int_lambda^1 s dlambda' = int_0^{-log lambda} s(e^{-y}) e^{-y} dy, split at
// the truncation kink.
inline double size_integral_above(const RegionInputs& in, double lambda) {
  using boost::math::quadrature::gauss_kronrod;
  const auto f = [&](double y) {
    const double lam = std::exp(-y);
    return lam > 0.0 ? region_size(in, std::min(lam, 1.0)).s * lam : 0.0;
  };
  const double y_top = -std::log(lambda);
  if (y_top <= 0.0) return 0.0;
  double y_kink = -1.0;
  if (in.region_case == RegionCase::InteriorTruncated && in.lambda_int > 0.0) y_kink = -std::log(in.lambda_int);
  double err = 0.0;
  if (y_kink > 0.0 && y_kink < y_top) {
    return gauss_kronrod<double, 61>::integrate(f, 0.0, y_kink, 15, 1e-13, &err) +
           gauss_kronrod<double, 61>::integrate(f, y_kink, y_top, 15, 1e-13, &err);
  }
  return gauss_kronrod<double, 61>::integrate(f, 0.0, y_top, 15, 1e-13, &err);
}

inline double size_integral_total(const RegionInputs& in) {
  const auto f = [&](double y) {
    const double lam = std::exp(-y);
    return lam > 0.0 ? region_size(in, std::min(lam, 1.0)).s * lam : 0.0;
  };
  double split = 1.0;
  if (in.region_case == RegionCase::InteriorTruncated && in.lambda_int > 0.0) split = -std::log(in.lambda_int);
  boost::math::quadrature::exp_sinh<double> tail;
  return size_integral_above(in, std::exp(-split)) + tail.integrate(f, split, std::numeric_limits<double>::infinity());
}

}  // namespace detail

inline double region_lambda_crit(const RegionInputs& in) {
  switch (in.region_case) {
    case RegionCase::InteriorFull:
      return case1_lambda_crit(in.d, in.det_F(), in.V_R0).value;
    case RegionCase::InteriorTruncated:
      if (in.d == 1) return case2_d1_quantities(0.5, in.lambda_int, in.F(0, 0), in.delta_rP[0], in.V_R0).lambda_crit;
      break;
    case RegionCase::Boundary:
      if (in.d == 1) return case3_d1_quantities(0.5, std::abs(in.g_ml[0]), in.V_R0).lambda_crit;
      break;
  }
  return detail::size_integral_total(in);
}

/// Credibility at lambda, from the closed forms where they exist and from
/// the size-credibility relation integrated by quadrature otherwise.
inline double region_credibility(const RegionInputs& in, double lambda, double lambda_crit) {
  detail::require_lambda(lambda, "region_credibility");
  if (lambda == 1.0) return 0.0;
  switch (in.region_case) {
    case RegionCase::InteriorFull:
      return case1_credibility(lambda, in.d);
    case RegionCase::InteriorTruncated:
      if (in.d == 1) return case2_d1_quantities(lambda, in.lambda_int, in.F(0, 0), in.delta_rP[0], in.V_R0).c;
      break;
    case RegionCase::Boundary:
      if (in.d == 1) return 1.0 - lambda;
      break;
  }
  return (lambda * region_size(in, lambda).s + detail::size_integral_above(in, lambda)) / lambda_crit;
}

struct RegionCurve {
  std::vector<double> lambdas;
  std::vector<double> sizes;
  std::vector<double> credibilities;
  std::vector<double> gammas;
  std::vector<std::string> flags;  // per grid point, ';'-separated
  double lambda_crit = 0.0;
  double s_crit = detail::kNaN;
  double c_crit_exact = detail::kNaN;
  double c_crit_asymptotic = detail::kNaN;
  double N_min = detail::kNaN;
  bool gaussian_invalid = false;
  RegionInputs inputs;
  std::vector<std::string> warnings;
};

inline RegionCurve build_region_curve(const RegionInputs& in, const std::vector<double>& lambdas) {
  if (in.F.rows() != in.d || in.F.cols() != in.d) throw ConfigError("build_region_curve: F has wrong shape");
  RegionCurve rc;
  rc.inputs = in;
  rc.lambdas = lambdas;
  const std::size_t n = lambdas.size();
  rc.sizes.resize(n);
  rc.credibilities.resize(n);
  rc.gammas.resize(n);
  rc.flags.assign(n, "");

  rc.lambda_crit = region_lambda_crit(in);
  if (in.region_case == RegionCase::InteriorFull) {
    const PlausibleRegion pr = case1_plausible(in.d, in.det_F(), in.V_R0, in.N);
    rc.gaussian_invalid = pr.gaussian_invalid;
    rc.s_crit = pr.s_crit;
    rc.c_crit_exact = pr.c_crit_exact;
    rc.c_crit_asymptotic = pr.c_crit_asymptotic;
  } else if (rc.lambda_crit > 0.0 && rc.lambda_crit < 1.0) {
    rc.s_crit = region_size(in, rc.lambda_crit).s;
    rc.c_crit_exact = region_credibility(in, rc.lambda_crit, rc.lambda_crit);
  } else {
    rc.gaussian_invalid = true;
  }
  if (rc.gaussian_invalid) rc.warnings.push_back("lambda_crit >= 1: Gaussian approximation invalid");
  if (in.region_case == RegionCase::InteriorTruncated && in.N > 0.0 && rc.lambda_crit > 0.0 &&
      rc.lambda_crit < 1.0 && in.delta_rP.size() == in.d && in.delta_rP.norm() > 0.0) {
    rc.N_min = n_min(rc.lambda_crit, in.F / in.N, in.delta_rP);
  }

  const double crit = rc.lambda_crit;
  parallel_for_chunks(n, [&](std::size_t i) {
    const RegionPoint p = region_size(in, lambdas[i]);
    rc.sizes[i] = p.s;
    rc.gammas[i] = p.gamma;
    rc.credibilities[i] = region_credibility(in, lambdas[i], crit);
    if (p.s > 1.0) rc.flags[i] = "exceeds_unit_bound";
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (rc.sizes[i] > 1.0) {
      rc.warnings.push_back("some sizes exceed the unit physical upper bound");
      break;
    }
  }
  return rc;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    std::vector<double> row(m.cols());
    for (int j = 0; j < m.cols(); ++j) row[j] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != static_cast<std::size_t>(m.cols())) throw ConfigError("ragged matrix in JSON");
    for (std::size_t k = 0; k < rows[i].size(); ++k) m(i, k) = rows[i][k];
  }
  return m;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// JSON numbers cannot be NaN; missing quantities are written as null.
inline nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); }

inline double number_or_nan(const nlohmann::json& j) { return j.is_null() ? detail::kNaN : j.get<double>(); }

inline void to_json(nlohmann::json& j, const RegionInputs& in) {
  j = {{"case", to_string(in.region_case)}, {"d", in.d},
       {"N", in.N}, {"F", matrix_to_json(in.F)},
       {"V_R0", in.V_R0}, {"lambda_int", in.lambda_int},
       {"lambda_bd", in.lambda_bd}, {"g_ml", vector_to_json(in.g_ml)},
       {"delta_rP", vector_to_json(in.delta_rP)}, {"det_F", in.det_F()}};
}

inline void from_json(const nlohmann::json& j, RegionInputs& in) {
  in.region_case = region_case_from_string(j.at("case").get<std::string>());
  in.d = j.at("d").get<int>();
  in.N = j.at("N").get<double>();
  in.F = matrix_from_json(j.at("F"));
  in.V_R0 = j.at("V_R0").get<double>();
  in.lambda_int = j.at("lambda_int").get<double>();
  in.lambda_bd = j.at("lambda_bd").get<double>();
  in.g_ml = vector_from_json(j.at("g_ml"));
  in.delta_rP = vector_from_json(j.at("delta_rP"));
}

/// Summary plus the full grid; the inputs block is enough to rebuild the curve.
inline void to_json(nlohmann::json& j, const RegionCurve& rc) {
  j = {{"lambda_crit", rc.lambda_crit},
       {"s_crit", number_or_null(rc.s_crit)},
       {"c_crit_exact", number_or_null(rc.c_crit_exact)},
       {"c_crit_asymptotic", number_or_null(rc.c_crit_asymptotic)},
       {"c_crit_asymptotic_is_approximate", true},
       {"case", to_string(rc.inputs.region_case)},
       {"N_min", number_or_null(rc.N_min)},
       {"gaussian_invalid", rc.gaussian_invalid},
       {"inputs", rc.inputs},
       {"lambdas", rc.lambdas},
       {"s", rc.sizes},
       {"c", rc.credibilities},
       {"warnings", rc.warnings}};
}

inline void write_csv(std::ostream& os, const RegionCurve& rc) {
  os.precision(17);
  os << "lambda,s_analytic,c_analytic,gamma,flags\n";
  for (std::size_t i = 0; i < rc.lambdas.size(); ++i) {
    os << rc.lambdas[i] << ',' << rc.sizes[i] << ',' << rc.credibilities[i] << ',';
    if (std::isfinite(rc.gammas[i])) os << rc.gammas[i];
    os << ',' << rc.flags[i] << '\n';
  }
}

}  // namespace bayesregion

#endif  // BAYESREGION_REGIONS_HPP
