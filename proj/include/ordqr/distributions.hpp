#ifndef ORDQR_DISTRIBUTIONS_HPP
#define ORDQR_DISTRIBUTIONS_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <variant>

#include "ordqr/errors.hpp"
#include "ordqr/random.hpp"

namespace ordqr {

template <typename Scalar>
void require_quantile_level(Scalar theta) {
  if (!(theta > Scalar(0) && theta < Scalar(1)))
    throw DomainError("quantile level must lie in (0, 1)");
}

/// Check loss rho_theta(t) = t*theta - t*I(t < 0).
template <typename Scalar>
Scalar check_loss(Scalar t, Scalar theta) {
  require_quantile_level(theta);
  return t < Scalar(0) ? t * (theta - Scalar(1)) : t * theta;
}

/// Skewed Laplace density theta(1-theta) exp(-rho_theta(eps)), unit scale.
template <typename Scalar>
Scalar sld_density(Scalar eps, Scalar theta) {
  return theta * (Scalar(1) - theta) * std::exp(-check_loss(eps, theta));
}

/// Closed-form skewed Laplace CDF; F(0) = theta.
template <typename Scalar>
Scalar sld_cdf(Scalar eps, Scalar theta) {
  require_quantile_level(theta);
  if (eps <= Scalar(0)) return theta * std::exp((Scalar(1) - theta) * eps);
  return Scalar(1) - (Scalar(1) - theta) * std::exp(-theta * eps);
}

/// Mass of the skewed Laplace law on (lo, hi], computed from whichever tail
/// avoids cancellation. Either bound may be infinite.
template <typename Scalar>
Scalar sld_interval_probability(Scalar lo, Scalar hi, Scalar theta) {
  require_quantile_level(theta);
  if (!(lo < hi)) return Scalar(0);
  if (lo >= Scalar(0)) {
    // Both in the right tail: S(lo) - S(hi), S(e) = (1-theta) exp(-theta e).
    const Scalar s_lo = (Scalar(1) - theta) * std::exp(-theta * lo);
    const Scalar s_hi = std::isinf(hi) ? Scalar(0) : (Scalar(1) - theta) * std::exp(-theta * hi);
    return s_lo - s_hi;
  }
  if (hi <= Scalar(0)) {
    const Scalar f_hi = theta * std::exp((Scalar(1) - theta) * hi);
    const Scalar f_lo = std::isinf(lo) ? Scalar(0) : theta * std::exp((Scalar(1) - theta) * lo);
    return f_hi - f_lo;
  }
  return sld_cdf(hi, theta) - sld_cdf(lo, theta);
}

template <typename Scalar>
Scalar normal_cdf(Scalar x) {
  return Scalar(0.5) * std::erfc(-x / std::numbers::sqrt2_v<Scalar>);
}

/// 1 - Phi(x) without cancellation for large x.
template <typename Scalar>
Scalar normal_ccdf(Scalar x) {
  return Scalar(0.5) * std::erfc(x / std::numbers::sqrt2_v<Scalar>);
}

/// Standard normal quantile: Acklam's rational approximation followed by one
/// Halley step against erfc, giving close to full double precision.
double normal_quantile(double p);

/// Parameters of GIG(nu, rho1, rho2), density
/// proportional to x^(nu-1) exp{-(rho1^2/x + rho2^2 x)/2} on x > 0.
struct GigParams {
  double nu;
  double rho1;
  double rho2;
};

/// Skewed Laplace parameters. Scale is fixed at one.
struct SldParams {
  double theta;
  double location = 0.0;

  double xi() const { return 1.0 - 2.0 * theta; }
  double zeta() const { return theta * (1.0 - theta); }
};

struct TruncNormalParams {
  double mean;
  double variance;
  double lower;
  double upper;
};

/// GIG variate. nu = 1/2 is drawn exactly as the reciprocal of an inverse
/// Gaussian; other orders use ratio-of-uniforms with mode shift.
double sample_gig(const GigParams& params, Rng& rng);

/// Ratio-of-uniforms GIG sampler valid for any order. Exposed so the fast
/// path can be checked against it.
double sample_gig_rou(const GigParams& params, Rng& rng);

/// Inverse Gaussian IG(mean, shape) by Michael, Schucany and Haas.
double sample_inverse_gaussian(double mean, double shape, Rng& rng);

/// Normal restricted to the open interval (lower, upper). Inverse CDF inside
/// the body; exponential or uniform proposal rejection once the interval is
/// more than four standard deviations from the mean.
double sample_trunc_normal(const TruncNormalParams& params, Rng& rng);

/// Standard normal restricted to (a, b), a >= 0 assumed by the tail routine.
double sample_std_trunc_normal(double a, double b, Rng& rng);

namespace dist {

struct Normal {
  double mean;
  double variance;
};
/// Gamma with rate parameterization (mean = shape / rate).
struct Gamma {
  double shape;
  double rate;
};
/// Inverse gamma with scale parameterization (mean = scale / (shape - 1)).
struct InverseGamma {
  double shape;
  double scale;
};
struct Exponential {
  double rate;
};
struct Uniform {
  double a;
  double b;
};
struct Logistic {
  double location;
  double scale;
};

}  // namespace dist

using StandardDist = std::variant<dist::Normal, dist::Gamma, dist::InverseGamma,
                                  dist::Exponential, dist::Uniform, dist::Logistic>;

double sample_standard(const StandardDist& d, Rng& rng);

double sample_gamma(double shape, double rate, Rng& rng);

}  // namespace ordqr

#endif  // ORDQR_DISTRIBUTIONS_HPP
