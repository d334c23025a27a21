#include "ordqr/distributions.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace ordqr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Intervals starting this many standard deviations from the mean go to the
// tail rejection samplers instead of the inverse CDF.
constexpr double kTailStart = 4.0;

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(what) + " must be positive and finite");
}

}  // namespace

double normal_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("normal_quantile: p outside [0, 1]");
  if (p == 0.0) return -kInf;
  if (p == 1.0) return kInf;

  static constexpr std::array<double, 6> a = {-3.969683028665376e+01, 2.209460984245205e+02,
                                              -2.759285104469687e+02, 1.383577518672690e+02,
                                              -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {-5.447609879822406e+01, 1.615858368580409e+02,
                                              -1.556989798598866e+02, 6.680131188771972e+01,
                                              -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {-7.784894002430293e-03, -3.223964580411365e-01,
                                              -2.400758277161838e+00, -2.549732539343734e+00,
                                              4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {7.784695709041462e-03, 3.224671290700398e-01,
                                              2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley step. In the upper half work with the complement so the
  // residual keeps its relative precision.
  if (x <= 0.0) {
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  } else {
    const double e = (1.0 - p) - normal_ccdf(x);
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double sample_inverse_gaussian(double mean, double shape, Rng& rng) {
  require_positive(mean, "inverse Gaussian mean");
  require_positive(shape, "inverse Gaussian shape");
  const double z = rng.normal();
  const double a = mean * z * z / (2.0 * shape);
  // mean * (1 + a - sqrt(a^2 + 2a)) rewritten without cancellation.
  const double y = mean / (1.0 + a + std::sqrt(a * (a + 2.0)));
  if (rng.uniform() <= mean / (mean + y)) return y;
  return mean * (mean / y);
}

namespace {

// GIG(1/2, rho1, rho2) is the reciprocal of IG(mean = rho2/rho1,
// shape = rho2^2).
double sample_gig_half(double rho1, double rho2, Rng& rng) {
  const double mean = rho2 / rho1;
  const double shape = rho2 * rho2;
  const double z = rng.normal();
  const double a = mean * z * z / (2.0 * shape);
  const double root = 1.0 + a + std::sqrt(a * (a + 2.0));
  // y = mean / root is the smaller IG root; its partner is mean * root.
  if (rng.uniform() * (1.0 + 1.0 / root) <= 1.0) return root / mean;
  return 1.0 / (mean * root);
}

// log of z^(lambda-1) exp(-omega/2 (z + 1/z)).
double log_gig_kernel(double z, double lambda, double omega) {
  return (lambda - 1.0) * std::log(z) - 0.5 * omega * (z + 1.0 / z);
}

// Root of d/dz log|(z - m) sqrt(g(z))| on (lo, hi), where the derivative is
// positive at lo and negative at hi.
double bound_root(double lo, double hi, double mode, double lambda, double omega) {
  auto slope = [&](double z) {
    return 1.0 / (z - mode) + 0.5 * ((lambda - 1.0) / z - 0.5 * omega * (1.0 - 1.0 / (z * z)));
  };
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Standardized GIG with density proportional to
// z^(lambda-1) exp(-omega/2 (z + 1/z)), lambda >= 0, omega > 0.
double sample_std_gig_rou(double lambda, double omega, Rng& rng) {
  const double mode = ((lambda - 1.0) + std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega)) / omega;
  const double log_peak = log_gig_kernel(mode, lambda, omega);
  auto sqrt_ratio = [&](double z) { return std::exp(0.5 * (log_gig_kernel(z, lambda, omega) - log_peak)); };

  const double z_minus = bound_root(0.0, mode, mode, lambda, omega);
  double hi = 2.0 * mode + 1.0;
  auto slope_at = [&](double z) {
    return 1.0 / (z - mode) + 0.5 * ((lambda - 1.0) / z - 0.5 * omega * (1.0 - 1.0 / (z * z)));
  };
  while (slope_at(hi) > 0.0) hi *= 2.0;
  const double z_plus = bound_root(mode, hi, mode, lambda, omega);
  const double v_minus = (z_minus - mode) * sqrt_ratio(z_minus);
  const double v_plus = (z_plus - mode) * sqrt_ratio(z_plus);

  for (;;) {
    const double u = rng.uniform();
    const double v = v_minus + (v_plus - v_minus) * rng.uniform();
    const double z = v / u + mode;
    if (z <= 0.0) continue;
    if (2.0 * std::log(u) <= log_gig_kernel(z, lambda, omega) - log_peak) return z;
  }
}

}  // namespace

double sample_gig_rou(const GigParams& params, Rng& rng) {
  require_positive(params.rho1, "GIG rho1");
  require_positive(params.rho2, "GIG rho2");
  if (params.nu < 0.0) {
    // X ~ GIG(nu, r1, r2) iff 1/X ~ GIG(-nu, r2, r1).
    return 1.0 / sample_gig_rou({-params.nu, params.rho2, params.rho1}, rng);
  }
  const double omega = params.rho1 * params.rho2;
  return (params.rho1 / params.rho2) * sample_std_gig_rou(params.nu, omega, rng);
}

double sample_gig(const GigParams& params, Rng& rng) {
  require_positive(params.rho1, "GIG rho1");
  require_positive(params.rho2, "GIG rho2");
  if (params.nu == 0.5) return sample_gig_half(params.rho1, params.rho2, rng);
  if (params.nu == -0.5) return 1.0 / sample_gig_half(params.rho2, params.rho1, rng);
  return sample_gig_rou(params, rng);
}

namespace {

// Standard normal on (a, b) with a >= kTailStart.
double sample_upper_tail(double a, double b, Rng& rng) {
  if (b - a < 1.0 / a) {
    // Short interval: uniform proposal, accept with exp((a^2 - z^2) / 2).
    for (;;) {
      const double z = a + (b - a) * rng.uniform();
      if (std::log(rng.uniform()) <= -0.5 * (z - a) * (z + a)) return z;
    }
  }
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a + rng.exponential() / rate;
    if (z >= b) continue;
    const double gap = z - rate;
    if (std::log(rng.uniform()) <= -0.5 * gap * gap) return z;
  }
}

}  // namespace

double sample_std_trunc_normal(double a, double b, Rng& rng) {
  if (!(a < b)) throw DomainError("truncated normal: lower bound must be below upper bound");
  if (a >= kTailStart) return sample_upper_tail(a, b, rng);
  if (b <= -kTailStart) return -sample_upper_tail(-b, -a, rng);

  double z;
  if (a > 0.0) {
    const double qa = normal_ccdf(a);
    const double qb = normal_ccdf(b);
    z = -normal_quantile(qb + (qa - qb) * rng.uniform());
  } else {
    const double pa = normal_cdf(a);
    const double pb = normal_cdf(b);
    z = normal_quantile(pa + (pb - pa) * rng.uniform());
  }
  if (!(z > a)) z = std::nextafter(a, kInf);
  if (!(z < b)) z = std::nextafter(b, -kInf);
  return z;
}

double sample_trunc_normal(const TruncNormalParams& params, Rng& rng) {
  require_positive(params.variance, "truncated normal variance");
  if (!std::isfinite(params.mean)) throw DomainError("truncated normal mean must be finite");
  if (!(params.lower < params.upper))
    throw DomainError("truncated normal: lower bound must be below upper bound");
  const double sd = std::sqrt(params.variance);
  const double a = (params.lower - params.mean) / sd;
  const double b = (params.upper - params.mean) / sd;
  double x = params.mean + sd * sample_std_trunc_normal(a, b, rng);
  if (!(x > params.lower)) x = std::nextafter(params.lower, kInf);
  if (!(x < params.upper)) x = std::nextafter(params.upper, -kInf);
  return x;
}

double sample_gamma(double shape, double rate, Rng& rng) {
  require_positive(shape, "gamma shape");
  require_positive(rate, "gamma rate");
  if (shape < 1.0) {
    // Boost: G(a) = G(a + 1) U^(1/a).
    const double g = sample_gamma(shape + 1.0, 1.0, rng);
    return g * std::exp(std::log(rng.uniform()) / shape) / rate;
  }
  // Marsaglia and Tsang.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = rng.normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

namespace {

struct StandardSampler {
  Rng& rng;

  double operator()(const dist::Normal& d) const {
    if (!std::isfinite(d.mean)) throw DomainError("normal mean must be finite");
    require_positive(d.variance, "normal variance");
    return d.mean + std::sqrt(d.variance) * rng.normal();
  }
  double operator()(const dist::Gamma& d) const { return sample_gamma(d.shape, d.rate, rng); }
  double operator()(const dist::InverseGamma& d) const {
    require_positive(d.scale, "inverse gamma scale");
    return d.scale / sample_gamma(d.shape, 1.0, rng);
  }
  double operator()(const dist::Exponential& d) const {
    require_positive(d.rate, "exponential rate");
    return rng.exponential() / d.rate;
  }
  double operator()(const dist::Uniform& d) const {
    if (!(d.a < d.b) || !std::isfinite(d.a) || !std::isfinite(d.b))
      throw DomainError("uniform bounds must be finite with a < b");
    return d.a + (d.b - d.a) * rng.uniform();
  }
  double operator()(const dist::Logistic& d) const {
    if (!std::isfinite(d.location)) throw DomainError("logistic location must be finite");
    require_positive(d.scale, "logistic scale");
    const double u = rng.uniform();
    return d.location + d.scale * std::log(u / (1.0 - u));
  }
};

}  // namespace

double sample_standard(const StandardDist& d, Rng& rng) { return std::visit(StandardSampler{rng}, d); }

}  // namespace ordqr
