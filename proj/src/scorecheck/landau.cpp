// Standard Landau density and survival function by numerical quadrature.
//
// Two families of integral representations are used, each where it is well
// conditioned:
//
//   Laplace form   p(x)  = (1/pi) int_0^inf exp(-u log u - x u) sin(pi u) du
//                  sf(x) = (1/pi) int_0^inf exp(-u log u - x u) sin(pi u) / u du
//     (the second follows from the first by integrating e^{-tu} over t >= x).
//     The envelope exp(-u log u - x u) peaks at exp(e^{-1-x}), so these are
//     only used for x >= -1 where the peak is at most e.
//
//   Fourier form   p(x)  = (1/pi) int_0^inf exp(-pi s/2) cos(s x + s log s) ds
//                  sf(x) = 1/2 - (1/pi) int_0^inf exp(-pi s/2) sin(s x + s log s) / s ds
//     from the characteristic function exp(-pi|t|/2 - i t log|t|) and the
//     Gil-Pelaez inversion. Bounded integrand, used for x < -1.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "scorecheck/distributions.hpp"
#include "scorecheck/error.hpp"

namespace scorecheck {

namespace {

using std::numbers::pi;

// Envelope cut-off: exp(-42) ~ 5.7e-19.
constexpr double kLogCutoff = 42.0;
constexpr double kRelTol = 1e-12;

template <class F>
double gk(F&& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, kRelTol);
}

// Integrate f over [a, b] as a sum of panels no wider than `width`, so that
// oscillatory integrands are resolved panel by panel.
template <class F>
double panels(F&& f, double a, double b, double width) {
  double total = 0.0;
  for (double lo = a; lo < b; lo += width) total += gk(f, lo, std::min(b, lo + width));
  return total;
}

// Smallest U beyond the envelope peak with u log u + x u >= kLogCutoff.
double laplace_upper_limit(double x) {
  auto h = [x](double u) { return u * std::log(u) + x * u; };
  double hi = 1.0;
  while (h(hi) < kLogCutoff) hi *= 2.0;
  double lo = hi / 2.0;
  if (hi > 1.0) {
    for (int i = 0; i < 80; ++i) {
      double mid = 0.5 * (lo + hi);
      (h(mid) < kLogCutoff ? lo : hi) = mid;
    }
  }
  // For x > 0, u log u >= -1/e gives a second, tighter bound.
  if (x > 0.0) hi = std::min(hi, (kLogCutoff + 1.0) / x);
  return hi;
}

// exp(-pi s / 2) / s < exp(-kLogCutoff) beyond this point.
constexpr double kFourierUpper = 2.0 * kLogCutoff / pi;

double laplace_pdf(double x) {
  const double upper = laplace_upper_limit(x);
  auto f = [x](double u) { return std::exp(-u * std::log(u) - x * u) * std::sin(pi * u); };
  return panels(f, 0.0, upper, 1.0) / pi;
}

double laplace_sf(double x) {
  const double upper = laplace_upper_limit(x);
  auto f = [x](double u) {
    return std::exp(-u * std::log(u) - x * u) * std::sin(pi * u) / u;
  };
  return panels(f, 0.0, upper, 1.0) / pi;
}

double fourier_pdf(double x) {
  auto f = [x](double s) { return std::exp(-0.5 * pi * s) * std::cos(s * x + s * std::log(s)); };
  return panels(f, 0.0, kFourierUpper, 0.5) / pi;
}

double fourier_sf(double x) {
  auto f = [x](double s) {
    return std::exp(-0.5 * pi * s) * std::sin(s * x + s * std::log(s)) / s;
  };
  // The integrand behaves like x + log s at the origin; tanh-sinh absorbs the
  // logarithmic endpoint singularity.
  thread_local boost::math::quadrature::tanh_sinh<double> near_zero;
  const double head = near_zero.integrate(f, 0.0, 0.5);
  const double tail = panels(f, 0.5, kFourierUpper, 0.5);
  return 0.5 - (head + tail) / pi;
}

}  // namespace

double landau_pdf(double x) {
  if (std::isnan(x)) throw ParameterError("landau_pdf: x is NaN");
  if (x == std::numeric_limits<double>::infinity() || x < -10.0) return 0.0;
  const double p = x >= 0.0 ? laplace_pdf(x) : fourier_pdf(x);
  return std::max(p, 0.0);
}

double landau_sf(double x) {
  if (std::isnan(x)) throw ParameterError("landau_sf: x is NaN");
  if (x < -10.0) return 1.0;
  if (x == std::numeric_limits<double>::infinity()) return 0.0;
  const double s = x >= -1.0 ? laplace_sf(x) : fourier_sf(x);
  return std::clamp(s, 0.0, 1.0);
}

double landau_sf(double x, double location, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ParameterError("landau_sf: scale must be positive");
  }
  if (!std::isfinite(location)) throw ParameterError("landau_sf: location must be finite");
  // Y = location + (2c/pi) (L + log(2c/pi)) for L standard Landau.
  const double z = 0.5 * pi * (x - location) / scale - std::log(2.0 * scale / pi);
  return landau_sf(z);
}

}  // namespace scorecheck
