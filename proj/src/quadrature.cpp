#include "cachegeo/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <sstream>
#include <string>

#include "cachegeo/model.hpp"

namespace cachegeo::quad {
namespace {

constexpr unsigned kMaxDepth = 15;

double integrate(const Integrand& f, double a, double b, std::string_view what, Tolerance tol) {
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, kMaxDepth, tol.relative * 0.1, &error, &l1);
  const double allowed = std::max(tol.absolute, tol.relative * std::abs(value));
  if (!std::isfinite(value) || !(error <= allowed)) {
    std::ostringstream os;
    os << "quadrature failed in " << what << ": interval [" << a << ", " << b << "], value " << value
       << ", error estimate " << error << " > allowed " << allowed;
    throw NumericFailure(os.str());
  }
  return value;
}

}  // namespace

double finite(const Integrand& f, double a, double b, std::string_view what, Tolerance tol) {
  if (a == b) return 0.0;
  return integrate(f, a, b, what, tol);
}

double tail(const Integrand& f, double start, double tail_exponent, std::string_view what,
            Tolerance tol) {
  // v = start * u^-beta, dv = beta * v / u du.
  const double beta = 1.0 / tail_exponent;
  const auto mapped = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double v = start * std::pow(u, -beta);
    const double jac = beta * v / u;
    if (!std::isfinite(jac)) return 0.0;
    return f(v) * jac;
  };
  return integrate(mapped, 0.0, 1.0, what, tol);
}

double semi_infinite(const Integrand& f, double scale, double tail_exponent, std::string_view what,
                     Tolerance tol) {
  return integrate(f, 0.0, scale, what, tol) + tail(f, scale, tail_exponent, what, tol);
}

double semi_infinite_exponential(const Integrand& f, std::string_view what, Tolerance tol) {
  const auto mapped = [&](double t) {
    if (t >= 1.0) return 0.0;
    const double one_minus = 1.0 - t;
    return f(t / one_minus) / (one_minus * one_minus);
  };
  return integrate(mapped, 0.0, 1.0, what, tol);
}

}  // namespace cachegeo::quad
