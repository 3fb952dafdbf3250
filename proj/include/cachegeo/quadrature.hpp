#pragma once

#include <functional>
#include <string_view>

namespace cachegeo::quad {

struct Tolerance {
  double absolute = 1e-10;
  double relative = 1e-10;
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod on [a, b]. Throws NumericFailure (naming `what`)
/// when the error estimate exceeds max(absolute, relative * |I|).
double finite(const Integrand& f, double a, double b, std::string_view what, Tolerance tol = {});

/// Integral over [0, inf) of an integrand decaying like v^-(1 + tail_exponent).
/// Split at `scale`: [0, scale] directly, the tail through
/// v = scale * u^(-1/tail_exponent), which maps the algebraic tail onto a
/// bounded integrand on u in (0, 1].
double semi_infinite(const Integrand& f, double scale, double tail_exponent, std::string_view what,
                     Tolerance tol = {});

/// Integral over [start, inf) of an integrand decaying like v^-(1 + tail_exponent).
double tail(const Integrand& f, double start, double tail_exponent, std::string_view what,
            Tolerance tol = {});

/// Integral over [0, inf) of an integrand with exponential decay, via
/// w = t / (1 - t).
double semi_infinite_exponential(const Integrand& f, std::string_view what, Tolerance tol = {});

}  // namespace cachegeo::quad
