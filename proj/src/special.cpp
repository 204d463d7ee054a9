#include "vmp/special.hpp"

#include <math.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "vmp/linalg.hpp"

namespace vmp {

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw DomainError("digamma: argument must be positive and finite, got " + std::to_string(x));
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double r = 1.0 / (x * x);
  // Bernoulli terms B_2 .. B_14
  const double series =
      r * (1.0 / 12 -
           r * (1.0 / 120 -
                r * (1.0 / 252 -
                     r * (1.0 / 240 - r * (1.0 / 132 - r * (691.0 / 32760 - r * (1.0 / 12)))))));
  return acc + std::log(x) - 0.5 / x - series;
}

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw DomainError("log_gamma: argument must be positive and finite, got " + std::to_string(x));
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

namespace {

constexpr double kEuler = 0.57721566490153286061;

double ei_series(double x) {
  double term = 1.0, sum = 0.0;
  for (int k = 1; k < 500; ++k) {
    term *= x / k;
    const double add = term / k;
    sum += add;
    if (std::fabs(add) <= 1e-17 * std::fabs(sum)) break;
  }
  return kEuler + std::log(std::fabs(x)) + sum;
}

// e^z E1(z), z > 1, by modified Lentz evaluation of the continued fraction.
double e1_scaled_continued_fraction(double z) {
  constexpr double tiny = 1e-300;
  double b = z + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h;
}

}  // namespace

double exponential_integral_ei(double x) {
  if (x == 0.0 || !std::isfinite(x))
    throw DomainError("exponential_integral_ei: argument must be finite and nonzero");
  if (x < 0.0) {
    const double z = -x;
    if (z <= 1.0) return ei_series(x);
    return -e1_scaled_continued_fraction(z) * std::exp(-z);
  }
  if (x < 40.0) return ei_series(x);
  double sum = 1.0, term = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double next = term * k / x;
    if (next > term) break;
    term = next;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return std::exp(x) / x * sum;
}

double scaled_exponential_integral_e1(double z) {
  if (!(z > 0.0) || !std::isfinite(z))
    throw DomainError("scaled_exponential_integral_e1: argument must be positive and finite");
  if (z <= 1.0) return -std::exp(z) * ei_series(-z);
  return e1_scaled_continued_fraction(z);
}

double log1pexp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double log_norm_cdf(double x) {
  if (x > 5.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  if (x > -35.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  const double r = 1.0 / (x * x);
  const double tail = 1.0 - r * (1.0 - r * (3.0 - r * (15.0 - r * 105.0)));
  return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(tail);
}

}  // namespace vmp
