#pragma once

namespace vmp {

// psi(x) for x > 0.
double digamma(double x);

// log Gamma(x) for x > 0; reentrant.
double log_gamma(double x);

// Ei(x) = -int_{-x}^inf e^{-t}/t dt, x != 0.
double exponential_integral_ei(double x);

// e^z E1(z) = -e^z Ei(-z) for z > 0, without overflow for large z.
double scaled_exponential_integral_e1(double z);

// log(1 + e^x) without overflow.
double log1pexp(double x);

// log Phi(x) for the standard normal cdf.
double log_norm_cdf(double x);

}  // namespace vmp
