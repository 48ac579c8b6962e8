#pragma once

// Scalar special functions used by the Dirichlet policy and its gradients.
// Self-contained so results are reproducible independent of the platform libm.

namespace ric {

// log Gamma(x) for x > 0, Lanczos approximation (g = 7, 9 terms).
double log_gamma(double x);

// psi(x) = d/dx log Gamma(x), x > 0. Recurrence up to x >= 10, then the
// asymptotic Bernoulli series.
double digamma(double x);

// psi'(x), x > 0. Same recurrence/asymptotic scheme as digamma.
double trigamma(double x);

}  // namespace ric
