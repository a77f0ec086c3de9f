#pragma once

namespace nvi::stats {

/// Regularized incomplete beta function I_x(a, b), a, b > 0, x in [0, 1].
double incomplete_beta(double a, double b, double x);

/// Two-sided tail probability P(|T| >= |t|) for Student's t with `df` degrees
/// of freedom.
double student_t_two_sided(double t, double df);

}  // namespace nvi::stats
