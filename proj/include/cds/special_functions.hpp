#pragma once

namespace cds::stats {

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1],
/// evaluated by the modified Lentz continued fraction. Throws
/// Error(kInvalidArgument) outside the domain.
double regularized_incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `df` > 0 degrees of freedom,
/// computed as I_{df/(df+t^2)}(df/2, 1/2).
double student_t_two_tailed_p(double t, double df);

}  // namespace cds::stats
