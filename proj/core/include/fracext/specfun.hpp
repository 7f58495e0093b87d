#pragma once

// Special functions and half-line quadrature: Gamma, modified Bessel K of
// real order evaluated through its exponential integral representation,
// adaptive integration of half-line integrands with endpoint power behavior
// and exponential / inverse-Gaussian decay, and the Basset cosine integral.

#include <functional>
#include <stdexcept>
#include <vector>

#include "fracext/numerics.hpp"

namespace fracext::specfun {

using numerics::QuadResult;

enum class DecayClass {
    Exponential,       // ~ exp(-b t) as t -> inf
    InverseGaussian,   // ~ exp(-a / t) as t -> 0
    Both,
};

struct HalflineIntegrand {
    std::function<double(double)> f;     // defined for t > 0
    double singularity_exponent = 0.0;   // f ~ t^alpha near 0
    DecayClass decay = DecayClass::Both;

    bool integrable_near_origin() const {
        return singularity_exponent > -1.0 || decay != DecayClass::Exponential;
    }
};

// Gamma function for x > 0.
double gamma_fn(double x);

// K_nu(z) through the representation
//   K_nu(z) = 1/2 (z/2)^{-nu} \int_0^inf exp(-t - z^2/(4t)) t^{nu-1} dt.
// Supported for nu in (0, 1.5] and z in [1e-6, inf); values for z > 705
// underflow to zero, z below 1e-6 is rejected (the value grows like z^{-nu}).
double bessel_k(double nu, double z);

// K_{|l - s|}(z) for l = 0..count-1, via the upward order recurrence.
std::vector<double> bessel_k_shifted_orders(double s, double z, int count);

// z^s K_s(z), continuous at z = 0 where it tends to 2^{s-1} Gamma(s).
double scaled_bessel_k(double s, double z);

// scaled_bessel_k normalized to 1 at z = 0.
double dirichlet_profile(double s, double z);

// \int_0^inf f(t) dt after the substitution t = e^u, split at the interior
// maximum, adaptive Gauss panels on both sides.
QuadResult integrate_halfline(const HalflineIntegrand& g, double rel_tol);

// Convenience overload for plain callables.
QuadResult integrate_halfline(const std::function<double(double)>& f, double rel_tol,
                              double singularity_exponent = 0.0,
                              DecayClass decay = DecayClass::Both);

// \int_0^inf (tau^2 + y^2)^{-(1/2+s)} cos(sqrt(lambda) tau) dtau.
// Oscillatory tails are summed over half-periods with iterated averaging;
// sqrt(lambda)*y <= 200 is the supported range.
double basset_integral(double s, double lambda, double y);

}  // namespace fracext::specfun
