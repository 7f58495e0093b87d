#include "fracext/kernels.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <memory>

#include "fracext/specfun.hpp"

namespace fracext::kernels {

using specfun::gamma_fn;
using specfun::scaled_bessel_k;

namespace {

std::atomic<long> g_eval_count{0};

// Mode table for a fixed (x, z): eigenvalues and products phi_k(x) phi_k(z),
// grown on demand.
struct PairTable {
    const SpectralManifold* m;
    Point x, z;
    std::vector<double> lambda;
    std::vector<double> weight;

    void extend(int count) {
        int k = static_cast<int>(lambda.size()) + 1;  // mode 0 excluded
        for (; k <= count; ++k) {
            lambda.push_back(m->eigenvalue(k));
            weight.push_back(m->eigenfunction(k, x) * m->eigenfunction(k, z));
        }
    }
};

// Number of modes needed so the heat tail bound at time t is below tol.
int heat_modes_needed(const SpectralManifold& m, double t, double tol) {
    tol = std::max(tol, 1e-18);
    int k = 8;
    while (m.heat_tail_bound(k + 1, t) > tol && k < 4'000'000) k *= 2;
    return k;
}

}  // namespace

long evaluation_count() { return g_eval_count.load(); }

double heat(const SpectralManifold& m, double t, const Point& x, const Point& z,
            double rel_tol, bool include_zero_mode) {
    if (!(t > 0.0)) throw std::invalid_argument("heat: requires t > 0");
    g_eval_count.fetch_add(1, std::memory_order_relaxed);
    const double scale = 1.0 / m.volume();
    const double tol = rel_tol * scale;
    double sum = include_zero_mode ? scale : 0.0;
    const int needed = heat_modes_needed(m, t, tol);
    for (int k = 1; k <= needed; ++k) {
        double e = std::exp(-m.eigenvalue(k) * t);
        if (e == 0.0) break;  // eigenvalues nondecreasing
        sum += e * m.eigenfunction(k, x) * m.eigenfunction(k, z);
    }
    return sum;
}

double wave(const SpectralManifold& m, double tau, const Point& x, const Point& z, int cutoff) {
    if (tau < 0.0) throw std::invalid_argument("wave: requires tau >= 0");
    g_eval_count.fetch_add(1, std::memory_order_relaxed);
    double sum = tau / m.volume();
    for (int k = 1; k <= cutoff; ++k) {
        double lam = m.eigenvalue(k);
        double sl = std::sqrt(lam);
        sum += std::sin(tau * sl) / sl * m.eigenfunction(k, x) * m.eigenfunction(k, z);
    }
    return sum;
}

double neumann_scale(double s) { return std::pow(2.0, s) / gamma_fn(1.0 - s); }

double neumann_trace_constant(double s) {
    return std::pow(2.0, 2.0 * s - 1.0) * gamma_fn(s) / gamma_fn(1.0 - s);
}

double dirichlet_trace_slope(double s) {
    return std::pow(2.0, 1.0 - 2.0 * s) * gamma_fn(1.0 - s) / gamma_fn(s);
}

double neumann_mode_profile(double s, double lambda, double y) {
    if (!(lambda > 0.0)) throw std::invalid_argument("neumann_mode_profile: lambda > 0");
    return neumann_scale(s) * std::pow(lambda, -s) * scaled_bessel_k(s, std::sqrt(lambda) * y);
}

double neumann_mode_profile_dy(double s, double lambda, double y) {
    // d/dz [z^s K_s(z)] = -z^{2s-1} z^{1-s} K_{1-s}(z)
    double z = std::sqrt(lambda) * y;
    return -neumann_scale(s) * std::pow(lambda, 0.5 - s) * std::pow(z, 2.0 * s - 1.0) *
           scaled_bessel_k(1.0 - s, z);
}

double dirichlet_mode_profile(double s, double lambda, double y) {
    if (lambda == 0.0) return 1.0;
    return specfun::dirichlet_profile(s, std::sqrt(lambda) * y);
}

double dirichlet_mode_profile_dy(double s, double lambda, double y) {
    if (lambda == 0.0) return 0.0;
    double z = std::sqrt(lambda) * y;
    return -std::sqrt(lambda) * std::pow(z, 2.0 * s - 1.0) * scaled_bessel_k(1.0 - s, z) /
           (std::pow(2.0, s - 1.0) * gamma_fn(s));
}

namespace {

// Shared eigen-sum for both Poisson kernels. profile(lambda) must be bounded
// by bound_scale * 3 e^{-sqrt(lambda) y / 2} modewise.
double poisson_eigen_sum(const SpectralManifold& m, double y, double rel_tol,
                         const std::function<double(double)>& profile, double bound_scale,
                         const Point& x, const Point& z) {
    double sum = 0.0;
    int k = 1;
    double scale = bound_scale / m.volume();
    while (true) {
        double tail = 3.0 * bound_scale * m.exp_sqrt_tail_bound(k, 0.5 * y);
        if (tail < rel_tol * std::max(std::abs(sum), scale)) break;
        sum += profile(m.eigenvalue(k)) * m.eigenfunction(k, x) * m.eigenfunction(k, z);
        ++k;
        if (k > 2'000'000) throw std::runtime_error("poisson_eigen_sum: no convergence");
    }
    return sum;
}

}  // namespace

double neumann_poisson_eigen(const SpectralManifold& m, double s, double y, const Point& x,
                             const Point& z, double rel_tol) {
    if (!(y > 0.0)) throw std::invalid_argument("neumann_poisson_eigen: requires y > 0");
    g_eval_count.fetch_add(1, std::memory_order_relaxed);
    const double lam1 = m.eigenvalue(1);
    const double bound = neumann_scale(s) * std::pow(lam1, -s) * std::pow(2.0, s - 1.0) *
                         gamma_fn(s);
    return poisson_eigen_sum(
        m, y, rel_tol,
        [&](double lam) { return neumann_mode_profile(s, lam, y); }, bound, x, z);
}

double dirichlet_poisson_eigen(const SpectralManifold& m, double s, double y, const Point& x,
                               const Point& z, double rel_tol, bool include_zero_mode) {
    if (!(y > 0.0)) throw std::invalid_argument("dirichlet_poisson_eigen: requires y > 0");
    g_eval_count.fetch_add(1, std::memory_order_relaxed);
    double sum = include_zero_mode ? 1.0 / m.volume() : 0.0;
    sum += poisson_eigen_sum(
        m, y, rel_tol,
        [&](double lam) { return dirichlet_mode_profile(s, lam, y); }, 1.0, x, z);
    return sum;
}

namespace {

// Mean-zero heat kernel K_t - 1/vol as a function of t with fixed x != z,
// backed by a growing pair table. Below the Gaussian cutoff t < d^2/400 the
// full kernel is smaller than e^{-100} of its scale, so only the constant
// -1/vol survives there.
struct MeanZeroHeat {
    PairTable table;
    double rel_tol;
    double t_floor;

    MeanZeroHeat(const SpectralManifold& m, const Point& x, const Point& z, double tol)
        : table{&m, m.canonical(x), m.canonical(z), {}, {}}, rel_tol(tol) {
        double d = m.geodesic_distance(x, z);
        t_floor = d * d / 400.0;
    }

    double operator()(double t) {
        if (t < t_floor) return -1.0 / table.m->volume();
        int need = heat_modes_needed(*table.m, t, rel_tol / table.m->volume());
        table.extend(need);
        double sum = 0.0;
        for (int i = 0; i < need; ++i) {
            double e = std::exp(-table.lambda[i] * t);
            if (e == 0.0) break;  // eigenvalues are nondecreasing
            sum += e * table.weight[i];
        }
        return sum;
    }
};

}  // namespace

double neumann_poisson_from_heat(const SpectralManifold& m, double s, double y, const Point& x,
                                 const Point& z, double rel_tol) {
    if (y < 0.0) throw std::invalid_argument("neumann_poisson_from_heat: requires y >= 0");
    if (!(m.geodesic_distance(x, z) > 0.0))
        throw std::invalid_argument("neumann_poisson_from_heat: requires x != z");
    g_eval_count.fetch_add(1, std::memory_order_relaxed);
    // Truncation noise in the summed kernel must sit well below the
    // quadrature budget or the adaptive refinement chases it.
    auto kt = std::make_shared<MeanZeroHeat>(m, x, z, 1e-4 * rel_tol);
    const double q = 0.25 * y * y;
    specfun::HalflineIntegrand g;
    g.f = [kt, q, s](double t) { return (*kt)(t) * std::exp(-q / t) * std::pow(t, s - 1.0); };
    g.singularity_exponent = s - 1.0;
    g.decay = specfun::DecayClass::Both;  // Gaussian near 0 from the heat bound
    auto res = specfun::integrate_halfline(g, rel_tol);
    if (!res.converged)
        throw std::runtime_error("neumann_poisson_from_heat: quadrature did not converge");
    return res.value;
}

double dirichlet_poisson_from_heat(const SpectralManifold& m, double s, double y, const Point& x,
                                   const Point& z, double rel_tol, bool include_zero_mode) {
    if (!(y > 0.0)) throw std::invalid_argument("dirichlet_poisson_from_heat: requires y > 0");
    if (!(m.geodesic_distance(x, z) > 0.0))
        throw std::invalid_argument("dirichlet_poisson_from_heat: requires x != z");
    g_eval_count.fetch_add(1, std::memory_order_relaxed);
    auto kt = std::make_shared<MeanZeroHeat>(m, x, z, 1e-4 * rel_tol);
    const double q = 0.25 * y * y;
    specfun::HalflineIntegrand g;
    g.f = [kt, q, s](double t) { return (*kt)(t) * std::exp(-q / t) * std::pow(t, -1.0 - s); };
    g.singularity_exponent = -1.0 - s;
    g.decay = specfun::DecayClass::Both;
    auto res = specfun::integrate_halfline(g, rel_tol);
    if (!res.converged)
        throw std::runtime_error("dirichlet_poisson_from_heat: quadrature did not converge");
    double value = std::pow(y, 2.0 * s) * res.value;
    if (include_zero_mode) {
        // y^{2s} (1/vol) int e^{-y^2/4t} t^{-1-s} dt = 4^s Gamma(s) / vol
        value += std::pow(4.0, s) * gamma_fn(s) / m.volume();
    }
    return value;
}

double KernelEvaluator::operator()(double param, const Point& x, const Point& z) const {
    switch (kind_) {
        case KernelKind::Heat:
            return heat(*m_, param, x, z, rel_tol_, zero_mode_);
        case KernelKind::Wave:
            return wave(*m_, param, x, z, wave_cutoff_);
        case KernelKind::NeumannPoisson:
            return rep_ == Representation::EigenSum
                       ? neumann_poisson_eigen(*m_, s_, param, x, z, rel_tol_)
                       : neumann_poisson_from_heat(*m_, s_, param, x, z, rel_tol_);
        case KernelKind::DirichletPoisson:
            return rep_ == Representation::EigenSum
                       ? dirichlet_poisson_eigen(*m_, s_, param, x, z, rel_tol_, zero_mode_)
                       : dirichlet_poisson_from_heat(*m_, s_, param, x, z, rel_tol_, zero_mode_);
    }
    return 0.0;
}

}  // namespace fracext::kernels
