#include "fracext/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "fracext/numerics.hpp"
#include "fracext/specfun.hpp"

namespace fracext::transforms {

using numerics::Matrix;
using specfun::gamma_fn;

namespace {

double rising(double x, int k) {
    return std::exp(std::lgamma(x + k) - std::lgamma(x));
}

// W_m(sigma) = int_0^inf [sum_{k>=1} (-lambda_k)^m e^{-lambda_k t} phi phi] t^{sigma-1} dt.
// Repeated integration by parts turns the weighted coefficient integrals into
// this form, which is evaluated at its natural scale: the t^{-j} weights that
// make the direct integrals explode in floating point never appear.
//   a_j = Gamma(1-s)/Gamma(j+1-s) W_j(s)          (j >= 1, full kernel)
//   D_l = Gamma(s)/Gamma(s+l+1)  W_{l+1}(1-s)     (l >= 0, full kernel)
struct DerivativeKernelMoment {
    const SpectralManifold* m;
    Point x, z;
    double d;
    mutable std::vector<double> lambda, weight;
    mutable std::vector<long double> loglam;

    DerivativeKernelMoment(const SpectralManifold& mm, const Point& xx, const Point& zz)
        : m(&mm), x(mm.canonical(xx)), z(mm.canonical(zz)) {
        d = m->geodesic_distance(x, z);
        if (!(d > 0.0)) throw std::invalid_argument("derivative kernel moment: x != z");
    }

    void extend(int count) const {
        while (static_cast<int>(lambda.size()) < count) {
            int idx = static_cast<int>(lambda.size()) + 1;
            lambda.push_back(m->eigenvalue(idx));
            loglam.push_back(logl((long double)lambda.back()));
            weight.push_back(m->eigenfunction(idx, x) * m->eigenfunction(idx, z));
        }
    }

    struct Moment {
        double value = 0.0;
        double noise = 0.0;  // absolute, from the cancellation of the mode sum
    };

    Moment integrate(int order, double sigma, double rel_tol) const {
        const double tstar = d * d / (4.0 * (order + 2.0 - sigma));
        // Below t_cut both the true integrand (Gaussian suppression) and the
        // summation noise (amplified cancellation) are negligible relative to
        // the peak; the cut keeps the adaptive refinement off the noise. The
        // pointwise size of the discarded region bounds the attainable
        // relative accuracy and widens the quadrature budget accordingly.
        double t_cut = 0.0;
        if (order >= 1) {
            double xs = 1.0 / tstar;
            double xc = xs + 4.0 * 48.0 / (d * d);
            for (int it = 0; it < 4; ++it)
                xc = xs + 4.0 / (d * d) * (48.0 + (order + 1.0 - sigma) * std::log(xc / xs));
            double gauss_cut = 1.0 / xc;
            double noise_cut = tstar * std::pow(2e-9, 1.0 / order);
            t_cut = std::max(gauss_cut, noise_cut);
            double log_bias = -(d * d / 4.0) * (1.0 / t_cut - 1.0 / tstar) +
                              (order + 1.0 - sigma) * std::log(tstar / t_cut);
            double noise_level = 2e-18 * std::pow(tstar / t_cut, order);
            rel_tol = std::max({rel_tol, 3.0 * std::exp(log_bias), 10.0 * noise_level});
        }
        // mode cutoff in lambda*t: past the per-mode maximum plus margin
        double lstop = order + 65.0;
        for (int it = 0; it < 3; ++it)
            lstop = order + 65.0 + order * std::log(lstop / std::max(order, 1));

        auto value = [&](double t, bool absolute) -> double {
            if (t < t_cut) return 0.0;
            if (order == 0 && t < d * d / 400.0) return (absolute ? 1.0 : -1.0) / m->volume();
            double lam_max = lstop / t;
            while (lambda.empty() || lambda.back() <= lam_max)
                extend(static_cast<int>(lambda.size()) + 64);
            std::size_t n = std::upper_bound(lambda.begin(), lambda.end(), lam_max) -
                            lambda.begin();
            long double sum = 0.0L;
            for (std::size_t i = 0; i < n; ++i) {
                long double term = expl(order * loglam[i] - lambda[i] * t) * weight[i];
                sum += absolute ? fabsl(term) : term;
            }
            double sgn = (absolute || order % 2 == 0) ? 1.0 : -1.0;
            return sgn * static_cast<double>(sum);
        };
        specfun::HalflineIntegrand g;
        g.f = [&](double t) { return value(t, false) * std::pow(t, sigma - 1.0); };
        g.singularity_exponent = sigma - 1.0;
        g.decay = specfun::DecayClass::Both;
        auto res = specfun::integrate_halfline(g, rel_tol);
        if (!res.converged)
            throw std::runtime_error("derivative kernel moment: quadrature did not converge");
        Moment out;
        out.value = res.value;
        // The same integral of |terms| measures how much cancellation the
        // mode sums performed; its share of arithmetic rounding is the
        // attainable absolute accuracy of the moment.
        specfun::HalflineIntegrand ga;
        ga.f = [&](double t) { return value(t, true) * std::pow(t, sigma - 1.0); };
        ga.singularity_exponent = sigma - 1.0;
        ga.decay = specfun::DecayClass::Both;
        auto resa = specfun::integrate_halfline(ga, 0.05);
        out.noise = 3e-16 * resa.value + res.abs_error;
        return out;
    }
};

}  // namespace

double CoefficientTable::raw(int j) const {
    if (j < 0 || j >= static_cast<int>(scaled.size()))
        throw std::out_of_range("CoefficientTable::raw");
    double logmag = j * std::log(4.0) + std::lgamma(j + 1.0);
    if (logmag + std::log(std::max(std::abs(scaled[j]), 1e-300)) > 700.0)
        throw std::overflow_error("CoefficientTable::raw: unscaled coefficient overflows");
    double sign = (j % 2 == 0) ? 1.0 : -1.0;
    return sign * scaled[j] * std::exp(logmag);
}

double CoefficientTable::evaluate(double y, int J) const {
    J = std::min<int>(J, static_cast<int>(scaled.size()) - 1);
    double y2 = y * y;
    double sum = 0.0, p = 1.0;
    for (int j = 0; j <= J; ++j) {
        sum += scaled[j] * p;
        p *= y2;
    }
    if (kind == TableKind::NeumannTaylor) return sum + singular * std::pow(y, 2.0 * s);
    return std::pow(y, 2.0 * s) * sum;
}

double taylor_coefficient_integral(const std::function<double(double)>& kernel, double exponent,
                                   specfun::DecayClass decay, double rel_tol) {
    specfun::HalflineIntegrand g;
    g.f = [kernel, exponent](double t) { return kernel(t) * std::pow(t, exponent); };
    g.singularity_exponent = exponent;
    g.decay = decay;
    auto res = specfun::integrate_halfline(g, rel_tol);
    if (!res.converged)
        throw std::runtime_error("taylor_coefficient_integral: quadrature did not converge");
    return res.value;
}

CoefficientTable neumann_taylor_coeffs(const SpectralManifold& m, double s, const Point& x,
                                       const Point& z, int J, double rel_tol) {
    if (!(m.geodesic_distance(x, z) > 0.0))
        throw std::invalid_argument("neumann_taylor_coeffs: requires x != z");
    if (J < 0 || J > 60) throw std::invalid_argument("neumann_taylor_coeffs: 0 <= J <= 60");
    CoefficientTable table;
    table.kind = TableKind::NeumannTaylor;
    table.s = s;
    table.x = x;
    table.z = z;
    table.scaled.resize(J + 1);
    table.noise.resize(J + 1);
    DerivativeKernelMoment w(m, x, z);
    // a_0 from the mean-zero kernel
    auto m0 = w.integrate(0, s, rel_tol);
    table.scaled[0] = m0.value;
    table.noise[0] = m0.noise;
    // a_j = Gamma(1-s)/Gamma(j+1-s) W_j(s), j >= 1 (full kernel). The
    // quadrature budget relaxes geometrically with j: term j enters the
    // series suppressed by (y/r_0)^{2j}, so looser high-order coefficients
    // cost nothing at the series level.
    for (int j = 1; j <= J; ++j) {
        auto mj = w.integrate(j, s, std::min(1e-5, rel_tol * std::pow(8.0, j)));
        double conv = std::exp(std::lgamma(1.0 - s) - std::lgamma(j + 1.0 - s));
        double sign = (j % 2 == 0) ? 1.0 : -1.0;
        double scale = std::exp(-j * std::log(4.0) - std::lgamma(j + 1.0));
        table.scaled[j] = sign * mj.value * conv * scale;
        table.noise[j] = mj.noise * conv;
    }
    // mode-0 removal inserts Gamma(1-s)/s * 4^{-s} / vol on y^{2s}
    table.singular = gamma_fn(1.0 - s) / s * std::pow(4.0, -s) / m.volume();
    return table;
}

CoefficientTable dirichlet_taylor_coeffs(const SpectralManifold& m, double s, const Point& x,
                                         const Point& z, int J, double rel_tol,
                                         bool include_zero_mode) {
    if (!(m.geodesic_distance(x, z) > 0.0))
        throw std::invalid_argument("dirichlet_taylor_coeffs: requires x != z");
    if (J < 0 || J > 60) throw std::invalid_argument("dirichlet_taylor_coeffs: 0 <= J <= 60");
    if (!include_zero_mode)
        throw std::domain_error(
            "dirichlet_taylor_coeffs: integrals diverge at t -> 0 without the zero mode "
            "(the mean-zero kernel tends to -1/vol)");
    CoefficientTable table;
    table.kind = TableKind::DirichletTaylor;
    table.s = s;
    table.x = x;
    table.z = z;
    table.scaled.resize(J + 1);
    table.noise.resize(J + 1);
    DerivativeKernelMoment w(m, x, z);
    // D_l = Gamma(s)/Gamma(s+l+1) W_{l+1}(1-s) (full kernel); budget relaxes
    // with l as for the Neumann table.
    for (int l = 0; l <= J; ++l) {
        auto ml = w.integrate(l + 1, 1.0 - s, std::min(1e-5, rel_tol * std::pow(8.0, l)));
        double conv = std::exp(std::lgamma(s) - std::lgamma(s + l + 1.0));
        double sign = (l % 2 == 0) ? 1.0 : -1.0;
        table.scaled[l] = sign * ml.value * conv *
                          std::exp(-l * std::log(4.0) - std::lgamma(l + 1.0));
        table.noise[l] = ml.noise * conv;
    }
    return table;
}

namespace {

// Scaled Laguerre moment table: mu_hat[i][l] = int r^{l+beta} L_i(2 sigma r)
// e^{-sigma r} dr * sigma^{l+beta+1} / Gamma(l+beta+1); mu_hat[0][l] = 1.
std::vector<std::vector<double>> laguerre_moment_table(int n_basis, int n_moments, double beta) {
    int L = n_moments + n_basis + 1;
    std::vector<std::vector<double>> mu(n_basis, std::vector<double>(L, 0.0));
    for (int l = 0; l < L; ++l) mu[0][l] = 1.0;
    if (n_basis > 1) {
        for (int l = 0; l < L; ++l) mu[1][l] = 1.0 - 2.0 * (l + beta + 1.0);
    }
    for (int i = 1; i + 1 < n_basis; ++i) {
        for (int l = 0; l + 1 < L; ++l) {
            mu[i + 1][l] = ((2.0 * i + 1.0) * mu[i][l] - 2.0 * (l + beta + 1.0) * mu[i][l + 1] -
                            i * mu[i - 1][l]) /
                           (i + 1.0);
        }
    }
    return mu;
}

double laguerre_eval(const std::vector<double>& b, double x) {
    double l0 = 1.0, l1 = 1.0 - x;
    double sum = b.empty() ? 0.0 : b[0] * l0;
    if (b.size() > 1) sum += b[1] * l1;
    for (std::size_t i = 1; i + 1 < b.size(); ++i) {
        double l2 = ((2.0 * i + 1.0 - x) * l1 - i * l0) / (i + 1.0);
        sum += b[i + 1] * l2;
        l0 = l1;
        l1 = l2;
    }
    return sum;
}

struct RidgePick {
    std::vector<double> coeffs;
    double residual = 0.0;
    double ridge = 0.0;
};

RidgePick ridge_by_discrepancy(const Matrix& A, const std::vector<double>& rhs,
                               double noise_floor) {
    double rhs_norm = 0.0;
    for (double v : rhs) rhs_norm += v * v;
    rhs_norm = std::sqrt(rhs_norm);
    if (rhs_norm == 0.0) return {std::vector<double>(A.cols(), 0.0), 0.0, 0.0};
    RidgePick best;
    best.residual = std::numeric_limits<double>::infinity();
    bool below_floor = false;
    for (double alpha = 1e2; alpha > 1e-19; alpha *= 0.1) {
        std::vector<double> b;
        try {
            b = numerics::solve_ridge(A, rhs, alpha);
        } catch (const std::runtime_error&) {
            continue;
        }
        double res = 0.0;
        for (std::size_t l = 0; l < A.rows(); ++l) {
            double fit = 0.0;
            for (std::size_t i = 0; i < A.cols(); ++i) fit += A(l, i) * b[i];
            res += (fit - rhs[l]) * (fit - rhs[l]);
        }
        res = std::sqrt(res) / rhs_norm;
        // Discrepancy principle with a plateau test: once the residual is at
        // the noise level, keep relaxing the ridge only while the data keeps
        // rewarding it decisively (clean data converges to the exact fit,
        // noisy data stops at the floor).
        if (res <= noise_floor) {
            if (!below_floor || res < 0.25 * best.residual) {
                below_floor = true;
                best.coeffs = std::move(b);
                best.residual = res;
                best.ridge = alpha;
                if (best.residual < 1e-15) break;
                continue;
            }
            break;
        }
        if (!below_floor && res < best.residual) {
            best.coeffs = std::move(b);
            best.residual = res;
            best.ridge = alpha;
        }
    }
    if (best.coeffs.empty()) best.coeffs.assign(A.cols(), 0.0);
    return best;
}

}  // namespace

MomentReconstruction reconstruct_from_moments(const std::vector<double>& moments,
                                              const std::vector<double>& r_grid, double beta,
                                              int n_basis, double noise_floor,
                                              const std::vector<double>& moment_noise) {
    const int J = static_cast<int>(moments.size());
    if (J < 3) throw std::invalid_argument("reconstruct_from_moments: need >= 3 moments");
    if (!moment_noise.empty() && static_cast<int>(moment_noise.size()) != J)
        throw std::invalid_argument("reconstruct_from_moments: noise size mismatch");
    MomentReconstruction out;
    out.grid = r_grid;
    out.values.assign(r_grid.size(), 0.0);
    out.refit_moments.assign(J, 0.0);
    double scale = 0.0;
    for (double v : moments) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return out;  // all moments zero -> zero reconstruction

    if (n_basis <= 0) n_basis = std::min(J, 18);
    // Exponential scale from the growth of the moment sequence:
    // m_{l+1}/m_l ~ (l+beta+1)/sigma for an exponential-type integrand.
    // Noisy entries are excluded from the estimate.
    std::vector<double> rates;
    for (int l = J / 2; l + 1 < J; ++l) {
        if (moments[l] == 0.0 || moments[l + 1] == 0.0) continue;
        if (!moment_noise.empty() &&
            (moment_noise[l] > 0.05 * std::abs(moments[l]) ||
             moment_noise[l + 1] > 0.05 * std::abs(moments[l + 1])))
            continue;
        rates.push_back((l + beta + 1.0) * std::abs(moments[l]) / std::abs(moments[l + 1]));
    }
    if (rates.empty()) {
        for (int l = 1; l + 1 < J; ++l) {
            if (moments[l] != 0.0 && moments[l + 1] != 0.0)
                rates.push_back((l + beta + 1.0) * std::abs(moments[l]) /
                                std::abs(moments[l + 1]));
        }
    }
    double sigma = 1.0;
    if (!rates.empty()) {
        double acc = 0.0;
        for (double r : rates) acc += std::log(r);
        sigma = std::exp(acc / rates.size());
    }
    sigma = std::clamp(sigma, 0.02, 100.0);
    out.decay_rate = sigma;

    auto mu = laguerre_moment_table(n_basis, J, beta);
    Matrix A(J, n_basis);
    std::vector<double> rhs(J);
    std::vector<double> rowscale(J, 1.0);
    double floor_hat = 0.0;
    for (int l = 0; l < J; ++l) {
        double to_hat =
            std::exp((l + beta + 1.0) * std::log(sigma) - std::lgamma(l + beta + 1.0));
        rhs[l] = moments[l] * to_hat;
        if (!moment_noise.empty()) {
            floor_hat = std::max(floor_hat, 1e-13 * std::abs(rhs[l]));
        }
        for (int i = 0; i < n_basis; ++i) A(l, i) = mu[i][l];
    }
    if (!moment_noise.empty()) {
        // rows weighted inversely to their uncertainty in the scaled units
        for (int l = 0; l < J; ++l) {
            double to_hat =
                std::exp((l + beta + 1.0) * std::log(sigma) - std::lgamma(l + beta + 1.0));
            double w = 1.0 / std::max(moment_noise[l] * to_hat, floor_hat);
            rowscale[l] = w;
            rhs[l] *= w;
            for (int i = 0; i < n_basis; ++i) A(l, i) *= w;
        }
    }
    out.condition = numerics::condition_estimate(A);
    out.ill_conditioned = out.condition > 1e12;
    RidgePick pick = ridge_by_discrepancy(A, rhs, noise_floor);
    out.moment_residual = pick.residual;
    out.ridge = pick.ridge;

    for (std::size_t g = 0; g < r_grid.size(); ++g) {
        double r = r_grid[g];
        out.values[g] = std::pow(r, beta) * std::exp(-sigma * r) *
                        laguerre_eval(pick.coeffs, 2.0 * sigma * r);
    }
    for (int l = 0; l < J; ++l) {
        double fit = 0.0;
        for (int i = 0; i < n_basis; ++i) fit += A(l, i) * pick.coeffs[i];
        out.refit_moments[l] = fit / rowscale[l] *
                               std::exp(std::lgamma(l + beta + 1.0) -
                                        (l + beta + 1.0) * std::log(sigma));
    }
    return out;
}

MomentReconstruction heat_from_moments(const CoefficientTable& table,
                                       const std::vector<double>& t_grid, double noise_floor) {
    if (table.kind != TableKind::NeumannTaylor)
        throw std::invalid_argument("heat_from_moments: Neumann table required");
    if (table.scaled.size() < 6)
        throw std::invalid_argument("heat_from_moments: need at least 5 usable moments");
    // moments of phi(r) = K_{1/r} r^{-s}: m_j = a_{j+1}
    std::vector<double> m, noise;
    for (int j = 1; j < static_cast<int>(table.scaled.size()); ++j) {
        m.push_back(table.raw(j));
        if (!table.noise.empty()) noise.push_back(table.noise[j]);
    }
    std::vector<double> r_grid;
    for (double t : t_grid) r_grid.push_back(1.0 / t);
    MomentReconstruction rec =
        reconstruct_from_moments(m, r_grid, -table.s, 0, noise_floor, noise);
    MomentReconstruction out = rec;
    out.grid = t_grid;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        out.values[i] = rec.values[i] * std::pow(t_grid[i], -table.s);
    }
    return out;
}

double kannai_ratio(double s) {
    return 2.0 / (1.0 + 2.0 * s) * specfun::basset_integral(s, 0.0, 1.0);
}

double kannai_mode_multiplier(double s, double lambda, double y) {
    return std::pow(y, 2.0 * s) * 2.0 / (1.0 + 2.0 * s) *
           specfun::basset_integral(s, lambda, y);
}

ModeFunction kannai_forward(const SpectralManifold& m, double s, double y,
                            const ModeFunction& f) {
    if (!(y > 0.0)) throw std::invalid_argument("kannai_forward: requires y > 0");
    std::vector<double> coeffs(f.coeffs().size());
    for (int k = 0; k < static_cast<int>(coeffs.size()); ++k) {
        double c = f.coefficient(k);
        coeffs[k] = (c == 0.0) ? 0.0 : c * kannai_mode_multiplier(s, m.eigenvalue(k), y);
    }
    return ModeFunction(m, std::move(coeffs));
}

namespace {

// Moment fit on (0,1) in the basis t^{a} (1-t)^{1/2} P_i(2t-1).
struct UnitIntervalFit {
    double a = 0.0;
    std::vector<double> coeffs;
    double residual = 0.0;
    double condition = 0.0;
    double ridge = 0.0;

    double eval(double t) const {
        double x = 2.0 * t - 1.0;
        double p0 = 1.0, p1 = x;
        double sum = coeffs.empty() ? 0.0 : coeffs[0];
        if (coeffs.size() > 1) sum += coeffs[1] * p1;
        for (std::size_t i = 1; i + 1 < coeffs.size(); ++i) {
            double p2 = ((2.0 * i + 1.0) * x * p1 - i * p0) / (i + 1.0);
            sum += coeffs[i + 1] * p2;
            p0 = p1;
            p1 = p2;
        }
        return std::pow(t, a) * std::sqrt(1.0 - t) * sum;
    }
};

UnitIntervalFit fit_unit_moments(const std::vector<double>& m, double a, int n_basis,
                                 double noise_floor) {
    const int L = static_cast<int>(m.size());
    if (n_basis <= 0) n_basis = std::min(L, 16);
    Matrix A(L, n_basis);
    auto legendre = [](int i, double x) {
        double p0 = 1.0, p1 = x;
        if (i == 0) return p0;
        for (int k = 2; k <= i; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        return p1;
    };
    for (int l = 0; l < L; ++l) {
        for (int i = 0; i < n_basis; ++i) {
            A(l, i) = numerics::tanh_sinh(
                [&](double t) {
                    return std::pow(t, l + a) * std::sqrt(1.0 - t) * legendre(i, 2.0 * t - 1.0);
                },
                0.0, 1.0, 1e-13);
        }
    }
    // row-sup normalization keeps the rows comparable
    std::vector<double> rhs(L);
    for (int l = 0; l < L; ++l) {
        double sup = 0.0;
        for (int i = 0; i < n_basis; ++i) sup = std::max(sup, std::abs(A(l, i)));
        if (sup == 0.0) sup = 1.0;
        for (int i = 0; i < n_basis; ++i) A(l, i) /= sup;
        rhs[l] = m[l] / sup;
    }
    UnitIntervalFit fit;
    fit.a = a;
    fit.condition = numerics::condition_estimate(A);
    RidgePick pick = ridge_by_discrepancy(A, rhs, noise_floor);
    fit.coeffs = pick.coeffs;
    fit.residual = pick.residual;
    fit.ridge = pick.ridge;
    return fit;
}

WaveReconstruction invert_from_shifted_moments(double s, const std::vector<double>& M,
                                               const std::vector<double>& tau_grid,
                                               double exponent_a, double noise_floor) {
    UnitIntervalFit fit = fit_unit_moments(M, exponent_a, 0, noise_floor);
    WaveReconstruction out;
    out.tau_grid = tau_grid;
    out.values.resize(tau_grid.size());
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        double t = 1.0 / (1.0 + tau_grid[i]);
        out.values[i] = fit.eval(t) * std::pow(t, -(s - 0.5));
    }
    out.moment_stage.moment_residual = fit.residual;
    out.moment_stage.condition = fit.condition;
    out.moment_stage.ill_conditioned = fit.condition > 1e12;
    out.moment_stage.ridge = fit.ridge;
    out.moment_stage.grid = tau_grid;
    out.moment_stage.refit_moments = M;
    return out;
}

}  // namespace

std::vector<double> wave_weight_moments_from_mode(double s, double lambda, int orders) {
    // M_l = (-1)^l H^(l)(1) / (3/2+s)_l for H(u) = R(s) u^{-s} psi_s(sqrt(lambda u)).
    const double R = kannai_ratio(s);
    std::vector<double> M(orders);
    if (lambda == 0.0) {
        for (int l = 0; l < orders; ++l) M[l] = R * rising(s, l) / rising(1.5 + s, l);
        return M;
    }
    const double z = std::sqrt(lambda);
    auto kvals = specfun::bessel_k_shifted_orders(s, z, orders + 1);
    const double norm = std::pow(2.0, s - 1.0) * gamma_fn(s);
    // B^(j)(1) = (-lambda/2)^j z^{s-j} K_{s-j}(z) / norm
    std::vector<double> B(orders + 1);
    for (int j = 0; j <= orders; ++j) {
        B[j] = std::pow(0.5 * lambda, j) * std::pow(z, s - j) * kvals[j] / norm;
    }
    for (int l = 0; l < orders; ++l) {
        // all Leibniz terms carry the common sign (-1)^l
        double h = 0.0;
        double binom = 1.0;
        for (int j = 0; j <= l; ++j) {
            h += binom * rising(s, l - j) * B[j];
            binom *= double(l - j) / double(j + 1);
        }
        M[l] = R * h / rising(1.5 + s, l);
    }
    return M;
}

WaveReconstruction kannai_inverse_mode(double s, double lambda, double coefficient, int orders,
                                       const std::vector<double>& tau_grid,
                                       double noise_floor) {
    std::vector<double> M = wave_weight_moments_from_mode(s, lambda, orders);
    for (double& v : M) v *= coefficient;
    double a = (lambda == 0.0) ? s - 1.0 : s - 0.5;
    return invert_from_shifted_moments(s, M, tau_grid, a, noise_floor);
}

WaveReconstruction kannai_inverse_series(double s, const std::vector<double>& series,
                                         int orders, const std::vector<double>& tau_grid,
                                         double noise_floor) {
    // H(u) = (1/R) sum_l g_l u^l; M_l = (-1)^l H^(l)(1) / (3/2+s)_l. The
    // derivative sums at u = 1 converge only while the truncated tail of the
    // series stays small against the sum, which caps the usable order.
    const double R = kannai_ratio(s);
    const int n = static_cast<int>(series.size());
    orders = std::min(orders, n);
    std::vector<double> M;
    M.reserve(orders);
    for (int l = 0; l < orders; ++l) {
        double h = 0.0, last = 0.0;
        for (int j = l; j < n; ++j) {
            last = series[j] * std::exp(std::lgamma(j + 1.0) - std::lgamma(j - l + 1.0));
            h += last;
        }
        if (l > 0 && std::abs(last) > 1e-4 * std::abs(h)) break;  // tail unresolved
        double sign = (l % 2 == 0) ? 1.0 : -1.0;
        M.push_back(sign * h / (R * rising(1.5 + s, l)));
    }
    if (M.size() < 4)
        throw std::runtime_error("kannai_inverse_series: series too short for the inversion");
    return invert_from_shifted_moments(s, M, tau_grid, s - 0.5, noise_floor);
}

}  // namespace fracext::transforms
