#include "fracext/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace fracext::numerics {

namespace {

GaussRule make_gauss_legendre(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Newton iteration from the Chebyshev-based initial guess.
        long double x = std::cos(M_PI * (i + 0.75L) / (n + 0.5L));
        long double pp = 0.0L;
        for (int iter = 0; iter < 100; ++iter) {
            long double p0 = 1.0L, p1 = x;
            for (int k = 2; k <= n; ++k) {
                long double p2 = ((2.0L * k - 1.0L) * x * p1 - (k - 1.0L) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0L);
            long double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-19L) break;
        }
        rule.nodes[i] = static_cast<double>(-x);
        rule.nodes[n - 1 - i] = static_cast<double>(x);
        double w = static_cast<double>(2.0L / ((1.0L - x * x) * pp * pp));
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
    return it->second;
}

double gauss_panel(const std::function<double(double)>& f, double a, double b, int order) {
    const GaussRule& g = gauss_legendre(order);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < order; ++i) sum += g.weights[i] * f(mid + half * g.nodes[i]);
    return half * sum;
}

QuadResult integrate_adaptive(const std::function<double(double)>& f,
                              double a, double b, double rel_tol, double abs_floor,
                              int max_depth) {
    struct Segment {
        double a, b, coarse;
        int depth;
    };
    QuadResult out;
    if (a == b) return out;

    auto coarse_eval = [&](double lo, double hi) {
        out.evaluations += 16;
        return gauss_panel(f, lo, hi, 16);
    };
    auto fine_eval = [&](double lo, double hi) {
        out.evaluations += 32;
        return gauss_panel(f, lo, hi, 32);
    };

    std::vector<Segment> stack;
    stack.push_back({a, b, coarse_eval(a, b), 0});
    double total = stack.back().coarse;  // running estimate used for relative tests
    double accepted = 0.0, err_accum = 0.0;
    const double span = std::abs(b - a);

    while (!stack.empty()) {
        Segment seg = stack.back();
        stack.pop_back();
        double fine = fine_eval(seg.a, seg.b);
        double err = std::abs(fine - seg.coarse);
        double budget = std::max(abs_floor, rel_tol * std::max(std::abs(total), 1e-300));
        double local_budget = budget * std::max(std::abs(seg.b - seg.a) / span, 1e-5);
        // deep segments whose disagreement sits below the caller's absolute
        // floor are noise, not structure
        if (seg.depth >= 5 && err <= abs_floor) local_budget = std::max(local_budget, err);
        if (err <= local_budget || seg.depth >= max_depth) {
            accepted += fine;
            err_accum += err;
            total += fine - seg.coarse;
            if (seg.depth >= max_depth && err > local_budget) out.converged = false;
            continue;
        }
        double mid = 0.5 * (seg.a + seg.b);
        Segment left{seg.a, mid, coarse_eval(seg.a, mid), seg.depth + 1};
        Segment right{mid, seg.b, coarse_eval(mid, seg.b), seg.depth + 1};
        total += left.coarse + right.coarse - seg.coarse;
        stack.push_back(left);
        stack.push_back(right);
    }
    out.value = accepted;
    out.abs_error = err_accum;
    return out;
}

double tanh_sinh(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    // Transform x = mid + half*tanh(pi/2 sinh(t)); levels halve the step and
    // reuse previously accumulated nodes. Node positions are formed from the
    // exact distance to the endpoint, 1 - tanh(u) = 2/(e^{2u}+1), so that
    // endpoint singularities are sampled without cancellation.
    const double half = 0.5 * (b - a);
    const double tmax = 4.3;
    auto sample = [&](double t) {
        double u = 0.5 * M_PI * std::sinh(t);
        double dist = 2.0 / (std::exp(2.0 * u) + 1.0);  // 1 - tanh(u)
        double w = 0.5 * M_PI * std::cosh(t) / (std::cosh(u) * std::cosh(u));
        double xp = b - half * dist;
        double xm = a + half * dist;
        double s = 0.0;
        if (xp < b) s += f(xp) * w;
        if (t > 0.0 && xm > a) s += f(xm) * w;
        return s;
    };
    double h = 1.0;
    double sum = sample(0.0);
    for (double t = h; t <= tmax; t += h) sum += sample(t);
    double prev = sum * h * half;
    for (int level = 0; level < 9; ++level) {
        h *= 0.5;
        for (double t = h; t <= tmax; t += 2.0 * h) sum += sample(t);
        double value = sum * h * half;
        if (level > 0 && std::abs(value - prev) <= rel_tol * std::abs(value) + 1e-300) {
            return value;
        }
        prev = value;
    }
    return prev;
}

std::vector<double> solve_least_squares(Matrix A, std::vector<double> b) {
    const std::size_t m = A.rows(), n = A.cols();
    if (b.size() != m || m < n) throw std::invalid_argument("least_squares: bad shape");
    // Householder QR applied in place; reflectors stored below the diagonal.
    std::vector<double> rdiag(n);
    for (std::size_t k = 0; k < n; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < m; ++i) norm = std::hypot(norm, A(i, k));
        if (norm == 0.0) throw std::runtime_error("least_squares: rank deficient");
        if (A(k, k) < 0) norm = -norm;
        for (std::size_t i = k; i < m; ++i) A(i, k) /= norm;
        A(k, k) += 1.0;
        for (std::size_t j = k + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < m; ++i) s += A(i, k) * A(i, j);
            s = -s / A(k, k);
            for (std::size_t i = k; i < m; ++i) A(i, j) += s * A(i, k);
        }
        double s = 0.0;
        for (std::size_t i = k; i < m; ++i) s += A(i, k) * b[i];
        s = -s / A(k, k);
        for (std::size_t i = k; i < m; ++i) b[i] += s * A(i, k);
        rdiag[k] = -norm;
    }
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= A(k, j) * x[j];
        x[k] = s / rdiag[k];
    }
    return x;
}

namespace {

// Cholesky solve for SPD systems, in place.
std::vector<double> cholesky_solve(Matrix S, std::vector<double> rhs) {
    const std::size_t n = S.rows();
    for (std::size_t j = 0; j < n; ++j) {
        double d = S(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= S(j, k) * S(j, k);
        if (d <= 0.0) throw std::runtime_error("cholesky: not positive definite");
        d = std::sqrt(d);
        S(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = S(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= S(i, k) * S(j, k);
            S(i, j) = s / d;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = rhs[i];
        for (std::size_t k = 0; k < i; ++k) s -= S(i, k) * rhs[k];
        rhs[i] = s / S(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= S(k, i) * rhs[k];
        rhs[i] = s / S(i, i);
    }
    return rhs;
}

}  // namespace

std::vector<double> solve_least_norm(const Matrix& A, const std::vector<double>& b,
                                     double ridge) {
    const std::size_t m = A.rows(), n = A.cols();
    if (b.size() != m) throw std::invalid_argument("least_norm: bad shape");
    Matrix G(m, m);
    double scale = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += A(i, k) * A(j, k);
            G(i, j) = s;
            if (i == j) scale = std::max(scale, std::abs(s));
        }
    for (std::size_t i = 0; i < m; ++i) G(i, i) += ridge * scale;
    std::vector<double> lambda = cholesky_solve(G, b);
    std::vector<double> x(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < m; ++i) x[k] += A(i, k) * lambda[i];
    return x;
}

std::vector<double> solve_ridge(const Matrix& A, const std::vector<double>& b, double alpha) {
    const std::size_t m = A.rows(), n = A.cols();
    if (b.size() != m) throw std::invalid_argument("ridge: bad shape");
    // min ||Ax - b||^2 + alpha ||x||^2, solved through the column-equilibrated
    // normal equations: the penalty stays on the raw coefficients while the
    // factorization sees a well-scaled matrix.
    std::vector<double> colnorm(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += A(k, i) * A(k, i);
        colnorm[i] = s > 0.0 ? std::sqrt(s) : 1.0;
    }
    Matrix S(n, n);
    std::vector<double> rhs(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k) s += A(k, i) * A(k, j);
            s /= colnorm[i] * colnorm[j];
            S(i, j) = s;
            S(j, i) = s;
        }
        for (std::size_t k = 0; k < m; ++k) rhs[i] += A(k, i) * b[k];
        rhs[i] /= colnorm[i];
    }
    // the raw-coefficient penalty plus a factorization jitter at the
    // equilibrated machine-noise level
    for (std::size_t i = 0; i < n; ++i)
        S(i, i) += std::max(alpha / (colnorm[i] * colnorm[i]), 1e-14);
    std::vector<double> x = cholesky_solve(S, rhs);
    for (std::size_t i = 0; i < n; ++i) x[i] /= colnorm[i];
    return x;
}

double condition_estimate(const Matrix& A) {
    const std::size_t m = A.rows(), n = A.cols();
    // conditioning of the column-equilibrated system, matching solve_ridge
    std::vector<double> colnorm(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += A(k, i) * A(k, i);
        colnorm[i] = s > 0.0 ? std::sqrt(s) : 1.0;
    }
    Matrix S(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k) s += A(k, i) * A(k, j);
            S(i, j) = S(j, i) = s / (colnorm[i] * colnorm[j]);
        }
    auto mat_vec = [&](const std::vector<double>& v) {
        std::vector<double> out(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out[i] += S(i, j) * v[j];
        return out;
    };
    auto norm2 = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 / std::sqrt(double(n)) * (i % 2 ? 1.0 : 1.3);
    double hi = 0.0;
    for (int it = 0; it < 60; ++it) {
        v = mat_vec(v);
        hi = norm2(v);
        if (hi == 0.0) return std::numeric_limits<double>::infinity();
        for (double& x : v) x /= hi;
    }
    // Inverse power iteration via Cholesky of S (with a relative jitter if needed).
    double lo;
    try {
        std::vector<double> w(n, 1.0 / std::sqrt(double(n)));
        double mu = 0.0;
        Matrix Sc = S;
        for (int it = 0; it < 60; ++it) {
            w = cholesky_solve(Sc, w);
            mu = norm2(w);
            for (double& x : w) x /= mu;
        }
        lo = 1.0 / mu;
    } catch (const std::runtime_error&) {
        return std::numeric_limits<double>::infinity();
    }
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(hi / lo);
}

ChebyshevFit::ChebyshevFit(const std::vector<double>& xs, const std::vector<double>& ys,
                           double center, double halfwidth, int degree)
    : center_(center), halfwidth_(halfwidth) {
    if (xs.size() != ys.size() || xs.size() < static_cast<std::size_t>(degree + 1))
        throw std::invalid_argument("ChebyshevFit: not enough samples");
    const std::size_t m = xs.size();
    Matrix A(m, degree + 1);
    for (std::size_t i = 0; i < m; ++i) {
        double u = (xs[i] - center) / halfwidth;
        double t0 = 1.0, t1 = u;
        A(i, 0) = 1.0;
        if (degree >= 1) A(i, 1) = u;
        for (int k = 2; k <= degree; ++k) {
            double t2 = 2.0 * u * t1 - t0;
            A(i, k) = t2;
            t0 = t1;
            t1 = t2;
        }
    }
    coeffs_ = solve_least_squares(std::move(A), ys);
}

double ChebyshevFit::eval(double x) const {
    double u = (x - center_) / halfwidth_;
    // Clenshaw
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t k = coeffs_.size(); k-- > 1;) {
        double b0 = coeffs_[k] + 2.0 * u * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return coeffs_[0] + u * b1 - b2;
}

double ChebyshevFit::derivative(double x, int order) const {
    // Differentiate in coefficient space: c'_k = c'_{k+2} + 2(k+1) c_{k+1}.
    std::vector<long double> c(coeffs_.begin(), coeffs_.end());
    for (int d = 0; d < order; ++d) {
        std::vector<long double> dc(c.size(), 0.0L);
        int n = static_cast<int>(c.size()) - 1;
        for (int k = n - 1; k >= 0; --k) {
            dc[k] = (k + 2 <= n - 1 ? dc[k + 2] : 0.0L) + 2.0L * (k + 1) * c[k + 1];
        }
        if (!dc.empty()) dc[0] *= 0.5L;
        c = std::move(dc);
        if (c.empty()) return 0.0;
    }
    double u = (x - center_) / halfwidth_;
    long double b1 = 0.0L, b2 = 0.0L;
    for (std::size_t k = c.size(); k-- > 1;) {
        long double b0 = c[k] + 2.0L * u * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    long double val = c.empty() ? 0.0L : c[0] + u * b1 - b2;
    return static_cast<double>(val / std::pow((long double)halfwidth_, order));
}

}  // namespace fracext::numerics
