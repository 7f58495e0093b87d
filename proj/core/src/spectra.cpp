#include "fracext/spectra.hpp"

#include <algorithm>
#include <cmath>

#include "fracext/numerics.hpp"

namespace fracext::spectra {

using numerics::gauss_legendre;

SpectralManifold SpectralManifold::circle(double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("circle: radius > 0");
    SpectralManifold m;
    m.kind_ = ManifoldKind::Circle;
    m.radius_ = radius;
    m.volume_ = 2.0 * M_PI * radius;
    return m;
}

SpectralManifold SpectralManifold::flat_torus(double a11, double a12, double a22) {
    double det = a11 * a22 - a12 * a12;
    if (!(a11 > 0.0) || !(det > 0.0)) throw std::invalid_argument("flat_torus: metric not SPD");
    SpectralManifold m;
    m.kind_ = ManifoldKind::FlatTorus2;
    m.metric_ = {a11, a12, a12, a22};
    m.metric_inv_ = {a22 / det, -a12 / det, -a12 / det, a11 / det};
    m.volume_ = std::sqrt(det);
    return m;
}

SpectralManifold SpectralManifold::sphere(double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("sphere: radius > 0");
    SpectralManifold m;
    m.kind_ = ManifoldKind::Sphere2;
    m.radius_ = radius;
    m.volume_ = 4.0 * M_PI * radius * radius;
    return m;
}

Point SpectralManifold::canonical(const Point& x) const {
    auto wrap = [](double v, double period) {
        double w = std::fmod(v, period);
        if (w < 0.0) w += period;
        return w;
    };
    switch (kind_) {
        case ManifoldKind::Circle:
            return {wrap(x[0], 2.0 * M_PI), 0.0};
        case ManifoldKind::FlatTorus2:
            return {wrap(x[0], 1.0), wrap(x[1], 1.0)};
        case ManifoldKind::Sphere2:
            return x;  // colatitude/longitude used as given
    }
    return x;
}

void SpectralManifold::ensure_torus_modes(int count) const {
    if (static_cast<int>(torus_modes_.size()) >= count) return;
    // Enlarge the lattice box until the sorted prefix below the safe
    // eigenvalue cut covers the requested count.
    int box = std::max(torus_box_, 4);
    double mu_min = 0.0;
    {
        // smallest eigenvalue of A^{-1}
        double tr = metric_inv_[0] + metric_inv_[3];
        double det = metric_inv_[0] * metric_inv_[3] - metric_inv_[1] * metric_inv_[2];
        mu_min = 0.5 * (tr - std::sqrt(std::max(tr * tr - 4.0 * det, 0.0)));
    }
    while (true) {
        std::vector<TorusMode> modes;
        double safe_cap = 4.0 * M_PI * M_PI * mu_min * box * box;
        for (int k1 = -box; k1 <= box; ++k1) {
            for (int k2 = -box; k2 <= box; ++k2) {
                if (k1 == 0 && k2 == 0) continue;
                if (!(k1 > 0 || (k1 == 0 && k2 > 0))) continue;  // one per +-k pair
                double q1 = metric_inv_[0] * k1 + metric_inv_[1] * k2;
                double q2 = metric_inv_[2] * k1 + metric_inv_[3] * k2;
                double lambda = 4.0 * M_PI * M_PI * (q1 * k1 + q2 * k2);
                if (lambda > safe_cap) continue;
                modes.push_back({lambda, k1, k2, false});
                modes.push_back({lambda, k1, k2, true});
            }
        }
        std::sort(modes.begin(), modes.end(), [](const TorusMode& a, const TorusMode& b) {
            if (a.lambda != b.lambda) return a.lambda < b.lambda;
            if (a.k1 != b.k1) return a.k1 < b.k1;
            if (a.k2 != b.k2) return a.k2 < b.k2;
            return a.is_sin < b.is_sin;
        });
        if (static_cast<int>(modes.size()) >= count) {
            torus_modes_ = std::move(modes);
            torus_box_ = box;
            return;
        }
        box *= 2;
    }
}

double SpectralManifold::eigenvalue(int k) const {
    if (k < 0) throw std::invalid_argument("eigenvalue: k >= 0");
    if (k == 0) return 0.0;
    switch (kind_) {
        case ManifoldKind::Circle: {
            int m = (k + 1) / 2;
            return double(m) * double(m) / (radius_ * radius_);
        }
        case ManifoldKind::FlatTorus2: {
            ensure_torus_modes(k);
            return torus_modes_[k - 1].lambda;
        }
        case ManifoldKind::Sphere2: {
            int l = static_cast<int>(std::floor(std::sqrt(double(k)) + 1e-12));
            return double(l) * double(l + 1) / (radius_ * radius_);
        }
    }
    return 0.0;
}

namespace {

// Fully normalized associated Legendre Q_{lm} = K_{lm} P_l^m(cos theta) such
// that the real harmonics are Q (m = 0) or sqrt(2) Q cos/sin(m phi).
double normalized_plm(int l, int m, double ct, double st) {
    double q = std::sqrt(1.0 / (4.0 * M_PI));
    for (int i = 1; i <= m; ++i) q *= st * std::sqrt((2.0 * i + 1.0) / (2.0 * i));
    if (l == m) return q;
    double qm = q;                                  // Q_{m,m}
    double qm1 = ct * std::sqrt(2.0 * m + 3.0) * q; // Q_{m+1,m}
    if (l == m + 1) return qm1;
    for (int ll = m + 2; ll <= l; ++ll) {
        double a = std::sqrt(((2.0 * ll - 1.0) * (2.0 * ll + 1.0)) /
                             ((double(ll) - m) * (double(ll) + m)));
        double b = std::sqrt(((2.0 * ll + 1.0) * (double(ll) - 1.0 - m) * (double(ll) - 1.0 + m)) /
                             ((2.0 * ll - 3.0) * (double(ll) - m) * (double(ll) + m)));
        double next = a * ct * qm1 - b * qm;
        qm = qm1;
        qm1 = next;
    }
    return qm1;
}

}  // namespace

double SpectralManifold::eigenfunction(int k, const Point& xin) const {
    if (k < 0) throw std::invalid_argument("eigenfunction: k >= 0");
    Point x = canonical(xin);
    if (k == 0) return 1.0 / std::sqrt(volume_);
    switch (kind_) {
        case ManifoldKind::Circle: {
            int m = (k + 1) / 2;
            double norm = 1.0 / std::sqrt(M_PI * radius_);
            return (k % 2 == 1) ? norm * std::cos(m * x[0]) : norm * std::sin(m * x[0]);
        }
        case ManifoldKind::FlatTorus2: {
            ensure_torus_modes(k);
            const TorusMode& mode = torus_modes_[k - 1];
            double phase = 2.0 * M_PI * (mode.k1 * x[0] + mode.k2 * x[1]);
            double norm = std::sqrt(2.0 / volume_);
            return mode.is_sin ? norm * std::sin(phase) : norm * std::cos(phase);
        }
        case ManifoldKind::Sphere2: {
            int l = static_cast<int>(std::floor(std::sqrt(double(k)) + 1e-12));
            int idx = k - l * l;
            double ct = std::cos(x[0]), st = std::sin(x[0]);
            if (idx == 0) return normalized_plm(l, 0, ct, st) / radius_;
            int m = (idx + 1) / 2;
            double q = normalized_plm(l, m, ct, st) * std::sqrt(2.0) / radius_;
            return (idx % 2 == 1) ? q * std::cos(m * x[1]) : q * std::sin(m * x[1]);
        }
    }
    return 0.0;
}

Eigenpair SpectralManifold::eigenpair(int k) const {
    Eigenpair e;
    e.lambda = eigenvalue(k);
    e.phi = [this, k](const Point& x) { return eigenfunction(k, x); };
    return e;
}

std::array<double, 2> SpectralManifold::eigenfunction_gradient(int k, const Point& xin) const {
    Point x = canonical(xin);
    if (k == 0) return {0.0, 0.0};
    switch (kind_) {
        case ManifoldKind::Circle: {
            int m = (k + 1) / 2;
            double norm = 1.0 / std::sqrt(M_PI * radius_);
            double d = (k % 2 == 1) ? -norm * m * std::sin(m * x[0]) : norm * m * std::cos(m * x[0]);
            return {d, 0.0};
        }
        case ManifoldKind::FlatTorus2: {
            ensure_torus_modes(k);
            const TorusMode& mode = torus_modes_[k - 1];
            double phase = 2.0 * M_PI * (mode.k1 * x[0] + mode.k2 * x[1]);
            double norm = std::sqrt(2.0 / volume_);
            double d = mode.is_sin ? norm * std::cos(phase) : -norm * std::sin(phase);
            return {d * 2.0 * M_PI * mode.k1, d * 2.0 * M_PI * mode.k2};
        }
        case ManifoldKind::Sphere2:
            throw std::runtime_error("eigenfunction_gradient: not provided for Sphere2");
    }
    return {0.0, 0.0};
}

double SpectralManifold::cometric(const std::array<double, 2>& u,
                                  const std::array<double, 2>& v) const {
    switch (kind_) {
        case ManifoldKind::Circle:
            return u[0] * v[0] / (radius_ * radius_);
        case ManifoldKind::FlatTorus2:
            return metric_inv_[0] * u[0] * v[0] + metric_inv_[1] * (u[0] * v[1] + u[1] * v[0]) +
                   metric_inv_[3] * u[1] * v[1];
        case ManifoldKind::Sphere2:
            throw std::runtime_error("cometric: not provided for Sphere2");
    }
    return 0.0;
}

int SpectralManifold::modes_below(double lambda_cap) const {
    int count = 0;
    for (int k = 0;; ++k) {
        if (eigenvalue(k) > lambda_cap) break;
        ++count;
        if (count > 2'000'000) throw std::runtime_error("modes_below: cap too large");
    }
    return count;
}

double SpectralManifold::geodesic_distance(const Point& xin, const Point& zin) const {
    Point x = canonical(xin), z = canonical(zin);
    switch (kind_) {
        case ManifoldKind::Circle: {
            double d = std::abs(x[0] - z[0]);
            d = std::min(d, 2.0 * M_PI - d);
            return radius_ * d;
        }
        case ManifoldKind::FlatTorus2: {
            double d1 = x[0] - z[0], d2 = x[1] - z[1];
            double best = std::numeric_limits<double>::infinity();
            for (int m1 = -1; m1 <= 1; ++m1) {
                for (int m2 = -1; m2 <= 1; ++m2) {
                    double u1 = d1 + m1, u2 = d2 + m2;
                    double q = metric_[0] * u1 * u1 + 2.0 * metric_[1] * u1 * u2 +
                               metric_[3] * u2 * u2;
                    best = std::min(best, q);
                }
            }
            return std::sqrt(best);
        }
        case ManifoldKind::Sphere2: {
            if (x[0] == z[0] && x[1] == z[1]) return 0.0;
            double cx = std::cos(x[0]), sx = std::sin(x[0]);
            double cz = std::cos(z[0]), sz = std::sin(z[0]);
            double dot = sx * sz * std::cos(x[1] - z[1]) + cx * cz;
            dot = std::clamp(dot, -1.0, 1.0);
            return radius_ * std::acos(dot);
        }
    }
    return 0.0;
}

QuadratureGrid SpectralManifold::grid(int level) const {
    const int panels = 1 << level;
    const numerics::GaussRule& g = gauss_legendre(16);
    QuadratureGrid out;
    auto fill_1d = [&](double lo, double hi, std::vector<double>& xs, std::vector<double>& ws) {
        double h = (hi - lo) / panels;
        for (int p = 0; p < panels; ++p) {
            double mid = lo + (p + 0.5) * h;
            for (std::size_t i = 0; i < g.nodes.size(); ++i) {
                xs.push_back(mid + 0.5 * h * g.nodes[i]);
                ws.push_back(0.5 * h * g.weights[i]);
            }
        }
    };
    switch (kind_) {
        case ManifoldKind::Circle: {
            std::vector<double> xs, ws;
            fill_1d(0.0, 2.0 * M_PI, xs, ws);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                out.nodes.push_back({xs[i], 0.0});
                out.weights.push_back(ws[i] * radius_);
            }
            return out;
        }
        case ManifoldKind::FlatTorus2: {
            std::vector<double> xs, ws;
            fill_1d(0.0, 1.0, xs, ws);
            for (std::size_t i = 0; i < xs.size(); ++i)
                for (std::size_t j = 0; j < xs.size(); ++j) {
                    out.nodes.push_back({xs[i], xs[j]});
                    out.weights.push_back(ws[i] * ws[j] * volume_);
                }
            return out;
        }
        case ManifoldKind::Sphere2: {
            std::vector<double> ts, tw, ps, pw;
            fill_1d(0.0, M_PI, ts, tw);
            fill_1d(0.0, 2.0 * M_PI, ps, pw);
            for (std::size_t i = 0; i < ts.size(); ++i)
                for (std::size_t j = 0; j < ps.size(); ++j) {
                    out.nodes.push_back({ts[i], ps[j]});
                    out.weights.push_back(tw[i] * pw[j] * radius_ * radius_ * std::sin(ts[i]));
                }
            return out;
        }
    }
    return out;
}

double SpectralManifold::integrate(const std::function<double(const Point&)>& f,
                                   double tol) const {
    double prev = 0.0;
    for (int level = 0;; ++level) {
        QuadratureGrid g = grid(level);
        double sum = 0.0;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) sum += g.weights[i] * f(g.nodes[i]);
        if (level > 0 && std::abs(sum - prev) < std::max(tol, 1e-14 * std::abs(sum))) return sum;
        if (level >= (kind_ == ManifoldKind::Circle ? 9 : 6))
            throw std::runtime_error("integrate: quadrature refinement stalled");
        prev = sum;
    }
}

double SpectralManifold::heat_tail_bound(int first, double t) const {
    if (first <= 0) throw std::invalid_argument("heat_tail_bound: first >= 1");
    switch (kind_) {
        case ManifoldKind::Circle: {
            // Pairs k -> lambda = (m/r)^2, |phi phi| <= 1/(pi r) per mode.
            int m0 = (first + 1) / 2;
            double a = t / (radius_ * radius_);
            double ratio = std::exp(-a * (2.0 * m0 + 1.0));
            double lead = 2.0 / (M_PI * radius_) * std::exp(-a * m0 * m0);
            return ratio < 1.0 ? lead / (1.0 - ratio) : std::numeric_limits<double>::infinity();
        }
        case ManifoldKind::FlatTorus2: {
            ensure_torus_modes(first);
            double lam0 = eigenvalue(first);
            double tr = metric_inv_[0] + metric_inv_[3];
            double det = metric_inv_[0] * metric_inv_[3] - metric_inv_[1] * metric_inv_[2];
            double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
            double mu_min = 0.5 * (tr - disc), mu_max = 0.5 * (tr + disc);
            double beta = 4.0 * M_PI * M_PI * mu_min * t;
            // Every mode with lambda >= lam0 lies in an linf-shell of radius
            // >= sqrt(lam0 / (8 pi^2 mu_max)); shell j holds <= 8j modes.
            int j0 = std::max(1, (int)std::floor(std::sqrt(lam0 / (8.0 * M_PI * M_PI * mu_max))));
            double sum = 0.0, term;
            for (int j = j0; j < j0 + 4000; ++j) {
                term = 16.0 / volume_ * j * std::exp(-beta * j * j);
                sum += term;
                if (term < 1e-300 || term < 1e-18 * sum) break;
            }
            return sum;
        }
        case ManifoldKind::Sphere2: {
            int l0 = static_cast<int>(std::floor(std::sqrt(double(first)) + 1e-12));
            double sum = 0.0;
            for (int l = l0; l < l0 + 100000; ++l) {
                double term = (2.0 * l + 1.0) / (4.0 * M_PI * radius_ * radius_) *
                              std::exp(-l * (l + 1.0) * t / (radius_ * radius_));
                sum += term;
                if (term < 1e-300 || term < 1e-18 * sum) break;
            }
            return sum;
        }
    }
    return 0.0;
}

double SpectralManifold::exp_sqrt_tail_bound(int first, double c) const {
    if (first <= 0) throw std::invalid_argument("exp_sqrt_tail_bound: first >= 1");
    switch (kind_) {
        case ManifoldKind::Circle: {
            int m0 = (first + 1) / 2;
            double a = c / radius_;
            double ratio = std::exp(-a);
            double lead = 2.0 / (M_PI * radius_) * std::exp(-a * m0);
            return ratio < 1.0 ? lead / (1.0 - ratio) : std::numeric_limits<double>::infinity();
        }
        case ManifoldKind::FlatTorus2: {
            double tr = metric_inv_[0] + metric_inv_[3];
            double det = metric_inv_[0] * metric_inv_[3] - metric_inv_[1] * metric_inv_[2];
            double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
            double mu_min = 0.5 * (tr - disc), mu_max = 0.5 * (tr + disc);
            double beta = 2.0 * M_PI * std::sqrt(mu_min) * c;
            ensure_torus_modes(first);
            double lam0 = eigenvalue(first);
            int j0 = std::max(1, (int)std::floor(std::sqrt(lam0 / (8.0 * M_PI * M_PI * mu_max))));
            double sum = 0.0;
            for (int j = j0; j < j0 + 200000; ++j) {
                double term = 16.0 / volume_ * j * std::exp(-beta * j);
                sum += term;
                if (term < 1e-300 || term < 1e-18 * sum) break;
            }
            return sum;
        }
        case ManifoldKind::Sphere2: {
            int l0 = static_cast<int>(std::floor(std::sqrt(double(first)) + 1e-12));
            double sum = 0.0;
            for (int l = std::max(1, l0); l < l0 + 400000; ++l) {
                double term = (2.0 * l + 1.0) / (4.0 * M_PI * radius_ * radius_) *
                              std::exp(-std::sqrt(l * (l + 1.0)) * c / radius_);
                sum += term;
                if (term < 1e-300 || term < 1e-18 * sum) break;
            }
            return sum;
        }
    }
    return 0.0;
}

ModeFunction ModeFunction::basis(const SpectralManifold& m, int k, int cutoff) {
    std::vector<double> c(cutoff + 1, 0.0);
    if (k > cutoff) throw std::invalid_argument("ModeFunction::basis: k > cutoff");
    c[k] = 1.0;
    return ModeFunction(m, std::move(c));
}

ModeFunction ModeFunction::project(const SpectralManifold& m,
                                   const std::function<double(const Point&)>& f, int cutoff,
                                   double tol) {
    std::vector<double> c(cutoff + 1, 0.0);
    // One shared refinement: evaluate all mode integrals on common grids.
    std::vector<double> prev(cutoff + 1, 0.0);
    for (int level = 0;; ++level) {
        QuadratureGrid g = m.grid(level);
        std::vector<double> cur(cutoff + 1, 0.0);
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            double fv = f(g.nodes[i]) * g.weights[i];
            for (int k = 0; k <= cutoff; ++k) cur[k] += fv * m.eigenfunction(k, g.nodes[i]);
        }
        if (level > 0) {
            double diff = 0.0;
            for (int k = 0; k <= cutoff; ++k) diff = std::max(diff, std::abs(cur[k] - prev[k]));
            if (diff < tol) {
                c = std::move(cur);
                break;
            }
        }
        if (level >= (m.kind() == ManifoldKind::Circle ? 9 : 6))
            throw std::runtime_error("project: quadrature refinement stalled");
        prev = std::move(cur);
    }
    return ModeFunction(m, std::move(c));
}

double ModeFunction::eval(const Point& x) const {
    double sum = 0.0;
    for (int k = 0; k < static_cast<int>(coeffs_.size()); ++k) {
        if (coeffs_[k] != 0.0) sum += coeffs_[k] * manifold_->eigenfunction(k, x);
    }
    return sum;
}

ModeFunction& ModeFunction::operator*=(double a) {
    for (double& c : coeffs_) c *= a;
    return *this;
}

ModeFunction& ModeFunction::operator+=(const ModeFunction& other) {
    if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size(), 0.0);
    for (std::size_t k = 0; k < other.coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
    return *this;
}

Subset Subset::arc(const SpectralManifold& m, double lo, double hi) {
    if (m.kind() != ManifoldKind::Circle) throw std::invalid_argument("arc: circle only");
    if (!(hi > lo)) throw std::invalid_argument("arc: requires hi > lo");
    if (hi - lo >= 2.0 * M_PI) throw std::invalid_argument("arc: must be a proper subset");
    Subset s;
    s.manifold_ = &m;
    s.lo_ = {lo, 0.0};
    s.hi_ = {hi, 0.0};
    return s;
}

Subset Subset::rectangle(const SpectralManifold& m, Point lo, Point hi) {
    if (m.kind() != ManifoldKind::FlatTorus2)
        throw std::invalid_argument("rectangle: flat torus only");
    for (int i = 0; i < 2; ++i)
        if (!(hi[i] > lo[i]) || hi[i] - lo[i] > 1.0)
            throw std::invalid_argument("rectangle: bad bounds");
    Subset s;
    s.manifold_ = &m;
    s.lo_ = lo;
    s.hi_ = hi;
    return s;
}

Subset Subset::cap(const SpectralManifold& m, const Point& center, double angular_radius) {
    if (m.kind() != ManifoldKind::Sphere2) throw std::invalid_argument("cap: sphere only");
    if (!(angular_radius > 0.0 && angular_radius < M_PI))
        throw std::invalid_argument("cap: radius in (0, pi)");
    Subset s;
    s.manifold_ = &m;
    s.cap_center_ = center;
    s.cap_radius_ = angular_radius;
    return s;
}

bool Subset::contains(const Point& xin) const {
    Point x = manifold_->canonical(xin);
    switch (manifold_->kind()) {
        case ManifoldKind::Circle: {
            double lo = std::fmod(lo_[0] + 2.0 * M_PI, 2.0 * M_PI);
            double span = hi_[0] - lo_[0];
            double d = std::fmod(x[0] - lo + 4.0 * M_PI, 2.0 * M_PI);
            return d > 0.0 && d < span;
        }
        case ManifoldKind::FlatTorus2: {
            for (int i = 0; i < 2; ++i) {
                double lo = std::fmod(lo_[i] + 1.0, 1.0);
                double span = hi_[i] - lo_[i];
                double d = std::fmod(x[i] - lo + 2.0, 1.0);
                if (!(d > 0.0 && d < span)) return false;
            }
            return true;
        }
        case ManifoldKind::Sphere2:
            return manifold_->geodesic_distance(x, cap_center_) <
                   cap_radius_ * manifold_->radius();
    }
    return false;
}

double Subset::measure() const {
    switch (manifold_->kind()) {
        case ManifoldKind::Circle:
            return (hi_[0] - lo_[0]) * manifold_->radius();
        case ManifoldKind::FlatTorus2:
            return (hi_[0] - lo_[0]) * (hi_[1] - lo_[1]) * manifold_->volume();
        case ManifoldKind::Sphere2: {
            double r = manifold_->radius();
            return 2.0 * M_PI * r * r * (1.0 - std::cos(cap_radius_));
        }
    }
    return 0.0;
}

bool Subset::disjoint(const Subset& other) const {
    if (manifold_ != other.manifold_) return true;
    switch (manifold_->kind()) {
        case ManifoldKind::Circle: {
            // Compare closed arcs on the circle, exact in the parameters.
            double a0 = lo_[0], a1 = hi_[0], b0 = other.lo_[0], b1 = other.hi_[0];
            for (int shift = -1; shift <= 1; ++shift) {
                double s = shift * 2.0 * M_PI;
                if (a0 <= b1 + s && b0 + s <= a1) return false;
            }
            return true;
        }
        case ManifoldKind::FlatTorus2: {
            for (int i = 0; i < 2; ++i) {
                bool overlap = false;
                for (int shift = -1; shift <= 1; ++shift) {
                    double s = shift;
                    if (lo_[i] <= other.hi_[i] + s && other.lo_[i] + s <= hi_[i]) overlap = true;
                }
                if (!overlap) return true;
            }
            return false;
        }
        case ManifoldKind::Sphere2: {
            double gap = manifold_->geodesic_distance(cap_center_, other.cap_center_) /
                         manifold_->radius();
            return gap > cap_radius_ + other.cap_radius_;
        }
    }
    return true;
}

QuadratureGrid Subset::grid(int level) const {
    const int panels = 1 << level;
    const numerics::GaussRule& g = gauss_legendre(16);
    QuadratureGrid out;
    auto fill_1d = [&](double lo, double hi, std::vector<double>& xs, std::vector<double>& ws) {
        double h = (hi - lo) / panels;
        for (int p = 0; p < panels; ++p) {
            double mid = lo + (p + 0.5) * h;
            for (std::size_t i = 0; i < g.nodes.size(); ++i) {
                xs.push_back(mid + 0.5 * h * g.nodes[i]);
                ws.push_back(0.5 * h * g.weights[i]);
            }
        }
    };
    switch (manifold_->kind()) {
        case ManifoldKind::Circle: {
            std::vector<double> xs, ws;
            fill_1d(lo_[0], hi_[0], xs, ws);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                out.nodes.push_back({xs[i], 0.0});
                out.weights.push_back(ws[i] * manifold_->radius());
            }
            return out;
        }
        case ManifoldKind::FlatTorus2: {
            std::vector<double> x1, w1, x2, w2;
            fill_1d(lo_[0], hi_[0], x1, w1);
            fill_1d(lo_[1], hi_[1], x2, w2);
            for (std::size_t i = 0; i < x1.size(); ++i)
                for (std::size_t j = 0; j < x2.size(); ++j) {
                    out.nodes.push_back({x1[i], x2[j]});
                    out.weights.push_back(w1[i] * w2[j] * manifold_->volume());
                }
            return out;
        }
        case ManifoldKind::Sphere2: {
            // Polar grid around the cap center.
            std::vector<double> rs, rw, ps, pw;
            fill_1d(0.0, cap_radius_, rs, rw);
            fill_1d(0.0, 2.0 * M_PI, ps, pw);
            double r = manifold_->radius();
            double ct0 = std::cos(cap_center_[0]), st0 = std::sin(cap_center_[0]);
            for (std::size_t i = 0; i < rs.size(); ++i)
                for (std::size_t j = 0; j < ps.size(); ++j) {
                    // Rotate (rs, ps) polar coordinates to the cap center.
                    double ca = std::cos(rs[i]), sa = std::sin(rs[i]);
                    double x = sa * std::cos(ps[j]), y = sa * std::sin(ps[j]), zc = ca;
                    // rotate around the y-axis so the pole maps to the center,
                    // then around z by the center longitude
                    double xr = ct0 * x + st0 * zc;
                    double zr = -st0 * x + ct0 * zc;
                    double phi = std::atan2(y, xr) + cap_center_[1];
                    double theta = std::acos(std::clamp(zr, -1.0, 1.0));
                    out.nodes.push_back({theta, phi});
                    out.weights.push_back(rw[i] * pw[j] * r * r * sa);
                }
            return out;
        }
    }
    return out;
}

double Subset::integrate(const std::function<double(const Point&)>& f, double tol) const {
    double prev = 0.0;
    for (int level = 0;; ++level) {
        QuadratureGrid g = grid(level);
        double sum = 0.0;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) sum += g.weights[i] * f(g.nodes[i]);
        if (level > 0 && std::abs(sum - prev) < std::max(tol, 1e-14 * std::abs(sum))) return sum;
        if (level >= (manifold_->kind() == ManifoldKind::Circle ? 9 : 6))
            throw std::runtime_error("Subset::integrate: refinement stalled");
        prev = sum;
    }
}

std::vector<Point> Subset::samples(int n) const {
    std::vector<Point> out;
    switch (manifold_->kind()) {
        case ManifoldKind::Circle: {
            for (int i = 0; i < n; ++i) {
                double u = (i + 0.5) / n;
                out.push_back({lo_[0] + u * (hi_[0] - lo_[0]), 0.0});
            }
            return out;
        }
        case ManifoldKind::FlatTorus2: {
            int side = std::max(1, (int)std::round(std::sqrt(double(n))));
            for (int i = 0; i < side; ++i)
                for (int j = 0; j < side; ++j) {
                    double u = (i + 0.5) / side, v = (j + 0.5) / side;
                    out.push_back({lo_[0] + u * (hi_[0] - lo_[0]), lo_[1] + v * (hi_[1] - lo_[1])});
                }
            return out;
        }
        case ManifoldKind::Sphere2: {
            for (int i = 0; i < n; ++i) {
                double u = (i + 0.5) / n;
                out.push_back({cap_center_[0] - cap_radius_ + 2.0 * u * cap_radius_,
                               cap_center_[1]});
            }
            return out;
        }
    }
    return out;
}

}  // namespace fracext::spectra
