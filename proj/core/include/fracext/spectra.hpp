#pragma once

// Closed model manifolds with explicit Laplace-Beltrami eigenpairs: the unit
// circle (scaled), flat 2-tori with a constant SPD metric, and round spheres.
// Mode ordering is fixed and documented per kind so cached tables reproduce.

#include <array>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace fracext::spectra {

// Coordinates: Circle -> (theta, unused), theta in [0, 2pi);
// FlatTorus2 -> (x1, x2) in the unit cell [0,1)^2; Sphere2 -> (colatitude,
// longitude).
using Point = std::array<double, 2>;

enum class ManifoldKind { Circle, FlatTorus2, Sphere2 };

struct Eigenpair {
    double lambda = 0.0;
    std::function<double(const Point&)> phi;
};

struct QuadratureGrid {
    std::vector<Point> nodes;
    std::vector<double> weights;
};

class SpectralManifold {
  public:
    // Circle of given radius; modes ordered 1, cos(theta), sin(theta),
    // cos(2 theta), sin(2 theta), ...
    static SpectralManifold circle(double radius);
    // Flat torus R^2/Z^2 with constant metric ds^2 = dx^T A dx, A SPD;
    // lattice representatives ordered by eigenvalue, ties lexicographic,
    // each contributing a cosine then a sine mode.
    static SpectralManifold flat_torus(double a11, double a12, double a22);
    // Round sphere of given radius; real spherical harmonics ordered by
    // degree blocks: (l,0), (l,1,cos), (l,1,sin), (l,2,cos), ...
    static SpectralManifold sphere(double radius);

    ManifoldKind kind() const { return kind_; }
    int dimension() const { return kind_ == ManifoldKind::Circle ? 1 : 2; }
    double volume() const { return volume_; }
    double radius() const { return radius_; }
    const std::array<double, 4>& metric() const { return metric_; }

    double eigenvalue(int k) const;
    double eigenfunction(int k, const Point& x) const;
    Eigenpair eigenpair(int k) const;
    // Coordinate partials of phi_k (Circle and FlatTorus2 only).
    std::array<double, 2> eigenfunction_gradient(int k, const Point& x) const;
    // g(u, v) with the inverse metric, for coordinate covectors u, v.
    double cometric(const std::array<double, 2>& u, const std::array<double, 2>& v) const;

    // Number of modes with eigenvalue <= cap (multiplicity resolved).
    int modes_below(double lambda_cap) const;

    double geodesic_distance(const Point& x, const Point& z) const;

    // Composite Gauss-Legendre grid; level doubles the panel count.
    QuadratureGrid grid(int level) const;
    // Adaptive refinement doubling until successive levels agree to tol.
    double integrate(const std::function<double(const Point&)>& f, double tol = 1e-10) const;

    // Uniform bound on sum_{k >= first} |phi_k(x) phi_k(z)| e^{-lambda_k t}.
    double heat_tail_bound(int first, double t) const;
    // Same with e^{-c sqrt(lambda_k)} decay.
    double exp_sqrt_tail_bound(int first, double c) const;

    // Wraps coordinates into the fundamental domain.
    Point canonical(const Point& x) const;

  private:
    SpectralManifold() = default;
    void ensure_torus_modes(int count) const;

    ManifoldKind kind_ = ManifoldKind::Circle;
    double radius_ = 1.0;
    double volume_ = 0.0;
    std::array<double, 4> metric_ = {1.0, 0.0, 0.0, 1.0};      // torus A
    std::array<double, 4> metric_inv_ = {1.0, 0.0, 0.0, 1.0};  // torus A^{-1}

    struct TorusMode {
        double lambda;
        int k1, k2;
        bool is_sin;
    };
    mutable std::vector<TorusMode> torus_modes_;
    mutable int torus_box_ = 0;
};

// Function represented by coefficients in the eigenbasis of one manifold.
class ModeFunction {
  public:
    ModeFunction() = default;
    ModeFunction(const SpectralManifold& m, std::vector<double> coeffs)
        : manifold_(&m), coeffs_(std::move(coeffs)) {}

    static ModeFunction basis(const SpectralManifold& m, int k, int cutoff);
    // L2 projection of a pointwise function onto modes 0..cutoff.
    static ModeFunction project(const SpectralManifold& m,
                                const std::function<double(const Point&)>& f, int cutoff,
                                double tol = 1e-10);

    const SpectralManifold& manifold() const { return *manifold_; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    std::vector<double>& coeffs() { return coeffs_; }
    int cutoff() const { return static_cast<int>(coeffs_.size()) - 1; }

    bool mean_zero() const { return coeffs_.empty() || coeffs_[0] == 0.0; }
    ModeFunction& drop_mean() {
        if (!coeffs_.empty()) coeffs_[0] = 0.0;
        return *this;
    }

    double eval(const Point& x) const;
    double coefficient(int k) const {
        return k < static_cast<int>(coeffs_.size()) ? coeffs_[k] : 0.0;
    }

    ModeFunction& operator*=(double a);
    ModeFunction& operator+=(const ModeFunction& other);

  private:
    const SpectralManifold* manifold_ = nullptr;
    std::vector<double> coeffs_;
};

// Open subsets with exact parameter descriptions: arcs, rectangles in the
// unit cell, geodesic caps.
class Subset {
  public:
    static Subset arc(const SpectralManifold& m, double theta_lo, double theta_hi);
    static Subset rectangle(const SpectralManifold& m, Point lo, Point hi);
    static Subset cap(const SpectralManifold& m, const Point& center, double angular_radius);

    const SpectralManifold& manifold() const { return *manifold_; }
    bool contains(const Point& x) const;
    double measure() const;
    bool disjoint(const Subset& other) const;

    QuadratureGrid grid(int level) const;
    double integrate(const std::function<double(const Point&)>& f, double tol = 1e-10) const;
    // Uniformly spread interior sample points.
    std::vector<Point> samples(int n) const;

    double arc_lo() const { return lo_[0]; }
    double arc_hi() const { return hi_[0]; }

  private:
    const SpectralManifold* manifold_ = nullptr;
    Point lo_{0.0, 0.0}, hi_{0.0, 0.0};  // arc/rect bounds; cap: center + radius
    Point cap_center_{0.0, 0.0};
    double cap_radius_ = 0.0;
};

}  // namespace fracext::spectra
