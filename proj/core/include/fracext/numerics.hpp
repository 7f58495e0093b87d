#pragma once

// Shared numerical substrate: Gauss-Legendre rules, adaptive panel
// integration, tanh-sinh quadrature for endpoint singularities, small dense
// least-squares solvers and Chebyshev window fits.

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace fracext::numerics {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Nodes/weights computed once per order via Newton iteration and cached.
const GaussRule& gauss_legendre(int n);

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;   // estimated
    bool converged = true;
    long evaluations = 0;
};

// Adaptive bisection with embedded 16/32-point Gauss panels.
QuadResult integrate_adaptive(const std::function<double(double)>& f,
                              double a, double b,
                              double rel_tol,
                              double abs_floor = 0.0,
                              int max_depth = 40);

// Fixed-order Gauss panel, no error estimate.
double gauss_panel(const std::function<double(double)>& f, double a, double b, int order = 32);

// tanh-sinh rule on (a, b); tolerates integrable endpoint singularities.
double tanh_sinh(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-13);

class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// Householder QR least squares, rows >= cols.
std::vector<double> solve_least_squares(Matrix A, std::vector<double> b);

// Minimum-norm solution of an underdetermined system (rows <= cols),
// optionally with a small ridge on A A^T.
std::vector<double> solve_least_norm(const Matrix& A, const std::vector<double>& b,
                                     double ridge = 0.0);

// Tikhonov-regularized least squares (A^T A + alpha I) x = A^T b.
std::vector<double> solve_ridge(const Matrix& A, const std::vector<double>& b, double alpha);

// 2-norm condition estimate of A via power iteration on A^T A (and inverse
// iteration through a Cholesky factorization).
double condition_estimate(const Matrix& A);

// Chebyshev fit of samples (xs, ys) on [center-halfwidth, center+halfwidth].
class ChebyshevFit {
  public:
    ChebyshevFit() = default;
    ChebyshevFit(const std::vector<double>& xs, const std::vector<double>& ys,
                 double center, double halfwidth, int degree);

    double eval(double x) const;
    // d^k/dx^k at x, computed by exact differentiation of the expansion.
    double derivative(double x, int order) const;
    double center() const { return center_; }
    double halfwidth() const { return halfwidth_; }
    const std::vector<double>& coefficients() const { return coeffs_; }

  private:
    double center_ = 0.0, halfwidth_ = 1.0;
    std::vector<double> coeffs_;
};

}  // namespace fracext::numerics
