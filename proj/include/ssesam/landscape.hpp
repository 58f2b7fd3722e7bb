#pragma once

#include "ssesam/common.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace ssesam {

// Quadratic objective
//   L(w) = c + g0^T (w - w0) + 1/2 (w - w0)^T H (w - w0)
// with symmetric H. Gradient and Hessian are exact, so statements about
// saddle dynamics can be checked without a Taylor remainder.
class QuadraticLandscape {
  public:
    QuadraticLandscape(Matrix hessian, Vector base_gradient, Vector anchor, double offset);

    int dim() const { return static_cast<int>(anchor_.size()); }
    double loss(const Vector& w) const;
    Vector gradient(const Vector& w) const;
    const Matrix& hessian() const { return hessian_; }
    const Vector& base_gradient() const { return base_gradient_; }
    const Vector& anchor() const { return anchor_; }
    double offset() const { return offset_; }

  private:
    Matrix hessian_;
    Vector base_gradient_;
    Vector anchor_;
    double offset_;
};

struct Evaluation {
    double loss;
    Vector gradient;
};

Evaluation eval(const QuadraticLandscape& f, const Vector& w);

// Weingarten (shape) operator of the graph of L at a point with gradient g
// and Hessian H:
//   W = (I - g g^T / alpha^2) H / alpha,  alpha = sqrt(1 + |g|^2).
// Its eigenvalues are the principal curvatures of the loss surface; in 1-D
// this reduces to the plane-curve curvature f'' / (1 + f'^2)^{3/2}.
Matrix weingarten(const Vector& gradient, const Matrix& hessian);

struct CurvatureSummary {
    double lambda_max;
    double lambda_min;
    std::optional<double> lambda_ratio;  // |max/min|; absent when |min| < 1e-12
};

CurvatureSummary curvature_summary(const Matrix& shape_operator);

// Saddle factory: H = Q^T diag(eigs) Q with Q drawn from a seeded Gaussian QR
// (R's diagonal sign-fixed so Q is unique), base gradient isotropic with the
// requested norm, anchor 0, offset 0. At least one negative eigenvalue is
// required -- otherwise there is nothing to escape.
struct SaddleSpec {
    std::vector<double> positive_eigenvalues;
    std::vector<double> negative_eigenvalues;
    std::uint64_t rotation_seed = 0;
    double gradient_scale = 0.0;
};

QuadraticLandscape make_saddle(const SaddleSpec& spec);

// Most negative eigenvalue and its unit eigenvector (dense solve; the escape
// direction v_min that the saddle analysis projects onto).
std::pair<double, Vector> min_eigenpair(const Matrix& symmetric);

}  // namespace ssesam
