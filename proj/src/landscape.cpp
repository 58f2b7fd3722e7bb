#include "ssesam/landscape.hpp"

#include <cmath>

namespace ssesam {

QuadraticLandscape::QuadraticLandscape(Matrix hessian, Vector base_gradient, Vector anchor,
                                       double offset)
    : hessian_(std::move(hessian)),
      base_gradient_(std::move(base_gradient)),
      anchor_(std::move(anchor)),
      offset_(offset) {
    const auto d = anchor_.size();
    require(d > 0, "QuadraticLandscape: empty parameter space");
    require(hessian_.rows() == d && hessian_.cols() == d && base_gradient_.size() == d,
            "QuadraticLandscape: dimension mismatch between H, g0, w0");
    require(all_finite(hessian_) && all_finite(base_gradient_) && all_finite(anchor_) &&
                std::isfinite(offset_),
            "QuadraticLandscape: non-finite input");
    require((hessian_ - hessian_.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
            "QuadraticLandscape: Hessian not symmetric (tolerance 1e-12)");
}

double QuadraticLandscape::loss(const Vector& w) const {
    require(w.size() == anchor_.size(), "QuadraticLandscape::loss: dimension mismatch");
    const Vector d = w - anchor_;
    return offset_ + base_gradient_.dot(d) + 0.5 * d.dot(hessian_ * d);
}

Vector QuadraticLandscape::gradient(const Vector& w) const {
    require(w.size() == anchor_.size(), "QuadraticLandscape::gradient: dimension mismatch");
    return base_gradient_ + hessian_ * (w - anchor_);
}

Evaluation eval(const QuadraticLandscape& f, const Vector& w) {
    return {f.loss(w), f.gradient(w)};
}

Matrix weingarten(const Vector& gradient, const Matrix& hessian) {
    const auto d = gradient.size();
    require(hessian.rows() == d && hessian.cols() == d, "weingarten: dimension mismatch");
    require(all_finite(gradient) && all_finite(hessian), "weingarten: non-finite input");
    const double alpha_sq = 1.0 + gradient.squaredNorm();
    const double alpha = std::sqrt(alpha_sq);
    return (Matrix::Identity(d, d) - gradient * gradient.transpose() / alpha_sq) * hessian / alpha;
}

CurvatureSummary curvature_summary(const Matrix& shape_operator) {
    // The shape operator is self-adjoint in the surface metric but not as a
    // plain matrix; symmetrize before the dense solve. Eigenvalues agree.
    const Matrix sym = 0.5 * (shape_operator + shape_operator.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    require(es.info() == Eigen::Success, "curvature_summary: eigensolver failed");
    CurvatureSummary out;
    out.lambda_max = es.eigenvalues().maxCoeff();
    out.lambda_min = es.eigenvalues().minCoeff();
    if (std::abs(out.lambda_min) >= 1e-12)
        out.lambda_ratio = std::abs(out.lambda_max / out.lambda_min);
    return out;
}

QuadraticLandscape make_saddle(const SaddleSpec& spec) {
    require(!spec.negative_eigenvalues.empty(),
            "make_saddle: at least one negative eigenvalue required");
    for (double v : spec.positive_eigenvalues)
        require(v > 0.0, "make_saddle: positive eigenvalue list contains a non-positive value");
    for (double v : spec.negative_eigenvalues)
        require(v < 0.0, "make_saddle: negative eigenvalue list contains a non-negative value");
    require(spec.gradient_scale >= 0.0, "make_saddle: gradient_scale must be >= 0");

    const int d =
        static_cast<int>(spec.positive_eigenvalues.size() + spec.negative_eigenvalues.size());
    Vector eigs(d);
    int i = 0;
    for (double v : spec.positive_eigenvalues) eigs[i++] = v;
    for (double v : spec.negative_eigenvalues) eigs[i++] = v;

    Rng rng(spec.rotation_seed);
    Matrix G(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) G(r, c) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ();
    const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < d; ++c)
        if (R(c, c) < 0.0) Q.col(c) = -Q.col(c);

    const Matrix H = Q * eigs.asDiagonal() * Q.transpose();

    Vector g0 = Vector::Zero(d);
    if (spec.gradient_scale > 0.0) {
        g0 = rng.normal_vector(d);
        g0 *= spec.gradient_scale / g0.norm();
    }
    return QuadraticLandscape(0.5 * (H + H.transpose()), g0, Vector::Zero(d), 0.0);
}

std::pair<double, Vector> min_eigenpair(const Matrix& symmetric) {
    require(symmetric.rows() == symmetric.cols(), "min_eigenpair: matrix not square");
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric);
    require(es.info() == Eigen::Success, "min_eigenpair: eigensolver failed");
    int idx = 0;
    es.eigenvalues().minCoeff(&idx);
    return {es.eigenvalues()[idx], es.eigenvectors().col(idx)};
}

}  // namespace ssesam
