#include "ssesam/spectral.hpp"

#include "ssesam/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ssesam {

namespace {

// Dominant eigenpair of a PSD operator B, one matvec per iteration. The seed
// stream keeps the three stages' start vectors independent but reproducible.
EigenPair power_dominant(const MatVec& B, int dim, const PowerIterationOptions& opt,
                         std::uint64_t stream) {
    Rng rng(derive_seed(opt.seed, stream));
    Vector v = rng.normal_vector(dim);
    const double n0 = v.norm();
    require(n0 > 0.0, "power iteration: degenerate start vector");
    v /= n0;

    EigenPair pair;
    double mu_prev = std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= opt.max_iters; ++iter) {
        const Vector Bv = B(v);
        require(all_finite(Bv), "power iteration: operator produced non-finite values");
        const double mu = v.dot(Bv);
        const double resid = (Bv - mu * v).norm();
        pair.value = mu;
        pair.vector = v;
        pair.residual = resid;  // shift-invariant: equals the residual on H itself
        pair.iters = iter;

        const double norm_bv = Bv.norm();
        if (norm_bv <= 1e-300) {
            // Operator annihilates v: v is an exact eigenvector for 0.
            pair.value = 0.0;
            pair.residual = norm_bv;
            pair.converged = true;
            return pair;
        }
        if (std::abs(mu - mu_prev) <= opt.tol * std::abs(mu) &&
            resid <= opt.tol * std::abs(mu)) {
            pair.converged = true;
            return pair;
        }
        mu_prev = mu;
        v = Bv / norm_bv;
    }
    return pair;
}

EigenPair top_with_shift(const MatVec& apply, int dim, double shift,
                         const PowerIterationOptions& opt) {
    const MatVec shifted_up = [&](const Vector& v) -> Vector {
        return apply(v) + shift * v;
    };
    EigenPair top = power_dominant(shifted_up, dim, opt, 1);
    top.value -= shift;
    return top;
}

SpectrumSummary finish(const MatVec& apply, int dim, EigenPair top,
                       const PowerIterationOptions& opt) {
    const double cap = top.value;
    const MatVec flipped = [&](const Vector& v) -> Vector { return cap * v - apply(v); };
    EigenPair bottom = power_dominant(flipped, dim, opt, 2);
    bottom.value = cap - bottom.value;

    SpectrumSummary out;
    out.max_pair = std::move(top);
    out.min_pair = std::move(bottom);
    out.converged = out.max_pair.converged && out.min_pair.converged;
    if (std::abs(out.min_pair.value) >= 1e-12)
        out.lambda_ratio = std::abs(out.max_pair.value / out.min_pair.value);
    return out;
}

// Spectral-radius bound for a matvec-only operator: plain power iteration only
// has to get within ~25% for the shift to dominate, which a short run does.
double radius_bound(const MatVec& apply, int dim, const PowerIterationOptions& opt) {
    Rng rng(derive_seed(opt.seed, 0));
    Vector v = rng.normal_vector(dim);
    v /= v.norm();
    double radius = 0.0;
    const int warmup = std::min(50, opt.max_iters);
    for (int i = 0; i < warmup; ++i) {
        Vector hv = apply(v);
        require(all_finite(hv), "spectrum_summary: operator produced non-finite values");
        const double n = hv.norm();
        radius = std::max(radius, n);
        if (n <= 1e-300) break;
        v = hv / n;
    }
    return radius;
}

void check(int dim, const PowerIterationOptions& opt) {
    require(dim >= 1, "spectrum_summary: dimension must be >= 1");
    require(opt.max_iters >= 1 && opt.tol > 0.0, "spectrum_summary: bad iteration options");
}

}  // namespace

EigenPair max_eigenpair(const MatVec& apply, int dim, const PowerIterationOptions& opt) {
    check(dim, opt);
    return top_with_shift(apply, dim, 1.25 * radius_bound(apply, dim, opt), opt);
}

SpectrumSummary spectrum_summary(const MatVec& apply, int dim,
                                 const PowerIterationOptions& opt) {
    check(dim, opt);
    return finish(apply, dim,
                  top_with_shift(apply, dim, 1.25 * radius_bound(apply, dim, opt), opt), opt);
}

SpectrumSummary spectrum_summary(const Matrix& H, const PowerIterationOptions& opt) {
    require(H.rows() == H.cols() && H.rows() >= 1, "spectrum_summary: matrix must be square");
    require(all_finite(H), "spectrum_summary: non-finite matrix");
    const double shift = H.cwiseAbs().rowwise().sum().maxCoeff();
    const MatVec apply = [&H](const Vector& v) -> Vector { return H * v; };
    const int dim = static_cast<int>(H.rows());
    PowerIterationOptions o = opt;
    check(dim, o);
    return finish(apply, dim, top_with_shift(apply, dim, shift, o), o);
}

SpectralReport spectral_report(const MlpModel& model, const LongTailDataset& data,
                               const LossSpec& spec,
                               const std::optional<std::vector<int>>& class_subset,
                               const PowerIterationOptions& opt) {
    validate(spec, data.num_classes());
    require(data.size() > 0, "spectral_report: dataset is empty");
    require(data.feature_dim() == model.input_dim(), "spectral_report: feature dim mismatch");
    require(data.num_classes() == model.output_dim(), "spectral_report: class count mismatch");

    Batch batch;
    std::string scope;
    if (class_subset) {
        require(!class_subset->empty(), "spectral_report: empty class subset");
        std::vector<bool> keep(static_cast<size_t>(data.num_classes()), false);
        for (int c : *class_subset) {
            require(c >= 0 && c < data.num_classes(), "spectral_report: class out of range");
            keep[static_cast<size_t>(c)] = true;
        }
        std::vector<int> idx;
        for (int i = 0; i < data.size(); ++i) {
            if (keep[static_cast<size_t>(data.labels[i])]) idx.push_back(i);
        }
        require(!idx.empty(), "spectral_report: no samples in the class subset");
        batch = sub_batch(data, idx);
        std::ostringstream os;
        os << "classes ";
        for (size_t i = 0; i < class_subset->size(); ++i) {
            if (i > 0) os << ",";
            os << (*class_subset)[i];
        }
        os << " (full per-class sample set)";
        scope = os.str();
    } else {
        batch = full_batch(data);
        scope = "all";
    }

    const MatVec apply = [&](const Vector& v) -> Vector { return hvp(model, batch, spec, v); };
    const SpectrumSummary sum = spectrum_summary(apply, model.param_count(), opt);

    SpectralReport rep;
    rep.lambda_max = sum.max_pair.value;
    rep.lambda_min = sum.min_pair.value;
    rep.lambda_ratio = sum.lambda_ratio;
    rep.v_min = sum.min_pair.vector;
    rep.iterations = sum.max_pair.iters + sum.min_pair.iters;
    rep.residual_max = sum.max_pair.residual;
    rep.residual_min = sum.min_pair.residual;
    rep.converged = sum.converged;
    rep.scope = std::move(scope);
    return rep;
}

}  // namespace ssesam
