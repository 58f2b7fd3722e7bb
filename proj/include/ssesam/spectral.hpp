#pragma once

#include "ssesam/common.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ssesam {

// Symmetric operator given only through matrix-vector products.
using MatVec = std::function<Vector(const Vector&)>;

struct PowerIterationOptions {
    int max_iters = 10000;  // matvec budget per stage
    double tol = 1e-10;     // relative, on the shifted Rayleigh quotient
    std::uint64_t seed = 0; // start-vector seed
};

struct EigenPair {
    double value = 0.0;
    Vector vector;
    double residual = 0.0;  // ||H v - value * v|| at exit
    bool converged = false;
    int iters = 0;
};

// Extreme eigenvalues of a symmetric operator via two shifted power
// iterations: lambda_max from H + sigma*I (sigma beats the spectral radius, so
// the top eigenvalue of H is the dominant one of the shift), then lambda_min
// from lambda_max*I - H. A stage stops when the Rayleigh quotient is stable
// AND the eigen-residual is small relative to it; otherwise converged=false.
// The min-stage residual test bounds ||H v - lambda_min v|| by
// tol * (|lambda_max| + |lambda_min|).
struct SpectrumSummary {
    EigenPair max_pair;
    EigenPair min_pair;
    std::optional<double> lambda_ratio;  // |max/min|; absent when |min| < 1e-12
    bool converged = false;              // both stages
};

// Top eigenvalue/eigenvector only (the max stage of spectrum_summary).
EigenPair max_eigenpair(const MatVec& apply, int dim, const PowerIterationOptions& opt);

// Matvec form: the shift is bootstrapped from a short plain power iteration
// (1.25 x the largest observed ||Hv||/||v||).
SpectrumSummary spectrum_summary(const MatVec& apply, int dim,
                                 const PowerIterationOptions& opt);

// Dense form: the shift is the infinity-norm row-sum bound on the spectral
// radius, which needs no bootstrap.
SpectrumSummary spectrum_summary(const Matrix& H, const PowerIterationOptions& opt);

// Hessian-spectrum diagnostics of a model's training loss, optionally
// restricted to the samples of a class subset.
struct SpectralReport {
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    std::optional<double> lambda_ratio;  // |max/min|; absent when |min| < 1e-12
    Vector v_min;                        // unit eigenvector for lambda_min
    int iterations = 0;                  // power steps across both eigen stages
    double residual_max = 0.0;
    double residual_min = 0.0;
    bool converged = false;
    std::string scope;  // "all" or the class list; subsets use every sample of each class
};

struct MlpModel;
struct LongTailDataset;
struct LossSpec;

// Builds the Hessian matvec from exact HVPs of the mean loss over the chosen
// samples (all of them, or every sample of the listed classes) and runs the
// two-stage estimator.
SpectralReport spectral_report(const MlpModel& model, const LongTailDataset& data,
                               const LossSpec& spec,
                               const std::optional<std::vector<int>>& class_subset,
                               const PowerIterationOptions& opt);

}  // namespace ssesam
