#pragma once

#include "ssesam/common.hpp"
#include "ssesam/data.hpp"
#include "ssesam/losses.hpp"

#include <string>
#include <vector>

namespace ssesam {

// Mini-batch view: one feature row per sample.
struct Batch {
    Matrix X;
    IntVector y;

    int size() const { return static_cast<int>(y.size()); }
};

Batch full_batch(const LongTailDataset& data);
Batch sub_batch(const LongTailDataset& data, const std::vector<int>& indices);

// tanh MLP over a flat parameter vector. Layout per layer: the (out x in)
// weight matrix in column-major order, then the bias. tanh keeps every layer
// twice differentiable, which the exact Hessian-vector products rely on.
struct MlpModel {
    std::vector<int> layer_dims;  // input, hidden..., K logits
    Vector params;
    std::uint64_t init_seed = 0;

    int param_count() const { return static_cast<int>(params.size()); }
    int input_dim() const { return layer_dims.front(); }
    int output_dim() const { return layer_dims.back(); }
};

int mlp_param_count(const std::vector<int>& layer_dims);

// Glorot-style init: uniform in +-sqrt(6/(fan_in+fan_out)), seeded.
MlpModel make_mlp(std::vector<int> layer_dims, std::uint64_t seed);

Matrix forward(const MlpModel& m, const Matrix& X);  // batch logits

// Read-only view of one layer's weight matrix and bias inside the flat vector.
struct LayerSlice {
    Eigen::Map<const Matrix> weight;  // out x in
    Eigen::Map<const Vector> bias;
};
LayerSlice layer_slice(const MlpModel& m, int layer);

struct LossGrad {
    double loss;
    Vector grad;
};

// Mean loss over the batch and its exact parameter gradient.
LossGrad loss_and_grad(const MlpModel& m, const Batch& batch, const LossSpec& spec);

// Loss/gradient of a sub-batch under a caller-chosen normalizer (sums divided
// by `normalizer`, not the sub-batch size). With normalizer = full batch size
// this is one side of the head/tail decomposition; the parts then add up to
// the plain batch mean exactly. Empty sub-batch gives exact zeros.
LossGrad partial_loss_grad(const MlpModel& m, const Batch& sub, int normalizer,
                           const LossSpec& spec);

// Exact Hessian-vector product d/da [grad(params + a*v)] at a=0, computed by
// forward-over-reverse propagation (tangents pushed through the forward pass,
// then through the backward pass). No finite differencing anywhere.
Vector hvp(const MlpModel& m, const Batch& batch, const LossSpec& spec, const Vector& v);

struct DecomposedLoss {
    double head_loss = 0.0;
    double tail_loss = 0.0;
    Vector head_grad;
    Vector tail_grad;
    int head_count = 0;
    int tail_count = 0;
};

// Head/tail split of the batch-mean objective: each part sums its samples'
// losses/gradients and divides by the FULL batch size, so
// head + tail == loss_and_grad result up to fp round-off.
DecomposedLoss decompose(const MlpModel& m, const Batch& batch, const LossSpec& spec,
                         const ClassPartition& partition);

// Accuracy on a dataset, overall and per class.
struct AccuracyReport {
    double overall = 0.0;                  // macro average over classes
    std::vector<double> per_class;
};
AccuracyReport evaluate_accuracy(const MlpModel& m, const LongTailDataset& data);

// Checkpoint = <prefix>.json header {layer_dims, activation, seed} plus
// <prefix>.csv with one full-precision parameter per line.
void save_checkpoint(const MlpModel& m, const std::string& prefix);
MlpModel load_checkpoint(const std::string& prefix);

}  // namespace ssesam
