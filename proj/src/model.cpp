#include "ssesam/model.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace ssesam {

namespace {

// Column-major weight block then bias, per layer, over the flat vector.
struct LayerView {
    Eigen::Map<const Matrix> W;
    Eigen::Map<const Vector> b;
};

struct LayerViewMut {
    Eigen::Map<Matrix> W;
    Eigen::Map<Vector> b;
};

int layer_offset(const std::vector<int>& dims, int layer) {
    int off = 0;
    for (int l = 0; l < layer; ++l)
        off += (dims[static_cast<size_t>(l)] + 1) * dims[static_cast<size_t>(l) + 1];
    return off;
}

LayerView view(const std::vector<int>& dims, const Vector& params, int layer) {
    const int in = dims[static_cast<size_t>(layer)];
    const int out = dims[static_cast<size_t>(layer) + 1];
    const int off = layer_offset(dims, layer);
    return {Eigen::Map<const Matrix>(params.data() + off, out, in),
            Eigen::Map<const Vector>(params.data() + off + out * in, out)};
}

LayerViewMut view_mut(const std::vector<int>& dims, Vector& params, int layer) {
    const int in = dims[static_cast<size_t>(layer)];
    const int out = dims[static_cast<size_t>(layer) + 1];
    const int off = layer_offset(dims, layer);
    return {Eigen::Map<Matrix>(params.data() + off, out, in),
            Eigen::Map<Vector>(params.data() + off + out * in, out)};
}

void check_batch(const MlpModel& m, const Batch& batch) {
    require(batch.X.rows() == batch.y.size(), "batch: feature/label row mismatch");
    require(batch.X.cols() == m.input_dim(), "batch: feature dim does not match model input");
    for (int i = 0; i < batch.y.size(); ++i)
        require(batch.y[i] >= 0 && batch.y[i] < m.output_dim(), "batch: label out of range");
}

// Forward pass keeping activations; A.back() holds the logits (no tanh).
std::vector<Matrix> forward_stack(const MlpModel& m, const Matrix& X) {
    const int L = static_cast<int>(m.layer_dims.size()) - 1;
    std::vector<Matrix> A(static_cast<size_t>(L));
    const Matrix* prev = &X;
    for (int l = 0; l < L; ++l) {
        const LayerView lv = view(m.layer_dims, m.params, l);
        Matrix Z = (*prev * lv.W.transpose()).rowwise() + lv.b.transpose();
        A[static_cast<size_t>(l)] = (l + 1 < L) ? Z.array().tanh().matrix() : std::move(Z);
        prev = &A[static_cast<size_t>(l)];
    }
    return A;
}

}  // namespace

Batch full_batch(const LongTailDataset& data) {
    return {data.features, data.labels};
}

Batch sub_batch(const LongTailDataset& data, const std::vector<int>& indices) {
    Batch b;
    b.X.resize(static_cast<int>(indices.size()), data.feature_dim());
    b.y.resize(static_cast<int>(indices.size()));
    for (size_t i = 0; i < indices.size(); ++i) {
        require(indices[i] >= 0 && indices[i] < data.size(), "sub_batch: index out of range");
        b.X.row(static_cast<int>(i)) = data.features.row(indices[i]);
        b.y[static_cast<int>(i)] = data.labels[indices[i]];
    }
    return b;
}

int mlp_param_count(const std::vector<int>& layer_dims) {
    require(layer_dims.size() >= 2, "mlp: need at least input and output dims");
    int n = 0;
    for (size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        require(layer_dims[l] >= 1 && layer_dims[l + 1] >= 1, "mlp: layer dims must be >= 1");
        n += (layer_dims[l] + 1) * layer_dims[l + 1];
    }
    return n;
}

MlpModel make_mlp(std::vector<int> layer_dims, std::uint64_t seed) {
    MlpModel m;
    m.params.resize(mlp_param_count(layer_dims));
    m.layer_dims = std::move(layer_dims);
    m.init_seed = seed;
    Rng rng(seed);
    const int L = static_cast<int>(m.layer_dims.size()) - 1;
    for (int l = 0; l < L; ++l) {
        const int in = m.layer_dims[static_cast<size_t>(l)];
        const int out = m.layer_dims[static_cast<size_t>(l) + 1];
        const double bound = std::sqrt(6.0 / (in + out));
        LayerViewMut lv = view_mut(m.layer_dims, m.params, l);
        for (int c = 0; c < in; ++c)
            for (int r = 0; r < out; ++r) lv.W(r, c) = rng.uniform(-bound, bound);
        lv.b.setZero();
    }
    return m;
}

Matrix forward(const MlpModel& m, const Matrix& X) {
    require(X.cols() == m.input_dim(), "forward: feature dim mismatch");
    require(all_finite(X), "forward: non-finite features");
    return forward_stack(m, X).back();
}

LayerSlice layer_slice(const MlpModel& m, int layer) {
    require(layer >= 0 && layer + 1 < static_cast<int>(m.layer_dims.size()),
            "layer_slice: layer index out of range");
    const LayerView lv = view(m.layer_dims, m.params, layer);
    return {lv.W, lv.b};
}

LossGrad partial_loss_grad(const MlpModel& m, const Batch& sub, int normalizer,
                           const LossSpec& spec) {
    require(normalizer > 0, "partial_loss_grad: normalizer must be positive");
    if (sub.size() == 0) return {0.0, Vector::Zero(m.param_count())};
    check_batch(m, sub);

    const int L = static_cast<int>(m.layer_dims.size()) - 1;
    const int n = sub.size();
    const std::vector<Matrix> A = forward_stack(m, sub.X);
    const Matrix& logits = A.back();

    double loss_sum = 0.0;
    Matrix D(n, m.output_dim());
    for (int i = 0; i < n; ++i) {
        LogitGrad g = logit_gradient(logits.row(i).transpose(), sub.y[i], spec);
        loss_sum += g.loss;
        D.row(i) = g.grad.transpose();
    }

    Vector grad(m.param_count());
    for (int l = L - 1; l >= 0; --l) {
        const Matrix& input = (l == 0) ? sub.X : A[static_cast<size_t>(l) - 1];
        const int off = layer_offset(m.layer_dims, l);
        const int in = m.layer_dims[static_cast<size_t>(l)];
        const int out = m.layer_dims[static_cast<size_t>(l) + 1];
        Eigen::Map<Matrix>(grad.data() + off, out, in) = D.transpose() * input;
        Eigen::Map<Vector>(grad.data() + off + out * in, out) = D.colwise().sum().transpose();
        if (l > 0) {
            const LayerView lv = view(m.layer_dims, m.params, l);
            const Matrix& act = A[static_cast<size_t>(l) - 1];
            D = ((D * lv.W).array() * (1.0 - act.array().square())).matrix();
        }
    }
    return {loss_sum / normalizer, grad / static_cast<double>(normalizer)};
}

LossGrad loss_and_grad(const MlpModel& m, const Batch& batch, const LossSpec& spec) {
    require(batch.size() > 0, "loss_and_grad: empty batch");
    return partial_loss_grad(m, batch, batch.size(), spec);
}

Vector hvp(const MlpModel& m, const Batch& batch, const LossSpec& spec, const Vector& v) {
    require(batch.size() > 0, "hvp: empty batch");
    require(v.size() == m.param_count(), "hvp: direction dimension mismatch");
    check_batch(m, batch);

    const int L = static_cast<int>(m.layer_dims.size()) - 1;
    const int n = batch.size();

    // Forward with tangents dA = d/da A(params + a*v) at a=0.
    std::vector<Matrix> A(static_cast<size_t>(L)), dA(static_cast<size_t>(L));
    {
        const Matrix* prev = &batch.X;
        const Matrix* dprev = nullptr;  // dX = 0
        for (int l = 0; l < L; ++l) {
            const LayerView w = view(m.layer_dims, m.params, l);
            const LayerView t = view(m.layer_dims, v, l);
            Matrix Z = (*prev * w.W.transpose()).rowwise() + w.b.transpose();
            Matrix dZ = (*prev * t.W.transpose()).rowwise() + t.b.transpose();
            if (dprev) dZ.noalias() += *dprev * w.W.transpose();
            if (l + 1 < L) {
                A[static_cast<size_t>(l)] = Z.array().tanh().matrix();
                dA[static_cast<size_t>(l)] =
                    ((1.0 - A[static_cast<size_t>(l)].array().square()) * dZ.array()).matrix();
            } else {
                A[static_cast<size_t>(l)] = std::move(Z);
                dA[static_cast<size_t>(l)] = std::move(dZ);
            }
            prev = &A[static_cast<size_t>(l)];
            dprev = &dA[static_cast<size_t>(l)];
        }
    }

    // Reverse pass carrying (adjoint, tangent-of-adjoint) pairs.
    Matrix D(n, m.output_dim()), dD(n, m.output_dim());
    for (int i = 0; i < n; ++i) {
        LogitJvp j = logit_jvp(A.back().row(i).transpose(), dA.back().row(i).transpose(),
                               batch.y[i], spec);
        D.row(i) = j.grad.transpose();
        dD.row(i) = j.dgrad.transpose();
    }

    Vector out(m.param_count());
    for (int l = L - 1; l >= 0; --l) {
        const Matrix& input = (l == 0) ? batch.X : A[static_cast<size_t>(l) - 1];
        const Matrix* dinput = (l == 0) ? nullptr : &dA[static_cast<size_t>(l) - 1];
        const int off = layer_offset(m.layer_dims, l);
        const int in = m.layer_dims[static_cast<size_t>(l)];
        const int out_d = m.layer_dims[static_cast<size_t>(l) + 1];
        Matrix gW = dD.transpose() * input;
        if (dinput) gW.noalias() += D.transpose() * *dinput;
        Eigen::Map<Matrix>(out.data() + off, out_d, in) = gW;
        Eigen::Map<Vector>(out.data() + off + out_d * in, out_d) = dD.colwise().sum().transpose();
        if (l > 0) {
            const LayerView w = view(m.layer_dims, m.params, l);
            const LayerView t = view(m.layer_dims, v, l);
            const Matrix& act = A[static_cast<size_t>(l) - 1];
            const Matrix& dact = dA[static_cast<size_t>(l) - 1];
            const Matrix B = D * w.W;
            Matrix dB = dD * w.W + D * t.W;
            const auto tanh_d = (1.0 - act.array().square());
            // d/da [B .* tanh'(z)] = dB .* tanh' + B .* tanh'' .* dz, with
            // tanh'' = -2 a tanh' and dz = dact / tanh'. The dact form avoids
            // dividing: B .* (-2 a) .* dact.
            dD = (dB.array() * tanh_d + B.array() * (-2.0 * act.array()) * dact.array()).matrix();
            D = (B.array() * tanh_d).matrix();
        }
    }
    return out / static_cast<double>(n);
}

DecomposedLoss decompose(const MlpModel& m, const Batch& batch, const LossSpec& spec,
                         const ClassPartition& partition) {
    require(batch.size() > 0, "decompose: empty batch");
    require(partition.num_classes() >= m.output_dim(), "decompose: partition misses classes");
    std::vector<int> head_idx, tail_idx;
    for (int i = 0; i < batch.size(); ++i)
        (partition.is_head(batch.y[i]) ? head_idx : tail_idx).push_back(i);

    Batch head, tail;
    {
        LongTailDataset tmp;  // sub_batch is index-based over a dataset view
        tmp.features = batch.X;
        tmp.labels = batch.y;
        tmp.class_counts = IntVector::Zero(m.output_dim());
        head = sub_batch(tmp, head_idx);
        tail = sub_batch(tmp, tail_idx);
    }

    const LossGrad h = partial_loss_grad(m, head, batch.size(), spec);
    const LossGrad t = partial_loss_grad(m, tail, batch.size(), spec);
    DecomposedLoss out;
    out.head_loss = h.loss;
    out.tail_loss = t.loss;
    out.head_grad = h.grad;
    out.tail_grad = t.grad;
    out.head_count = static_cast<int>(head_idx.size());
    out.tail_count = static_cast<int>(tail_idx.size());
    return out;
}

AccuracyReport evaluate_accuracy(const MlpModel& m, const LongTailDataset& data) {
    require(data.size() > 0, "evaluate_accuracy: empty dataset");
    const Matrix logits = forward(m, data.features);
    const int K = data.num_classes();
    require(m.output_dim() == K, "evaluate_accuracy: class count mismatch");
    std::vector<int> correct(static_cast<size_t>(K), 0);
    for (int i = 0; i < data.size(); ++i) {
        int arg = 0;
        logits.row(i).maxCoeff(&arg);
        if (arg == data.labels[i]) ++correct[static_cast<size_t>(data.labels[i])];
    }
    AccuracyReport rep;
    rep.per_class.resize(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) {
        require(data.class_counts[k] > 0, "evaluate_accuracy: class with no samples");
        rep.per_class[static_cast<size_t>(k)] =
            static_cast<double>(correct[static_cast<size_t>(k)]) / data.class_counts[k];
        rep.overall += rep.per_class[static_cast<size_t>(k)];
    }
    rep.overall /= K;
    return rep;
}

void save_checkpoint(const MlpModel& m, const std::string& prefix) {
    nlohmann::json header;
    header["layer_dims"] = m.layer_dims;
    header["activation"] = "tanh";
    header["seed"] = m.init_seed;
    std::ofstream jh(prefix + ".json");
    jh << header.dump(2) << "\n";
    require(jh.good(), "save_checkpoint: write failed for " + prefix + ".json");

    std::ofstream pv(prefix + ".csv");
    for (int i = 0; i < m.params.size(); ++i) pv << format_full(m.params[i]) << "\n";
    require(pv.good(), "save_checkpoint: write failed for " + prefix + ".csv");
}

MlpModel load_checkpoint(const std::string& prefix) {
    std::ifstream jh(prefix + ".json");
    require(jh.good(), "load_checkpoint: cannot open " + prefix + ".json");
    const nlohmann::json header = nlohmann::json::parse(jh);
    require(header.at("activation").get<std::string>() == "tanh",
            "load_checkpoint: unsupported activation");

    MlpModel m;
    m.layer_dims = header.at("layer_dims").get<std::vector<int>>();
    m.init_seed = header.at("seed").get<std::uint64_t>();
    const int count = mlp_param_count(m.layer_dims);
    m.params.resize(count);

    std::ifstream pv(prefix + ".csv");
    require(pv.good(), "load_checkpoint: cannot open " + prefix + ".csv");
    for (int i = 0; i < count; ++i) {
        std::string line;
        require(static_cast<bool>(std::getline(pv, line)), "load_checkpoint: truncated params");
        m.params[i] = std::stod(line);
    }
    return m;
}

}  // namespace ssesam
