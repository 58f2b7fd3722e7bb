#include "ssesam/data.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace ssesam {

namespace {

// Sub-stream ids off the dataset seed: class means are shared between train
// and test draws, noise is not.
constexpr std::uint64_t kMeanStream = 0;
constexpr std::uint64_t kTrainNoiseStream = 1;
constexpr std::uint64_t kTestNoiseStream = 2;

void check_spec(const DatasetSpec& s) {
    require(s.num_classes >= 2, "generate: K must be >= 2");
    require(s.imbalance >= 1.0, "generate: imbalance factor must be >= 1");
    require(s.max_per_class >= s.num_classes, "generate: n_max must be >= K");
    require(s.feature_dim >= 1, "generate: feature dim must be >= 1");
}

// Class means on the sphere of radius 2*sqrt(p): per-coordinate scale stays
// O(1) as p grows, and random directions keep the blobs separable against
// unit noise at desk scale.
Matrix class_means(const DatasetSpec& s) {
    Rng rng(derive_seed(s.seed, kMeanStream));
    const double radius = 2.0 * std::sqrt(static_cast<double>(s.feature_dim));
    Matrix means(s.num_classes, s.feature_dim);
    for (int k = 0; k < s.num_classes; ++k) {
        Vector dir = rng.normal_vector(s.feature_dim);
        means.row(k) = (radius / dir.norm()) * dir;
    }
    return means;
}

LongTailDataset fill(const DatasetSpec& s, const std::vector<int>& counts, Split split,
                     std::uint64_t noise_stream) {
    const Matrix means = class_means(s);
    Rng rng(derive_seed(s.seed, noise_stream));
    int total = 0;
    for (int c : counts) total += c;

    LongTailDataset out;
    out.features.resize(total, s.feature_dim);
    out.labels.resize(total);
    out.class_counts.resize(s.num_classes);
    out.split = split;
    int row = 0;
    for (int k = 0; k < s.num_classes; ++k) {
        out.class_counts[k] = counts[static_cast<size_t>(k)];
        for (int i = 0; i < counts[static_cast<size_t>(k)]; ++i, ++row) {
            out.labels[row] = k;
            for (int j = 0; j < s.feature_dim; ++j)
                out.features(row, j) = means(k, j) + rng.normal();
        }
    }
    return out;
}

}  // namespace

std::vector<int> imbalance_profile(int num_classes, int max_per_class, double imbalance) {
    require(num_classes >= 2, "imbalance_profile: K must be >= 2");
    require(imbalance >= 1.0, "imbalance_profile: imbalance factor must be >= 1");
    require(max_per_class >= num_classes, "imbalance_profile: n_max must be >= K");
    std::vector<int> counts(static_cast<size_t>(num_classes));
    for (int k = 0; k < num_classes; ++k) {
        const double e = -static_cast<double>(k) / (num_classes - 1);
        counts[static_cast<size_t>(k)] =
            static_cast<int>(std::lround(max_per_class * std::pow(imbalance, e)));
    }
    require(counts.back() >= 1, "imbalance_profile: smallest class rounds to zero samples");
    return counts;
}

LongTailDataset generate(const DatasetSpec& spec) {
    check_spec(spec);
    return fill(spec, imbalance_profile(spec.num_classes, spec.max_per_class, spec.imbalance),
                Split::train, kTrainNoiseStream);
}

LongTailDataset generate_balanced_test(const DatasetSpec& spec, int per_class) {
    check_spec(spec);
    require(per_class >= 1, "generate_balanced_test: per_class must be >= 1");
    return fill(spec, std::vector<int>(static_cast<size_t>(spec.num_classes), per_class),
                Split::test, kTestNoiseStream);
}

int ClassPartition::num_head() const {
    int n = 0;
    for (bool h : head) n += h ? 1 : 0;
    return n;
}

ClassPartition partition(const IntVector& class_counts, int eta_thres) {
    require(eta_thres >= 0, "partition: eta_thres must be >= 0");
    ClassPartition out;
    out.eta_thres = eta_thres;
    out.head.resize(static_cast<size_t>(class_counts.size()));
    for (int k = 0; k < class_counts.size(); ++k)
        out.head[static_cast<size_t>(k)] = class_counts[k] > eta_thres;
    return out;
}

SplitMetrics split_accuracy(const std::vector<double>& per_class_accuracy,
                            const IntVector& train_class_counts, int many_min, int few_max) {
    const int K = static_cast<int>(per_class_accuracy.size());
    require(K > 0 && train_class_counts.size() == K,
            "split_accuracy: accuracy/count vectors must have equal nonzero length");
    require(0 <= few_max && few_max <= many_min, "split_accuracy: need 0 <= few_max <= many_min");

    double sums[3] = {0.0, 0.0, 0.0};
    int sizes[3] = {0, 0, 0};
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
        const double a = per_class_accuracy[static_cast<size_t>(k)];
        require(0.0 <= a && a <= 1.0, "split_accuracy: accuracy outside [0,1]");
        const int c = train_class_counts[k];
        const int bucket = c > many_min ? 0 : (c < few_max ? 2 : 1);
        sums[bucket] += a;
        ++sizes[bucket];
        total += a;
    }
    SplitMetrics out;
    out.overall = total / K;
    if (sizes[0] > 0) out.many = sums[0] / sizes[0];
    if (sizes[1] > 0) out.medium = sums[1] / sizes[1];
    if (sizes[2] > 0) out.few = sums[2] / sizes[2];
    return out;
}

void save_csv(const LongTailDataset& data, const std::string& path) {
    std::ofstream f(path);
    require(f.good(), "save_csv: cannot open " + path);
    f << "label";
    for (int j = 0; j < data.feature_dim(); ++j) f << ",x" << j;
    f << "\n";
    for (int i = 0; i < data.size(); ++i) {
        f << data.labels[i];
        for (int j = 0; j < data.feature_dim(); ++j)
            f << "," << format_full(data.features(i, j));
        f << "\n";
    }
    require(f.good(), "save_csv: write failed for " + path);

    nlohmann::json sidecar;
    sidecar["class_counts"] = std::vector<int>(
        data.class_counts.data(), data.class_counts.data() + data.class_counts.size());
    sidecar["split"] = data.split == Split::train ? "train" : "test";
    std::ofstream side(path + ".counts.json");
    side << sidecar.dump(2) << "\n";
    require(side.good(), "save_csv: write failed for counts sidecar");
}

LongTailDataset load_csv(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), "load_csv: cannot open " + path);
    std::string line;
    require(static_cast<bool>(std::getline(f, line)), "load_csv: empty file");

    std::vector<int> labels;
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        require(static_cast<bool>(std::getline(ss, cell, ',')), "load_csv: malformed row");
        labels.push_back(std::stoi(cell));
        std::vector<double> feat;
        while (std::getline(ss, cell, ',')) feat.push_back(std::stod(cell));
        rows.push_back(std::move(feat));
        require(rows.back().size() == rows.front().size(), "load_csv: ragged feature row");
    }
    require(!rows.empty(), "load_csv: no samples");

    LongTailDataset out;
    const int n = static_cast<int>(rows.size());
    const int p = static_cast<int>(rows.front().size());
    out.features.resize(n, p);
    out.labels.resize(n);
    int max_label = 0;
    for (int i = 0; i < n; ++i) {
        require(labels[static_cast<size_t>(i)] >= 0, "load_csv: negative label");
        out.labels[i] = labels[static_cast<size_t>(i)];
        max_label = std::max(max_label, out.labels[i]);
        for (int j = 0; j < p; ++j) out.features(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
    out.class_counts = IntVector::Zero(max_label + 1);
    for (int i = 0; i < n; ++i) ++out.class_counts[out.labels[i]];

    std::ifstream side(path + ".counts.json");
    if (side.good()) {
        nlohmann::json sidecar = nlohmann::json::parse(side);
        const auto counts = sidecar.at("class_counts").get<std::vector<int>>();
        require(static_cast<int>(counts.size()) >= max_label + 1,
                "load_csv: sidecar class count shorter than labels require");
        IntVector full = IntVector::Zero(static_cast<int>(counts.size()));
        for (int i = 0; i < n; ++i) ++full[out.labels[i]];
        for (size_t k = 0; k < counts.size(); ++k)
            require(full[static_cast<int>(k)] == counts[k],
                    "load_csv: sidecar class counts disagree with rows");
        out.class_counts = full;
        out.split = sidecar.at("split").get<std::string>() == "test" ? Split::test : Split::train;
    }
    return out;
}

}  // namespace ssesam
