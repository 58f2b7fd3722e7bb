#pragma once

#include "ssesam/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ssesam {

// Synthetic long-tail classification set: class k holds
//   count_k = round(n_max * IF^(-k/(K-1)))
// samples (IF = imbalance factor, so count_0 = n_max and count_{K-1} ~
// n_max/IF). Features are isotropic unit-variance Gaussian blobs around
// seeded class means on a sphere.
struct DatasetSpec {
    int num_classes = 20;      // K
    int max_per_class = 500;   // n_max
    double imbalance = 100.0;  // IF >= 1
    int feature_dim = 16;      // p
    std::uint64_t seed = 0;
};

enum class Split { train, test };

struct LongTailDataset {
    Matrix features;        // n x p, one row per sample
    IntVector labels;       // n, values in [0, K)
    IntVector class_counts; // K, by label
    Split split = Split::train;

    int size() const { return static_cast<int>(labels.size()); }
    int feature_dim() const { return static_cast<int>(features.cols()); }
    int num_classes() const { return static_cast<int>(class_counts.size()); }
};

std::vector<int> imbalance_profile(int num_classes, int max_per_class, double imbalance);

LongTailDataset generate(const DatasetSpec& spec);

// Balanced evaluation set over the same class means (sub-seeded from the same
// master seed, so train and test share geometry but not noise).
LongTailDataset generate_balanced_test(const DatasetSpec& spec, int per_class);

// Head/tail split by training frequency: head iff count > eta_thres (strict).
struct ClassPartition {
    std::vector<bool> head;
    int eta_thres = 0;

    bool is_head(int cls) const { return head[static_cast<size_t>(cls)]; }
    int num_head() const;
    int num_classes() const { return static_cast<int>(head.size()); }
};

ClassPartition partition(const IntVector& class_counts, int eta_thres);

// Frequency-bucketed accuracy. Buckets are fixed by *training* counts:
//   Many: count > many_min,  Few: count < few_max,  Medium: the inclusive rest.
// An empty bucket yields an absent value, never a fake zero. Overall is the
// macro average (every class weighted equally, matching the balanced test set).
struct SplitMetrics {
    std::optional<double> many;
    std::optional<double> medium;
    std::optional<double> few;
    double overall = 0.0;
};

SplitMetrics split_accuracy(const std::vector<double>& per_class_accuracy,
                            const IntVector& train_class_counts, int many_min, int few_max);

// CSV persistence: header row, then "label,x0,...,x{p-1}" with full-precision
// floats; class counts are recomputed on load.
void save_csv(const LongTailDataset& data, const std::string& path);
LongTailDataset load_csv(const std::string& path);

}  // namespace ssesam
