#pragma once

#include "ssesam/data.hpp"
#include "ssesam/runner.hpp"
#include "ssesam/spectral.hpp"
#include "ssesam/theory.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ssesam {

// FNV-1a over the exact bytes of an artifact, as listed in manifest.json.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(std::uint64_t h);

// Collects every file a run emits and finishes with a manifest.json mapping
// relative paths to FNV-1a 64 content hashes (the manifest itself excluded).
class ArtifactWriter {
  public:
    explicit ArtifactWriter(std::string dir);

    const std::string& dir() const { return dir_; }
    std::string path(const std::string& relpath) const;

    void write_text(const std::string& relpath, const std::string& content);
    void write_json(const std::string& relpath, const nlohmann::json& j);
    // Hash a file that other code already wrote under dir (e.g. a checkpoint).
    void record_file(const std::string& relpath);
    void finalize();

  private:
    std::string dir_;
    std::map<std::string, std::uint64_t> hashes_;
};

// One row of metrics.csv; accuracies are on the balanced test set, train_loss
// is the mean step loss of that epoch. Empty frequency buckets stay empty
// cells in the CSV.
struct MetricsRow {
    int epoch = 0;
    double train_loss = 0.0;
    SplitMetrics acc;
    int stage = 1;
};

// Numeric cells use 17-significant-digit formatting throughout.
std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::string trajectory_csv(const std::vector<StepRecord>& steps);

nlohmann::json to_json(const SpectralReport& rep, const PowerIterationOptions& opt);
nlohmann::json to_json(const EscapeReport& rep);
nlohmann::json to_json(const GrowthReport& rep);
nlohmann::json to_json(const RatioReport& rep);
nlohmann::json to_json(const AngleReport& rep);
nlohmann::json to_json(const ImbalanceReport& rep);
nlohmann::json to_json(const BoundInputs& in);
nlohmann::json to_json(const BoundTrial& trial);

}  // namespace ssesam
