#pragma once
#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ope {

// One (x, a, e, r) tuple with its logging propensity.
struct LoggedRecord {
    Eigen::VectorXd context;
    int action = 0;
    std::vector<int> embedding; // embedding[k] in [0, cardinalities[k])
    double reward = 0.0;
    double logging_propensity = 1.0;
};

struct LoggedDataset {
    std::vector<LoggedRecord> records;
    std::vector<int> embedding_cardinalities;
    int num_actions = 0;
    // Dimensions present in the raw data but masked from estimator-facing views.
    std::vector<int> withheld_dims;

    std::size_t size() const { return records.size(); }
    int embed_dims() const { return static_cast<int>(embedding_cardinalities.size()); }
    int context_dim() const { return records.empty() ? 0 : static_cast<int>(records[0].context.size()); }

    // Embedding dimensions estimators are allowed to look at.
    std::vector<int> observed_dims() const;

    void validate() const;
};

// Headered CSV (x_0..x_{d-1},action,e_0..e_{k-1},reward,pscore) plus a
// sidecar "<path>.meta" structured-text file with cardinalities and mask.
void save_dataset(const LoggedDataset& data, const std::string& csv_path);
LoggedDataset load_dataset(const std::string& csv_path);

// Round-trip-exact decimal formatting for doubles (shortest representation).
std::string format_double(double v);

} // namespace ope
