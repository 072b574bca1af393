#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "biberdist/features.hpp"
#include "biberdist/matrix.hpp"

namespace biberdist {

/// Rows are standardized feature vectors; label 0 = human, 1 = ai.
struct LabeledDataset {
    Matrix rows;
    std::vector<int> labels;
    std::vector<std::string> ids;
    std::string register_label = "all";

    std::size_t size() const noexcept { return labels.size(); }
    void append(const LabeledDataset& other);
};

/// Stacks a human (label 0) and a model (label 1) matrix.
LabeledDataset make_labeled(const FeatureMatrix& human, const FeatureMatrix& model, std::string register_label);

struct LogRegModel {
    std::vector<double> weights;
    double bias = 0.0;
    double l2 = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    std::vector<std::pair<double, double>> cv_auc;  // (lambda, mean fold AUC) over the grid
    std::string inventory_version{kInventoryVersion};

    double predict_proba(std::span<const double> x) const;
};

struct EvalMetrics {
    double accuracy = 0.0;
    double roc_auc = 0.5;
    bool auc_defined = true;
    std::string split;
};

/// Downsamples the larger class to the smaller one, then splits each class
/// into test (round(test_fraction * count)) and train.
std::pair<LabeledDataset, LabeledDataset> balance_and_split(const LabeledDataset& data, double test_fraction,
                                                            std::uint64_t seed);

struct TrainOptions {
    std::vector<double> l2_grid{0.001, 0.01, 0.1, 1.0, 10.0};
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    double tolerance = 1e-6;  // on the gradient norm
    std::size_t max_iterations = 100;
    std::size_t threads = 0;
};

/// Mean negative log-likelihood + (l2/2)|w|^2 with an unpenalized bias.
/// `params` holds the weights followed by the bias; `grad` receives the gradient.
double logreg_objective(const Matrix& x, const std::vector<int>& y, const std::vector<double>& params, double l2,
                        std::vector<double>* grad = nullptr);

/// Damped Newton fit at a fixed l2.
LogRegModel fit_logreg(const Matrix& x, const std::vector<int>& y, double l2, double tolerance = 1e-6,
                       std::size_t max_iterations = 100);

/// Chooses l2 by stratified k-fold mean ROC AUC (ties to the earlier grid entry),
/// then refits on all of `train`.
LogRegModel train_logreg(const LabeledDataset& train, const TrainOptions& opt = {});

/// Mann-Whitney AUC with ties counted 1/2; nullopt when a class is missing.
std::optional<double> roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

EvalMetrics evaluate(const LogRegModel& model, const LabeledDataset& test);

std::string model_to_json(const LogRegModel& model);
LogRegModel model_from_json(const std::string& text);

/// CSV: register,accuracy,roc_auc
void write_metrics_csv(std::ostream& out, const std::vector<std::pair<std::string, EvalMetrics>>& rows);

}  // namespace biberdist
