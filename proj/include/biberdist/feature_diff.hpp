#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "biberdist/features.hpp"
#include "biberdist/standardize.hpp"

namespace biberdist {

struct FeatureDiffRow {
    std::string feature_id;
    std::string name;
    double mean_a = 0.0;
    double mean_b = 0.0;
    std::optional<double> sd_difference;  // (mean_b - mean_a) / sd; nullopt when sd = 0
    double wasserstein = 0.0;             // between standardized marginals
};

/// Per-feature marginal comparison of raw matrices `a` and `b` in the frame of `stats`.
std::vector<FeatureDiffRow> feature_diff_report(const FeatureMatrix& a, const FeatureMatrix& b,
                                                const StandardizationStats& stats);

/// CSV: feature_id,name,mean_a,mean_b,sd_difference,wasserstein,flag
void write_feature_diff_csv(std::ostream& out, const std::vector<FeatureDiffRow>& rows);

}  // namespace biberdist
