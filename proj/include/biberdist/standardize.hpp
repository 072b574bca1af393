#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "biberdist/features.hpp"

namespace biberdist {

/// Per-feature mean and sample sd (N-1) of a full human corpus.
struct StandardizationStats {
    std::string inventory_version{kInventoryVersion};
    std::string register_label;
    std::vector<double> means;
    std::vector<double> sds;
    std::size_t fitted_on = 0;

    /// Frame label stamped on matrices standardized with these stats.
    std::string frame_id() const;
    /// Indices of features whose sd is 0.
    std::vector<std::size_t> zero_sd_features() const;

    friend bool operator==(const StandardizationStats&, const StandardizationStats&) = default;
};

StandardizationStats fit_stats(const FeatureMatrix& full_human);

/// (x - mean) / sd per feature; features with sd 0 map to 0.
FeatureMatrix standardize(const FeatureMatrix& m, const StandardizationStats& stats);
FeatureMatrix unstandardize(const FeatureMatrix& z, const StandardizationStats& stats);

std::string stats_to_json(const StandardizationStats& stats);
StandardizationStats stats_from_json(std::string_view text);

inline constexpr std::size_t kDimensionCount = 6;

struct Loading {
    std::string_view table_name;  // feature label as printed in the loadings table
    std::string_view feature_id;
    int dimension;  // 1..7; dimension 7 is kept but not scored
    double loading;
};

class DimensionLoadings {
public:
    static const DimensionLoadings& standard();

    const std::vector<Loading>& entries() const noexcept { return entries_; }
    /// Loading of a feature position on a dimension (0 when absent).
    double weight(std::size_t feature, int dimension) const;

private:
    DimensionLoadings();
    std::vector<Loading> entries_;
    std::vector<std::array<double, 7>> weights_;
};

struct DimensionScores {
    std::string doc_id;
    std::array<double, kDimensionCount> scores{};
};

/// Weighted sum of z-values over each dimension's loaded features.
std::vector<DimensionScores> dimension_scores(const FeatureMatrix& z,
                                              const DimensionLoadings& loadings = DimensionLoadings::standard());

}  // namespace biberdist
