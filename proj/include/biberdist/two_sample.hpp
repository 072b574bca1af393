#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "biberdist/features.hpp"
#include "biberdist/matrix.hpp"

namespace biberdist {

/// RBF kernel k(x, y) = exp(-|x - y|^2 / (2 h^2)).
struct KernelConfig {
    std::string kind = "rbf";
    double bandwidth = 1.0;
    std::string fitted_on;

    double gamma() const { return 1.0 / (2.0 * bandwidth * bandwidth); }

    friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

std::string kernel_to_json(const KernelConfig& k);
KernelConfig kernel_from_json(std::string_view text);

struct MmdEstimate {
    double value = 0.0;
    std::size_t m = 0;
    std::size_t n = 0;
    KernelConfig kernel;
    bool clamped = false;  // a tiny negative rounding residue was set to 0
};

struct ConfidenceInterval {
    double level = 95.0;
    double low = 0.0;
    double high = 0.0;
    std::size_t draws = 0;
    std::size_t subsample_size = 0;
    bool coupled = false;
    double mean = 0.0;  // mean of the resampled values
};

struct ResampledInterval {
    ConfidenceInterval ci;
    std::vector<double> values;  // one per draw, in draw order
};

/// Median Euclidean distance over all distinct row pairs (mean of the two middle
/// values when the pair count is even). Throws on h = 0.
KernelConfig median_bandwidth(const Matrix& pooled, std::string fitted_on = {});
KernelConfig median_bandwidth(const FeatureMatrix& pooled);

/// Biased V-statistic estimate of squared MMD, diagonal terms included.
MmdEstimate mmd_squared(const Matrix& x, const Matrix& y, const KernelConfig& kernel);
/// Same, after checking both matrices share one standardization frame.
MmdEstimate mmd_squared(const FeatureMatrix& x, const FeatureMatrix& y, const KernelConfig& kernel);

/// Percentile of sorted values with linear interpolation between order statistics.
double percentile_sorted(const std::vector<double>& sorted, double pct);
/// Interval at `level` from the (100-level)/2 and 100-(100-level)/2 percentiles.
ConfidenceInterval percentile_interval(std::vector<double> values, double level);

struct ResampleOptions {
    std::size_t n = 600;
    std::size_t draws = 1000;
    double level = 95.0;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
};

/// Each draw splits one random permutation into two disjoint size-n halves.
ResampledInterval human_human_ci(const Matrix& full, const KernelConfig& kernel, const ResampleOptions& opt);
/// Each draw takes a size-n subset from each corpus, both from one seed stream.
ResampledInterval coupled_ci(const Matrix& human, const Matrix& model, const KernelConfig& kernel,
                             const ResampleOptions& opt);

double wasserstein_1d(std::vector<double> a, std::vector<double> b);

/// (mean(a) - mean(b)) / pooled sd; nullopt when the pooled sd is 0.
std::optional<double> cohens_d(const std::vector<double>& a, const std::vector<double>& b);

/// Sum of per-column sample variances.
double trace_dispersion(const Matrix& z);
/// Interval of trace dispersion over size-n subsamples of `full`.
ResampledInterval trace_dispersion_ci(const Matrix& full, const ResampleOptions& opt);

struct MmdCrossMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<MmdEstimate>> cells;  // symmetric, zero diagonal
};

MmdCrossMatrix mmd_cross_matrix(const std::vector<std::pair<std::string, FeatureMatrix>>& samples,
                                const KernelConfig& kernel, std::size_t threads = 0);

struct ResultRow {
    std::string pair;
    std::string register_label;
    double mmd2 = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n = 0;
    std::size_t draws = 0;
    double bandwidth = 0.0;
    std::uint64_t seed = 0;
};

/// CSV with header pair,register,mmd2,ci_low,ci_high,n,B,bandwidth,seed.
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);

}  // namespace biberdist
