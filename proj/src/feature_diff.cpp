#include "biberdist/feature_diff.hpp"

#include <numeric>
#include <ostream>

#include "biberdist/error.hpp"
#include "biberdist/two_sample.hpp"
#include "io_util.hpp"

namespace biberdist {

std::vector<FeatureDiffRow> feature_diff_report(const FeatureMatrix& a, const FeatureMatrix& b,
                                                const StandardizationStats& stats) {
    if (a.inventory_version != b.inventory_version) throw Error("inventory mismatch between matrices");
    if (a.rows() == 0 || b.rows() == 0) throw Error("feature_diff_report needs non-empty matrices");
    const auto za = standardize(a, stats);
    const auto zb = standardize(b, stats);
    const auto& inv = FeatureInventory::standard();
    std::vector<FeatureDiffRow> rows;
    for (std::size_t j = 0; j < a.values.cols(); ++j) {
        FeatureDiffRow r;
        if (j < inv.size()) {
            r.feature_id = inv[j].id;
            r.name = inv[j].name;
        }
        const auto ca = a.values.column(j);
        const auto cb = b.values.column(j);
        r.mean_a = std::accumulate(ca.begin(), ca.end(), 0.0) / static_cast<double>(ca.size());
        r.mean_b = std::accumulate(cb.begin(), cb.end(), 0.0) / static_cast<double>(cb.size());
        if (stats.sds[j] > 0.0) r.sd_difference = (r.mean_b - r.mean_a) / stats.sds[j];
        r.wasserstein = wasserstein_1d(za.values.column(j), zb.values.column(j));
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_feature_diff_csv(std::ostream& out, const std::vector<FeatureDiffRow>& rows) {
    using detail::format_double;
    out << "feature_id,name,mean_a,mean_b,sd_difference,wasserstein,flag\n";
    for (const auto& r : rows) {
        out << detail::csv_field(r.feature_id) << ',' << detail::csv_field(r.name) << ',' << format_double(r.mean_a)
            << ',' << format_double(r.mean_b) << ','
            << (r.sd_difference ? format_double(*r.sd_difference) : std::string("undefined")) << ','
            << format_double(r.wasserstein) << ',' << (r.sd_difference ? "" : "zero_sd") << '\n';
    }
}

}  // namespace biberdist
