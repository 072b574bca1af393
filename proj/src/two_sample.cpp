#include "biberdist/two_sample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "biberdist/error.hpp"
#include "biberdist/parallel.hpp"
#include "biberdist/random.hpp"
#include "io_util.hpp"
#include "json.hpp"

namespace biberdist {

namespace {

inline double sq_dist(const double* a, const double* b, std::size_t d) {
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    std::size_t k = 0;
    for (; k + 4 <= d; k += 4) {
        const double d0 = a[k] - b[k], d1 = a[k + 1] - b[k + 1];
        const double d2 = a[k + 2] - b[k + 2], d3 = a[k + 3] - b[k + 3];
        s0 += d0 * d0;
        s1 += d1 * d1;
        s2 += d2 * d2;
        s3 += d3 * d3;
    }
    for (; k < d; ++k) {
        const double dk = a[k] - b[k];
        s0 += dk * dk;
    }
    return (s0 + s1) + (s2 + s3);
}

constexpr std::size_t kTile = 64;

// Sum of k(a_i, a_j) over all ordered pairs, diagonal included.
double within_sum(const double* a, std::size_t rows, std::size_t d, double gamma) {
    double off = 0.0;
    for (std::size_t i0 = 0; i0 < rows; i0 += kTile) {
        const std::size_t i1 = std::min(rows, i0 + kTile);
        for (std::size_t j0 = i0; j0 < rows; j0 += kTile) {
            const std::size_t j1 = std::min(rows, j0 + kTile);
            for (std::size_t i = i0; i < i1; ++i) {
                const double* ai = a + i * d;
                for (std::size_t j = std::max(j0, i + 1); j < j1; ++j) off += std::exp(-gamma * sq_dist(ai, a + j * d, d));
            }
        }
    }
    return 2.0 * off + static_cast<double>(rows);
}

double cross_sum(const double* a, std::size_t ra, const double* b, std::size_t rb, std::size_t d, double gamma) {
    double s = 0.0;
    for (std::size_t i0 = 0; i0 < ra; i0 += kTile) {
        const std::size_t i1 = std::min(ra, i0 + kTile);
        for (std::size_t j0 = 0; j0 < rb; j0 += kTile) {
            const std::size_t j1 = std::min(rb, j0 + kTile);
            for (std::size_t i = i0; i < i1; ++i) {
                const double* ai = a + i * d;
                for (std::size_t j = j0; j < j1; ++j) s += std::exp(-gamma * sq_dist(ai, b + j * d, d));
            }
        }
    }
    return s;
}

struct MmdValue {
    double value;
    bool clamped;
};

MmdValue mmd_core(const double* x, std::size_t m, const double* y, std::size_t n, std::size_t d, double gamma) {
    const double mm = static_cast<double>(m), nn = static_cast<double>(n);
    const double kxx = within_sum(x, m, d, gamma) / (mm * mm);
    const double kyy = within_sum(y, n, d, gamma) / (nn * nn);
    const double kxy = cross_sum(x, m, y, n, d, gamma) / (mm * nn);
    const double v = (kxx + kyy) - 2.0 * kxy;
    if (v < 0.0) return {0.0, true};
    return {v, false};
}

void check_kernel(const KernelConfig& k) {
    if (k.kind != "rbf") throw Error("unsupported kernel kind '" + k.kind + "'");
    if (!(k.bandwidth > 0.0) || !std::isfinite(k.bandwidth)) throw Error("kernel bandwidth must be positive");
}

Matrix gather(const Matrix& src, const std::size_t* idx, std::size_t count) {
    return src.select_rows(std::span<const std::size_t>(idx, count));
}

double median_of(std::vector<double>& v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

}  // namespace

std::string kernel_to_json(const KernelConfig& k) {
    nlohmann::ordered_json j;
    j["kind"] = k.kind;
    j["bandwidth"] = k.bandwidth;
    j["fitted_on"] = k.fitted_on;
    return j.dump(2) + "\n";
}

KernelConfig kernel_from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        KernelConfig k;
        k.kind = j.at("kind").get<std::string>();
        k.bandwidth = j.at("bandwidth").get<double>();
        k.fitted_on = j.value("fitted_on", std::string{});
        check_kernel(k);
        return k;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("kernel JSON: ") + e.what());
    }
}

KernelConfig median_bandwidth(const Matrix& pooled, std::string fitted_on) {
    const std::size_t n = pooled.rows();
    if (n < 2) throw Error("median_bandwidth needs at least 2 rows");
    const std::size_t d = pooled.cols();
    std::vector<double> dist;
    dist.reserve(n * (n - 1) / 2);
    const double* p = pooled.data().data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) dist.push_back(sq_dist(p + i * d, p + j * d, d));
    // the median of squared distances maps to the median distance; sqrt is monotone
    for (auto& v : dist) v = std::sqrt(v);
    const double h = median_of(dist);
    if (!(h > 0.0)) throw Error("degenerate pooled sample: median pairwise distance is 0");
    KernelConfig k;
    k.bandwidth = h;
    k.fitted_on = fitted_on.empty() ? "pooled " + std::to_string(n) + " rows" : std::move(fitted_on);
    return k;
}

KernelConfig median_bandwidth(const FeatureMatrix& pooled) {
    std::string desc = pooled.source + ":" + pooled.register_label + " n=" + std::to_string(pooled.rows());
    if (!pooled.frame.empty()) desc += " frame=" + pooled.frame;
    return median_bandwidth(pooled.values, std::move(desc));
}

MmdEstimate mmd_squared(const Matrix& x, const Matrix& y, const KernelConfig& kernel) {
    check_kernel(kernel);
    if (x.rows() == 0 || y.rows() == 0) throw Error("mmd_squared needs at least one row in each sample");
    if (x.cols() != y.cols())
        throw Error("width mismatch: " + std::to_string(x.cols()) + " vs " + std::to_string(y.cols()));
    const auto r = mmd_core(x.data().data(), x.rows(), y.data().data(), y.rows(), x.cols(), kernel.gamma());
    return MmdEstimate{r.value, x.rows(), y.rows(), kernel, r.clamped};
}

MmdEstimate mmd_squared(const FeatureMatrix& x, const FeatureMatrix& y, const KernelConfig& kernel) {
    if (x.frame != y.frame) throw Error("frame mismatch: '" + x.frame + "' vs '" + y.frame + "'");
    if (x.inventory_version != y.inventory_version) throw Error("inventory mismatch");
    return mmd_squared(x.values, y.values, kernel);
}

double percentile_sorted(const std::vector<double>& sorted, double pct) {
    if (sorted.empty()) throw Error("percentile of empty sample");
    const double pos = pct / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ConfidenceInterval percentile_interval(std::vector<double> values, double level) {
    if (!(level > 0.0 && level < 100.0)) throw Error("level must lie in (0, 100)");
    ConfidenceInterval ci;
    ci.level = level;
    ci.draws = values.size();
    ci.mean = values.empty() ? 0.0 : std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    std::sort(values.begin(), values.end());
    const double tail = (100.0 - level) / 2.0;
    ci.low = percentile_sorted(values, tail);
    ci.high = percentile_sorted(values, 100.0 - tail);
    return ci;
}

namespace {

void check_resample(const ResampleOptions& opt) {
    if (opt.n == 0) throw Error("subsample size must be positive");
    if (opt.draws == 0) throw Error("number of draws must be positive");
    if (!(opt.level > 0.0 && opt.level < 100.0)) throw Error("level must lie in (0, 100)");
}

}  // namespace

ResampledInterval human_human_ci(const Matrix& full, const KernelConfig& kernel, const ResampleOptions& opt) {
    check_kernel(kernel);
    check_resample(opt);
    if (2 * opt.n > full.rows())
        throw Error("human-human interval needs 2n = " + std::to_string(2 * opt.n) + " rows, corpus has " +
                    std::to_string(full.rows()));
    const auto all = iota_indices(full.rows());
    const std::size_t d = full.cols();
    std::vector<double> values(opt.draws);
    parallel_for(opt.draws, opt.threads, [&](std::size_t b) {
        Rng rng(stream_seed(opt.seed, b));
        const auto idx = sample_without_replacement(all, 2 * opt.n, rng);
        const Matrix both = gather(full, idx.data(), idx.size());
        const double* p = both.data().data();
        values[b] = mmd_core(p, opt.n, p + opt.n * d, opt.n, d, kernel.gamma()).value;
    });
    ResampledInterval out;
    out.ci = percentile_interval(values, opt.level);
    out.ci.subsample_size = opt.n;
    out.ci.coupled = false;
    out.values = std::move(values);
    return out;
}

ResampledInterval coupled_ci(const Matrix& human, const Matrix& model, const KernelConfig& kernel,
                             const ResampleOptions& opt) {
    check_kernel(kernel);
    check_resample(opt);
    if (human.cols() != model.cols()) throw Error("width mismatch between human and model matrices");
    if (opt.n > std::min(human.rows(), model.rows()))
        throw Error("coupled interval needs n = " + std::to_string(opt.n) + " rows in each corpus; human has " +
                    std::to_string(human.rows()) + ", model has " + std::to_string(model.rows()));
    const auto hall = iota_indices(human.rows());
    const auto mall = iota_indices(model.rows());
    std::vector<double> values(opt.draws);
    parallel_for(opt.draws, opt.threads, [&](std::size_t b) {
        Rng rng(stream_seed(opt.seed, b));
        const auto hi = sample_without_replacement(hall, opt.n, rng);
        const auto mi = sample_without_replacement(mall, opt.n, rng);
        const Matrix x = gather(human, hi.data(), hi.size());
        const Matrix y = gather(model, mi.data(), mi.size());
        values[b] = mmd_core(x.data().data(), opt.n, y.data().data(), opt.n, x.cols(), kernel.gamma()).value;
    });
    ResampledInterval out;
    out.ci = percentile_interval(values, opt.level);
    out.ci.subsample_size = opt.n;
    out.ci.coupled = true;
    out.values = std::move(values);
    return out;
}

double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error("wasserstein_1d needs non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    // integrate |F_a - F_b| between consecutive breakpoints of the merged support
    std::size_t i = 0, j = 0;
    double prev = std::min(a.front(), b.front());
    double total = 0.0;
    while (i < a.size() || j < b.size()) {
        double next;
        if (j == b.size() || (i < a.size() && a[i] <= b[j]))
            next = a[i];
        else
            next = b[j];
        total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (next - prev);
        while (i < a.size() && a[i] == next) ++i;
        while (j < b.size() && b[j] == next) ++j;
        prev = next;
    }
    return total;
}

std::optional<double> cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw Error("cohens_d needs at least 2 values per sample");
    auto moments = [](const std::vector<double>& v) {
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        return std::pair{mean, ss};
    };
    const auto [ma, ssa] = moments(a);
    const auto [mb, ssb] = moments(b);
    const double pooled = std::sqrt((ssa + ssb) / static_cast<double>(a.size() + b.size() - 2));
    if (!(pooled > 0.0)) return std::nullopt;
    return (ma - mb) / pooled;
}

double trace_dispersion(const Matrix& z) {
    if (z.rows() < 2) throw Error("trace_dispersion needs at least 2 rows");
    const double n = static_cast<double>(z.rows());
    double total = 0.0;
    for (std::size_t c = 0; c < z.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < z.rows(); ++r) mean += z(r, c);
        mean /= n;
        double ss = 0.0;
        for (std::size_t r = 0; r < z.rows(); ++r) ss += (z(r, c) - mean) * (z(r, c) - mean);
        total += ss / (n - 1.0);
    }
    return total;
}

ResampledInterval trace_dispersion_ci(const Matrix& full, const ResampleOptions& opt) {
    check_resample(opt);
    if (opt.n < 2 || opt.n > full.rows())
        throw Error("trace dispersion interval needs 2 <= n <= " + std::to_string(full.rows()));
    const auto all = iota_indices(full.rows());
    std::vector<double> values(opt.draws);
    parallel_for(opt.draws, opt.threads, [&](std::size_t b) {
        Rng rng(stream_seed(opt.seed, b));
        const auto idx = sample_without_replacement(all, opt.n, rng);
        values[b] = trace_dispersion(gather(full, idx.data(), idx.size()));
    });
    ResampledInterval out;
    out.ci = percentile_interval(values, opt.level);
    out.ci.subsample_size = opt.n;
    out.values = std::move(values);
    return out;
}

MmdCrossMatrix mmd_cross_matrix(const std::vector<std::pair<std::string, FeatureMatrix>>& samples,
                                const KernelConfig& kernel, std::size_t threads) {
    check_kernel(kernel);
    MmdCrossMatrix out;
    const std::size_t k = samples.size();
    for (std::size_t i = 0; i < k; ++i) {
        const auto& [name, m] = samples[i];
        if (m.frame != samples.front().second.frame)
            throw Error("frame mismatch: '" + name + "' is in frame '" + m.frame + "', expected '" +
                        samples.front().second.frame + "'");
        if (m.values.cols() != samples.front().second.values.cols()) throw Error("width mismatch for '" + name + "'");
        out.names.push_back(name);
    }
    out.cells.assign(k, std::vector<MmdEstimate>(k));
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < k; ++i) {
        out.cells[i][i] = MmdEstimate{0.0, samples[i].second.rows(), samples[i].second.rows(), kernel, false};
        for (std::size_t j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
    }
    parallel_for(pairs.size(), threads, [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        out.cells[i][j] = mmd_squared(samples[i].second.values, samples[j].second.values, kernel);
    });
    for (const auto& [i, j] : pairs) {
        out.cells[j][i] = out.cells[i][j];
        std::swap(out.cells[j][i].m, out.cells[j][i].n);
    }
    return out;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    using detail::csv_field;
    using detail::format_double;
    out << "pair,register,mmd2,ci_low,ci_high,n,B,bandwidth,seed\n";
    for (const auto& r : rows) {
        out << csv_field(r.pair) << ',' << csv_field(r.register_label) << ',' << format_double(r.mmd2) << ','
            << format_double(r.ci_low) << ',' << format_double(r.ci_high) << ',' << r.n << ',' << r.draws << ','
            << format_double(r.bandwidth) << ',' << r.seed << '\n';
    }
}

}  // namespace biberdist
