// Acceptance checks, one PASS/FAIL line per criterion. Exit status 1 if any fails.

#include "generation_fixture.hpp"
#include "golden.hpp"
#include "loadings_table.hpp"
#include "stub_server.hpp"

#include "biberdist/chat_client.hpp"
#include "biberdist/detector.hpp"
#include "biberdist/sampler.hpp"
#include "biberdist/standardize.hpp"
#include "biberdist/text_prep.hpp"
#include "biberdist/two_sample.hpp"

#include <chrono>
#include <iostream>
#include <set>

using namespace testsupport;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail << std::endl;
    if (!o.pass) ++failures;
}

template <typename F>
void criterion(int id, const std::string& name, F&& body) {
    try {
        report(id, name, body());
    } catch (const std::exception& e) {
        report(id, name, {false, std::string("exception: ") + e.what()});
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Shared synthetic Gaussian register: 5,000 documents, 67 features.
struct Register {
    FeatureMatrix raw;
    StandardizationStats stats;
    FeatureMatrix z;
    KernelConfig kernel;
    std::vector<double> means, sds;  // generating parameters
};

Register make_register(std::uint64_t seed) {
    Register r;
    Rng rng(seed);
    std::uniform_real_distribution<double> mu(0.0, 50.0), sd(0.5, 10.0);
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
        r.means.push_back(mu(rng));
        r.sds.push_back(sd(rng));
    }
    Matrix m(5000, kFeatureCount);
    std::normal_distribution<double> nd;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t c = 0; c < kFeatureCount; ++c) m(i, c) = r.means[c] + r.sds[c] * nd(rng);
    r.raw = as_feature_matrix(m, "human");
    r.stats = fit_stats(r.raw);
    r.z = standardize(r.raw, r.stats);
    r.kernel = median_bandwidth(r.z);
    return r;
}

/// Fresh raw documents from the register's generating distribution, with
/// optional per-feature mean shifts (in generating sd units) and sd scale.
FeatureMatrix fresh_raw(const Register& r, std::size_t rows, Rng& rng, const std::vector<double>& shift_sd,
                        double sd_scale, const std::string& prefix) {
    Matrix m(rows, kFeatureCount);
    std::normal_distribution<double> nd;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t c = 0; c < kFeatureCount; ++c)
            m(i, c) = r.means[c] + r.sds[c] * (shift_sd[c] + sd_scale * nd(rng));
    return as_feature_matrix(m, prefix);
}

Outcome mmd_oracle(std::vector<std::pair<Matrix, Matrix>>& fixtures) {
    Rng rng(101);
    double worst = 0.0;
    const auto t0 = Clock::now();
    for (int t = 0; t < 200; ++t) {
        const std::size_t m = 1 + uniform_below(rng, 80), n = 1 + uniform_below(rng, 80);
        auto x = gaussian_matrix(m, kFeatureCount, rng);
        auto y = gaussian_matrix(n, kFeatureCount, rng, 0.25 * static_cast<double>(t % 4));
        Matrix pooled = x;
        for (std::size_t i = 0; i < y.rows(); ++i) pooled.append_row(y.row(i));
        const auto k = median_bandwidth(pooled);
        const double got = mmd_squared(x, y, k).value;
        worst = std::max(worst, std::abs(got - naive_mmd2(x, y, k.bandwidth)));
        fixtures.emplace_back(std::move(x), std::move(y));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-10 && secs < 10.0,
            "200 pairs, max |diff| vs naive = " + fmt(worst) + ", " + fmt(secs) + " s"};
}

Outcome identity_symmetry(const std::vector<std::pair<Matrix, Matrix>>& fixtures, const Register& reg) {
    double worst_self = 0.0, worst_sym = 0.0;
    auto check = [&](const Matrix& x, const Matrix& y, const KernelConfig& k) {
        worst_self = std::max({worst_self, mmd_squared(x, x, k).value, mmd_squared(y, y, k).value});
        worst_sym = std::max(worst_sym, std::abs(mmd_squared(x, y, k).value - mmd_squared(y, x, k).value));
    };
    KernelConfig fixed;
    fixed.bandwidth = std::sqrt(2.0 * kFeatureCount);  // the properties hold for any bandwidth
    for (const auto& [x, y] : fixtures) check(x, y, fixed);
    const auto idx = iota_indices(reg.z.rows());
    const std::vector<std::size_t> a(idx.begin(), idx.begin() + 600), b(idx.begin() + 600, idx.begin() + 1200);
    check(reg.z.values.select_rows(a), reg.z.values.select_rows(b), reg.kernel);
    return {worst_self <= 1e-12 && worst_sym <= 1e-14,
            "max MMD(X,X) = " + fmt(worst_self) + ", max |MMD(X,Y) - MMD(Y,X)| = " + fmt(worst_sym)};
}

Outcome ci_coverage(const Register& reg, ConfidenceInterval& ci600) {
    const auto t0 = Clock::now();
    const std::vector<std::size_t> sweep{50, 100, 200, 400, 600};
    std::vector<double> highs;
    for (auto n : sweep) {
        ResampleOptions opt;
        opt.n = n;
        opt.draws = 1000;
        opt.seed = 7;
        const auto ci = human_human_ci(reg.z.values, reg.kernel, opt).ci;
        highs.push_back(ci.high);
        if (n == 600) ci600 = ci;
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < highs.size(); ++i) decreasing = decreasing && highs[i] < highs[i - 1];

    Rng rng(202);
    const std::vector<double> no_shift(kFeatureCount, 0.0);
    std::size_t inside = 0;
    for (int t = 0; t < 200; ++t) {
        const auto a = standardize(fresh_raw(reg, 600, rng, no_shift, 1.0, "a"), reg.stats);
        const auto b = standardize(fresh_raw(reg, 600, rng, no_shift, 1.0, "b"), reg.stats);
        const double v = mmd_squared(a, b, reg.kernel).value;
        if (v >= ci600.low && v <= ci600.high) ++inside;
    }
    const double coverage = static_cast<double>(inside) / 200.0;
    const double secs = seconds_since(t0);
    std::string curve;
    for (std::size_t i = 0; i < sweep.size(); ++i) curve += (i ? ", " : "") + std::to_string(sweep[i]) + ":" + fmt(highs[i]);
    return {coverage >= 0.90 && coverage <= 1.00 && decreasing && secs < 300.0,
            "coverage " + fmt(100 * coverage) + "% of 200 fresh pairs in [" + fmt(ci600.low) + ", " +
                fmt(ci600.high) + "]; CI upper by n {" + curve + "}" + (decreasing ? " decreasing" : " NOT decreasing") +
                "; " + fmt(secs) + " s"};
}

Outcome detectable_shift(const Register& reg, const ConfidenceInterval& ci600) {
    Rng rng(303);
    std::vector<double> shift(kFeatureCount, 0.0);
    for (std::size_t c = 0; c < 10; ++c) shift[c * 6] = 0.5;
    const auto model = standardize(fresh_raw(reg, 600, rng, shift, 1.0, "model"), reg.stats);
    auto pick = sample_without_replacement(iota_indices(reg.z.rows()), 600, rng);
    const auto human_sample = reg.z.select(pick);
    const double observed = mmd_squared(model, human_sample, reg.kernel).value;
    return {observed > ci600.high,
            "observed MMD^2 " + fmt(observed) + " vs human-human upper limit " + fmt(ci600.high)};
}

Outcome loadings_fidelity() {
    const auto& l = DimensionLoadings::standard();
    bool ok = l.entries().size() == kLoadingsTable.size();
    std::size_t mismatches = 0;
    for (std::size_t i = 0; ok && i < kLoadingsTable.size(); ++i) {
        const auto& row = kLoadingsTable[i];
        const auto& e = l.entries()[i];
        if (e.dimension != row.dimension || e.loading != row.loading ||
            e.feature_id != FeatureInventory::standard()[row.feature].id || l.weight(row.feature, row.dimension) != row.loading)
            ++mismatches;
    }
    const bool spots = l.weight(feat::private_verbs, 1) == 0.96 && l.weight(feat::other_nouns, 1) == -0.80 &&
                       l.weight(feat::past_tense, 2) == 0.90 && l.weight(feat::infinitives, 4) == 0.76;
    std::size_t unit_failures = 0, unit_checked = 0;
    for (const auto& row : kLoadingsTable) {
        if (row.dimension > 6) continue;
        FeatureMatrix z = as_feature_matrix(Matrix(1, kFeatureCount, 0.0), "z", "unit");
        z.values(0, row.feature) = 1.0;
        const auto s = dimension_scores(z);
        ++unit_checked;
        for (int d = 1; d <= 6; ++d)
            if (s[0].scores[d - 1] != (d == row.dimension ? row.loading : 0.0)) ++unit_failures;
    }
    ok = ok && mismatches == 0 && spots && unit_failures == 0;
    return {ok, std::to_string(l.entries().size()) + " entries, " + std::to_string(mismatches) + " mismatches, spot checks " +
                    (spots ? "ok" : "failed") + ", " + std::to_string(unit_checked) + " unit vectors exact"};
}

Outcome golden_suite() {
    const auto doc = load_conllu(data_path("golden.conllu")).front();
    const auto counts = count_features(doc);
    std::string wrong;
    for (std::size_t f = 0; f < kFeatureCount; ++f)
        if (counts.counts[f] != kGoldenCounts[f]) wrong += " " + std::string(FeatureInventory::standard()[f].id);
    const auto v = extract_features(doc);
    double worst_rate = 0.0;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        double expected = static_cast<double>(kGoldenCounts[f]) * 1000.0 / kGoldenTokens;
        if (f == feat::type_token_ratio) expected = 82.0 / 124.0;
        if (f == feat::mean_word_length) expected = 526.0 / 124.0;
        worst_rate = std::max(worst_rate, std::abs(v.values[f] - expected));
    }
    const auto rate = extract_features(rate_fixture());
    const bool rate_ok = count_lexical_tokens(rate_fixture()) == 1000 &&
                         rate.values[feat::second_person_pronouns] == 250.0 && rate.values[feat::pronoun_it] == 250.0 &&
                         rate.values[feat::private_verbs] == 250.0;
    return {wrong.empty() && worst_rate < 1e-12 && rate_ok,
            "67 features on 12 sentences, mismatches:" + (wrong.empty() ? std::string(" none") : wrong) +
                "; max rate error " + fmt(worst_rate) + "; 1000-token fixture " + (rate_ok ? "250/1000 ok" : "wrong")};
}

Outcome truncation_rule() {
    const auto under_doc = plain_document("under", {200, 150});
    const auto under = truncate_to_limit(under_doc);
    const auto whole = truncate_to_limit(plain_document("whole", {390, 30, 50}));
    const auto cut = truncate_to_limit(plain_document("cut", {390, 80}));
    const bool ok = !under.truncated && under.document == under_doc && under.lexical_tokens == 350 &&
                    whole.lexical_tokens == 420 && !whole.hit_hard_limit && whole.document.sentences.size() == 2 &&
                    cut.lexical_tokens == 440 && cut.hit_hard_limit && count_lexical_tokens(cut.document) == 440;
    return {ok, "350 -> " + std::to_string(under.lexical_tokens) + ", 390+30 -> " + std::to_string(whole.lexical_tokens) +
                    ", 390+80 -> " + std::to_string(cut.lexical_tokens)};
}

Outcome subsampler() {
    const auto t0 = Clock::now();
    const auto reg = synthetic_register(5000, 404);
    const auto z = standardize(reg.raw, fit_stats(reg.raw));
    const auto dims = dimension_scores(z);
    const auto split = exclusion_filter(reg.corpus, 0.05);
    SubsampleSpec spec;
    spec.n = 600;
    spec.candidate_draws = 1000;
    spec.seed = 11;
    const auto result = representative_subsample(dims, split.eligible, spec);
    std::set<std::string> chosen(result.selected_ids.begin(), result.selected_ids.end());
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < z.rows(); ++i)
        if (chosen.count(z.doc_ids[i])) rows.push_back(i);
    const auto sub = z.values.select_rows(rows);
    double sum = 0.0;
    for (std::size_t c = 0; c < kFeatureCount; ++c) sum += std::abs(*cohens_d(sub.column(c), z.values.column(c)));
    const double mean_d = sum / kFeatureCount;
    auto sorted = result.candidate_w1;
    std::sort(sorted.begin(), sorted.end());
    const double median = percentile_sorted(sorted, 50);
    return {mean_d < 0.06 && result.aggregate_w1 < median && rows.size() == 600,
            "mean |d| = " + fmt(mean_d) + ", selected W1 " + fmt(result.aggregate_w1) + " vs median candidate " +
                fmt(median) + ", " + fmt(seconds_since(t0)) + " s"};
}

/// Integral of |F_a - F_b| over the merged breakpoints, CDFs by direct counting.
double breakpoint_w1(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> grid = a;
    grid.insert(grid.end(), b.begin(), b.end());
    std::sort(grid.begin(), grid.end());
    auto cdf = [](const std::vector<double>& v, double t) {
        return static_cast<double>(std::count_if(v.begin(), v.end(), [t](double x) { return x <= t; })) /
               static_cast<double>(v.size());
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        total += std::abs(cdf(a, grid[i]) - cdf(b, grid[i])) * (grid[i + 1] - grid[i]);
    return total;
}

Outcome wasserstein_cohen() {
    Rng rng(505);
    std::normal_distribution<double> nd;
    double worst = 0.0, worst_uniform = 0.0;
    for (int t = 0; t < 100; ++t) {
        std::size_t na = 2 + uniform_below(rng, 200), nb = 2 + uniform_below(rng, 200);
        if (na == nb) ++nb;
        std::vector<double> a(na), b(nb);
        for (auto& x : a) x = nd(rng);
        for (auto& x : b) x = 0.3 * static_cast<double>(t % 5) + 2.0 * nd(rng);
        const double w = wasserstein_1d(a, b);
        worst = std::max(worst, std::abs(w - breakpoint_w1(a, b)));
        if (t < 10) worst_uniform = std::max(worst_uniform, std::abs(w - grid_w1(a, b, 4000000)));
    }
    const double d1 = *cohens_d({0, 2}, {1, 3});
    const double d2 = *cohens_d({1, 2, 3}, {4, 6});
    const double d3 = *cohens_d({2, 4, 6, 8}, {1, 2, 3, 4});
    const double e1 = std::abs(d1 + 1.0 / std::sqrt(2.0));
    const double e2 = std::abs(d2 + 3.0 * std::sqrt(3.0) / 2.0);
    const double e3 = std::abs(d3 - std::sqrt(1.5));
    const bool zero_sd = !cohens_d({1, 1}, {1, 1}).has_value();
    return {worst < 1e-6 && worst_uniform < 1e-5 && std::max({e1, e2, e3}) <= 1e-12 && zero_sd,
            "W1 max |diff| vs CDF grid " + fmt(worst) + " (uniform grid " + fmt(worst_uniform) +
                "); Cohen's d max error " + fmt(std::max({e1, e2, e3}))};
}

LabeledDataset blobs(std::size_t per_class, std::size_t dims, double shift, std::uint64_t seed) {
    Rng rng(seed);
    const auto h = as_feature_matrix(gaussian_matrix(per_class, dims, rng), "h", "f");
    auto mm = gaussian_matrix(per_class, dims, rng);
    for (std::size_t r = 0; r < per_class; ++r)
        for (std::size_t c = 0; c < 5; ++c) mm(r, c) += shift;
    return make_labeled(h, as_feature_matrix(mm, "m", "f"), "fixture");
}

Outcome detector() {
    Rng rng(606);
    const auto x = gaussian_matrix(200, kFeatureCount, rng);
    std::vector<int> y(200);
    for (auto& v : y) v = static_cast<int>(uniform_below(rng, 2));
    std::vector<double> p(kFeatureCount + 1);
    std::normal_distribution<double> nd(0.0, 0.3);
    for (auto& v : p) v = nd(rng);
    double worst_grad = 0.0;
    std::vector<double> g;
    logreg_objective(x, y, p, 0.1, &g);
    for (std::size_t k = 0; k < p.size(); ++k) {
        auto hi = p, lo = p;
        hi[k] += 1e-6;
        lo[k] -= 1e-6;
        const double fd = (logreg_objective(x, y, hi, 0.1) - logreg_objective(x, y, lo, 0.1)) / 2e-6;
        worst_grad = std::max(worst_grad, std::abs(fd - g[k]));
    }

    const auto sep = blobs(600, kFeatureCount, 2.0, 607);
    const auto [sep_train, sep_test] = balance_and_split(sep, 0.2, 1);
    const double sep_auc = evaluate(train_logreg(sep_train), sep_test).roc_auc;

    auto null = blobs(2500, kFeatureCount, 0.0, 608);
    std::shuffle(null.labels.begin(), null.labels.end(), rng);
    const auto [null_train, null_test] = balance_and_split(null, 0.5, 2);
    const double null_auc = evaluate(train_logreg(null_train), null_test).roc_auc;

    const double four = *roc_auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1});
    return {worst_grad < 1e-5 && sep_auc >= 0.99 && null_auc >= 0.45 && null_auc <= 0.55 && four == 0.75,
            "gradient max |diff| " + fmt(worst_grad) + ", separable AUC " + fmt(sep_auc) + ", permuted AUC " +
                fmt(null_auc) + ", 4-point AUC " + fmt(four)};
}

Outcome trace(const Register& reg) {
    const double full = trace_dispersion(reg.z.values);
    Rng rng(707);
    const auto half = standardize(fresh_raw(reg, 5000, rng, std::vector<double>(kFeatureCount, 0.0), 0.5, "half"), reg.stats);
    const double h = trace_dispersion(half.values);
    return {std::abs(full - 67.0) <= 0.5 && std::abs(h - 16.75) <= 0.1,
            "full human " + fmt(full) + ", half-sd corpus " + fmt(h)};
}

Outcome harness_determinism() {
    StubServer stub([](const nlohmann::json& b) { return StubReply{200, echo_text(b, 450)}; });
    HttpChatClient client(stub.base_url(), "");
    const auto f = generation_fixture(8, 30);
    const auto tmpl = find_template("XSum");
    auto job = [](const std::string& model) {
        GenerationJob j;
        j.model_id = model;
        j.shots = 3;
        j.seed = 2024;
        j.concurrency = 4;
        j.backoff_initial_ms = 1;
        return j;
    };
    auto serialize = [](const std::vector<GenerationRecord>& recs) {
        std::string s;
        for (const auto& r : recs) {
            s += r.doc_id + "\n";
            for (const auto& id : r.fewshot_ids) s += "shot " + id + "\n";
            for (const auto& m : r.rendered_messages) s += m.role + ": " + m.content + "\n";
        }
        return s;
    };
    auto shots = [](const std::vector<GenerationRecord>& recs) {
        std::vector<std::vector<std::string>> out;
        for (const auto& r : recs) out.push_back(r.fewshot_ids);
        return out;
    };
    const auto run1 = generate_corpus(f.eval, tmpl, job("model-a"), f.pool, client, GenerationPaths{scratch_dir("acc_run1")});
    const auto run2 = generate_corpus(f.eval, tmpl, job("model-a"), f.pool, client, GenerationPaths{scratch_dir("acc_run2")});
    const auto other = generate_corpus(f.eval, tmpl, job("model-b"), f.pool, client, GenerationPaths{scratch_dir("acc_run3")});
    const auto qwen = generate_corpus(f.eval, tmpl, job("Qwen3-8B"), f.pool, client, GenerationPaths{scratch_dir("acc_run4")});
    const bool same_runs = serialize(run1) == serialize(run2);
    const bool same_models = serialize(run1) == serialize(other);
    const bool same_shots = shots(run1) == shots(other) && shots(run1) == shots(qwen);
    return {same_runs && same_models && same_shots,
            std::string("repeat run prompts ") + (same_runs ? "identical" : "DIFFER") + ", model-a vs model-b prompts " +
                (same_models ? "identical" : "DIFFER") + ", few-shot selections across 3 model ids " +
                (same_shots ? "identical" : "DIFFER") + " (" + std::to_string(stub.bodies().size()) + " requests)"};
}

}  // namespace

int main() {
    std::vector<std::pair<Matrix, Matrix>> fixtures;
    const auto reg = make_register(2026);
    ConfidenceInterval ci600;

    criterion(1, "MMD oracle equivalence", [&] { return mmd_oracle(fixtures); });
    criterion(2, "MMD identity and symmetry", [&] { return identity_symmetry(fixtures, reg); });
    criterion(3, "human-human CI coverage and stability curve", [&] { return ci_coverage(reg, ci600); });
    criterion(4, "detectable shift above the human-human CI", [&] { return detectable_shift(reg, ci600); });
    criterion(5, "dimension loadings fidelity", [&] { return loadings_fidelity(); });
    criterion(6, "feature extraction golden suite", [&] { return golden_suite(); });
    criterion(7, "truncation rule", [&] { return truncation_rule(); });
    criterion(8, "subsampler representativeness", [&] { return subsampler(); });
    criterion(9, "Wasserstein and Cohen's d oracles", [&] { return wasserstein_cohen(); });
    criterion(10, "detector", [&] { return detector(); });
    criterion(11, "trace dispersion", [&] { return trace(reg); });
    criterion(12, "generation harness determinism", [&] { return harness_determinism(); });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
