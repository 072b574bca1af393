#include "doctest.h"
#include "support.hpp"

#include "biberdist/error.hpp"
#include "biberdist/sampler.hpp"
#include "biberdist/standardize.hpp"
#include "biberdist/two_sample.hpp"

#include <set>

using namespace testsupport;

namespace {

struct Fixture {
    SyntheticRegister reg;
    FeatureMatrix z;
    std::vector<DimensionScores> dims;
};

Fixture make_fixture(std::size_t docs, std::uint64_t seed) {
    Fixture f{synthetic_register(docs, seed), {}, {}};
    f.z = standardize(f.reg.raw, fit_stats(f.reg.raw));
    f.dims = dimension_scores(f.z);
    return f;
}

}  // namespace

TEST_CASE("metadata length counts lexical tokens of all values") {
    CHECK(metadata_length({{"title", "A short title."}, {"headline", "Two words"}}) == 5);
    CHECK(metadata_length({}) == 0);
}

TEST_CASE("exclusion filter drops the longest metadata, ties by id") {
    Corpus c;
    c.register_label = "x";
    const std::size_t lengths[] = {5, 9, 9, 1, 9, 2, 3, 4, 7, 8, 6, 1, 2, 3, 4, 5, 6, 7, 8, 0};
    for (std::size_t i = 0; i < 20; ++i) {
        TaggedDocument d;
        d.doc_id = "d" + std::to_string(100 + i);
        d.metadata["title"] = std::string(lengths[i], 'x');
        c.documents.push_back(d);
    }
    auto len = [](const Metadata& m) { return m.at("title").size(); };
    const auto split = exclusion_filter(c, 0.1, len);  // floor(0.1 * 20) = 2
    CHECK(split.excluded == std::vector<std::string>{"d101", "d102"});
    CHECK(split.eligible.size() == 18);
    CHECK(split.eligible.front() == "d100");
    CHECK(exclusion_filter(c, 0.0, len).excluded.empty());
    CHECK(exclusion_filter(c, 0.05, len).excluded.size() == 1);
    CHECK_THROWS_AS(exclusion_filter(c, 1.0, len), Error);
}

TEST_CASE("representative subsample is deterministic and picks the best candidate") {
    const auto f = make_fixture(800, 21);
    const auto split = exclusion_filter(f.reg.corpus, 0.05);
    SubsampleSpec spec;
    spec.n = 100;
    spec.candidate_draws = 50;
    spec.seed = 3;
    const auto a = representative_subsample(f.dims, split.eligible, spec);
    spec.threads = 3;
    const auto b = representative_subsample(f.dims, split.eligible, spec);
    CHECK(a.selected_ids == b.selected_ids);
    CHECK(a.candidate_w1 == b.candidate_w1);
    REQUIRE(a.candidate_w1.size() == 50);
    CHECK(a.aggregate_w1 == *std::min_element(a.candidate_w1.begin(), a.candidate_w1.end()));
    CHECK(a.candidate_w1[a.draw_index] == a.aggregate_w1);
    CHECK(a.selected_ids.size() == 100);
    CHECK(std::is_sorted(a.selected_ids.begin(), a.selected_ids.end()));  // ids follow corpus order here
    CHECK(a.excluded_ids == split.excluded);
    std::set<std::string> excluded(split.excluded.begin(), split.excluded.end());
    for (const auto& id : a.selected_ids) CHECK_FALSE(excluded.count(id));

    // The aggregate is the summed per-dimension W1 of the selection.
    std::set<std::string> chosen(a.selected_ids.begin(), a.selected_ids.end());
    double total = 0.0;
    for (std::size_t d = 0; d < kDimensionCount; ++d) {
        std::vector<double> full, sub;
        for (const auto& s : f.dims) {
            full.push_back(s.scores[d]);
            if (chosen.count(s.doc_id)) sub.push_back(s.scores[d]);
        }
        total += wasserstein_1d(sub, full);
    }
    CHECK(a.aggregate_w1 == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("few-shot pool avoids the evaluation sample") {
    const auto f = make_fixture(400, 22);
    const auto split = exclusion_filter(f.reg.corpus, 0.05);
    SubsampleSpec spec;
    spec.n = 150;
    spec.candidate_draws = 20;
    const auto eval = representative_subsample(f.dims, split.eligible, spec);
    const auto pool = fewshot_pool(f.dims, split.eligible, eval.selected_ids, spec);
    std::set<std::string> e(eval.selected_ids.begin(), eval.selected_ids.end());
    for (const auto& id : pool.selected_ids) CHECK_FALSE(e.count(id));
    spec.n = 300;
    CHECK_THROWS_AS(fewshot_pool(f.dims, split.eligible, eval.selected_ids, spec), Error);
}

TEST_CASE("subsample input validation") {
    const auto f = make_fixture(50, 23);
    SubsampleSpec spec;
    spec.n = 60;
    spec.candidate_draws = 5;
    CHECK_THROWS_AS(representative_subsample(f.dims, f.z.doc_ids, spec), Error);
    spec.n = 10;
    CHECK_THROWS_AS(representative_subsample(f.dims, {"doc-00000", "doc-00000", "missing"}, spec), Error);
    spec.candidate_draws = 0;
    CHECK_THROWS_AS(representative_subsample(f.dims, f.z.doc_ids, spec), Error);
}

TEST_CASE("selection manifest round-trip") {
    const auto f = make_fixture(100, 24);
    SubsampleSpec spec;
    spec.n = 20;
    spec.candidate_draws = 10;
    spec.seed = 77;
    const auto r = representative_subsample(f.dims, f.z.doc_ids, spec);
    const auto back = selection_manifest_from_json(selection_manifest_json(r, spec));
    CHECK(back.selected_ids == r.selected_ids);
    CHECK(back.aggregate_w1 == r.aggregate_w1);
    CHECK(back.draw_index == r.draw_index);
    CHECK_THROWS_AS(selection_manifest_from_json("{}"), Error);
}

TEST_CASE("selected subsample is close to the full corpus per feature") {
    const auto f = make_fixture(2000, 25);
    const auto split = exclusion_filter(f.reg.corpus, 0.05);
    SubsampleSpec spec;
    spec.n = 300;
    spec.candidate_draws = 200;
    const auto r = representative_subsample(f.dims, split.eligible, spec);
    std::vector<std::size_t> rows;
    std::set<std::string> chosen(r.selected_ids.begin(), r.selected_ids.end());
    for (std::size_t i = 0; i < f.z.rows(); ++i)
        if (chosen.count(f.z.doc_ids[i])) rows.push_back(i);
    const auto sub = f.z.values.select_rows(rows);
    double sum = 0.0;
    for (std::size_t c = 0; c < kFeatureCount; ++c) sum += std::abs(*cohens_d(sub.column(c), f.z.values.column(c)));
    CHECK(sum / kFeatureCount < 0.06);
    auto sorted = r.candidate_w1;
    std::sort(sorted.begin(), sorted.end());
    CHECK(r.aggregate_w1 < percentile_sorted(sorted, 50));
}
