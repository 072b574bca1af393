#include "biberdist/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "biberdist/error.hpp"
#include "biberdist/parallel.hpp"
#include "biberdist/random.hpp"
#include "biberdist/text_prep.hpp"
#include "biberdist/two_sample.hpp"
#include "json.hpp"

namespace biberdist {

std::size_t metadata_length(const Metadata& metadata) {
    std::string joined;
    for (const auto& [key, value] : metadata) {
        if (!joined.empty()) joined += ' ';
        joined += value;
    }
    return count_lexical_tokens(std::string_view(joined));
}

EligibilitySplit exclusion_filter(const Corpus& corpus, double quantile, const MetadataLengthFn& length_fn) {
    if (!(quantile >= 0.0 && quantile < 1.0)) throw Error("exclusion quantile must lie in [0, 1)");
    const std::size_t n = corpus.size();
    const auto k = static_cast<std::size_t>(std::floor(quantile * static_cast<double>(n) + 1e-9));
    std::vector<std::pair<std::size_t, std::size_t>> by_length;  // (length, position)
    for (std::size_t i = 0; i < n; ++i) by_length.emplace_back(length_fn(corpus.documents[i].metadata), i);
    std::sort(by_length.begin(), by_length.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return corpus.documents[a.second].doc_id < corpus.documents[b.second].doc_id;
    });
    std::vector<bool> drop(n, false);
    for (std::size_t i = 0; i < k; ++i) drop[by_length[i].second] = true;
    EligibilitySplit out;
    for (std::size_t i = 0; i < n; ++i) (drop[i] ? out.excluded : out.eligible).push_back(corpus.documents[i].doc_id);
    return out;
}

SubsampleResult representative_subsample(const std::vector<DimensionScores>& full_dims,
                                         const std::vector<std::string>& eligible, const SubsampleSpec& spec) {
    if (spec.candidate_draws == 0) throw Error("candidate_draws must be at least 1");
    if (spec.n == 0) throw Error("subsample size must be positive");
    if (eligible.size() < spec.n)
        throw Error("need " + std::to_string(spec.n) + " eligible documents, have " + std::to_string(eligible.size()));

    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < full_dims.size(); ++i) position.emplace(full_dims[i].doc_id, i);
    std::vector<std::size_t> pool;
    std::unordered_set<std::size_t> seen;
    for (const auto& id : eligible) {
        const auto it = position.find(id);
        if (it == position.end()) throw Error("eligible id '" + id + "' has no dimension scores");
        if (!seen.insert(it->second).second) throw Error("eligible id '" + id + "' listed twice");
        pool.push_back(it->second);
    }

    std::array<std::vector<double>, kDimensionCount> full_cols;
    for (std::size_t d = 0; d < kDimensionCount; ++d)
        for (const auto& s : full_dims) full_cols[d].push_back(s.scores[d]);

    std::vector<double> scores(spec.candidate_draws);
    parallel_for(spec.candidate_draws, spec.threads, [&](std::size_t c) {
        Rng rng(stream_seed(spec.seed, c));
        const auto draw = sample_without_replacement(pool, spec.n, rng);
        double total = 0.0;
        for (std::size_t d = 0; d < kDimensionCount; ++d) {
            std::vector<double> col;
            col.reserve(draw.size());
            for (auto p : draw) col.push_back(full_dims[p].scores[d]);
            total += wasserstein_1d(full_cols[d], std::move(col));
        }
        scores[c] = total;
    });

    const auto best = static_cast<std::size_t>(std::min_element(scores.begin(), scores.end()) - scores.begin());
    Rng rng(stream_seed(spec.seed, best));
    auto winner = sample_without_replacement(pool, spec.n, rng);
    std::sort(winner.begin(), winner.end());

    SubsampleResult out;
    for (auto p : winner) out.selected_ids.push_back(full_dims[p].doc_id);
    for (std::size_t i = 0; i < full_dims.size(); ++i)
        if (!seen.contains(i)) out.excluded_ids.push_back(full_dims[i].doc_id);
    out.aggregate_w1 = scores[best];
    out.draw_index = best;
    out.candidate_w1 = std::move(scores);
    return out;
}

SubsampleResult fewshot_pool(const std::vector<DimensionScores>& full_dims, const std::vector<std::string>& eligible,
                             const std::vector<std::string>& eval_selected, const SubsampleSpec& spec) {
    const std::unordered_set<std::string> taken(eval_selected.begin(), eval_selected.end());
    std::vector<std::string> remaining;
    for (const auto& id : eligible)
        if (!taken.contains(id)) remaining.push_back(id);
    if (remaining.size() < spec.n)
        throw Error("few-shot pool needs " + std::to_string(spec.n) + " documents outside the evaluation sample, " +
                    std::to_string(remaining.size()) + " remain");
    return representative_subsample(full_dims, remaining, spec);
}

std::string selection_manifest_json(const SubsampleResult& result, const SubsampleSpec& spec) {
    nlohmann::ordered_json j;
    j["selected_ids"] = result.selected_ids;
    j["excluded_ids"] = result.excluded_ids;
    j["aggregate_w1"] = result.aggregate_w1;
    j["seed"] = spec.seed;
    j["spec"] = {{"n", spec.n},
                 {"candidate_draws", spec.candidate_draws},
                 {"exclusion_quantile", spec.exclusion_quantile},
                 {"draw_index", result.draw_index}};
    return j.dump(2) + "\n";
}

SubsampleResult selection_manifest_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        SubsampleResult r;
        r.selected_ids = j.at("selected_ids").get<std::vector<std::string>>();
        r.excluded_ids = j.at("excluded_ids").get<std::vector<std::string>>();
        r.aggregate_w1 = j.at("aggregate_w1").get<double>();
        if (j.contains("spec")) r.draw_index = j["spec"].value("draw_index", std::size_t{0});
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("selection manifest: ") + e.what());
    }
}

}  // namespace biberdist
