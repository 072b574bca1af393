#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "biberdist/corpus.hpp"
#include "biberdist/standardize.hpp"

namespace biberdist {

struct SubsampleSpec {
    std::size_t n = 600;
    std::size_t candidate_draws = 1000;
    double exclusion_quantile = 0.05;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
};

struct SubsampleResult {
    std::vector<std::string> selected_ids;  // in full-corpus order
    double aggregate_w1 = 0.0;
    std::vector<std::string> excluded_ids;  // full-corpus ids not eligible for this search
    std::size_t draw_index = 0;
    std::vector<double> candidate_w1;  // one per candidate draw
};

struct EligibilitySplit {
    std::vector<std::string> eligible;  // corpus order
    std::vector<std::string> excluded;  // corpus order
};

using MetadataLengthFn = std::function<std::size_t(const Metadata&)>;

/// Lexical tokens of all metadata values joined by spaces.
std::size_t metadata_length(const Metadata& metadata);

/// Excludes the floor(quantile * N) documents with the longest metadata; ties at
/// the cutoff go to the smaller doc_id first.
EligibilitySplit exclusion_filter(const Corpus& corpus, double quantile,
                                  const MetadataLengthFn& length_fn = metadata_length);

/// Best of `candidate_draws` seeded size-n draws from `eligible`, scored by the
/// summed per-dimension W1 against the full corpus. Ties go to the lowest draw.
SubsampleResult representative_subsample(const std::vector<DimensionScores>& full_dims,
                                         const std::vector<std::string>& eligible, const SubsampleSpec& spec);

/// The same search with `eval_selected` removed from eligibility.
SubsampleResult fewshot_pool(const std::vector<DimensionScores>& full_dims, const std::vector<std::string>& eligible,
                             const std::vector<std::string>& eval_selected, const SubsampleSpec& spec);

/// {selected_ids, excluded_ids, aggregate_w1, seed, spec}
std::string selection_manifest_json(const SubsampleResult& result, const SubsampleSpec& spec);
SubsampleResult selection_manifest_from_json(const std::string& text);

}  // namespace biberdist
