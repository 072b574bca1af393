#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "biberdist/corpus.hpp"

namespace biberdist {

struct CleaningReport {
    std::size_t original_len = 0;  // code points
    std::size_t cleaned_len = 0;   // code points
    std::size_t replacements = 0;  // whitespace runs rewritten to a single space
    bool normalized = false;       // NFKC changed the text
};

/// NFKC-normalizes, collapses whitespace runs to one space, removes spaces in
/// front of closing punctuation and strips the ends. Idempotent.
std::pair<std::string, CleaningReport> clean_text(std::string_view raw);

/// Tokens that are neither punctuation nor whitespace.
std::size_t count_lexical_tokens(const TaggedDocument& doc);
std::size_t count_punct_tokens(const TaggedDocument& doc);

/// Lightweight rule tokenizer for untagged text: splits on whitespace, peels
/// punctuation off word edges, and starts a new sentence after . ! ? tokens.
/// Used where no tagger output exists yet (metadata lengths, raw generations).
TaggedDocument tokenize_plain(std::string_view text, std::string doc_id = {});

/// Lexical-token count of untagged text via tokenize_plain.
std::size_t count_lexical_tokens(std::string_view text);

struct TruncationLimits {
    std::size_t soft = 400;
    std::size_t hard = 440;
};

struct TruncationResult {
    std::string text;
    std::size_t lexical_tokens = 0;
    bool truncated = false;       // the document reached the soft limit
    bool hit_hard_limit = false;  // the crossing sentence was cut
    TaggedDocument document;
};

/// Keeps whole sentences until the soft limit is reached; the sentence that
/// crosses it is kept whole if it ends within the hard limit, otherwise cut
/// right after the hard-limit lexical token. Same routine for human and
/// generated texts. Throws ConfigError when soft > hard.
TruncationResult truncate_to_limit(const TaggedDocument& doc, TruncationLimits limits = {});

struct Exclusion {
    std::string id;
    std::string reason;
    std::optional<double> ratio;
};

struct FilterResult {
    std::vector<TaggedDocument> kept;
    std::vector<Exclusion> excluded;
};

/// Drops documents whose punctuation/lexical token ratio exceeds `threshold`.
/// Documents without lexical tokens are dropped with reason "empty".
FilterResult punctuation_ratio_filter(std::vector<TaggedDocument> docs, double threshold = 0.2);

/// Drops documents with fewer than `min_tokens` lexical tokens.
FilterResult min_lexical_filter(std::vector<TaggedDocument> docs, std::size_t min_tokens);

/// One `{"id","reason","ratio"}` object per line.
std::string exclusions_to_jsonl(const std::vector<Exclusion>& excluded);

}  // namespace biberdist
