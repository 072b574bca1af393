#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biberdist/chat_client.hpp"
#include "biberdist/corpus.hpp"
#include "biberdist/text_prep.hpp"

namespace biberdist {

/// Placeholders are written {name}. The single placeholder in
/// `fewshot_assistant` receives the demonstration text.
struct PromptTemplate {
    std::string register_label;
    std::string system;
    std::string user;
    std::string assistant_prefix;
    std::string fewshot_assistant;
    std::string variant_id = "base";
    /// Case-insensitive substring of the model id -> text appended to the target user message.
    std::map<std::string, std::string> model_suffixes{{"qwen", "\n/no_think"}};

    friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;
};

/// Templates shipped with the toolkit: registers WritingPrompts, BNC2014Spoken,
/// S2ORC_ACL, wikiHow and XSum (variant "base"), plus BNC2014Spoken variant "ablation_1".
std::vector<PromptTemplate> builtin_templates();
PromptTemplate find_template(std::string_view register_label, std::string_view variant_id = "base");

PromptTemplate template_from_json(std::string_view text);
std::string template_to_json(const PromptTemplate& t);

/// Placeholder names in order of first appearance.
std::vector<std::string> placeholders(std::string_view text);

struct FewShot {
    std::string doc_id;
    Metadata metadata;
    std::string text;
};

struct RenderOptions {
    /// Send the assistant prefix at the end of the user message instead of as
    /// a trailing assistant turn.
    bool prefix_in_user = false;
};

/// system, (user, assistant) per shot, target user (+ model suffix), then the
/// assistant prefix. Throws Error naming any unresolved placeholder.
std::vector<Message> render_prompt(const PromptTemplate& tmpl, const Metadata& metadata,
                                   const std::vector<FewShot>& fewshots, std::string_view model_id,
                                   const RenderOptions& options = {});

/// Indices into `pool` chosen from (seed, target id, s) alone.
std::vector<std::size_t> select_fewshots(const Corpus& pool, std::string_view target_doc_id, std::size_t s,
                                         std::uint64_t seed);

struct GenerationJob {
    std::string model_id;
    std::string endpoint;
    double temperature = 1.0;
    double top_p = 1.0;
    std::size_t shots = 0;
    std::uint64_t seed = 0;
    std::size_t max_new_tokens = 1024;
    std::string api_key_env = "OPENAI_API_KEY";
    bool prefix_in_user = false;
    std::size_t concurrency = 4;
    std::size_t max_retries = 5;
    unsigned backoff_initial_ms = 500;
    unsigned min_request_interval_ms = 0;
    TruncationLimits limits{};
};

struct GenerationRecord {
    std::string doc_id;
    std::vector<Message> rendered_messages;
    std::string raw_output;
    std::string cleaned_output;
    std::string truncated_output;
    std::size_t lexical_tokens = 0;  // of the truncated output
    GenerationJob job;
    std::vector<std::string> fewshot_ids;
    Metadata metadata;
    bool empty = false;          // excluded from analysis
    bool below_soft_limit = false;  // kept and flagged
    std::size_t attempts = 0;
};

struct GenerationPaths {
    std::filesystem::path out_dir;
    std::filesystem::path records() const { return out_dir / "records.jsonl"; }
    std::filesystem::path raw_archive() const { return out_dir / "raw_archive.jsonl"; }
    std::filesystem::path manifest() const { return out_dir / "completion_manifest.json"; }
    std::filesystem::path audit() const { return out_dir / "audit.jsonl"; }
    std::filesystem::path corpus() const { return out_dir / "generated.jsonl"; }
};

/// One record per document of `human_eval`, in corpus order. Raw outputs are
/// appended to the archive as they arrive; documents already in the archive are
/// not requested again. A permanent failure writes the completion manifest and
/// throws. `pool` supplies demonstrations and must not overlap `human_eval`.
std::vector<GenerationRecord> generate_corpus(const Corpus& human_eval, const PromptTemplate& tmpl,
                                              const GenerationJob& job, const Corpus& pool, ChatClient& client,
                                              const GenerationPaths& paths);

/// Builds the record fields derived from a raw output (cleaning, truncation, flags).
void finish_record(GenerationRecord& record, const std::string& raw_output);

std::string record_to_json(const GenerationRecord& record);

}  // namespace biberdist
