#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace biberdist {

/// One token of a CoNLL-U sentence. `head` is 1-based within the sentence, 0 for root.
struct TaggedToken {
    std::string surface;
    std::string lemma;
    std::string upos;
    std::optional<std::string> xpos;
    std::string feats = "_";
    std::size_t head = 0;
    std::string deprel;
    std::string deps = "_";
    std::string misc = "_";
    bool is_punct = false;
    bool is_space = false;

    /// True when the token is neither punctuation nor whitespace.
    bool is_lexical() const noexcept { return !is_punct && !is_space; }
    bool space_after() const;

    friend bool operator==(const TaggedToken&, const TaggedToken&) = default;
};

struct Sentence {
    std::vector<std::string> comments;  // verbatim, without the leading "# "
    std::vector<TaggedToken> tokens;

    friend bool operator==(const Sentence&, const Sentence&) = default;
};

using Metadata = std::map<std::string, std::string>;

struct TaggedDocument {
    std::string doc_id;
    std::string register_label;
    std::vector<Sentence> sentences;
    Metadata metadata;
    std::string source = "human";
    unsigned shots = 0;

    std::size_t token_count() const;
    /// Surface text rebuilt from tokens, honouring SpaceAfter=No.
    std::string text() const;

    friend bool operator==(const TaggedDocument&, const TaggedDocument&) = default;
};

struct Corpus {
    std::string register_label;
    std::vector<TaggedDocument> documents;

    std::size_t size() const noexcept { return documents.size(); }
};

/// Reads CoNLL-U. Documents start at `# newdoc id = <id>`; document-level
/// comments `# meta.<key> = <value>`, `# register = `, `# source = ` and
/// `# shots = ` populate the document. Multiword-token ranges and empty nodes
/// are skipped. Throws ParseError with the offending line.
std::vector<TaggedDocument> parse_conllu(std::istream& in);

/// Inverse of parse_conllu for the fields it reads.
void write_conllu(std::ostream& out, const std::vector<TaggedDocument>& docs);

struct RawRecord {
    std::string id;
    std::string text;
    Metadata metadata;  // nested objects flattened with dot-joined keys
};

struct JsonlLoad {
    std::vector<RawRecord> records;
    std::size_t blank_lines = 0;
};

/// Reads `{"id", "text", "meta"}` records, one per line. Blank lines are
/// counted and skipped; anything else malformed throws ParseError.
JsonlLoad load_corpus_jsonl(std::istream& in);

/// Checks register consistency and wraps the documents. Documents with an
/// empty register label adopt `register_label`.
Corpus assemble_corpus(std::vector<TaggedDocument> documents, const std::string& register_label);

}  // namespace biberdist
