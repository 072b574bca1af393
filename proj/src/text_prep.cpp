#include "biberdist/text_prep.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>

#include "biberdist/error.hpp"
#include "json.hpp"

namespace biberdist {

namespace {

bool is_closing_punct(UChar32 c) {
    switch (c) {
        case '.': case ',': case ';': case ':': case '!': case '?':
        case ')': case ']': case '}':
            return true;
        default:
            return false;
    }
}

bool is_quote(UChar32 c) { return c == '\'' || c == '"'; }

std::size_t code_points(const icu::UnicodeString& s) {
    return static_cast<std::size_t>(s.countChar32());
}

std::string to_utf8(const icu::UnicodeString& s) {
    std::string out;
    s.toUTF8String(out);
    return out;
}

// ASCII punctuation plus the common typographic quotes and dashes.
bool is_punct_char(std::string_view s, std::size_t pos, std::size_t& len) {
    unsigned char c = static_cast<unsigned char>(s[pos]);
    if (c < 0x80) {
        len = 1;
        return std::ispunct(c) != 0;
    }
    static constexpr std::string_view kMulti[] = {
        "‘", "’", "“", "”", "–", "—", "…", "«", "»",
    };
    for (auto m : kMulti) {
        if (s.substr(pos, m.size()) == m) {
            len = m.size();
            return true;
        }
    }
    len = 1;
    return false;
}

bool has_word_char(std::string_view tok) {
    for (std::size_t i = 0; i < tok.size();) {
        std::size_t len = 1;
        if (!is_punct_char(tok, i, len)) return true;
        i += len;
    }
    return false;
}

bool is_sentence_final(std::string_view tok) {
    return !tok.empty() && std::all_of(tok.begin(), tok.end(), [](char c) {
        return c == '.' || c == '!' || c == '?';
    });
}

bool is_closing_quote(std::string_view tok) {
    return tok == "\"" || tok == "'" || tok == "’" || tok == "”" || tok == ")";
}

std::size_t lexical_in(const Sentence& s) {
    return static_cast<std::size_t>(
        std::count_if(s.tokens.begin(), s.tokens.end(), [](const TaggedToken& t) { return t.is_lexical(); }));
}

}  // namespace

std::pair<std::string, CleaningReport> clean_text(std::string_view raw) {
    CleaningReport report;
    const auto input = icu::UnicodeString::fromUTF8(icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
    report.original_len = code_points(input);

    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(status);
    if (U_FAILURE(status)) throw Error("ICU NFKC normalizer unavailable");
    const icu::UnicodeString normalized = nfkc->normalize(input, status);
    if (U_FAILURE(status)) throw Error("NFKC normalization failed");
    report.normalized = normalized != input;

    // Collapse whitespace runs, remembering each run's position.
    std::vector<UChar32> cps;
    for (int32_t i = 0; i < normalized.length();) {
        UChar32 c = normalized.char32At(i);
        i += U16_LENGTH(c);
        if (u_isUWhiteSpace(c)) {
            std::size_t run = 1;
            bool plain = c == ' ';
            while (i < normalized.length() && u_isUWhiteSpace(normalized.char32At(i))) {
                UChar32 n = normalized.char32At(i);
                i += U16_LENGTH(n);
                ++run;
                plain = false;
            }
            if (run > 1 || !plain) ++report.replacements;
            cps.push_back(' ');
        } else {
            cps.push_back(c);
        }
    }

    icu::UnicodeString out;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (cps[i] == ' ') {
            if (out.isEmpty() || i + 1 == cps.size()) continue;  // strip ends
            const UChar32 next = cps[i + 1];
            if (is_closing_punct(next)) continue;
            if (is_quote(next)) {
                const bool closing = i + 2 >= cps.size() || cps[i + 2] == ' ' || is_closing_punct(cps[i + 2]) ||
                                     is_quote(cps[i + 2]);
                if (closing) continue;
            }
        }
        out.append(cps[i]);
    }
    report.cleaned_len = code_points(out);
    return {to_utf8(out), report};
}

std::size_t count_lexical_tokens(const TaggedDocument& doc) {
    std::size_t n = 0;
    for (const auto& s : doc.sentences) n += lexical_in(s);
    return n;
}

std::size_t count_punct_tokens(const TaggedDocument& doc) {
    std::size_t n = 0;
    for (const auto& s : doc.sentences)
        for (const auto& t : s.tokens) n += t.is_punct ? 1 : 0;
    return n;
}

TaggedDocument tokenize_plain(std::string_view text, std::string doc_id) {
    TaggedDocument doc;
    doc.doc_id = std::move(doc_id);
    Sentence current;
    bool sentence_done = false;

    auto push = [&](std::string_view tok, bool space_after) {
        if (sentence_done && !is_closing_quote(tok)) {
            doc.sentences.push_back(std::move(current));
            current = Sentence{};
            sentence_done = false;
        }
        TaggedToken t;
        t.surface = std::string(tok);
        t.lemma = "_";
        t.is_punct = !has_word_char(tok);
        t.upos = t.is_punct ? "PUNCT" : "X";
        t.deprel = "_";
        if (!space_after) t.misc = "SpaceAfter=No";
        current.tokens.push_back(std::move(t));
        if (is_sentence_final(tok)) sentence_done = true;
    };

    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= text.size()) break;
        std::size_t end = i;
        while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
        std::string_view chunk = text.substr(i, end - i);
        i = end;

        // Leading punctuation, one character each.
        std::vector<std::string_view> pieces;
        std::size_t b = 0;
        std::size_t len = 1;
        while (b < chunk.size() && is_punct_char(chunk, b, len)) {
            pieces.push_back(chunk.substr(b, len));
            b += len;
        }
        // Trailing punctuation; runs of . ! ? stay together.
        std::vector<std::string_view> tail;
        std::size_t e = chunk.size();
        while (e > b) {
            std::size_t start = e - 1;
            while (start > b && (static_cast<unsigned char>(chunk[start]) & 0xC0) == 0x80) --start;
            std::size_t plen = 1;
            if (!is_punct_char(chunk, start, plen) || start + plen != e) break;
            if (!tail.empty() && is_sentence_final(chunk.substr(start, plen)) && is_sentence_final(tail.back())) {
                tail.back() = chunk.substr(start, tail.back().size() + plen);
            } else {
                tail.push_back(chunk.substr(start, plen));
            }
            e = start;
        }
        if (e > b) pieces.push_back(chunk.substr(b, e - b));
        for (auto it = tail.rbegin(); it != tail.rend(); ++it) pieces.push_back(*it);
        for (std::size_t p = 0; p < pieces.size(); ++p) push(pieces[p], p + 1 == pieces.size());
    }
    if (!current.tokens.empty()) doc.sentences.push_back(std::move(current));
    for (auto& s : doc.sentences) {
        for (std::size_t k = 0; k < s.tokens.size(); ++k) s.tokens[k].head = 0;
    }
    return doc;
}

std::size_t count_lexical_tokens(std::string_view text) {
    return count_lexical_tokens(tokenize_plain(text));
}

TruncationResult truncate_to_limit(const TaggedDocument& doc, TruncationLimits limits) {
    if (limits.soft > limits.hard) {
        throw ConfigError("soft limit " + std::to_string(limits.soft) + " exceeds hard limit " +
                          std::to_string(limits.hard));
    }
    TruncationResult result;
    const std::size_t total = count_lexical_tokens(doc);
    if (total < limits.soft) {
        result.document = doc;
        result.lexical_tokens = total;
        result.text = doc.text();
        return result;
    }

    result.truncated = true;
    TaggedDocument out = doc;
    out.sentences.clear();
    std::size_t kept = 0;
    for (const auto& s : doc.sentences) {
        const std::size_t lex = lexical_in(s);
        if (kept + lex < limits.soft || kept + lex <= limits.hard) {
            out.sentences.push_back(s);
            kept += lex;
            if (kept >= limits.soft) break;
            continue;
        }
        // The crossing sentence overruns the hard limit: cut after the
        // hard-limit lexical token.
        Sentence partial;
        partial.comments = s.comments;
        for (const auto& t : s.tokens) {
            partial.tokens.push_back(t);
            if (t.is_lexical() && ++kept == limits.hard) break;
        }
        const auto n = partial.tokens.size();
        for (auto& t : partial.tokens) {
            if (t.head > n) t.head = 0;  // governor was cut away
        }
        out.sentences.push_back(std::move(partial));
        result.hit_hard_limit = true;
        break;
    }
    result.lexical_tokens = kept;
    result.text = out.text();
    result.document = std::move(out);
    return result;
}

FilterResult punctuation_ratio_filter(std::vector<TaggedDocument> docs, double threshold) {
    FilterResult result;
    for (auto& d : docs) {
        const auto lex = count_lexical_tokens(d);
        if (lex == 0) {
            result.excluded.push_back({d.doc_id, "empty", std::nullopt});
            continue;
        }
        const double ratio = static_cast<double>(count_punct_tokens(d)) / static_cast<double>(lex);
        if (ratio > threshold) {
            result.excluded.push_back({d.doc_id, "punctuation_ratio", ratio});
        } else {
            result.kept.push_back(std::move(d));
        }
    }
    return result;
}

FilterResult min_lexical_filter(std::vector<TaggedDocument> docs, std::size_t min_tokens) {
    FilterResult result;
    for (auto& d : docs) {
        const auto lex = count_lexical_tokens(d);
        if (lex < min_tokens) {
            result.excluded.push_back({d.doc_id, lex == 0 ? "empty" : "too_short", std::nullopt});
        } else {
            result.kept.push_back(std::move(d));
        }
    }
    return result;
}

std::string exclusions_to_jsonl(const std::vector<Exclusion>& excluded) {
    std::string out;
    for (const auto& e : excluded) {
        nlohmann::json j{{"id", e.id}, {"reason", e.reason}};
        j["ratio"] = e.ratio ? nlohmann::json(*e.ratio) : nlohmann::json(nullptr);
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace biberdist
