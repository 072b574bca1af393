#include "biberdist/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "biberdist/error.hpp"
#include "json.hpp"

namespace biberdist {

namespace {

using json = nlohmann::json;

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool all_whitespace(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

// "key = value" comment body, or nullopt if it has no " = ".
std::optional<std::pair<std::string, std::string>> key_value(std::string_view body) {
    auto eq = body.find('=');
    if (eq == std::string_view::npos) return std::nullopt;
    return std::pair{std::string(trim(body.substr(0, eq))), std::string(trim(body.substr(eq + 1)))};
}

void flatten(const json& value, const std::string& prefix, Metadata& out) {
    if (value.is_object()) {
        for (const auto& [k, v] : value.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    } else if (value.is_string()) {
        out[prefix] = value.get<std::string>();
    } else if (!value.is_null()) {
        out[prefix] = value.dump();
    }
}

}  // namespace

bool TaggedToken::space_after() const {
    return misc.find("SpaceAfter=No") == std::string::npos;
}

std::size_t TaggedDocument::token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.tokens.size();
    return n;
}

std::string TaggedDocument::text() const {
    std::string out;
    for (const auto& s : sentences) {
        for (const auto& t : s.tokens) {
            out += t.surface;
            if (t.space_after()) out += ' ';
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::vector<TaggedDocument> parse_conllu(std::istream& in) {
    std::vector<TaggedDocument> docs;
    std::set<std::string> seen_ids;
    Sentence current;
    std::size_t line_no = 0;
    std::size_t sentence_start = 0;

    auto flush_sentence = [&] {
        if (current.tokens.empty()) {
            // comments without tokens belong to the next sentence
            return;
        }
        const auto n = current.tokens.size();
        for (const auto& t : current.tokens) {
            if (t.head > n) {
                throw ParseError("head " + std::to_string(t.head) + " outside sentence of length " +
                                     std::to_string(n),
                                 sentence_start);
            }
        }
        docs.back().sentences.push_back(std::move(current));
        current = Sentence{};
    };

    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();

        if (line.empty() || all_whitespace(line)) {
            flush_sentence();
            continue;
        }
        if (line[0] == '#') {
            std::string_view body = trim(std::string_view(line).substr(1));
            auto kv = key_value(body);
            if (kv && (kv->first == "newdoc id" || kv->first == "newdoc")) {
                flush_sentence();
                if (!seen_ids.insert(kv->second).second) {
                    throw ParseError("duplicate doc_id '" + kv->second + "'", line_no);
                }
                docs.push_back(TaggedDocument{});
                docs.back().doc_id = kv->second;
                continue;
            }
            if (kv && current.tokens.empty() && current.comments.empty() && !docs.empty()) {
                auto& doc = docs.back();
                if (kv->first.starts_with("meta.")) {
                    doc.metadata[kv->first.substr(5)] = kv->second;
                    continue;
                }
                if (kv->first == "register") {
                    doc.register_label = kv->second;
                    continue;
                }
                if (kv->first == "source") {
                    doc.source = kv->second;
                    continue;
                }
                if (kv->first == "shots") {
                    unsigned s = 0;
                    auto [p, ec] = std::from_chars(kv->second.data(), kv->second.data() + kv->second.size(), s);
                    if (ec != std::errc{} || p != kv->second.data() + kv->second.size()) {
                        throw ParseError("invalid shots value '" + kv->second + "'", line_no);
                    }
                    doc.shots = s;
                    continue;
                }
            }
            current.comments.emplace_back(body);
            continue;
        }

        auto cols = split_tabs(line);
        if (cols.size() != 10) {
            throw ParseError("expected 10 tab-separated columns, found " + std::to_string(cols.size()),
                             line_no);
        }
        if (cols[0].find_first_of("-.") != std::string_view::npos) continue;  // MWT range or empty node
        if (docs.empty()) {
            throw ParseError("token line before any '# newdoc id' comment", line_no);
        }
        if (current.tokens.empty()) sentence_start = line_no;

        std::size_t id = 0;
        auto [p, ec] = std::from_chars(cols[0].data(), cols[0].data() + cols[0].size(), id);
        if (ec != std::errc{} || p != cols[0].data() + cols[0].size() || id != current.tokens.size() + 1) {
            throw ParseError("token id '" + std::string(cols[0]) + "' out of sequence", line_no);
        }

        TaggedToken tok;
        tok.surface = std::string(cols[1]);
        tok.lemma = std::string(cols[2]);
        tok.upos = std::string(cols[3]);
        if (cols[4] != "_") tok.xpos = std::string(cols[4]);
        tok.feats = std::string(cols[5]);
        if (cols[6] == "_") {
            tok.head = 0;
        } else {
            auto [hp, hec] = std::from_chars(cols[6].data(), cols[6].data() + cols[6].size(), tok.head);
            if (hec != std::errc{} || hp != cols[6].data() + cols[6].size()) {
                throw ParseError("invalid HEAD '" + std::string(cols[6]) + "'", line_no);
            }
        }
        tok.deprel = std::string(cols[7]);
        tok.deps = std::string(cols[8]);
        tok.misc = std::string(cols[9]);
        tok.is_space = tok.upos == "SPACE" || all_whitespace(tok.surface);
        tok.is_punct = tok.upos == "PUNCT";
        if (tok.surface.empty() && !tok.is_space) throw ParseError("empty FORM", line_no);
        current.tokens.push_back(std::move(tok));
    }
    flush_sentence();
    return docs;
}

void write_conllu(std::ostream& out, const std::vector<TaggedDocument>& docs) {
    for (const auto& doc : docs) {
        out << "# newdoc id = " << doc.doc_id << '\n';
        if (!doc.register_label.empty()) out << "# register = " << doc.register_label << '\n';
        out << "# source = " << doc.source << '\n';
        out << "# shots = " << doc.shots << '\n';
        for (const auto& [k, v] : doc.metadata) out << "# meta." << k << " = " << v << '\n';
        for (const auto& s : doc.sentences) {
            for (const auto& c : s.comments) out << "# " << c << '\n';
            for (std::size_t i = 0; i < s.tokens.size(); ++i) {
                const auto& t = s.tokens[i];
                out << (i + 1) << '\t' << t.surface << '\t' << t.lemma << '\t' << t.upos << '\t'
                    << t.xpos.value_or("_") << '\t' << t.feats << '\t' << t.head << '\t' << t.deprel
                    << '\t' << t.deps << '\t' << t.misc << '\n';
            }
            out << '\n';
        }
    }
}

JsonlLoad load_corpus_jsonl(std::istream& in) {
    JsonlLoad result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (all_whitespace(line)) {
            ++result.blank_lines;
            continue;
        }
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        if (!obj.is_object()) throw ParseError("expected a JSON object", line_no);
        if (!obj.contains("text") || !obj["text"].is_string()) {
            throw ParseError("missing string field 'text'", line_no);
        }
        RawRecord rec;
        if (obj.contains("id")) {
            const auto& id = obj["id"];
            rec.id = id.is_string() ? id.get<std::string>() : id.dump();
        } else {
            throw ParseError("missing field 'id'", line_no);
        }
        rec.text = obj["text"].get<std::string>();
        if (obj.contains("meta")) {
            if (!obj["meta"].is_object()) throw ParseError("field 'meta' must be an object", line_no);
            flatten(obj["meta"], "", rec.metadata);
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

Corpus assemble_corpus(std::vector<TaggedDocument> documents, const std::string& register_label) {
    if (documents.empty()) throw Error("cannot assemble an empty corpus");
    std::vector<std::string> offenders;
    std::set<std::string> ids;
    for (auto& d : documents) {
        if (d.register_label.empty()) d.register_label = register_label;
        if (d.register_label != register_label) offenders.push_back(d.doc_id + " (" + d.register_label + ")");
        if (!ids.insert(d.doc_id).second) throw Error("duplicate doc_id '" + d.doc_id + "' in corpus");
    }
    if (!offenders.empty()) {
        std::ostringstream msg;
        msg << "documents not in register '" << register_label << "':";
        for (const auto& o : offenders) msg << ' ' << o;
        throw Error(msg.str());
    }
    return Corpus{register_label, std::move(documents)};
}

}  // namespace biberdist
