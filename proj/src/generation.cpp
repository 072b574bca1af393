#include "biberdist/generation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "biberdist/error.hpp"
#include "biberdist/parallel.hpp"
#include "biberdist/random.hpp"
#include "io_util.hpp"
#include "json.hpp"

namespace biberdist {

namespace {

constexpr std::string_view kCertainly = "Certainly, here is my answer:";

PromptTemplate make_template(std::string reg, std::string system, std::string user, std::string prefix,
                             std::string fewshot, std::string variant = "base") {
    PromptTemplate t;
    t.register_label = std::move(reg);
    t.system = std::move(system);
    t.user = std::move(user);
    t.assistant_prefix = std::move(prefix);
    t.fewshot_assistant = std::move(fewshot);
    t.variant_id = std::move(variant);
    return t;
}

bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

// Calls on_text for literal runs and on_name for each {name}.
template <typename Text, typename Name>
void scan_template(std::string_view s, Text on_text, Name on_name) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto open = s.find('{', i);
        if (open == std::string_view::npos) break;
        auto close = open + 1;
        while (close < s.size() && is_name_char(s[close])) ++close;
        if (close < s.size() && s[close] == '}' && close > open + 1) {
            on_text(s.substr(i, open - i));
            on_name(s.substr(open + 1, close - open - 1));
            i = close + 1;
        } else {
            on_text(s.substr(i, open + 1 - i));
            i = open + 1;
        }
    }
    on_text(s.substr(i));
}

std::string fill(std::string_view s, const Metadata& values, std::string_view where) {
    std::string out;
    scan_template(
        s, [&](std::string_view t) { out += t; },
        [&](std::string_view name) {
            const auto it = values.find(std::string(name));
            if (it == values.end())
                throw Error("unresolved placeholder '{" + std::string(name) + "}' in " + std::string(where));
            out += it->second;
        });
    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

nlohmann::ordered_json messages_json(const std::vector<Message>& messages) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& m : messages) arr.push_back({{"role", m.role}, {"content", m.content}});
    return arr;
}

nlohmann::ordered_json job_json(const GenerationJob& job) {
    return {{"model_id", job.model_id},
            {"endpoint", job.endpoint},
            {"temperature", job.temperature},
            {"top_p", job.top_p},
            {"shots", job.shots},
            {"seed", job.seed},
            {"max_new_tokens", job.max_new_tokens},
            {"prefix_in_user", job.prefix_in_user},
            {"api_key_env", job.api_key_env}};
}

struct ArchiveEntry {
    std::string raw_output;
    std::size_t attempts = 0;
};

std::unordered_map<std::string, ArchiveEntry> read_archive(const std::filesystem::path& path,
                                                           const std::string& model_id) {
    std::unordered_map<std::string, ArchiveEntry> out;
    if (!std::filesystem::exists(path)) return out;
    const auto content = detail::read_file(path);
    std::size_t pos = 0, line_no = 0;
    while (pos < content.size()) {
        const auto nl = content.find('\n', pos);
        const bool terminated = nl != std::string::npos;
        const std::string line = content.substr(pos, terminated ? nl - pos : std::string::npos);
        const auto line_start = pos;
        pos = terminated ? nl + 1 : content.size();
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            const auto owner = j.value("model_id", model_id);
            if (owner != model_id)
                throw Error("raw archive " + path.string() + " holds outputs of model '" + owner + "', not '" +
                            model_id + "'");
            out[j.at("doc_id").get<std::string>()] =
                ArchiveEntry{j.at("raw_output").get<std::string>(), j.value("attempts", std::size_t{1})};
        } catch (const nlohmann::json::exception&) {
            // a torn final line from an interrupted run: drop it so appends start on a
            // fresh line, and request the document again
            if (terminated) throw ParseError("corrupt raw archive entry in " + path.string(), line_no);
            std::filesystem::resize_file(path, line_start);
            return out;
        }
    }
    if (!content.empty() && content.back() != '\n') std::ofstream(path, std::ios::app) << '\n';
    return out;
}

class RateLimiter {
public:
    explicit RateLimiter(unsigned interval_ms) : interval_(interval_ms) {}
    void wait() {
        if (interval_.count() == 0) return;
        std::chrono::steady_clock::time_point slot;
        {
            std::lock_guard lock(mu_);
            const auto now = std::chrono::steady_clock::now();
            slot = std::max(now, next_);
            next_ = slot + interval_;
        }
        std::this_thread::sleep_until(slot);
    }

private:
    std::chrono::milliseconds interval_;
    std::mutex mu_;
    std::chrono::steady_clock::time_point next_{};
};

}  // namespace

std::vector<PromptTemplate> builtin_templates() {
    return {
        make_template("WritingPrompts",
                      "You are a participant on an online creative writing forum where users write short stories "
                      "inspired by prompts from other members. Your task is to write the opening section of a story "
                      "based on the given prompt. Write the beginning of a story of at least 400 words. You do not "
                      "need to finish the story. Please output only your story text.",
                      "Please write a story for the following prompt: {prompt}", std::string(kCertainly),
                      std::string(kCertainly) + " {story}"),
        make_template("BNC2014Spoken",
                      "You are tasked with writing a conversation between 2 or more people given context about the "
                      "speakers and the conversation. Write a conversation of at least 400 words. You do not need to "
                      "finish the conversation or cover all topics mentioned. You can start with an already ongoing "
                      "conversation. Please indicate each speaker with \"Speaker_1:\", \"Speaker_2:\", etc.",
                      "Please write a conversation given the following context: {Speaker_Metadata} "
                      "{Conversation_Context}",
                      std::string(kCertainly), std::string(kCertainly) + " {Conversation}"),
        make_template("BNC2014Spoken",
                      "Your task is to write a multi-speaker conversation based on the provided context information "
                      "about the speakers and situation. The conversation should be at least 400 words long. It may "
                      "begin in the middle of an interaction. Label turns as 'Speaker_1:', 'Speaker_2:', and so on.",
                      "Generate a conversation using the following information: {Speaker_Metadata} "
                      "{Conversation_Context}",
                      "Sure, here is my answer:", "Sure, here is my answer: {Conversation}", "ablation_1"),
        make_template("S2ORC_ACL",
                      "You are an author of ACL papers. Your task is to write the introduction of a paper given its "
                      "title and abstract. Write an introduction of at least 400 words. Output only the introduction "
                      "text.",
                      "Please write a paper given the following title and abstract: {title}{abstract}",
                      std::string(kCertainly), std::string(kCertainly) + " {introduction}"),
        make_template("wikiHow",
                      "You are the author of a wikiHow article. Your task is to write the full article given the "
                      "title and headline. Write an article of at least 400 words. Please only output the article "
                      "text.",
                      "Please write an article given the following title and headline: {title}{headline}",
                      std::string(kCertainly), std::string(kCertainly) + " {text}"),
        make_template("XSum",
                      "You are a writer for a British newspaper. Your task is to write the beginning of an article "
                      "based on a short summary of the content. If necessary, you can add names and other facts to "
                      "the story. Write a beginning of at least 400 words. You do not need to finish the article. "
                      "Please output only the article text.",
                      "Please write an article given the following summary: {summary}", std::string(kCertainly),
                      std::string(kCertainly) + " {document}"),
    };
}

PromptTemplate find_template(std::string_view register_label, std::string_view variant_id) {
    for (auto& t : builtin_templates())
        if (t.register_label == register_label && t.variant_id == variant_id) return t;
    throw ConfigError("no built-in prompt template for register '" + std::string(register_label) + "' variant '" +
                      std::string(variant_id) + "'");
}

std::vector<std::string> placeholders(std::string_view text) {
    std::vector<std::string> out;
    scan_template(
        text, [](std::string_view) {},
        [&](std::string_view name) {
            if (std::find(out.begin(), out.end(), name) == out.end()) out.emplace_back(name);
        });
    return out;
}

PromptTemplate template_from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        PromptTemplate t;
        t.register_label = j.at("register").get<std::string>();
        t.system = j.at("system").get<std::string>();
        t.user = j.at("user").get<std::string>();
        t.assistant_prefix = j.at("assistant_prefix").get<std::string>();
        t.fewshot_assistant = j.at("fewshot_assistant").get<std::string>();
        t.variant_id = j.value("variant_id", std::string("base"));
        if (j.contains("model_suffixes")) t.model_suffixes = j["model_suffixes"].get<std::map<std::string, std::string>>();
        if (placeholders(t.fewshot_assistant).size() != 1)
            throw ConfigError("fewshot_assistant must contain exactly one placeholder");
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("prompt template JSON: ") + e.what());
    }
}

std::string template_to_json(const PromptTemplate& t) {
    nlohmann::ordered_json j;
    j["register"] = t.register_label;
    j["variant_id"] = t.variant_id;
    j["system"] = t.system;
    j["user"] = t.user;
    j["assistant_prefix"] = t.assistant_prefix;
    j["fewshot_assistant"] = t.fewshot_assistant;
    j["model_suffixes"] = t.model_suffixes;
    return j.dump(2) + "\n";
}

std::vector<Message> render_prompt(const PromptTemplate& tmpl, const Metadata& metadata,
                                   const std::vector<FewShot>& fewshots, std::string_view model_id,
                                   const RenderOptions& options) {
    const auto slots = placeholders(tmpl.fewshot_assistant);
    if (!fewshots.empty() && slots.size() != 1)
        throw Error("few-shot template must contain exactly one placeholder for the demonstration text");

    std::vector<Message> out;
    out.push_back({"system", fill(tmpl.system, metadata, "system prompt")});
    for (const auto& shot : fewshots) {
        out.push_back({"user", fill(tmpl.user, shot.metadata, "few-shot user prompt of " + shot.doc_id)});
        out.push_back({"assistant", fill(tmpl.fewshot_assistant, Metadata{{slots.front(), shot.text}},
                                         "few-shot template")});
    }
    std::string user = fill(tmpl.user, metadata, "user prompt");
    const auto model = lower(model_id);
    for (const auto& [key, suffix] : tmpl.model_suffixes)
        if (!key.empty() && model.find(lower(key)) != std::string::npos) user += suffix;
    if (options.prefix_in_user) {
        if (!tmpl.assistant_prefix.empty()) user += "\n" + tmpl.assistant_prefix;
        out.push_back({"user", std::move(user)});
    } else {
        out.push_back({"user", std::move(user)});
        if (!tmpl.assistant_prefix.empty()) out.push_back({"assistant", tmpl.assistant_prefix});
    }
    return out;
}

std::vector<std::size_t> select_fewshots(const Corpus& pool, std::string_view target_doc_id, std::size_t s,
                                         std::uint64_t seed) {
    if (s > pool.size())
        throw Error("requested " + std::to_string(s) + " demonstrations from a pool of " +
                    std::to_string(pool.size()));
    Rng rng(stream_seed(seed, fnv1a(target_doc_id)));
    return sample_without_replacement(iota_indices(pool.size()), s, rng);
}

void finish_record(GenerationRecord& record, const std::string& raw_output) {
    record.raw_output = raw_output;
    record.cleaned_output = clean_text(raw_output).first;
    record.empty = count_lexical_tokens(std::string_view(record.cleaned_output)) == 0;
    if (record.empty) {
        record.truncated_output.clear();
        record.lexical_tokens = 0;
        record.below_soft_limit = true;
        return;
    }
    const auto tr = truncate_to_limit(tokenize_plain(record.cleaned_output, record.doc_id), record.job.limits);
    record.truncated_output = tr.text;
    record.lexical_tokens = tr.lexical_tokens;
    record.below_soft_limit = !tr.truncated;
}

std::string record_to_json(const GenerationRecord& r) {
    nlohmann::ordered_json j;
    j["doc_id"] = r.doc_id;
    j["rendered_messages"] = messages_json(r.rendered_messages);
    j["raw_output"] = r.raw_output;
    j["cleaned_output"] = r.cleaned_output;
    j["truncated_output"] = r.truncated_output;
    j["lexical_tokens"] = r.lexical_tokens;
    j["job"] = job_json(r.job);
    j["fewshot_ids"] = r.fewshot_ids;
    j["meta"] = r.metadata;
    j["flags"] = {{"empty", r.empty}, {"below_soft_limit", r.below_soft_limit}};
    j["attempts"] = r.attempts;
    return j.dump();
}

std::vector<GenerationRecord> generate_corpus(const Corpus& human_eval, const PromptTemplate& tmpl,
                                              const GenerationJob& job, const Corpus& pool, ChatClient& client,
                                              const GenerationPaths& paths) {
    if (job.model_id.empty()) throw ConfigError("generation job needs a model id");
    std::unordered_set<std::string> eval_ids;
    for (const auto& d : human_eval.documents) eval_ids.insert(d.doc_id);
    for (const auto& d : pool.documents)
        if (eval_ids.contains(d.doc_id))
            throw Error("few-shot pool contains evaluation document '" + d.doc_id + "'");

    // prompts first: every failure mode of rendering surfaces before any request
    std::vector<GenerationRecord> records(human_eval.size());
    for (std::size_t i = 0; i < human_eval.size(); ++i) {
        const auto& doc = human_eval.documents[i];
        auto& rec = records[i];
        rec.doc_id = doc.doc_id;
        rec.job = job;
        rec.metadata = doc.metadata;
        std::vector<FewShot> shots;
        for (auto k : select_fewshots(pool, doc.doc_id, job.shots, job.seed)) {
            const auto& p = pool.documents[k];
            shots.push_back({p.doc_id, p.metadata, p.text()});
            rec.fewshot_ids.push_back(p.doc_id);
        }
        rec.rendered_messages = render_prompt(tmpl, doc.metadata, shots, job.model_id, {job.prefix_in_user});
    }

    std::filesystem::create_directories(paths.out_dir);
    auto archive = read_archive(paths.raw_archive(), job.model_id);
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (!archive.contains(records[i].doc_id)) pending.push_back(i);

    std::mutex journal_mu;
    std::ofstream journal(paths.raw_archive(), std::ios::app);
    if (!journal) throw Error("cannot open raw archive " + paths.raw_archive().string());
    std::map<std::string, std::string> failures;
    std::atomic<bool> abort{false};
    RateLimiter limiter(job.min_request_interval_ms);

    parallel_for(pending.size(), std::max<std::size_t>(1, job.concurrency), [&](std::size_t p) {
        if (abort) return;
        auto& rec = records[pending[p]];
        ChatRequest req;
        req.model = job.model_id;
        req.messages = rec.rendered_messages;
        req.temperature = job.temperature;
        req.top_p = job.top_p;
        req.max_tokens = job.max_new_tokens;
        req.continue_final_message = !job.prefix_in_user && !tmpl.assistant_prefix.empty();
        std::string error;
        for (std::size_t attempt = 0; attempt <= job.max_retries && !abort; ++attempt) {
            limiter.wait();
            const auto res = client.complete(req);
            if (res.status == ChatResult::Status::Ok) {
                nlohmann::ordered_json j{{"doc_id", rec.doc_id},
                                         {"model_id", job.model_id},
                                         {"raw_output", res.text},
                                         {"attempts", attempt + 1}};
                std::lock_guard lock(journal_mu);
                journal << j.dump() << '\n' << std::flush;
                archive[rec.doc_id] = ArchiveEntry{res.text, attempt + 1};
                return;
            }
            error = res.text;
            if (res.status == ChatResult::Status::Permanent) break;
            if (attempt < job.max_retries) {
                const auto delay = std::chrono::milliseconds(job.backoff_initial_ms) * (1LL << std::min<std::size_t>(attempt, 10));
                std::this_thread::sleep_for(delay);
            }
        }
        std::lock_guard lock(journal_mu);
        failures[rec.doc_id] = error.empty() ? "aborted" : error;
        abort = true;
    });
    journal.close();

    nlohmann::ordered_json manifest;
    manifest["model_id"] = job.model_id;
    auto completed = nlohmann::ordered_json::array();
    auto remaining = nlohmann::ordered_json::array();
    for (const auto& r : records) (archive.contains(r.doc_id) ? completed : remaining).push_back(r.doc_id);
    manifest["completed"] = completed;
    manifest["pending"] = remaining;
    manifest["failed"] = failures;
    detail::write_file_atomic(paths.manifest(), manifest.dump(2) + "\n");
    if (!failures.empty()) {
        const auto& [id, msg] = *failures.begin();
        throw Error("permanent endpoint failure on '" + id + "': " + msg + "; " + std::to_string(completed.size()) +
                    " of " + std::to_string(records.size()) + " documents completed, manifest at " +
                    paths.manifest().string());
    }

    std::string records_out, audit_out, corpus_out;
    for (auto& rec : records) {
        const auto& entry = archive.at(rec.doc_id);
        rec.attempts = entry.attempts;
        finish_record(rec, entry.raw_output);
        records_out += record_to_json(rec) + "\n";
        if (rec.empty) {
            audit_out += nlohmann::ordered_json{{"doc_id", rec.doc_id}, {"reason", "empty_output"}}.dump() + "\n";
            continue;
        }
        if (rec.below_soft_limit)
            audit_out += nlohmann::ordered_json{{"doc_id", rec.doc_id},
                                                {"reason", "below_soft_limit"},
                                                {"lexical_tokens", rec.lexical_tokens}}
                             .dump() +
                         "\n";
        nlohmann::ordered_json c{{"id", rec.doc_id}, {"text", rec.truncated_output}, {"meta", rec.metadata}};
        corpus_out += c.dump() + "\n";
    }
    detail::write_file_atomic(paths.records(), records_out);
    detail::write_file_atomic(paths.audit(), audit_out);
    detail::write_file_atomic(paths.corpus(), corpus_out);
    return records;
}

}  // namespace biberdist
