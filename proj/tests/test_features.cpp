#include "doctest.h"
#include "golden.hpp"

#include "biberdist/error.hpp"
#include "biberdist/text_prep.hpp"

using namespace testsupport;

namespace {

TaggedDocument golden_doc() {
    auto docs = load_conllu(data_path("golden.conllu"));
    REQUIRE(docs.size() == 1);
    return docs.front();
}

}  // namespace

TEST_CASE("inventory has 67 unique ordered ids") {
    const auto& inv = FeatureInventory::standard();
    REQUIRE(inv.size() == 67);
    CHECK(inv[0].id == "f_01_past_tense");
    CHECK(inv[66].id == "f_67_neg_analytic");
    CHECK(inv.version() == "B1988-67");
    for (std::size_t i = 0; i < inv.size(); ++i) {
        CHECK(inv.index_of(inv[i].id) == i);
        char prefix[8];
        std::snprintf(prefix, sizeof prefix, "f_%02zu_", i + 1);
        CHECK(inv[i].id.substr(0, 5) == prefix);
    }
    CHECK_FALSE(inv.index_of("f_99_nothing").has_value());
}

TEST_CASE("golden fixture matches hand counts") {
    const auto doc = golden_doc();
    CHECK(count_lexical_tokens(doc) == kGoldenTokens);
    const auto counts = count_features(doc);
    CHECK(counts.lexical_tokens == kGoldenTokens);
    CHECK(counts.ttr_window == kGoldenTokens);
    const auto& inv = FeatureInventory::standard();
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        INFO(inv[f].id);
        CHECK(counts.counts[f] == kGoldenCounts[f]);
    }
}

TEST_CASE("golden fixture rates") {
    const auto v = extract_features(golden_doc());
    const auto& inv = FeatureInventory::standard();
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        INFO(inv[f].id);
        double expected = 0.0;
        if (f == feat::type_token_ratio) {
            expected = 82.0 / 124.0;
        } else if (f == feat::mean_word_length) {
            expected = 526.0 / 124.0;
        } else {
            expected = static_cast<double>(kGoldenCounts[f]) * 1000.0 / 124.0;
        }
        CHECK(v.values[f] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("rate normalization at 1000 tokens") {
    const auto doc = rate_fixture();
    REQUIRE(count_lexical_tokens(doc) == 1000);
    const auto v = extract_features(doc);
    CHECK(v.values[feat::second_person_pronouns] == 250.0);
    CHECK(v.values[feat::pronoun_it] == 250.0);
    CHECK(v.values[feat::private_verbs] == 250.0);
    CHECK(v.values[feat::present_tense] == 250.0);
    CHECK(v.values[feat::past_tense] == 0.0);
    // 4 distinct types over a 400-token window.
    CHECK(v.values[feat::type_token_ratio] == doctest::Approx(4.0 / 400.0));
    CHECK(v.values[feat::mean_word_length] == doctest::Approx((3 + 4 + 2 + 4) / 4.0));
}

TEST_CASE("rates are invariant to repeating the document") {
    auto doc = golden_doc();
    const auto once = extract_features(doc);
    auto twice = doc;
    twice.sentences.insert(twice.sentences.end(), doc.sentences.begin(), doc.sentences.end());
    const auto v2 = extract_features(twice);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        if (f == feat::type_token_ratio) continue;
        CHECK(v2.values[f] == doctest::Approx(once.values[f]).epsilon(1e-12));
    }
}

TEST_CASE("extra punctuation leaves rates unchanged") {
    auto doc = rate_fixture();
    const auto base = extract_features(doc);
    for (auto& s : doc.sentences) s.tokens.insert(s.tokens.end() - 1, tagged("!", "!", "PUNCT", ".", 2, "punct"));
    const auto v = extract_features(doc);
    for (std::size_t f = 0; f < kFeatureCount; ++f) CHECK(v.values[f] == base.values[f]);
}

TEST_CASE("single sentence example") {
    TaggedDocument d;
    d.doc_id = "s";
    Sentence s;
    s.tokens = {tagged("I", "I", "PRON", "PRP", 2, "nsubj"), tagged("think", "think", "VERB", "VBP", 0, "root"),
                tagged("he", "he", "PRON", "PRP", 4, "nsubj"), tagged("left", "leave", "VERB", "VBD", 2, "ccomp"),
                tagged(".", ".", "PUNCT", ".", 2, "punct")};
    d.sentences.push_back(s);
    const auto c = count_features(d);
    CHECK(c.counts[feat::private_verbs] == 1);
    CHECK(c.counts[feat::past_tense] == 1);
    CHECK(c.counts[feat::present_tense] == 1);
    CHECK(c.counts[feat::first_person_pronouns] == 1);
    CHECK(c.counts[feat::third_person_pronouns] == 1);
    CHECK(c.counts[feat::that_deletion] == 1);
}

TEST_CASE("older dependency labels are read as their current names") {
    TaggedDocument d;
    d.doc_id = "legacy";
    Sentence s;
    s.tokens = {tagged("It", "it", "PRON", "PRP", 3, "nsubjpass"), tagged("was", "be", "AUX", "VBD", 3, "auxpass"),
                tagged("done", "do", "VERB", "VBN", 0, "root"), tagged(".", ".", "PUNCT", ".", 3, "punct")};
    d.sentences.push_back(s);
    const auto c = count_features(d);
    CHECK(c.counts[feat::agentless_passives] == 1);
    CHECK(c.counts[feat::be_main_verb] == 0);
}

TEST_CASE("empty document is an error") {
    TaggedDocument d;
    d.doc_id = "empty";
    Sentence s;
    s.tokens = {tagged(".", ".", "PUNCT", ".", 0, "root")};
    d.sentences.push_back(s);
    CHECK_THROWS_AS(count_features(d), Error);
}

TEST_CASE("extract_matrix keeps corpus order and names failing documents") {
    auto golden = golden_doc();
    auto rate = rate_fixture();
    Corpus c{"fixture", {rate, golden}};
    const auto m = extract_matrix(c, "human", FeatureInventory::standard(), 2);
    REQUIRE(m.rows() == 2);
    CHECK(m.doc_ids == std::vector<std::string>{"rate-1000", "golden-1"});
    CHECK(m.values(1, feat::past_tense) == doctest::Approx(13000.0 / 124.0));
    CHECK(m.frame.empty());

    TaggedDocument bad;
    bad.doc_id = "bad-doc";
    c.documents.push_back(bad);
    try {
        extract_matrix(c);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("bad-doc") != std::string::npos);
    }
}
