#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biberdist/corpus.hpp"
#include "biberdist/matrix.hpp"

namespace biberdist {

inline constexpr std::size_t kFeatureCount = 67;
inline constexpr std::string_view kInventoryVersion = "B1988-67";
inline constexpr std::string_view kRuleTableVersion = "r1";

enum class FeatureUnit { RatePer1000, Ratio, MeanCharacters };

struct FeatureDescriptor {
    std::string_view id;    // e.g. "f_01_past_tense"
    std::string_view name;  // label used in reports
    FeatureUnit unit;
    std::string_view rule;  // matching rule, human readable
};

/// The fixed, ordered 67-feature inventory.
class FeatureInventory {
public:
    static const FeatureInventory& standard();

    std::string_view version() const noexcept { return kInventoryVersion; }
    std::size_t size() const noexcept { return features_.size(); }
    const FeatureDescriptor& operator[](std::size_t i) const { return features_[i]; }
    const std::vector<FeatureDescriptor>& features() const noexcept { return features_; }

    /// Position of a feature id; nullopt if unknown.
    std::optional<std::size_t> index_of(std::string_view id) const;

private:
    FeatureInventory();
    std::vector<FeatureDescriptor> features_;
};

/// Feature positions in inventory order (0-based).
namespace feat {
enum : std::size_t {
    past_tense, perfect_aspect, present_tense, place_adverbials, time_adverbials,
    first_person_pronouns, second_person_pronouns, third_person_pronouns, pronoun_it,
    demonstrative_pronouns, indefinite_pronouns, pro_verb_do, wh_questions,
    nominalizations, gerunds, other_nouns, agentless_passives, by_passives,
    be_main_verb, existential_there, that_verb_complements, that_adj_complements,
    wh_clauses, infinitives, present_participial_clauses, past_participial_clauses,
    past_participial_whiz, present_participial_whiz, that_relatives_subject,
    that_relatives_object, wh_relatives_subject, wh_relatives_object, pied_piping,
    sentence_relatives, causative_subordination, concessive_subordination,
    conditional_subordination, other_adverbial_subordinators, prepositions,
    attributive_adjectives, predicative_adjectives, adverbs, type_token_ratio,
    mean_word_length, conjuncts, downtoners, hedges, amplifiers, emphatics,
    discourse_particles, demonstratives, possibility_modals, necessity_modals,
    predictive_modals, public_verbs, private_verbs, suasive_verbs, seem_appear,
    contractions, that_deletion, stranded_prepositions, split_infinitives,
    split_auxiliaries, phrasal_coordination, clausal_coordination,
    synthetic_negation, analytic_negation,
};
}  // namespace feat

/// Raw per-feature match counts for one document. Entries for the ratio and
/// mean-length features hold the numerator (distinct types, total characters).
struct FeatureCounts {
    std::array<std::size_t, kFeatureCount> counts{};
    std::size_t lexical_tokens = 0;
    std::size_t ttr_window = 0;  // tokens the type/token ratio was computed on
};

struct FeatureVector {
    std::string doc_id;
    std::array<double, kFeatureCount> values{};
};

/// Matrix rows align with `doc_ids`; columns follow the inventory order.
/// `frame` names the standardization frame ("" when raw).
struct FeatureMatrix {
    std::string register_label;
    std::string source;
    std::string inventory_version{kInventoryVersion};
    std::string frame;
    std::vector<std::string> doc_ids;
    Matrix values;

    std::size_t rows() const noexcept { return values.rows(); }
    void append(const FeatureVector& v);
    FeatureVector row_vector(std::size_t r) const;
    /// Sub-matrix with the given rows, order preserved.
    FeatureMatrix select(const std::vector<std::size_t>& rows) const;
};

/// Matches the rule table against a tagged document. Throws Error("empty document")
/// when the document has no lexical tokens.
FeatureCounts count_features(const TaggedDocument& doc);

/// Rates per 1,000 lexical tokens, type/token ratio on the first 400 lexical
/// tokens, and mean word length in characters.
FeatureVector extract_features(const TaggedDocument& doc,
                               const FeatureInventory& inventory = FeatureInventory::standard());

/// One row per document in corpus order. Errors carry the failing doc_id.
FeatureMatrix extract_matrix(const Corpus& corpus, const std::string& source = "human",
                             const FeatureInventory& inventory = FeatureInventory::standard(),
                             std::size_t threads = 0);

}  // namespace biberdist
