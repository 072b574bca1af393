#pragma once

#include <string_view>

// Word lists used by the feature rule table. All entries are lower case;
// verb classes are matched against lemmas, the rest against surface forms.
namespace biberdist::lexicon {

bool is_place_adverb(std::string_view w);
bool is_time_adverb(std::string_view w);
bool is_first_person(std::string_view w);
bool is_second_person(std::string_view w);
bool is_third_person(std::string_view w);
bool is_indefinite_pronoun(std::string_view w);
bool is_conjunct(std::string_view w);
bool is_downtoner(std::string_view w);
bool is_amplifier(std::string_view w);
bool is_public_verb(std::string_view lemma);
bool is_private_verb(std::string_view lemma);
bool is_suasive_verb(std::string_view lemma);
bool is_gerund_preposition(std::string_view w);

}  // namespace biberdist::lexicon
