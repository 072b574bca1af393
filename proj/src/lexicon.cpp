#include "lexicon.hpp"

#include <algorithm>
#include <array>

namespace biberdist::lexicon {

namespace {

template <std::size_t N>
constexpr bool sorted(const std::array<std::string_view, N>& a) {
    for (std::size_t i = 1; i < N; ++i)
        if (!(a[i - 1] < a[i])) return false;
    return true;
}

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& a, std::string_view w) {
    return std::binary_search(a.begin(), a.end(), w);
}

constexpr std::array<std::string_view, 42> kPlace{
    "aboard", "above", "abroad", "across", "ahead", "alongside", "around", "ashore", "astern", "away",
    "behind", "below", "beneath", "beside", "downhill", "downstairs", "downstream", "east", "far",
    "hereabouts", "indoors", "inland", "inshore", "inside", "locally", "near", "nearby", "north",
    "nowhere", "outdoors", "outside", "overboard", "overland", "overseas", "south", "underfoot",
    "underground", "underneath", "uphill", "upstairs", "upstream", "west"};

constexpr std::array<std::string_view, 28> kTime{
    "afterwards", "again", "earlier", "early", "eventually", "formerly", "immediately", "initially",
    "instantly", "late", "lately", "later", "momentarily", "now", "nowadays", "once", "originally",
    "presently", "previously", "recently", "shortly", "simultaneously", "soon", "subsequently",
    "today", "tomorrow", "tonight", "yesterday"};

constexpr std::array<std::string_view, 10> kFirst{
    "i", "me", "mine", "my", "myself", "our", "ours", "ourselves", "us", "we"};

constexpr std::array<std::string_view, 5> kSecond{"you", "your", "yours", "yourself", "yourselves"};

constexpr std::array<std::string_view, 13> kThird{
    "he", "her", "hers", "herself", "him", "himself", "his", "she", "their", "theirs", "them",
    "themselves", "they"};

constexpr std::array<std::string_view, 12> kIndefinite{
    "anybody", "anyone", "anything", "everybody", "everyone", "everything", "nobody", "none",
    "nothing", "somebody", "someone", "something"};

constexpr std::array<std::string_view, 20> kConjunct{
    "alternatively", "consequently", "conversely", "e.g.", "furthermore", "hence", "however",
    "i.e.", "instead", "likewise", "moreover", "namely", "nevertheless", "nonetheless",
    "notwithstanding", "otherwise", "similarly", "therefore", "thus", "viz."};

constexpr std::array<std::string_view, 12> kDowntoner{
    "barely", "hardly", "merely", "mildly", "nearly", "only", "partially", "partly", "practically",
    "scarcely", "slightly", "somewhat"};

constexpr std::array<std::string_view, 16> kAmplifier{
    "absolutely", "altogether", "completely", "enormously", "entirely", "extremely", "fully",
    "greatly", "highly", "intensely", "perfectly", "strongly", "thoroughly", "totally", "utterly",
    "very"};

constexpr std::array<std::string_view, 54> kPublic{
    "acknowledge", "add", "admit", "affirm", "agree", "allege", "announce", "argue", "assert",
    "bet", "boast", "certify", "claim", "comment", "complain", "concede", "confess", "confide",
    "confirm", "contend", "convey", "declare", "deny", "disclose", "exclaim", "explain", "forecast",
    "foretell", "guarantee", "hint", "insist", "maintain", "mention", "object", "predict",
    "proclaim", "promise", "pronounce", "prophesy", "protest", "remark", "repeat", "reply",
    "report", "say", "speak", "state", "submit", "suggest", "swear", "testify", "vow",
    "warn", "write"};

constexpr std::array<std::string_view, 68> kPrivate{
    "accept", "anticipate", "ascertain", "assume", "believe", "calculate", "check", "conclude",
    "conjecture", "consider", "decide", "deduce", "deem", "demonstrate", "determine", "discover",
    "doubt", "dream", "ensure", "establish", "estimate", "expect", "fancy", "fear", "feel", "find",
    "foresee", "forget", "gather", "guess", "hear", "hold", "hope", "imagine", "imply", "indicate",
    "infer", "insure", "judge", "know", "learn", "mean", "note", "notice", "observe", "perceive",
    "presume", "presuppose", "pretend", "prove", "realise", "realize", "reason", "recall",
    "reckon", "recognise", "recognize", "reflect", "remember", "reveal", "see", "sense", "show",
    "signify", "suppose", "suspect", "think", "understand"};

constexpr std::array<std::string_view, 15> kSuasive{
    "allow", "arrange", "ask", "beg", "command", "demand", "grant", "instruct", "ordain", "pledge",
    "propose", "recommend", "request", "stipulate", "urge"};

constexpr std::array<std::string_view, 13> kGerundPrep{
    "about", "after", "before", "by", "for", "from", "in", "of", "on", "through", "upon", "with",
    "without"};

static_assert(sorted(kPlace) && sorted(kTime) && sorted(kFirst) && sorted(kSecond) &&
              sorted(kThird) && sorted(kIndefinite) && sorted(kConjunct) && sorted(kDowntoner) &&
              sorted(kAmplifier) && sorted(kPublic) && sorted(kPrivate) && sorted(kSuasive) &&
              sorted(kGerundPrep));

}  // namespace

bool is_place_adverb(std::string_view w) { return contains(kPlace, w); }
bool is_time_adverb(std::string_view w) { return contains(kTime, w); }
bool is_first_person(std::string_view w) { return contains(kFirst, w); }
bool is_second_person(std::string_view w) { return contains(kSecond, w); }
bool is_third_person(std::string_view w) { return contains(kThird, w); }
bool is_indefinite_pronoun(std::string_view w) { return contains(kIndefinite, w); }
bool is_conjunct(std::string_view w) { return contains(kConjunct, w); }
bool is_downtoner(std::string_view w) { return contains(kDowntoner, w); }
bool is_amplifier(std::string_view w) { return contains(kAmplifier, w); }
bool is_public_verb(std::string_view lemma) { return contains(kPublic, lemma); }
bool is_private_verb(std::string_view lemma) { return contains(kPrivate, lemma); }
bool is_suasive_verb(std::string_view lemma) { return contains(kSuasive, lemma); }
bool is_gerund_preposition(std::string_view w) { return contains(kGerundPrep, w); }

}  // namespace biberdist::lexicon
