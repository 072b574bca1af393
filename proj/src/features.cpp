#include "biberdist/features.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "biberdist/error.hpp"
#include "biberdist/parallel.hpp"
#include "lexicon.hpp"

namespace biberdist {

namespace {

using U = FeatureUnit;

// Rule table, version r1. Tags: UPOS/XPOS (Penn) and UD v2 relations; the
// common spaCy labels are mapped onto UD before matching (see canonical_dep).
const std::vector<FeatureDescriptor>& descriptor_table() {
    static const std::vector<FeatureDescriptor> table{
        {"f_01_past_tense", "past tense verbs", U::RatePer1000, "XPOS VBD"},
        {"f_02_perfect_aspect", "perfect aspect verbs", U::RatePer1000,
         "lemma have, deprel aux, governor XPOS VBN"},
        {"f_03_present_tense", "present tense verbs", U::RatePer1000, "XPOS VBP or VBZ"},
        {"f_04_place_adverbials", "place adverbials", U::RatePer1000, "UPOS ADV, form in place-adverb list"},
        {"f_05_time_adverbials", "time adverbials", U::RatePer1000,
         "form in time-adverb list; UPOS ADV, or NOUN with deprel obl:tmod/obl:npmod; not a discourse particle"},
        {"f_06_first_person_pronouns", "1st person pronouns", U::RatePer1000, "UPOS PRON, first-person form"},
        {"f_07_second_person_pronouns", "2nd person pronouns", U::RatePer1000, "UPOS PRON, second-person form"},
        {"f_08_third_person_pronouns", "third person pronouns", U::RatePer1000,
         "UPOS PRON, third-person form other than it"},
        {"f_09_pronoun_it", "pronoun it", U::RatePer1000, "UPOS PRON, form it"},
        {"f_10_demonstrative_pronoun", "demonstrative pronouns", U::RatePer1000,
         "UPOS PRON, XPOS DT, form this/that/these/those"},
        {"f_11_indefinite_pronouns", "indefinite pronouns", U::RatePer1000,
         "UPOS PRON or NOUN, form in indefinite-pronoun list"},
        {"f_12_proverb_do", "DO as pro-verb", U::RatePer1000, "lemma do, UPOS VERB"},
        {"f_13_wh_question", "WH questions", U::RatePer1000,
         "sentence ending in '?' whose first lexical token has XPOS WDT/WP/WP$/WRB"},
        {"f_14_nominalizations", "nominalizations", U::RatePer1000,
         "UPOS NOUN ending in -tion/-ment/-ness/-ity (or plural), at least 3 letters before the suffix"},
        {"f_15_gerunds", "gerunds", U::RatePer1000,
         "XPOS VBG with a nominal deprel, or advcl/acl introduced by a preposition-like mark"},
        {"f_16_other_nouns", "nouns", U::RatePer1000, "UPOS NOUN or PROPN, not a nominalization"},
        {"f_17_agentless_passives", "agentless passives", U::RatePer1000,
         "verb with an aux:pass dependent and no agent"},
        {"f_18_by_passives", "BY-passives", U::RatePer1000,
         "verb with an aux:pass dependent and an obl:agent (or by-phrase) dependent"},
        {"f_19_be_main_verb", "BE as main verb", U::RatePer1000,
         "lemma be as cop, or as a non-auxiliary verb without an expletive dependent"},
        {"f_20_existential_there", "existential there", U::RatePer1000, "form there, deprel expl"},
        {"f_21_that_verb_comp", "THAT clauses as verb complements", U::RatePer1000,
         "that as mark of a ccomp governed by a VERB"},
        {"f_22_that_adj_comp", "That clauses as adjective complements", U::RatePer1000,
         "that as mark of a ccomp governed by an ADJ"},
        {"f_23_wh_clause", "WH clauses", U::RatePer1000,
         "WH word (WDT/WP/WP$/WRB) inside a ccomp governed by a VERB"},
        {"f_24_infinitives", "infinitives", U::RatePer1000, "to, UPOS PART, governor XPOS VB"},
        {"f_25_present_participle", "present participial clauses", U::RatePer1000,
         "XPOS VBG, deprel advcl, no mark dependent"},
        {"f_26_past_participle", "past participial clauses", U::RatePer1000,
         "XPOS VBN, deprel advcl, no mark/aux dependent"},
        {"f_27_past_participle_whiz", "past participial WHIZ deletions", U::RatePer1000, "XPOS VBN, deprel acl"},
        {"f_28_present_participle_whiz", "present participial WHIZ deletions", U::RatePer1000,
         "XPOS VBG, deprel acl, no mark dependent"},
        {"f_29_that_subj", "that relatives on subject position", U::RatePer1000,
         "that as nsubj of a relative clause"},
        {"f_30_that_obj", "That relative clause on object positions", U::RatePer1000,
         "that as obj of a relative clause"},
        {"f_31_wh_subj", "WH relative clauses on subject positions", U::RatePer1000,
         "WP/WDT (not that) as nsubj of a relative clause on a nominal, not pied-piped"},
        {"f_32_wh_obj", "WH relative clauses on object positions", U::RatePer1000,
         "WP/WDT (not that) as obj of a relative clause on a nominal, not pied-piped"},
        {"f_33_pied_piping", "pied piping constructions", U::RatePer1000,
         "WP/WDT relative pronoun with a case (preposition) dependent"},
        {"f_34_sentence_relatives", "sentence relatives", U::RatePer1000,
         "which after a comma whose clause does not modify a nominal"},
        {"f_35_because", "causative subordination", U::RatePer1000, "because, UPOS SCONJ"},
        {"f_36_though", "concessive subordination", U::RatePer1000, "although/though, UPOS SCONJ"},
        {"f_37_if", "conditional subordination", U::RatePer1000, "if/unless, UPOS SCONJ"},
        {"f_38_other_adv_sub", "other adverbial subordinators", U::RatePer1000,
         "since/while/whilst/whereupon/whereas/whereby as SCONJ, or so/such directly before a mark that"},
        {"f_39_prepositions", "prepositions", U::RatePer1000, "UPOS ADP, not a verb particle"},
        {"f_40_adj_attr", "attributive adjectives", U::RatePer1000, "UPOS ADJ, deprel amod"},
        {"f_41_adj_pred", "predicative adjectives", U::RatePer1000,
         "UPOS ADJ with a cop dependent, or deprel acomp/xcomp"},
        {"f_42_adverbs", "adverbs", U::RatePer1000,
         "UPOS ADV, not WRB, not counted by an adverbial word class feature"},
        {"f_43_type_token", "type/token ratio", U::Ratio,
         "distinct lower-cased forms over the first 400 lexical tokens"},
        {"f_44_mean_word_length", "word length", U::MeanCharacters,
         "mean code points per lexical token"},
        {"f_45_conjuncts", "conjuncts", U::RatePer1000, "form in conjunct list, UPOS ADV or CCONJ"},
        {"f_46_downtoners", "downtoners", U::RatePer1000, "UPOS ADV, form in downtoner list"},
        {"f_47_hedges", "general hedges", U::RatePer1000,
         "maybe/almost (ADV); sort of/kind of not after DT/PRP$/JJ/CD; more or less"},
        {"f_48_amplifiers", "amplifiers", U::RatePer1000, "UPOS ADV, form in amplifier list"},
        {"f_49_emphatics", "general emphatics", U::RatePer1000,
         "just/really/most/more as advmod ADV; so/real modifying an ADJ; a lot; for sure; such a"},
        {"f_50_discourse_particles", "discourse particles", U::RatePer1000,
         "well/now/anyway/anyhow/anyways as first lexical token, UPOS ADV or INTJ"},
        {"f_51_demonstratives", "demonstratives", U::RatePer1000,
         "UPOS DET, deprel det, form this/that/these/those"},
        {"f_52_modal_possibility", "possibility modals", U::RatePer1000, "XPOS MD: can/ca/may/might/could"},
        {"f_53_modal_necessity", "necessity modals", U::RatePer1000, "XPOS MD: ought/should/must"},
        {"f_54_modal_predictive", "prediction modals", U::RatePer1000,
         "XPOS MD: will/would/shall/'ll/'d/wo"},
        {"f_55_verb_public", "public verbs", U::RatePer1000, "UPOS VERB, lemma in public-verb list"},
        {"f_56_verb_private", "private verbs", U::RatePer1000, "UPOS VERB, lemma in private-verb list"},
        {"f_57_verb_suasive", "suasive verbs", U::RatePer1000, "UPOS VERB, lemma in suasive-verb list"},
        {"f_58_verb_seem", "SEEM / APPEAR", U::RatePer1000, "UPOS VERB, lemma seem/appear"},
        {"f_59_contractions", "contractions", U::RatePer1000,
         "clitic token starting with an apostrophe or n't, XPOS not POS"},
        {"f_60_that_deletion", "THAT deletion", U::RatePer1000,
         "finite ccomp after its VERB governor with a subject, no mark and no WH word"},
        {"f_61_stranded_preposition", "final prepositions", U::RatePer1000,
         "UPOS ADP (not a particle) followed by punctuation or sentence end"},
        {"f_62_split_infinitive", "split infinitives", U::RatePer1000,
         "infinitive to, one or two ADV, then its VB governor"},
        {"f_63_split_auxiliary", "split auxiliaries", U::RatePer1000,
         "aux or aux:pass, one or two ADV, then its governor"},
        {"f_64_phrasal_coordination", "phrasal coordination", U::RatePer1000,
         "and joining two conjuncts of the same word class, second without a subject"},
        {"f_65_clausal_coordination", "non-phrasal coordination", U::RatePer1000,
         "and joining a conjunct with its own subject, or sentence-initial and"},
        {"f_66_neg_synthetic", "synthetic negation", U::RatePer1000, "no as DET; neither; nor"},
        {"f_67_neg_analytic", "analytic negation", U::RatePer1000, "not / n't"},
    };
    return table;
}

constexpr std::size_t npos = static_cast<std::size_t>(-1);

std::string lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        // typographic apostrophe U+2019 -> '
        if (s.substr(i, 3) == "\xE2\x80\x99") {
            out += '\'';
            i += 2;
            continue;
        }
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
    }
    return out;
}

std::string canonical_dep(std::string_view dep) {
    if (dep == "nsubjpass") return "nsubj:pass";
    if (dep == "csubjpass") return "csubj:pass";
    if (dep == "auxpass") return "aux:pass";
    if (dep == "dobj") return "obj";
    if (dep == "relcl") return "acl:relcl";
    if (dep == "agent") return "obl:agent";
    if (dep == "prt") return "compound:prt";
    if (dep == "npadvmod") return "obl:npmod";
    return std::string(dep);
}

std::size_t utf8_length(std::string_view s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

bool is_wh_tag(std::string_view x) { return x == "WDT" || x == "WP" || x == "WP$" || x == "WRB"; }
bool is_subject(std::string_view d) { return d == "nsubj" || d == "nsubj:pass" || d == "expl"; }
bool is_nsubj(std::string_view d) { return d == "nsubj" || d == "nsubj:pass"; }
bool is_object(std::string_view d) { return d == "obj"; }
bool is_nominal(std::string_view u) { return u == "NOUN" || u == "PROPN" || u == "PRON"; }

bool ends_with_suffix(std::string_view w, std::string_view suffix) {
    return w.size() >= suffix.size() + 3 && w.ends_with(suffix);
}

bool is_nominalization_form(std::string_view w) {
    static constexpr std::string_view kSuffixes[] = {"tion", "tions", "ment", "ments", "ness",
                                                     "nesses", "ity", "ities"};
    return std::any_of(std::begin(kSuffixes), std::end(kSuffixes),
                       [&](std::string_view s) { return ends_with_suffix(w, s); });
}

// Per-sentence view with normalized fields and child lists.
struct SentenceView {
    struct Tok {
        const TaggedToken* src;
        std::string low;
        std::string lemma;
        std::string_view upos;
        std::string_view xpos;
        std::string dep;
        std::size_t head;  // 0-based, npos for root
        std::vector<std::size_t> children;
    };
    std::vector<Tok> t;

    explicit SentenceView(const Sentence& s) {
        t.reserve(s.tokens.size());
        for (const auto& tok : s.tokens) {
            Tok v;
            v.src = &tok;
            v.low = lower(tok.surface);
            v.lemma = lower(tok.lemma);
            v.upos = tok.upos;
            v.xpos = tok.xpos ? std::string_view(*tok.xpos) : std::string_view{};
            v.dep = canonical_dep(tok.deprel);
            v.head = tok.head == 0 ? npos : tok.head - 1;
            t.push_back(std::move(v));
        }
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t[i].head != npos && t[i].head < t.size()) t[t[i].head].children.push_back(i);
    }

    std::size_t size() const { return t.size(); }
    const Tok* head_of(std::size_t i) const {
        return t[i].head == npos || t[i].head >= t.size() ? nullptr : &t[t[i].head];
    }
    bool has_child_dep(std::size_t i, std::string_view dep) const {
        return std::any_of(t[i].children.begin(), t[i].children.end(),
                           [&](std::size_t c) { return t[c].dep == dep; });
    }
    template <typename Pred>
    bool any_child(std::size_t i, Pred pred) const {
        return std::any_of(t[i].children.begin(), t[i].children.end(), [&](std::size_t c) { return pred(t[c]); });
    }
    bool lexical(std::size_t i) const { return t[i].src->is_lexical(); }
    std::size_t first_lexical() const {
        for (std::size_t i = 0; i < t.size(); ++i)
            if (lexical(i)) return i;
        return npos;
    }
    std::string_view low_at(std::size_t i) const { return i < t.size() ? std::string_view(t[i].low) : ""; }
};

bool has_agent(const SentenceView& s, std::size_t verb) {
    return s.any_child(verb, [&](const SentenceView::Tok& c) {
        if (c.dep == "obl:agent") return true;
        if (c.dep != "obl" && c.dep != "nmod") return false;
        return std::any_of(c.children.begin(), c.children.end(), [&](std::size_t g) {
            return s.t[g].dep == "case" && s.t[g].low == "by";
        });
    });
}

bool is_relcl_pronoun(const SentenceView& s, std::size_t i) {
    const auto* h = s.head_of(i);
    return h && h->dep == "acl:relcl";
}

// Tokens i+1.. are one or two ADV followed by `target`.
bool adverbs_then(const SentenceView& s, std::size_t i, std::size_t target) {
    std::size_t k = i + 1;
    std::size_t advs = 0;
    while (k < s.size() && advs < 2 && s.t[k].upos == "ADV") {
        ++k;
        ++advs;
    }
    return advs >= 1 && k == target;
}

void count_sentence(const SentenceView& s, FeatureCounts& fc) {
    auto& c = fc.counts;
    const std::size_t first = s.first_lexical();

    if (first != npos && !s.t.empty() && s.t.back().src->is_punct && s.t.back().low == "?" &&
        is_wh_tag(s.t[first].xpos)) {
        ++c[feat::wh_questions];
    }

    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.lexical(i)) continue;
        const auto& tok = s.t[i];
        const auto& w = tok.low;
        const auto up = tok.upos;
        const auto xp = tok.xpos;
        const auto& dep = tok.dep;
        const auto* head = s.head_of(i);

        if (xp == "VBD") ++c[feat::past_tense];
        if (xp == "VBP" || xp == "VBZ") ++c[feat::present_tense];
        if (tok.lemma == "have" && dep == "aux" && head && head->xpos == "VBN") ++c[feat::perfect_aspect];

        // Adverbial word classes; the leftovers count as general adverbs.
        bool classed_adverb = false;
        const bool discourse = i == first && (up == "ADV" || up == "INTJ") &&
                               (w == "well" || w == "now" || w == "anyway" || w == "anyhow" || w == "anyways");
        if (discourse) {
            ++c[feat::discourse_particles];
            classed_adverb = true;
        }
        if (up == "ADV" && lexicon::is_place_adverb(w)) {
            ++c[feat::place_adverbials];
            classed_adverb = true;
        }
        if (!discourse && lexicon::is_time_adverb(w) &&
            (up == "ADV" || (up == "NOUN" && (dep == "obl:tmod" || dep == "obl:npmod")))) {
            ++c[feat::time_adverbials];
            classed_adverb = true;
        }
        if ((up == "ADV" || up == "CCONJ") && lexicon::is_conjunct(w)) {
            ++c[feat::conjuncts];
            classed_adverb = true;
        }
        if (up == "ADV" && lexicon::is_downtoner(w)) {
            ++c[feat::downtoners];
            classed_adverb = true;
        }
        if (up == "ADV" && lexicon::is_amplifier(w)) {
            ++c[feat::amplifiers];
            classed_adverb = true;
        }

        bool hedge = false;
        if (up == "ADV" && (w == "maybe" || w == "almost")) hedge = true;
        if ((w == "sort" || w == "kind") && s.low_at(i + 1) == "of") {
            const auto prev = i > 0 ? s.t[i - 1].xpos : std::string_view{};
            if (prev != "DT" && prev != "PRP$" && prev != "JJ" && prev != "CD") hedge = true;
        }
        if (w == "more" && s.low_at(i + 1) == "or" && s.low_at(i + 2) == "less") hedge = true;
        if (hedge) {
            ++c[feat::hedges];
            classed_adverb = true;
        }

        bool emphatic = false;
        if (up == "ADV" && dep == "advmod" && (w == "just" || w == "really" || w == "most" || w == "more") &&
            !hedge) {
            emphatic = true;
        }
        if (up == "ADV" && (w == "so" || w == "real") && head && head->upos == "ADJ") emphatic = true;
        if (w == "lot" && i > 0 && s.t[i - 1].low == "a") emphatic = true;
        if (w == "sure" && i > 0 && s.t[i - 1].low == "for") emphatic = true;
        if (w == "such" && (s.low_at(i + 1) == "a" || s.low_at(i + 1) == "an")) emphatic = true;
        if (emphatic) {
            ++c[feat::emphatics];
            if (up == "ADV") classed_adverb = true;
        }

        if (up == "ADV" && !classed_adverb && xp != "WRB" && w != "not" && w != "n't") ++c[feat::adverbs];

        if (up == "PRON") {
            if (lexicon::is_first_person(w)) ++c[feat::first_person_pronouns];
            if (lexicon::is_second_person(w)) ++c[feat::second_person_pronouns];
            if (lexicon::is_third_person(w)) ++c[feat::third_person_pronouns];
            if (w == "it") ++c[feat::pronoun_it];
            if (xp == "DT" && (w == "this" || w == "that" || w == "these" || w == "those"))
                ++c[feat::demonstrative_pronouns];
        }
        if ((up == "PRON" || up == "NOUN") && lexicon::is_indefinite_pronoun(w)) ++c[feat::indefinite_pronouns];
        if (tok.lemma == "do" && up == "VERB") ++c[feat::pro_verb_do];

        // Nominal forms.
        const bool nominalization = up == "NOUN" && is_nominalization_form(w);
        if (nominalization) ++c[feat::nominalizations];
        if ((up == "NOUN" || up == "PROPN") && !nominalization) ++c[feat::other_nouns];
        if (xp == "VBG") {
            const bool nominal_role = dep == "nsubj" || dep == "nsubj:pass" || dep == "csubj" ||
                                      dep == "csubj:pass" || dep == "obj" || dep == "iobj" || dep == "pobj" ||
                                      dep == "pcomp";
            const bool prep_mark = (dep == "advcl" || dep == "acl") && s.any_child(i, [](const auto& ch) {
                return ch.dep == "mark" && lexicon::is_gerund_preposition(ch.low);
            });
            if (nominal_role || prep_mark) ++c[feat::gerunds];
            if (dep == "advcl" && !s.has_child_dep(i, "mark")) ++c[feat::present_participial_clauses];
            if (dep == "acl" && !s.has_child_dep(i, "mark")) ++c[feat::present_participial_whiz];
        }
        if (xp == "VBN") {
            if (dep == "advcl" && !s.any_child(i, [](const auto& ch) {
                    return ch.dep == "mark" || ch.dep == "aux" || ch.dep == "aux:pass";
                })) {
                ++c[feat::past_participial_clauses];
            }
            if (dep == "acl") ++c[feat::past_participial_whiz];
        }

        // Passives, counted on the participle.
        if (s.has_child_dep(i, "aux:pass")) {
            if (has_agent(s, i))
                ++c[feat::by_passives];
            else
                ++c[feat::agentless_passives];
        }

        if (tok.lemma == "be") {
            const bool copula = dep == "cop";
            const bool main = (up == "VERB" || up == "AUX") && dep != "aux" && dep != "aux:pass" && dep != "cop" &&
                              !s.has_child_dep(i, "expl");
            if (copula || main) ++c[feat::be_main_verb];
        }
        if (w == "there" && dep == "expl") ++c[feat::existential_there];

        // Complement clauses.
        if (w == "that" && dep == "mark" && head && head->dep == "ccomp") {
            const auto* gov = s.head_of(tok.head);
            if (gov && gov->upos == "VERB") ++c[feat::that_verb_complements];
            if (gov && gov->upos == "ADJ") ++c[feat::that_adj_complements];
        }
        if (is_wh_tag(xp) && head && head->dep == "ccomp") {
            const auto* gov = s.head_of(tok.head);
            if (gov && gov->upos == "VERB") ++c[feat::wh_clauses];
        }
        if (dep == "ccomp" && head && head->upos == "VERB" && tok.head < i && !s.has_child_dep(i, "mark") &&
            s.any_child(i, [](const auto& ch) { return is_subject(ch.dep); }) &&
            !s.any_child(i, [](const auto& ch) { return is_wh_tag(ch.xpos); })) {
            ++c[feat::that_deletion];
        }
        if (w == "to" && up == "PART" && head && head->xpos == "VB") {
            ++c[feat::infinitives];
            if (adverbs_then(s, i, tok.head)) ++c[feat::split_infinitives];
        }
        if ((dep == "aux" || dep == "aux:pass") && head && adverbs_then(s, i, tok.head)) ++c[feat::split_auxiliaries];

        // Relatives.
        if (is_relcl_pronoun(s, i)) {
            const auto* gov = s.head_of(tok.head);
            const bool on_nominal = gov && is_nominal(gov->upos);
            if (w == "that") {
                if (is_nsubj(dep)) ++c[feat::that_relatives_subject];
                if (is_object(dep)) ++c[feat::that_relatives_object];
            } else if (xp == "WP" || xp == "WDT") {
                const bool pied = s.has_child_dep(i, "case");
                if (pied) ++c[feat::pied_piping];
                if (!pied && on_nominal && is_nsubj(dep)) ++c[feat::wh_relatives_subject];
                if (!pied && on_nominal && is_object(dep)) ++c[feat::wh_relatives_object];
            }
            if (w == "which" && i > 0 && s.t[i - 1].low == "," && !on_nominal) ++c[feat::sentence_relatives];
        }

        // Subordinators.
        if (up == "SCONJ") {
            if (w == "because") ++c[feat::causative_subordination];
            if (w == "although" || w == "though") ++c[feat::concessive_subordination];
            if (w == "if" || w == "unless") ++c[feat::conditional_subordination];
            if (w == "since" || w == "while" || w == "whilst" || w == "whereupon" || w == "whereas" || w == "whereby")
                ++c[feat::other_adverbial_subordinators];
        }
        if (w == "that" && dep == "mark" && i > 0 && (s.t[i - 1].low == "so" || s.t[i - 1].low == "such"))
            ++c[feat::other_adverbial_subordinators];

        if (up == "ADP" && dep != "compound:prt") {
            ++c[feat::prepositions];
            if (i + 1 == s.size() || s.t[i + 1].src->is_punct) ++c[feat::stranded_prepositions];
        }
        if (up == "ADJ" && dep == "amod") ++c[feat::attributive_adjectives];
        if (up == "ADJ" && (s.has_child_dep(i, "cop") || dep == "acomp" || dep == "xcomp"))
            ++c[feat::predicative_adjectives];

        if (up == "DET" && dep == "det" && (w == "this" || w == "that" || w == "these" || w == "those"))
            ++c[feat::demonstratives];

        if (xp == "MD") {
            if (w == "can" || w == "ca" || w == "may" || w == "might" || w == "could") ++c[feat::possibility_modals];
            if (w == "ought" || w == "should" || w == "must") ++c[feat::necessity_modals];
            if (w == "will" || w == "would" || w == "shall" || w == "'ll" || w == "'d" || w == "wo")
                ++c[feat::predictive_modals];
        }
        if (up == "VERB") {
            if (lexicon::is_public_verb(tok.lemma)) ++c[feat::public_verbs];
            if (lexicon::is_private_verb(tok.lemma)) ++c[feat::private_verbs];
            if (lexicon::is_suasive_verb(tok.lemma)) ++c[feat::suasive_verbs];
            if (tok.lemma == "seem" || tok.lemma == "appear") ++c[feat::seem_appear];
        }
        if ((w.starts_with('\'') || w == "n't") && w.size() > 1 && xp != "POS") ++c[feat::contractions];

        if (w == "and" && up == "CCONJ") {
            if (i == first) {
                ++c[feat::clausal_coordination];
            } else if (dep == "cc" && head && head->dep == "conj") {
                const bool own_subject = s.any_child(tok.head, [](const auto& ch) { return is_subject(ch.dep); });
                const auto* first_conj = s.head_of(tok.head);
                auto cls = [](std::string_view u) { return u == "PROPN" ? std::string_view("NOUN") : u; };
                if (own_subject) {
                    ++c[feat::clausal_coordination];
                } else if (first_conj && cls(head->upos) == cls(first_conj->upos) &&
                           (cls(head->upos) == "NOUN" || head->upos == "ADJ" || head->upos == "ADV" ||
                            head->upos == "VERB")) {
                    ++c[feat::phrasal_coordination];
                }
            }
        }

        if ((w == "no" && up == "DET") || w == "neither" || w == "nor") ++c[feat::synthetic_negation];
        if (w == "not" || w == "n't") ++c[feat::analytic_negation];
    }
}

}  // namespace

FeatureInventory::FeatureInventory() : features_(descriptor_table()) {}

const FeatureInventory& FeatureInventory::standard() {
    static const FeatureInventory inv;
    return inv;
}

std::optional<std::size_t> FeatureInventory::index_of(std::string_view id) const {
    for (std::size_t i = 0; i < features_.size(); ++i)
        if (features_[i].id == id) return i;
    return std::nullopt;
}

void FeatureMatrix::append(const FeatureVector& v) {
    doc_ids.push_back(v.doc_id);
    values.append_row(v.values);
}

FeatureVector FeatureMatrix::row_vector(std::size_t r) const {
    FeatureVector v;
    v.doc_id = doc_ids.at(r);
    auto row = values.row(r);
    std::copy(row.begin(), row.end(), v.values.begin());
    return v;
}

FeatureMatrix FeatureMatrix::select(const std::vector<std::size_t>& rows) const {
    FeatureMatrix out;
    out.register_label = register_label;
    out.source = source;
    out.inventory_version = inventory_version;
    out.frame = frame;
    out.values = values.select_rows(rows);
    for (auto r : rows) out.doc_ids.push_back(doc_ids.at(r));
    return out;
}

FeatureCounts count_features(const TaggedDocument& doc) {
    FeatureCounts fc;
    std::set<std::string> types;
    std::size_t chars = 0;
    for (const auto& sentence : doc.sentences) {
        for (const auto& tok : sentence.tokens) {
            if (!tok.is_lexical()) continue;
            ++fc.lexical_tokens;
            chars += utf8_length(tok.surface);
            if (fc.ttr_window < 400) {
                ++fc.ttr_window;
                types.insert(lower(tok.surface));
            }
        }
    }
    if (fc.lexical_tokens == 0) throw Error("empty document");
    for (const auto& sentence : doc.sentences) count_sentence(SentenceView(sentence), fc);
    fc.counts[feat::type_token_ratio] = types.size();
    fc.counts[feat::mean_word_length] = chars;
    return fc;
}

FeatureVector extract_features(const TaggedDocument& doc, const FeatureInventory& inventory) {
    if (inventory.size() != kFeatureCount) throw Error("feature inventory must have 67 entries");
    const auto fc = count_features(doc);
    FeatureVector v;
    v.doc_id = doc.doc_id;
    const double n = static_cast<double>(fc.lexical_tokens);
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        const double raw = static_cast<double>(fc.counts[i]);
        switch (inventory[i].unit) {
            case FeatureUnit::RatePer1000: v.values[i] = raw * 1000.0 / n; break;
            case FeatureUnit::Ratio: v.values[i] = raw / static_cast<double>(fc.ttr_window); break;
            case FeatureUnit::MeanCharacters: v.values[i] = raw / n; break;
        }
    }
    return v;
}

FeatureMatrix extract_matrix(const Corpus& corpus, const std::string& source, const FeatureInventory& inventory,
                             std::size_t threads) {
    std::vector<FeatureVector> rows(corpus.documents.size());
    parallel_for(rows.size(), threads, [&](std::size_t i) {
        const auto& doc = corpus.documents[i];
        try {
            rows[i] = extract_features(doc, inventory);
        } catch (const Error& e) {
            throw Error("document '" + doc.doc_id + "': " + e.what());
        }
    });
    FeatureMatrix m;
    m.register_label = corpus.register_label;
    m.source = source;
    m.inventory_version = std::string(inventory.version());
    for (const auto& r : rows) m.append(r);
    return m;
}

}  // namespace biberdist
