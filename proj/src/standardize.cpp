#include "biberdist/standardize.hpp"

#include <cmath>
#include "json.hpp"

#include "biberdist/error.hpp"

namespace biberdist {

std::string StandardizationStats::frame_id() const {
    return "human:" + register_label + ":" + inventory_version + ":" + std::to_string(fitted_on);
}

std::vector<std::size_t> StandardizationStats::zero_sd_features() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < sds.size(); ++j)
        if (sds[j] == 0.0) out.push_back(j);
    return out;
}

StandardizationStats fit_stats(const FeatureMatrix& full_human) {
    const auto& x = full_human.values;
    if (x.rows() < 2) throw Error("fit_stats needs at least 2 rows; sd undefined");
    StandardizationStats s;
    s.inventory_version = full_human.inventory_version;
    s.register_label = full_human.register_label;
    s.fitted_on = x.rows();
    s.means.assign(x.cols(), 0.0);
    s.sds.assign(x.cols(), 0.0);
    const double n = static_cast<double>(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t j = 0; j < x.cols(); ++j) s.means[j] += x(r, j);
    for (auto& m : s.means) m /= n;
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const double d = x(r, j) - s.means[j];
            s.sds[j] += d * d;
        }
    for (auto& v : s.sds) v = std::sqrt(v / (n - 1.0));
    return s;
}

namespace {

void check_compatible(const FeatureMatrix& m, const StandardizationStats& stats) {
    if (m.inventory_version != stats.inventory_version)
        throw Error("inventory mismatch: matrix '" + m.inventory_version + "' vs stats '" +
                    stats.inventory_version + "'");
    if (m.values.rows() > 0 && m.values.cols() != stats.means.size())
        throw Error("width mismatch: matrix has " + std::to_string(m.values.cols()) + " columns, stats " +
                    std::to_string(stats.means.size()));
}

}  // namespace

FeatureMatrix standardize(const FeatureMatrix& m, const StandardizationStats& stats) {
    check_compatible(m, stats);
    if (!m.frame.empty()) throw Error("matrix is already standardized (frame " + m.frame + ")");
    FeatureMatrix z = m;
    z.frame = stats.frame_id();
    for (std::size_t r = 0; r < z.values.rows(); ++r)
        for (std::size_t j = 0; j < z.values.cols(); ++j) {
            const double sd = stats.sds[j];
            z.values(r, j) = sd > 0.0 ? (m.values(r, j) - stats.means[j]) / sd : 0.0;
        }
    return z;
}

FeatureMatrix unstandardize(const FeatureMatrix& z, const StandardizationStats& stats) {
    check_compatible(z, stats);
    if (z.frame != stats.frame_id()) throw Error("frame mismatch: '" + z.frame + "' vs '" + stats.frame_id() + "'");
    FeatureMatrix m = z;
    m.frame.clear();
    for (std::size_t r = 0; r < m.values.rows(); ++r)
        for (std::size_t j = 0; j < m.values.cols(); ++j)
            m.values(r, j) = stats.sds[j] > 0.0 ? z.values(r, j) * stats.sds[j] + stats.means[j] : stats.means[j];
    return m;
}

std::string stats_to_json(const StandardizationStats& stats) {
    nlohmann::ordered_json j;
    j["inventory_version"] = stats.inventory_version;
    j["register"] = stats.register_label;
    j["means"] = stats.means;
    j["sds"] = stats.sds;
    j["fitted_on"] = stats.fitted_on;
    return j.dump(2) + "\n";
}

StandardizationStats stats_from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        StandardizationStats s;
        s.inventory_version = j.at("inventory_version").get<std::string>();
        s.register_label = j.at("register").get<std::string>();
        s.means = j.at("means").get<std::vector<double>>();
        s.sds = j.at("sds").get<std::vector<double>>();
        s.fitted_on = j.at("fitted_on").get<std::size_t>();
        if (s.means.size() != s.sds.size()) throw Error("stats: means and sds differ in length");
        for (double sd : s.sds)
            if (!(sd >= 0.0)) throw Error("stats: negative or non-finite sd");
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("stats JSON: ") + e.what());
    }
}

namespace {

// Table name, feature id, dimension, loading; in table order.
const std::vector<Loading>& loading_table() {
    static const std::vector<Loading> table{
        {"private verbs", "f_56_verb_private", 1, 0.96},
        {"THAT deletion", "f_60_that_deletion", 1, 0.91},
        {"contractions", "f_59_contractions", 1, 0.90},
        {"present tense verbs", "f_03_present_tense", 1, 0.86},
        {"2nd person pronouns", "f_07_second_person_pronouns", 1, 0.86},
        {"DO as pro-verb", "f_12_proverb_do", 1, 0.82},
        {"analytic negation", "f_67_neg_analytic", 1, 0.78},
        {"demonstrative pronouns", "f_10_demonstrative_pronoun", 1, 0.76},
        {"general emphatics", "f_49_emphatics", 1, 0.74},
        {"1st person pronouns", "f_06_first_person_pronouns", 1, 0.74},
        {"pronoun it", "f_09_pronoun_it", 1, 0.71},
        {"BE as main verb", "f_19_be_main_verb", 1, 0.71},
        {"causative subordination", "f_35_because", 1, 0.66},
        {"discourse particles", "f_50_discourse_particles", 1, 0.66},
        {"indefinite pronouns", "f_11_indefinite_pronouns", 1, 0.62},
        {"general hedges", "f_47_hedges", 1, 0.58},
        {"amplifiers", "f_48_amplifiers", 1, 0.56},
        {"sentence relatives", "f_34_sentence_relatives", 1, 0.55},
        {"WH questions", "f_13_wh_question", 1, 0.52},
        {"possibility modals", "f_52_modal_possibility", 1, 0.50},
        {"non-phrasal coordination", "f_65_clausal_coordination", 1, 0.48},
        {"WH clauses", "f_23_wh_clause", 1, 0.47},
        {"final prepositions", "f_61_stranded_preposition", 1, 0.43},
        {"nouns", "f_16_other_nouns", 1, -0.80},
        {"word length", "f_44_mean_word_length", 1, -0.58},
        {"prepositions", "f_39_prepositions", 1, -0.54},
        {"type/token ratio", "f_43_type_token", 1, -0.54},
        {"attributive adjectives", "f_40_adj_attr", 1, -0.47},

        {"past tense verbs", "f_01_past_tense", 2, 0.90},
        {"third person pronouns", "f_08_third_person_pronouns", 2, 0.73},
        {"perfect aspect verbs", "f_02_perfect_aspect", 2, 0.48},
        {"public verbs", "f_55_verb_public", 2, 0.43},
        {"synthetic negation", "f_66_neg_synthetic", 2, 0.40},
        {"present participial clauses", "f_25_present_participle", 2, 0.39},

        {"WH relative clauses on object positions", "f_32_wh_obj", 3, 0.63},
        {"pied piping constructions", "f_33_pied_piping", 3, 0.61},
        {"WH relative clauses on subject positions", "f_31_wh_subj", 3, 0.45},
        {"phrasal coordination", "f_64_phrasal_coordination", 3, 0.36},
        {"nominalizations", "f_14_nominalizations", 3, 0.36},
        {"time adverbials", "f_05_time_adverbials", 3, -0.60},
        {"place adverbials", "f_04_place_adverbials", 3, -0.49},
        {"adverbs", "f_42_adverbs", 3, -0.46},

        {"infinitives", "f_24_infinitives", 4, 0.76},
        {"prediction modals", "f_54_modal_predictive", 4, 0.54},
        {"suasive verbs", "f_57_verb_suasive", 4, 0.49},
        {"conditional subordination", "f_37_if", 4, 0.47},
        {"necessity modals", "f_53_modal_necessity", 4, 0.46},
        {"split auxiliaries", "f_63_split_auxiliary", 4, 0.44},

        {"conjuncts", "f_45_conjuncts", 5, 0.48},
        {"agentless passives", "f_17_agentless_passives", 5, 0.43},
        {"past participial clauses", "f_26_past_participle", 5, 0.42},
        {"BY-passives", "f_18_by_passives", 5, 0.41},
        {"past participial WHIZ deletions", "f_27_past_participle_whiz", 5, 0.40},
        {"other adverbial subordinators", "f_38_other_adv_sub", 5, 0.39},

        {"THAT clauses as verb complements", "f_21_that_verb_comp", 6, 0.56},
        {"demonstratives", "f_51_demonstratives", 6, 0.55},
        {"That relative clause on object positions", "f_30_that_obj", 6, 0.46},
        {"That clauses as adjective complements", "f_22_that_adj_comp", 6, 0.36},

        {"SEEM / APPEAR", "f_58_verb_seem", 7, 0.35},
    };
    return table;
}

}  // namespace

DimensionLoadings::DimensionLoadings() : entries_(loading_table()), weights_(kFeatureCount) {
    const auto& inv = FeatureInventory::standard();
    for (auto& w : weights_) w.fill(0.0);
    for (const auto& e : entries_) {
        const auto idx = inv.index_of(e.feature_id);
        if (!idx) throw Error("loading refers to unknown feature " + std::string(e.feature_id));
        weights_[*idx][static_cast<std::size_t>(e.dimension - 1)] = e.loading;
    }
}

const DimensionLoadings& DimensionLoadings::standard() {
    static const DimensionLoadings loadings;
    return loadings;
}

double DimensionLoadings::weight(std::size_t feature, int dimension) const {
    if (feature >= weights_.size() || dimension < 1 || dimension > 7) return 0.0;
    return weights_[feature][static_cast<std::size_t>(dimension - 1)];
}

std::vector<DimensionScores> dimension_scores(const FeatureMatrix& z, const DimensionLoadings& loadings) {
    if (z.values.rows() > 0 && z.values.cols() != kFeatureCount)
        throw Error("dimension_scores expects " + std::to_string(kFeatureCount) + " columns");
    std::vector<DimensionScores> out(z.values.rows());
    for (std::size_t r = 0; r < z.values.rows(); ++r) {
        out[r].doc_id = z.doc_ids.at(r);
        for (int d = 1; d <= static_cast<int>(kDimensionCount); ++d) {
            double s = 0.0;
            for (std::size_t j = 0; j < kFeatureCount; ++j) {
                const double w = loadings.weight(j, d);
                if (w != 0.0) s += w * z.values(r, j);
            }
            out[r].scores[static_cast<std::size_t>(d - 1)] = s;
        }
    }
    return out;
}

}  // namespace biberdist
