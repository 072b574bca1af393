#pragma once

#include "biberdist/corpus.hpp"
#include "biberdist/features.hpp"
#include "biberdist/matrix.hpp"
#include "biberdist/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testsupport {

using namespace biberdist;

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(BIBERDIST_TEST_DATA) / name;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("biberdist_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double mean = 0.0, double sd = 1.0) {
    std::normal_distribution<double> dist(mean, sd);
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = dist(rng);
    return m;
}

inline FeatureMatrix as_feature_matrix(const Matrix& m, const std::string& prefix, const std::string& frame = {}) {
    FeatureMatrix fm;
    fm.register_label = "synthetic";
    fm.source = prefix;
    fm.frame = frame;
    fm.values = m;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s-%05zu", prefix.c_str(), r);
        fm.doc_ids.emplace_back(buf);
    }
    return fm;
}

inline double rbf(std::span<const double> a, std::span<const double> b, double h) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return std::exp(-d2 / (2.0 * h * h));
}

/// Textbook biased MMD^2: three full double sums over kernel evaluations.
inline double naive_mmd2(const Matrix& x, const Matrix& y, double h) {
    double kxx = 0.0, kyy = 0.0, kxy = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.rows(); ++j) kxx += rbf(x.row(i), x.row(j), h);
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.rows(); ++j) kyy += rbf(y.row(i), y.row(j), h);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < y.rows(); ++j) kxy += rbf(x.row(i), y.row(j), h);
    const double m = static_cast<double>(x.rows()), n = static_cast<double>(y.rows());
    return kxx / (m * m) + kyy / (n * n) - 2.0 * kxy / (m * n);
}

/// W1 as the integral of |F_a - F_b| evaluated on a fine uniform grid.
inline double grid_w1(const std::vector<double>& a, const std::vector<double>& b, std::size_t steps) {
    std::vector<double> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double lo = std::min(sa.front(), sb.front());
    const double hi = std::max(sa.back(), sb.back());
    const double dx = (hi - lo) / static_cast<double>(steps);
    double total = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = lo + (static_cast<double>(i) + 0.5) * dx;
        const double fa = static_cast<double>(std::upper_bound(sa.begin(), sa.end(), t) - sa.begin()) / sa.size();
        const double fb = static_cast<double>(std::upper_bound(sb.begin(), sb.end(), t) - sb.begin()) / sb.size();
        total += std::abs(fa - fb) * dx;
    }
    return total;
}

/// Sentence of `lexical` word tokens followed by a full stop.
inline Sentence plain_sentence(std::size_t lexical, const std::string& word = "word") {
    Sentence s;
    for (std::size_t i = 0; i < lexical; ++i) {
        TaggedToken t;
        t.surface = word;
        t.lemma = word;
        t.upos = "X";
        t.head = i == 0 ? 0 : 1;
        t.deprel = i == 0 ? "root" : "dep";
        s.tokens.push_back(t);
    }
    TaggedToken stop;
    stop.surface = ".";
    stop.lemma = ".";
    stop.upos = "PUNCT";
    stop.head = 1;
    stop.deprel = "punct";
    stop.is_punct = true;
    s.tokens.push_back(stop);
    return s;
}

inline TaggedDocument plain_document(const std::string& id, const std::vector<std::size_t>& sentence_lengths) {
    TaggedDocument d;
    d.doc_id = id;
    d.register_label = "fixture";
    for (auto n : sentence_lengths) d.sentences.push_back(plain_sentence(n));
    return d;
}

inline std::vector<TaggedDocument> load_conllu(const std::filesystem::path& p) {
    std::ifstream in(p);
    return parse_conllu(in);
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

struct SyntheticRegister {
    Corpus corpus;     // documents carry ids and metadata only
    FeatureMatrix raw;  // skewed, rate-like feature values
};

/// Corpus of `docs` documents whose features are log-normal with
/// feature-specific location and whose metadata titles vary in length.
inline SyntheticRegister synthetic_register(std::size_t docs, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> nd;
    SyntheticRegister out;
    out.corpus.register_label = "synthetic";
    Matrix m(docs, kFeatureCount);
    for (std::size_t r = 0; r < docs; ++r)
        for (std::size_t c = 0; c < kFeatureCount; ++c)
            m(r, c) = std::exp(1.0 + 0.03 * static_cast<double>(c) + 0.5 * nd(rng));
    out.raw = as_feature_matrix(m, "doc");
    out.raw.register_label = "synthetic";
    out.raw.source = "human";
    for (std::size_t r = 0; r < docs; ++r) {
        TaggedDocument d;
        d.doc_id = out.raw.doc_ids[r];
        d.register_label = "synthetic";
        std::string title = "Title";
        const auto words = 1 + uniform_below(rng, 30);
        for (std::size_t w = 0; w < words; ++w) title += " word";
        d.metadata["title"] = title;
        out.corpus.documents.push_back(std::move(d));
    }
    return out;
}

}  // namespace testsupport
