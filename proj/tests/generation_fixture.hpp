#pragma once

#include "support.hpp"

#include "biberdist/generation.hpp"

namespace testsupport {

/// Evaluation and pool corpora shaped like a summary-conditioned register.
struct GenerationFixture {
    Corpus eval;
    Corpus pool;
};

inline GenerationFixture generation_fixture(std::size_t eval_docs, std::size_t pool_docs) {
    GenerationFixture f;
    f.eval.register_label = f.pool.register_label = "XSum";
    for (std::size_t i = 0; i < eval_docs; ++i) {
        TaggedDocument d;
        d.doc_id = "eval-" + std::to_string(i);
        d.register_label = "XSum";
        d.metadata["summary"] = "Summary number " + std::to_string(i) + " about a local event.";
        f.eval.documents.push_back(d);
    }
    for (std::size_t i = 0; i < pool_docs; ++i) {
        auto d = plain_document("pool-" + std::to_string(i), {4 + i % 3, 5});
        d.register_label = "XSum";
        d.metadata["summary"] = "Pool summary " + std::to_string(i) + ".";
        f.pool.documents.push_back(d);
    }
    return f;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace testsupport
