#include "doctest.h"
#include "generation_fixture.hpp"
#include "stub_server.hpp"

#include <cstdlib>
#include <sys/wait.h>

using namespace testsupport;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(BIBERDIST_CLI) + " " + args + " >" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

/// Documents assembled from the golden sentences; `bias` picks sentences from
/// the first four more often.
std::vector<TaggedDocument> mixed_corpus(const std::string& prefix, std::size_t docs, bool bias, std::uint64_t seed) {
    const auto golden = load_conllu(data_path("golden.conllu")).front();
    Rng rng(seed);
    std::vector<TaggedDocument> out;
    for (std::size_t i = 0; i < docs; ++i) {
        TaggedDocument d;
        d.doc_id = prefix + "-" + std::to_string(i);
        d.register_label = "fixture";
        d.metadata["title"] = "Title with " + std::string(1 + uniform_below(rng, 20), 'w');
        const auto len = 6 + uniform_below(rng, 8);
        for (std::size_t s = 0; s < len; ++s) {
            const auto pick = bias && uniform_below(rng, 2) ? uniform_below(rng, 4) : uniform_below(rng, 12);
            d.sentences.push_back(golden.sentences[pick]);
        }
        out.push_back(std::move(d));
    }
    return out;
}

void write_corpus(const fs::path& p, const std::vector<TaggedDocument>& docs) {
    std::ofstream out(p);
    write_conllu(out, docs);
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

}  // namespace

TEST_CASE("pipeline end to end through the command line") {
    const auto dir = scratch_dir("cli_pipeline");
    const auto log = dir / "log.txt";
    write_corpus(dir / "human.conllu", mixed_corpus("h", 80, false, 1));
    write_corpus(dir / "model.conllu", mixed_corpus("m", 40, true, 2));
    const std::string out = " --out " + dir.string();
    const std::string d = dir.string() + "/";

    REQUIRE(run("extract " + d + "human.conllu --register fixture --punct-threshold 0.5" + out, log) == 0);
    REQUIRE(run("extract " + d + "model.conllu --register fixture --source modelx --punct-threshold 0.5" + out, log) == 0);
    CHECK(first_line(dir / "human_features.csv").rfind("doc_id,register,source,f_01_past_tense,", 0) == 0);
    CHECK(fs::exists(dir / "modelx_features.jsonl"));
    CHECK(fs::exists(dir / "human_exclusions.jsonl"));

    REQUIRE(run("baseline --human " + d + "human_features.csv --register fixture --B 20 --sweep 5,10,40" + out, log) == 0);
    CHECK(fs::exists(dir / "stats.json"));
    CHECK(fs::exists(dir / "kernel.json"));
    CHECK(fs::exists(dir / "baseline.resolved.ini"));
    CHECK(first_line(dir / "baseline_ci.csv") == "pair,register,mmd2,ci_low,ci_high,n,B,bandwidth,seed");
    CHECK(run("baseline --human " + d + "human_features.csv --B 20 --sweep 41" + out, log) != 0);

    REQUIRE(run("subsample " + d + "human.conllu --register fixture --human " + d +
                    "human_features.csv --n 20 --candidates 10 --fewshot-n 10" + out,
                log) == 0);
    CHECK(fs::exists(dir / "eval_selection.json"));
    CHECK(fs::exists(dir / "fewshot_selection.json"));

    const std::string frame = " --human " + d + "human_features.csv --stats " + d + "stats.json --kernel " + d +
                              "kernel.json --model modelx=" + d + "modelx_features.csv";
    REQUIRE(run("evaluate" + frame + " --human-sample " + d + "human_sample_features.csv --n 15 --B 20" + out, log) ==
            0);
    std::ifstream ranking(dir / "ranking.csv");
    std::string header, hh, mx;
    std::getline(ranking, header);
    std::getline(ranking, hh);
    std::getline(ranking, mx);
    CHECK(hh.rfind("human-human,fixture,", 0) == 0);
    CHECK(mx.rfind("modelx,fixture,", 0) == 0);
    CHECK(run("evaluate" + frame + " --n 500" + out, log) != 0);

    REQUIRE(run("diagnostics" + frame + " --human-sample " + d + "human_sample_features.csv --n 15 --B 10" + out, log) ==
            0);
    CHECK(first_line(dir / "dimension_scores.csv") == "source,doc_id,dimension,score");
    CHECK(fs::exists(dir / "feature_diff_modelx.csv"));
    CHECK(fs::exists(dir / "cross_matrix.csv"));
    CHECK(fs::exists(dir / "variance.csv"));

    REQUIRE(run("detector --human " + d + "human_features.csv --stats " + d + "stats.json --model modelx=" + d +
                    "modelx_features.csv --l2-grid 0.1,1" + out,
                log) == 0);
    CHECK(fs::exists(dir / "detector_model.json"));
    CHECK(first_line(dir / "detector_metrics.csv") == "register,accuracy,roc_auc");
}

TEST_CASE("generate command against a stub endpoint") {
    StubServer stub([](const nlohmann::json& b) { return StubReply{200, echo_text(b, 60)}; });
    const auto dir = scratch_dir("cli_generate");
    std::ofstream(dir / "eval.jsonl") << R"({"id": "e1", "text": "Human text.", "meta": {"summary": "One."}})" << "\n"
                                       << R"({"id": "e2", "text": "Human text.", "meta": {"summary": "Two."}})" << "\n";
    REQUIRE(run("generate " + (dir / "eval.jsonl").string() + " --register XSum --model stub-model --endpoint " +
                    stub.base_url() + " --out " + dir.string(),
                dir / "log.txt") == 0);
    CHECK(stub.bodies().size() == 2);
    CHECK(fs::exists(dir / "records.jsonl"));
    CHECK(fs::exists(dir / "generated.jsonl"));
    CHECK(fs::exists(dir / "completion_manifest.json"));
}

TEST_CASE("exit codes") {
    const auto dir = scratch_dir("cli_exit");
    const auto log = dir / "log.txt";
    CHECK(run("--help", log) == 0);
    CHECK(run("", log) != 0);
    CHECK(run("extract " + (dir / "missing.conllu").string(), log) == 2);
    std::ofstream(dir / "broken.conllu") << "# newdoc id = x\n1\tonly\tthree\n";
    CHECK(run("extract " + (dir / "broken.conllu").string() + " --out " + dir.string(), log) == 1);
    CHECK(slurp(log).find("line 2") != std::string::npos);
    CHECK(run("evaluate --out " + dir.string(), log) == 2);
    std::ofstream(dir / "bad.ini") << "[extract]\nunknown_key = 1\n";
    CHECK(run("--config " + (dir / "bad.ini").string() + " extract x.conllu", log) != 0);
}
