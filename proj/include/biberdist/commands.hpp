#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace biberdist {

/// Options shared by the pipeline commands. Paths left empty are unused.
struct RunConfig {
    std::string register_label;
    std::filesystem::path out_dir = ".";
    std::vector<std::filesystem::path> inputs;  // corpora for extract / subsample
    std::filesystem::path human;                // raw full-human feature CSV
    std::filesystem::path human_sample;         // raw human evaluation-sample feature CSV
    std::filesystem::path selection;            // selection manifest restricting a corpus
    std::vector<std::string> models;            // name=path to raw model feature CSVs
    std::filesystem::path stats_path;
    std::filesystem::path kernel_path;
    std::size_t n = 600;
    std::size_t draws = 1000;
    double level = 95.0;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    std::vector<std::size_t> sweep{50, 100, 200, 400, 600};

    // extract
    std::string source = "human";
    std::size_t soft_limit = 400;
    std::size_t hard_limit = 440;
    double punct_threshold = 0.2;
    bool truncate = true;

    // subsample
    std::size_t candidate_draws = 1000;
    double exclusion_quantile = 0.05;
    std::size_t fewshot_n = 0;

    // generate
    std::filesystem::path pool;            // few-shot pool corpus
    std::filesystem::path pool_selection;  // selection manifest for the pool
    std::filesystem::path template_path;
    std::string variant = "base";
    std::string model_id;
    std::string endpoint;
    std::string api_key_env = "OPENAI_API_KEY";
    std::size_t shots = 0;
    std::size_t max_new_tokens = 1024;
    std::size_t concurrency = 4;
    std::size_t max_retries = 5;
    bool prefix_in_user = false;

    // detector
    double test_fraction = 0.2;
    std::vector<double> l2_grid{0.001, 0.01, 0.1, 1.0, 10.0};

    /// Text of the fully resolved configuration, written next to the outputs.
    std::string resolved_config;
};

int cmd_extract(const RunConfig& cfg, std::ostream& log);
int cmd_baseline(const RunConfig& cfg, std::ostream& log);
int cmd_subsample(const RunConfig& cfg, std::ostream& log);
int cmd_generate(const RunConfig& cfg, std::ostream& log);
int cmd_evaluate(const RunConfig& cfg, std::ostream& log);
int cmd_diagnostics(const RunConfig& cfg, std::ostream& log);
int cmd_detector(const RunConfig& cfg, std::ostream& log);

}  // namespace biberdist
