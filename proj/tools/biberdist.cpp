#include <CLI11.hpp>
#include <iostream>

#include "biberdist/commands.hpp"
#include "biberdist/error.hpp"

using namespace biberdist;

namespace {

void add_common(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--register", cfg.register_label, "Register label");
    sub->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
    sub->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

void add_resampling(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--n", cfg.n, "Subsample size")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--B", cfg.draws, "Resampling draws")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--level", cfg.level, "Interval level in percent")->capture_default_str()->check(CLI::Range(0.0, 100.0));
}

void add_frame(CLI::App* sub, RunConfig& cfg, bool kernel) {
    sub->add_option("--human", cfg.human, "Full human feature matrix (CSV)");
    sub->add_option("--stats", cfg.stats_path, "Standardization stats JSON");
    if (kernel) sub->add_option("--kernel", cfg.kernel_path, "Kernel config JSON");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Register-aware two-sample evaluation of generated corpora over Biber features"};
    app.set_config("--config", "", "INI file with one section per command");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);
    RunConfig cfg;

    auto* extract = app.add_subcommand("extract", "Tagged CoNLL-U corpus -> feature matrix");
    add_common(extract, cfg);
    extract->add_option("inputs", cfg.inputs, "CoNLL-U files")->required();
    extract->add_option("--source", cfg.source, "human or a model name")->capture_default_str();
    extract->add_option("--soft", cfg.soft_limit, "Soft lexical-token limit")->capture_default_str();
    extract->add_option("--hard", cfg.hard_limit, "Hard lexical-token limit")->capture_default_str();
    extract->add_option("--punct-threshold", cfg.punct_threshold, "Maximum punctuation/lexical ratio")
        ->capture_default_str();
    extract->add_flag("!--no-truncate", cfg.truncate, "Skip length truncation");

    auto* baseline = app.add_subcommand("baseline", "Fit stats and kernel; human-human intervals over n");
    add_common(baseline, cfg);
    add_frame(baseline, cfg, true);
    add_resampling(baseline, cfg);
    baseline->add_option("--sweep", cfg.sweep, "Subsample sizes")->capture_default_str()->delimiter(',');

    auto* subsample = app.add_subcommand("subsample", "Representative evaluation and few-shot subsamples");
    add_common(subsample, cfg);
    add_frame(subsample, cfg, false);
    subsample->add_option("corpus", cfg.inputs, "Corpus with metadata (CoNLL-U or JSONL)")->required();
    subsample->add_option("--n", cfg.n, "Evaluation sample size")->capture_default_str();
    subsample->add_option("--candidates", cfg.candidate_draws, "Candidate draws")->capture_default_str();
    subsample->add_option("--exclude", cfg.exclusion_quantile, "Share of longest-metadata documents excluded")
        ->capture_default_str();
    subsample->add_option("--fewshot-n", cfg.fewshot_n, "Few-shot pool size (0 = none)")->capture_default_str();

    auto* generate = app.add_subcommand("generate", "Generate a synthetic corpus through a chat-completions endpoint");
    add_common(generate, cfg);
    generate->add_option("corpus", cfg.inputs, "Human corpus with metadata (CoNLL-U or JSONL)")->required();
    generate->add_option("--selection", cfg.selection, "Evaluation selection manifest");
    generate->add_option("--pool", cfg.pool, "Few-shot pool corpus");
    generate->add_option("--pool-selection", cfg.pool_selection, "Few-shot selection manifest");
    generate->add_option("--template", cfg.template_path, "Prompt template JSON (default: built-in)");
    generate->add_option("--variant", cfg.variant, "Built-in template variant")->capture_default_str();
    generate->add_option("--model", cfg.model_id, "Model id sent to the endpoint")->required();
    generate->add_option("--endpoint", cfg.endpoint, "Base URL, e.g. http://localhost:8000/v1")->required();
    generate->add_option("--api-key-env", cfg.api_key_env, "Environment variable holding the API key")
        ->capture_default_str();
    generate->add_option("--shots", cfg.shots, "Few-shot demonstrations")->capture_default_str();
    generate->add_option("--max-new-tokens", cfg.max_new_tokens)->capture_default_str();
    generate->add_option("--concurrency", cfg.concurrency)->capture_default_str();
    generate->add_option("--retries", cfg.max_retries)->capture_default_str();
    generate->add_option("--soft", cfg.soft_limit)->capture_default_str();
    generate->add_option("--hard", cfg.hard_limit)->capture_default_str();
    generate->add_flag("--prefix-in-user", cfg.prefix_in_user, "Append the assistant prefix to the user message");

    auto* evaluate = app.add_subcommand("evaluate", "Rank model corpora by MMD^2 against the human sample");
    add_common(evaluate, cfg);
    add_frame(evaluate, cfg, true);
    add_resampling(evaluate, cfg);
    evaluate->add_option("--human-sample", cfg.human_sample, "Human evaluation-sample feature matrix");
    evaluate->add_option("--selection", cfg.selection, "Selection manifest applied to --human");
    evaluate->add_option("--model", cfg.models, "name=features.csv (repeatable)");

    auto* diagnostics = app.add_subcommand("diagnostics", "Dimension, marginal, variance, cross-model and detector reports");
    add_common(diagnostics, cfg);
    add_frame(diagnostics, cfg, true);
    add_resampling(diagnostics, cfg);
    diagnostics->add_option("--human-sample", cfg.human_sample, "Human evaluation-sample feature matrix");
    diagnostics->add_option("--model", cfg.models, "name=features.csv (repeatable)");
    diagnostics->add_option("--test-fraction", cfg.test_fraction)->capture_default_str();

    auto* detector = app.add_subcommand("detector", "Human vs generated logistic-regression classifier");
    add_common(detector, cfg);
    add_frame(detector, cfg, false);
    detector->add_option("--model", cfg.models, "name=features.csv (repeatable)");
    detector->add_option("--test-fraction", cfg.test_fraction)->capture_default_str();
    detector->add_option("--l2-grid", cfg.l2_grid)->capture_default_str()->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    CLI::App* chosen = app.get_subcommands().front();
    cfg.resolved_config = app.config_to_str(true, false);
    try {
        const std::string name = chosen->get_name();
        if (name == "extract") return cmd_extract(cfg, std::cerr);
        if (name == "baseline") return cmd_baseline(cfg, std::cerr);
        if (name == "subsample") return cmd_subsample(cfg, std::cerr);
        if (name == "generate") return cmd_generate(cfg, std::cerr);
        if (name == "evaluate") return cmd_evaluate(cfg, std::cerr);
        if (name == "diagnostics") return cmd_diagnostics(cfg, std::cerr);
        if (name == "detector") return cmd_detector(cfg, std::cerr);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
