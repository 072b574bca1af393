#include "biberdist/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "biberdist/chat_client.hpp"
#include "biberdist/corpus.hpp"
#include "biberdist/detector.hpp"
#include "biberdist/error.hpp"
#include "biberdist/feature_diff.hpp"
#include "biberdist/features.hpp"
#include "biberdist/generation.hpp"
#include "biberdist/matrix_io.hpp"
#include "biberdist/random.hpp"
#include "biberdist/sampler.hpp"
#include "biberdist/standardize.hpp"
#include "biberdist/text_prep.hpp"
#include "biberdist/two_sample.hpp"
#include "io_util.hpp"

namespace biberdist {

namespace fs = std::filesystem;
using detail::format_double;
using detail::read_file;
using detail::write_file_atomic;

namespace {

void require_file(const fs::path& p, std::string_view what) {
    if (p.empty()) throw ConfigError(std::string(what) + " path is required");
    if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
}

template <typename Fn>
auto with_file_context(const fs::path& p, Fn fn) {
    try {
        return fn();
    } catch (const ParseError& e) {
        throw ParseError(p.string() + ": " + e.what(), 0);
    }
}

Corpus load_corpus_file(const fs::path& p, const std::string& register_label) {
    require_file(p, "corpus");
    std::ifstream in(p, std::ios::binary);
    std::vector<TaggedDocument> docs;
    if (p.extension() == ".jsonl") {
        const auto load = with_file_context(p, [&] { return load_corpus_jsonl(in); });
        for (auto& r : load.records) {
            auto doc = tokenize_plain(r.text, r.id);
            doc.metadata = std::move(r.metadata);
            doc.register_label = register_label;
            docs.push_back(std::move(doc));
        }
    } else {
        docs = with_file_context(p, [&] { return parse_conllu(in); });
    }
    std::string reg = register_label;
    if (reg.empty() && !docs.empty()) reg = docs.front().register_label;
    return assemble_corpus(std::move(docs), reg);
}

FeatureMatrix load_features(const fs::path& p) {
    require_file(p, "feature matrix");
    std::ifstream in(p, std::ios::binary);
    return with_file_context(p, [&] { return read_feature_csv(in); });
}

std::vector<std::string> load_selection(const fs::path& p) {
    require_file(p, "selection manifest");
    return selection_manifest_from_json(read_file(p)).selected_ids;
}

FeatureMatrix select_ids(const FeatureMatrix& m, const std::vector<std::string>& ids) {
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < m.rows(); ++i) pos.emplace(m.doc_ids[i], i);
    std::vector<std::size_t> rows;
    for (const auto& id : ids) {
        const auto it = pos.find(id);
        if (it == pos.end()) throw Error("selected id '" + id + "' is not in the feature matrix");
        rows.push_back(it->second);
    }
    std::sort(rows.begin(), rows.end());
    return m.select(rows);
}

Corpus select_docs(const Corpus& c, const std::vector<std::string>& ids) {
    const std::unordered_set<std::string> keep(ids.begin(), ids.end());
    Corpus out;
    out.register_label = c.register_label;
    for (const auto& d : c.documents)
        if (keep.contains(d.doc_id)) out.documents.push_back(d);
    if (out.size() != keep.size()) throw Error("selection lists ids that are not in the corpus");
    return out;
}

StandardizationStats stats_for(const RunConfig& cfg, const FeatureMatrix* human) {
    StandardizationStats stats;
    if (!cfg.stats_path.empty()) {
        require_file(cfg.stats_path, "stats");
        stats = stats_from_json(read_file(cfg.stats_path));
    } else if (human) {
        stats = fit_stats(*human);
    } else {
        throw ConfigError("--stats is required");
    }
    if (!cfg.register_label.empty() && stats.register_label != cfg.register_label)
        throw ConfigError("stats were fitted on register '" + stats.register_label + "', run is for '" +
                          cfg.register_label + "'");
    if (stats.inventory_version != kInventoryVersion)
        throw ConfigError("stats use inventory '" + stats.inventory_version + "', this build uses '" +
                          std::string(kInventoryVersion) + "'");
    return stats;
}

KernelConfig kernel_for(const RunConfig& cfg, const FeatureMatrix* human_z) {
    if (!cfg.kernel_path.empty()) {
        require_file(cfg.kernel_path, "kernel");
        return kernel_from_json(read_file(cfg.kernel_path));
    }
    if (!human_z) throw ConfigError("--kernel is required");
    return median_bandwidth(*human_z);
}

struct NamedPath {
    std::string name;
    fs::path path;
};

std::vector<NamedPath> parse_models(const std::vector<std::string>& specs) {
    std::vector<NamedPath> out;
    std::unordered_set<std::string> seen;
    for (const auto& s : specs) {
        const auto eq = s.find('=');
        NamedPath np = eq == std::string::npos ? NamedPath{fs::path(s).stem().string(), s}
                                               : NamedPath{s.substr(0, eq), s.substr(eq + 1)};
        if (np.name.empty()) throw ConfigError("empty model name in '" + s + "'");
        if (!seen.insert(np.name).second) throw ConfigError("model name '" + np.name + "' given twice");
        out.push_back(std::move(np));
    }
    return out;
}

void check_register(const FeatureMatrix& m, const std::string& reg, const std::string& what) {
    if (!reg.empty() && m.register_label != reg)
        throw ConfigError(what + " has register '" + m.register_label + "', run is for '" + reg + "'");
}

void write_resolved(const RunConfig& cfg, std::string_view command) {
    if (!cfg.resolved_config.empty())
        write_file_atomic(cfg.out_dir / (std::string(command) + ".resolved.ini"), cfg.resolved_config);
}

template <typename Fn>
std::string render(Fn fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
}

ResampleOptions resample_options(const RunConfig& cfg, std::size_t n) {
    ResampleOptions o;
    o.n = n;
    o.draws = cfg.draws;
    o.level = cfg.level;
    o.seed = cfg.seed;
    o.threads = cfg.threads;
    return o;
}

struct ModelMatrices {
    std::vector<std::string> names;
    std::vector<FeatureMatrix> raw;
    std::vector<FeatureMatrix> z;
};

ModelMatrices load_models(const RunConfig& cfg, const StandardizationStats& stats) {
    ModelMatrices out;
    for (const auto& [name, path] : parse_models(cfg.models)) {
        auto m = load_features(path);
        check_register(m, stats.register_label, "model '" + name + "'");
        out.z.push_back(standardize(m, stats));
        out.raw.push_back(std::move(m));
        out.names.push_back(name);
    }
    return out;
}

std::pair<LogRegModel, EvalMetrics> run_detector(const RunConfig& cfg, const FeatureMatrix& human_z,
                                                 const ModelMatrices& models) {
    if (models.z.empty()) throw ConfigError("the detector needs at least one --model");
    LabeledDataset data;
    data.register_label = human_z.register_label;
    for (std::size_t r = 0; r < human_z.rows(); ++r) {
        data.rows.append_row(human_z.values.row(r));
        data.labels.push_back(0);
        data.ids.push_back(human_z.doc_ids[r]);
    }
    for (std::size_t k = 0; k < models.z.size(); ++k)
        for (std::size_t r = 0; r < models.z[k].rows(); ++r) {
            data.rows.append_row(models.z[k].values.row(r));
            data.labels.push_back(1);
            data.ids.push_back(models.names[k] + ":" + models.z[k].doc_ids[r]);
        }
    const auto [train, test] = balance_and_split(data, cfg.test_fraction, cfg.seed);
    TrainOptions opt;
    opt.l2_grid = cfg.l2_grid;
    opt.seed = cfg.seed;
    opt.threads = cfg.threads;
    auto model = train_logreg(train, opt);
    auto metrics = evaluate(model, test);
    return {std::move(model), metrics};
}

double mean_lexical(const std::vector<TaggedDocument>& docs) {
    if (docs.empty()) return 0.0;
    double total = 0.0;
    for (const auto& d : docs) total += static_cast<double>(count_lexical_tokens(d));
    return total / static_cast<double>(docs.size());
}

}  // namespace

int cmd_extract(const RunConfig& cfg, std::ostream& log) {
    if (cfg.inputs.empty()) throw ConfigError("extract needs at least one input corpus");
    for (const auto& p : cfg.inputs) require_file(p, "input corpus");
    std::vector<TaggedDocument> docs;
    for (const auto& p : cfg.inputs) {
        if (p.extension() == ".jsonl") throw ConfigError("extract reads tagged CoNLL-U input, got " + p.string());
        std::ifstream in(p, std::ios::binary);
        auto part = with_file_context(p, [&] { return parse_conllu(in); });
        for (auto& d : part) {
            if (cfg.source != "human") d.source = cfg.source;
            docs.push_back(std::move(d));
        }
    }
    std::string reg = cfg.register_label;
    if (reg.empty() && !docs.empty()) reg = docs.front().register_label;
    auto corpus = assemble_corpus(std::move(docs), reg);

    auto filtered = punctuation_ratio_filter(std::move(corpus.documents), cfg.punct_threshold);
    std::size_t truncated = 0;
    if (cfg.truncate) {
        const TruncationLimits limits{cfg.soft_limit, cfg.hard_limit};
        for (auto& d : filtered.kept) {
            auto tr = truncate_to_limit(d, limits);
            truncated += tr.truncated;
            d = std::move(tr.document);
        }
    }
    corpus.documents = std::move(filtered.kept);
    const auto m = extract_matrix(corpus, cfg.source, FeatureInventory::standard(), cfg.threads);

    const std::string stem = cfg.source + "_features";
    write_file_atomic(cfg.out_dir / (stem + ".csv"), render([&](std::ostream& os) { write_feature_csv(os, m); }));
    write_file_atomic(cfg.out_dir / (stem + ".jsonl"), render([&](std::ostream& os) { write_feature_jsonl(os, m); }));
    write_file_atomic(cfg.out_dir / (cfg.source + "_exclusions.jsonl"), exclusions_to_jsonl(filtered.excluded));
    write_resolved(cfg, "extract");
    log << "extract: register " << reg << ", " << m.rows() << " documents kept, " << filtered.excluded.size()
        << " excluded, " << truncated << " truncated, mean lexical tokens "
        << format_double(std::round(mean_lexical(corpus.documents) * 100.0) / 100.0) << "\n";
    return 0;
}

int cmd_baseline(const RunConfig& cfg, std::ostream& log) {
    const auto human = load_features(cfg.human);
    check_register(human, cfg.register_label, "human matrix");
    for (auto n : cfg.sweep)
        if (2 * n > human.rows())
            throw Error("subsample size n=" + std::to_string(n) + " needs 2n=" + std::to_string(2 * n) +
                        " human documents; the corpus has " + std::to_string(human.rows()));
    const auto stats = stats_for(cfg, &human);
    const auto z = standardize(human, stats);
    const auto kernel = kernel_for(cfg, &z);

    std::vector<ResultRow> rows;
    for (auto n : cfg.sweep) {
        const auto ci = human_human_ci(z.values, kernel, resample_options(cfg, n));
        rows.push_back({"human-human", stats.register_label, ci.ci.mean, ci.ci.low, ci.ci.high, n, cfg.draws,
                        kernel.bandwidth, cfg.seed});
        log << "baseline: n=" << n << " mean " << format_double(ci.ci.mean) << " CI [" << format_double(ci.ci.low)
            << ", " << format_double(ci.ci.high) << "]\n";
    }
    write_file_atomic(cfg.out_dir / "stats.json", stats_to_json(stats));
    write_file_atomic(cfg.out_dir / "kernel.json", kernel_to_json(kernel));
    write_file_atomic(cfg.out_dir / "baseline_ci.csv", render([&](std::ostream& os) { write_results_csv(os, rows); }));
    write_resolved(cfg, "baseline");
    for (auto j : stats.zero_sd_features())
        log << "warning: feature " << FeatureInventory::standard()[j].id << " has sd 0 and is mapped to 0\n";
    log << "baseline: bandwidth " << format_double(kernel.bandwidth) << " fitted on " << kernel.fitted_on << "\n";
    return 0;
}

int cmd_subsample(const RunConfig& cfg, std::ostream& log) {
    if (cfg.inputs.size() != 1) throw ConfigError("subsample needs exactly one input corpus (for metadata)");
    const auto corpus = load_corpus_file(cfg.inputs.front(), cfg.register_label);
    const auto human = load_features(cfg.human);
    check_register(human, corpus.register_label, "human matrix");
    const auto stats = stats_for(cfg, &human);
    const auto z = standardize(human, stats);
    const auto dims = dimension_scores(z);

    SubsampleSpec spec;
    spec.n = cfg.n;
    spec.candidate_draws = cfg.candidate_draws;
    spec.exclusion_quantile = cfg.exclusion_quantile;
    spec.seed = cfg.seed;
    spec.threads = cfg.threads;
    const auto split = exclusion_filter(corpus, spec.exclusion_quantile);
    auto eval = representative_subsample(dims, split.eligible, spec);
    eval.excluded_ids = split.excluded;

    std::string fewshot_json;
    if (cfg.fewshot_n > 0) {
        auto fs_spec = spec;
        fs_spec.n = cfg.fewshot_n;
        fs_spec.seed = stream_seed(cfg.seed, 1);
        auto pool = fewshot_pool(dims, split.eligible, eval.selected_ids, fs_spec);
        pool.excluded_ids = split.excluded;
        fewshot_json = selection_manifest_json(pool, fs_spec);
        log << "subsample: few-shot pool of " << pool.selected_ids.size() << ", aggregate W1 "
            << format_double(pool.aggregate_w1) << "\n";
    }

    const auto sample = select_ids(human, eval.selected_ids);
    double abs_d = 0.0;
    std::size_t defined = 0;
    for (std::size_t j = 0; j < human.values.cols(); ++j)
        if (const auto d = cohens_d(sample.values.column(j), human.values.column(j))) {
            abs_d += std::abs(*d);
            ++defined;
        }

    write_file_atomic(cfg.out_dir / "eval_selection.json", selection_manifest_json(eval, spec));
    if (!fewshot_json.empty()) write_file_atomic(cfg.out_dir / "fewshot_selection.json", fewshot_json);
    write_file_atomic(cfg.out_dir / "human_sample_features.csv",
                      render([&](std::ostream& os) { write_feature_csv(os, sample); }));
    write_resolved(cfg, "subsample");
    log << "subsample: " << split.excluded.size() << " excluded by metadata length, selected "
        << eval.selected_ids.size() << " (draw " << eval.draw_index << "), aggregate W1 "
        << format_double(eval.aggregate_w1) << ", mean |d| "
        << format_double(defined ? abs_d / static_cast<double>(defined) : 0.0) << "\n";
    return 0;
}

int cmd_generate(const RunConfig& cfg, std::ostream& log) {
    if (cfg.inputs.size() != 1) throw ConfigError("generate needs exactly one human evaluation corpus");
    if (cfg.endpoint.empty()) throw ConfigError("--endpoint is required");
    auto human = load_corpus_file(cfg.inputs.front(), cfg.register_label);
    if (!cfg.selection.empty()) human = select_docs(human, load_selection(cfg.selection));
    Corpus pool;
    pool.register_label = human.register_label;
    if (!cfg.pool.empty()) {
        pool = load_corpus_file(cfg.pool, human.register_label);
        if (!cfg.pool_selection.empty()) pool = select_docs(pool, load_selection(cfg.pool_selection));
    }
    if (cfg.shots > 0 && pool.size() == 0) throw ConfigError("few-shot generation needs --pool");

    const auto tmpl = cfg.template_path.empty() ? find_template(human.register_label, cfg.variant)
                                                : template_from_json(read_file(cfg.template_path));
    GenerationJob job;
    job.model_id = cfg.model_id;
    job.endpoint = cfg.endpoint;
    job.shots = cfg.shots;
    job.seed = cfg.seed;
    job.max_new_tokens = cfg.max_new_tokens;
    job.api_key_env = cfg.api_key_env;
    job.prefix_in_user = cfg.prefix_in_user;
    job.concurrency = cfg.concurrency;
    job.max_retries = cfg.max_retries;
    job.limits = {cfg.soft_limit, cfg.hard_limit};
    const char* key = cfg.api_key_env.empty() ? nullptr : std::getenv(cfg.api_key_env.c_str());
    HttpChatClient client(cfg.endpoint, key ? key : "");

    write_resolved(cfg, "generate");
    const auto records = generate_corpus(human, tmpl, job, pool, client, GenerationPaths{cfg.out_dir});
    const auto empty = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.empty; });
    const auto shorter =
        std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.empty && r.below_soft_limit; });
    log << "generate: " << records.size() << " records for " << cfg.model_id << ", " << empty << " empty, " << shorter
        << " below " << cfg.soft_limit << " lexical tokens\n";
    return 0;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
    if (cfg.stats_path.empty() || cfg.kernel_path.empty())
        throw ConfigError("evaluate needs the baseline artifacts: --stats and --kernel");
    if (cfg.models.empty()) throw ConfigError("evaluate needs at least one --model");
    const auto stats = stats_for(cfg, nullptr);
    const auto kernel = kernel_for(cfg, nullptr);
    const auto human = load_features(cfg.human);
    check_register(human, stats.register_label, "human matrix");
    FeatureMatrix sample;
    if (!cfg.human_sample.empty())
        sample = load_features(cfg.human_sample);
    else if (!cfg.selection.empty())
        sample = select_ids(human, load_selection(cfg.selection));
    else
        throw ConfigError("evaluate needs --human-sample or --selection");
    const auto full_z = standardize(human, stats);
    const auto sample_z = standardize(sample, stats);
    const auto models = load_models(cfg, stats);
    for (std::size_t k = 0; k < models.z.size(); ++k)
        if (models.z[k].rows() < cfg.n)
            throw Error("model '" + models.names[k] + "' has " + std::to_string(models.z[k].rows()) +
                        " documents, fewer than n=" + std::to_string(cfg.n));

    const auto opt = resample_options(cfg, cfg.n);
    const auto ref = human_human_ci(full_z.values, kernel, opt);
    std::vector<ResultRow> rows;
    for (std::size_t k = 0; k < models.z.size(); ++k) {
        const auto observed = mmd_squared(models.z[k], sample_z, kernel);
        const auto ci = coupled_ci(full_z.values, models.z[k].values, kernel, opt);
        rows.push_back({models.names[k], stats.register_label, observed.value, ci.ci.low, ci.ci.high, cfg.n,
                        cfg.draws, kernel.bandwidth, cfg.seed});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.mmd2 < b.mmd2; });
    rows.insert(rows.begin(), ResultRow{"human-human", stats.register_label, ref.ci.mean, ref.ci.low, ref.ci.high,
                                        cfg.n, cfg.draws, kernel.bandwidth, cfg.seed});
    write_file_atomic(cfg.out_dir / "ranking.csv", render([&](std::ostream& os) { write_results_csv(os, rows); }));
    write_resolved(cfg, "evaluate");
    for (const auto& r : rows)
        log << "evaluate: " << r.pair << " " << format_double(r.mmd2) << " [" << format_double(r.ci_low) << ", "
            << format_double(r.ci_high) << "]" << (r.pair != "human-human" && r.ci_low > ref.ci.high ? " *" : "")
            << "\n";
    return 0;
}

int cmd_diagnostics(const RunConfig& cfg, std::ostream& log) {
    const auto human = load_features(cfg.human);
    const auto stats = stats_for(cfg, &human);
    check_register(human, stats.register_label, "human matrix");
    const auto full_z = standardize(human, stats);
    const auto kernel = kernel_for(cfg, &full_z);
    const auto models = load_models(cfg, stats);
    const FeatureMatrix reference = cfg.human_sample.empty() ? human : load_features(cfg.human_sample);
    const auto reference_z = standardize(reference, stats);

    const std::string dims = render([&](std::ostream& os) {
        write_dimension_scores_long(os, "human", dimension_scores(full_z));
        for (std::size_t k = 0; k < models.z.size(); ++k)
            write_dimension_scores_long(os, models.names[k], dimension_scores(models.z[k]), false);
    });

    std::vector<std::pair<std::string, std::string>> diffs;
    for (std::size_t k = 0; k < models.raw.size(); ++k)
        diffs.emplace_back("feature_diff_" + models.names[k] + ".csv", render([&](std::ostream& os) {
                               write_feature_diff_csv(os, feature_diff_report(reference, models.raw[k], stats));
                           }));

    std::vector<std::pair<std::string, FeatureMatrix>> named{{"human", reference_z}};
    for (std::size_t k = 0; k < models.z.size(); ++k) named.emplace_back(models.names[k], models.z[k]);
    const auto cross = mmd_cross_matrix(named, kernel, cfg.threads);
    const std::string cross_csv = render([&](std::ostream& os) {
        os << "a,b,mmd2,m,n,bandwidth\n";
        for (std::size_t i = 0; i < cross.names.size(); ++i)
            for (std::size_t j = 0; j < cross.names.size(); ++j) {
                const auto& c = cross.cells[i][j];
                os << detail::csv_field(cross.names[i]) << ',' << detail::csv_field(cross.names[j]) << ','
                   << format_double(c.value) << ',' << c.m << ',' << c.n << ',' << format_double(kernel.bandwidth)
                   << '\n';
            }
    });

    const auto variance_ci =
        trace_dispersion_ci(full_z.values, resample_options(cfg, std::min(cfg.n, full_z.rows())));
    const std::string variance = render([&](std::ostream& os) {
        os << "source,trace_dispersion,ci_low,ci_high,n,B\n";
        os << "human," << format_double(trace_dispersion(full_z.values)) << ',' << format_double(variance_ci.ci.low)
           << ',' << format_double(variance_ci.ci.high) << ',' << variance_ci.ci.subsample_size << ',' << cfg.draws
           << '\n';
        for (std::size_t k = 0; k < models.z.size(); ++k)
            os << detail::csv_field(models.names[k]) << ',' << format_double(trace_dispersion(models.z[k].values))
               << ",,," << models.z[k].rows() << ",\n";
    });

    std::string metrics;
    if (!models.z.empty()) {
        const auto [model, m] = run_detector(cfg, full_z, models);
        metrics = render([&](std::ostream& os) { write_metrics_csv(os, {{stats.register_label, m}}); });
        log << "diagnostics: detector accuracy " << format_double(m.accuracy) << ", ROC AUC "
            << format_double(m.roc_auc) << "\n";
    }

    write_file_atomic(cfg.out_dir / "dimension_scores.csv", dims);
    for (const auto& [name, text] : diffs) write_file_atomic(cfg.out_dir / name, text);
    write_file_atomic(cfg.out_dir / "cross_matrix.csv", cross_csv);
    write_file_atomic(cfg.out_dir / "variance.csv", variance);
    if (!metrics.empty()) write_file_atomic(cfg.out_dir / "detector_metrics.csv", metrics);
    write_resolved(cfg, "diagnostics");
    log << "diagnostics: " << models.z.size() << " model corpora, reports in " << cfg.out_dir.string() << "\n";
    return 0;
}

int cmd_detector(const RunConfig& cfg, std::ostream& log) {
    const auto human = load_features(cfg.human);
    const auto stats = stats_for(cfg, &human);
    check_register(human, stats.register_label, "human matrix");
    const auto full_z = standardize(human, stats);
    const auto models = load_models(cfg, stats);
    const auto [model, m] = run_detector(cfg, full_z, models);
    write_file_atomic(cfg.out_dir / "detector_model.json", model_to_json(model));
    write_file_atomic(cfg.out_dir / "detector_metrics.csv",
                      render([&](std::ostream& os) { write_metrics_csv(os, {{stats.register_label, m}}); }));
    write_resolved(cfg, "detector");
    log << "detector: l2 " << format_double(model.l2) << ", accuracy " << format_double(m.accuracy) << ", ROC AUC "
        << (m.auc_defined ? format_double(m.roc_auc) : std::string("undefined")) << "\n";
    return 0;
}

}  // namespace biberdist
