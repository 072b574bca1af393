#include "biberdist/detector.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "biberdist/error.hpp"
#include "biberdist/parallel.hpp"
#include "biberdist/random.hpp"
#include "io_util.hpp"
#include "json.hpp"

namespace biberdist {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> as_eigen(const Matrix& m) { return {m.data().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())}; }

// log(1 + exp(z)) without overflow
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

LabeledDataset subset(const LabeledDataset& d, const std::vector<std::size_t>& idx) {
    LabeledDataset out;
    out.register_label = d.register_label;
    out.rows = d.rows.select_rows(idx);
    for (auto i : idx) {
        out.labels.push_back(d.labels[i]);
        if (!d.ids.empty()) out.ids.push_back(d.ids[i]);
    }
    return out;
}

void check_dataset(const LabeledDataset& d) {
    if (d.rows.rows() != d.labels.size()) throw Error("dataset rows and labels differ in length");
    for (int y : d.labels)
        if (y != 0 && y != 1) throw Error("labels must be 0 (human) or 1 (ai)");
}

}  // namespace

void LabeledDataset::append(const LabeledDataset& other) {
    for (std::size_t r = 0; r < other.rows.rows(); ++r) rows.append_row(other.rows.row(r));
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    ids.insert(ids.end(), other.ids.begin(), other.ids.end());
}

LabeledDataset make_labeled(const FeatureMatrix& human, const FeatureMatrix& model, std::string register_label) {
    if (human.frame != model.frame) throw Error("frame mismatch between human and model matrices");
    LabeledDataset d;
    d.register_label = std::move(register_label);
    for (std::size_t r = 0; r < human.rows(); ++r) {
        d.rows.append_row(human.values.row(r));
        d.labels.push_back(0);
        d.ids.push_back(human.doc_ids[r]);
    }
    for (std::size_t r = 0; r < model.rows(); ++r) {
        d.rows.append_row(model.values.row(r));
        d.labels.push_back(1);
        d.ids.push_back(model.doc_ids[r]);
    }
    return d;
}

double LogRegModel::predict_proba(std::span<const double> x) const {
    if (x.size() != weights.size()) throw Error("feature width does not match the model");
    double z = bias;
    for (std::size_t j = 0; j < x.size(); ++j) z += weights[j] * x[j];
    return sigmoid(z);
}

std::pair<LabeledDataset, LabeledDataset> balance_and_split(const LabeledDataset& data, double test_fraction,
                                                            std::uint64_t seed) {
    check_dataset(data);
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw Error("test fraction must lie in (0, 1)");
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < data.size(); ++i) by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);
    if (by_class[0].empty() || by_class[1].empty()) throw Error("both classes must be non-empty");
    const std::size_t keep = std::min(by_class[0].size(), by_class[1].size());
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(keep)));

    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t c = 0; c < 2; ++c) {
        Rng rng(stream_seed(seed, c));
        // a shuffled prefix of length `keep`: downsampling and split in one permutation
        const auto order = sample_without_replacement(by_class[c], keep, rng);
        test_idx.insert(test_idx.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
        train_idx.insert(train_idx.end(), order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    return {subset(data, train_idx), subset(data, test_idx)};
}

double logreg_objective(const Matrix& x, const std::vector<int>& y, const std::vector<double>& params, double l2,
                        std::vector<double>* grad) {
    const std::size_t n = x.rows(), d = x.cols();
    if (params.size() != d + 1) throw Error("parameter vector must hold weights and bias");
    if (n == 0) throw Error("objective of an empty dataset");
    double loss = 0.0;
    if (grad) grad->assign(d + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = x.row(i);
        double z = params[d];
        for (std::size_t j = 0; j < d; ++j) z += params[j] * row[j];
        loss += softplus(z) - (y[i] ? z : 0.0);
        if (grad) {
            const double r = sigmoid(z) - y[i];
            for (std::size_t j = 0; j < d; ++j) (*grad)[j] += r * row[j];
            (*grad)[d] += r;
        }
    }
    const double inv = 1.0 / static_cast<double>(n);
    double penalty = 0.0;
    for (std::size_t j = 0; j < d; ++j) penalty += params[j] * params[j];
    if (grad) {
        for (auto& g : *grad) g *= inv;
        for (std::size_t j = 0; j < d; ++j) (*grad)[j] += l2 * params[j];
    }
    return loss * inv + 0.5 * l2 * penalty;
}

LogRegModel fit_logreg(const Matrix& x, const std::vector<int>& y, double l2, double tolerance,
                       std::size_t max_iterations) {
    if (x.rows() != y.size() || x.rows() == 0) throw Error("fit_logreg needs matching, non-empty rows and labels");
    if (l2 < 0.0) throw Error("l2 strength must be non-negative");
    const auto n = static_cast<Eigen::Index>(x.rows());
    const auto d = static_cast<Eigen::Index>(x.cols());
    // design matrix with a trailing intercept column
    Eigen::MatrixXd a(n, d + 1);
    a.leftCols(d) = as_eigen(x);
    a.col(d).setOnes();

    std::vector<double> params(static_cast<std::size_t>(d + 1), 0.0), grad;
    double loss = logreg_objective(x, y, params, l2, &grad);
    LogRegModel model;
    model.l2 = l2;
    for (std::size_t it = 0; it < max_iterations; ++it) {
        const Eigen::Map<const Eigen::VectorXd> g(grad.data(), d + 1);
        if (g.norm() <= tolerance) {
            model.converged = true;
            break;
        }
        const Eigen::Map<const Eigen::VectorXd> p(params.data(), d + 1);
        const Eigen::VectorXd prob = (a * p).unaryExpr([](double z) { return sigmoid(z); });
        const Eigen::VectorXd w = prob.array() * (1.0 - prob.array());
        Eigen::MatrixXd h = a.transpose() * w.asDiagonal() * a / static_cast<double>(n);
        h.diagonal().head(d).array() += l2;
        h.diagonal().array() += 1e-10;
        const Eigen::VectorXd step = h.ldlt().solve(-g);

        // backtracking until the Armijo condition holds
        double t = 1.0;
        const double slope = g.dot(step);
        std::vector<double> trial(params.size()), trial_grad;
        double trial_loss = loss;
        bool accepted = false;
        for (int k = 0; k < 50; ++k) {
            for (std::size_t j = 0; j < params.size(); ++j) trial[j] = params[j] + t * step[static_cast<Eigen::Index>(j)];
            trial_loss = logreg_objective(x, y, trial, l2, &trial_grad);
            if (trial_loss <= loss + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        model.iterations = it + 1;
        if (!accepted) break;
        params = trial;
        grad = trial_grad;
        loss = trial_loss;
    }
    if (!model.converged) {
        const Eigen::Map<const Eigen::VectorXd> g(grad.data(), d + 1);
        model.converged = g.norm() <= tolerance;
    }
    model.weights.assign(params.begin(), params.end() - 1);
    model.bias = params.back();
    return model;
}

std::optional<double> roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw Error("scores and labels differ in length");
    std::vector<std::size_t> order = iota_indices(scores.size());
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
    // average ranks over tie groups
    double rank_sum_pos = 0.0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) {
                rank_sum_pos += avg_rank;
                ++pos;
            }
        i = j;
    }
    const std::size_t neg = scores.size() - pos;
    if (pos == 0 || neg == 0) return std::nullopt;
    const double p = static_cast<double>(pos), q = static_cast<double>(neg);
    return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * q);
}

LogRegModel train_logreg(const LabeledDataset& train, const TrainOptions& opt) {
    check_dataset(train);
    if (opt.l2_grid.empty()) throw Error("l2 grid is empty");
    if (opt.folds < 2) throw Error("cross-validation needs at least 2 folds");
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < train.size(); ++i) by_class[static_cast<std::size_t>(train.labels[i])].push_back(i);
    if (by_class[0].size() < opt.folds || by_class[1].size() < opt.folds)
        throw Error("each class needs at least " + std::to_string(opt.folds) + " rows for cross-validation");

    std::vector<std::size_t> fold_of(train.size());
    for (std::size_t c = 0; c < 2; ++c) {
        Rng rng(stream_seed(opt.seed, c));
        const auto order = sample_without_replacement(by_class[c], by_class[c].size(), rng);
        for (std::size_t k = 0; k < order.size(); ++k) fold_of[order[k]] = k % opt.folds;
    }

    const std::size_t tasks = opt.l2_grid.size() * opt.folds;
    std::vector<double> fold_auc(tasks, 0.5);
    parallel_for(tasks, opt.threads, [&](std::size_t t) {
        const double l2 = opt.l2_grid[t / opt.folds];
        const std::size_t fold = t % opt.folds;
        std::vector<std::size_t> fit_idx, hold_idx;
        for (std::size_t i = 0; i < train.size(); ++i) (fold_of[i] == fold ? hold_idx : fit_idx).push_back(i);
        const auto fit = subset(train, fit_idx);
        const auto hold = subset(train, hold_idx);
        const auto m = fit_logreg(fit.rows, fit.labels, l2, opt.tolerance, opt.max_iterations);
        std::vector<double> scores;
        for (std::size_t r = 0; r < hold.rows.rows(); ++r) scores.push_back(m.predict_proba(hold.rows.row(r)));
        fold_auc[t] = roc_auc(scores, hold.labels).value_or(0.5);
    });

    std::vector<std::pair<double, double>> cv;
    std::size_t best = 0;
    for (std::size_t g = 0; g < opt.l2_grid.size(); ++g) {
        const double mean =
            std::accumulate(fold_auc.begin() + static_cast<std::ptrdiff_t>(g * opt.folds),
                            fold_auc.begin() + static_cast<std::ptrdiff_t>((g + 1) * opt.folds), 0.0) /
            static_cast<double>(opt.folds);
        cv.emplace_back(opt.l2_grid[g], mean);
        if (mean > cv[best].second) best = g;
    }
    auto model = fit_logreg(train.rows, train.labels, opt.l2_grid[best], opt.tolerance, opt.max_iterations);
    model.cv_auc = std::move(cv);
    return model;
}

EvalMetrics evaluate(const LogRegModel& model, const LabeledDataset& test) {
    check_dataset(test);
    if (test.size() == 0) throw Error("evaluation set is empty");
    std::vector<double> scores;
    std::size_t correct = 0;
    for (std::size_t r = 0; r < test.size(); ++r) {
        const double p = model.predict_proba(test.rows.row(r));
        scores.push_back(p);
        if ((p >= 0.5 ? 1 : 0) == test.labels[r]) ++correct;
    }
    EvalMetrics m;
    m.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    const auto auc = roc_auc(scores, test.labels);
    m.auc_defined = auc.has_value();
    m.roc_auc = auc.value_or(0.5);
    m.split = test.register_label + " test n=" + std::to_string(test.size());
    return m;
}

std::string model_to_json(const LogRegModel& model) {
    nlohmann::ordered_json j;
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["l2"] = model.l2;
    j["inventory_version"] = model.inventory_version;
    j["converged"] = model.converged;
    j["solver"] = "newton-armijo";
    nlohmann::ordered_json cv = nlohmann::ordered_json::array();
    for (const auto& [l2, auc] : model.cv_auc) cv.push_back({{"l2", l2}, {"mean_auc", auc}});
    j["cv"] = cv;
    return j.dump(2) + "\n";
}

LogRegModel model_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        LogRegModel m;
        m.weights = j.at("weights").get<std::vector<double>>();
        m.bias = j.at("bias").get<double>();
        m.l2 = j.at("l2").get<double>();
        m.inventory_version = j.at("inventory_version").get<std::string>();
        m.converged = j.value("converged", true);
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("model JSON: ") + e.what());
    }
}

void write_metrics_csv(std::ostream& out, const std::vector<std::pair<std::string, EvalMetrics>>& rows) {
    out << "register,accuracy,roc_auc\n";
    for (const auto& [reg, m] : rows)
        out << detail::csv_field(reg) << ',' << detail::format_double(m.accuracy) << ','
            << (m.auc_defined ? detail::format_double(m.roc_auc) : std::string("undefined")) << '\n';
}

}  // namespace biberdist
