#include "tagembed/eval.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tagembed/kmeans.hpp"

namespace tagembed {

namespace {
constexpr std::uint64_t kStreamFewshotSplit = 501;
constexpr std::uint64_t kStreamProbeSeed = 502;
constexpr std::uint64_t kStreamCluster = 503;

void check_embeddings(const Eigen::MatrixXd& embeddings, const TagGraph& graph) {
    if (embeddings.rows() != graph.num_nodes()) {
        throw std::invalid_argument("embeddings row count does not match graph node count");
    }
}
}  // namespace

int EvalReport::repeats() const {
    if (metrics.empty()) return 0;
    return static_cast<int>(metrics.begin()->second.size());
}

double EvalReport::mean(const std::string& metric) const {
    const auto& v = metrics.at(metric);
    if (v.empty()) throw std::runtime_error("no values for metric " + metric);
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double EvalReport::stddev(const std::string& metric) const {
    const auto& v = metrics.at(metric);
    const double m = mean(metric);
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

std::map<std::int32_t, int> class_index_map(const TagGraph& graph) {
    std::map<std::int32_t, int> map;
    int next = 0;
    for (const std::int32_t cls : graph.label_set()) map[cls] = next++;
    return map;
}

namespace {

EvalReport eval_clf(const std::string& task, const Eigen::MatrixXd& embeddings,
                    const TagGraph& graph, int k_or_zero, const ProbeConfig& probe, int repeats,
                    std::uint64_t seed) {
    check_embeddings(embeddings, graph);
    if (!graph.has_labels() || !graph.has_splits()) {
        throw std::runtime_error(task + " evaluation requires labels and splits");
    }
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    const auto cls_index = class_index_map(graph);
    const int num_classes = static_cast<int>(cls_index.size());
    const TagGraph* graph_arg = probe.type == ProbeType::graphsage ? &graph : nullptr;

    const std::vector<NodeId> test_ids = graph.split_members(Split::test);
    if (test_ids.empty()) throw std::runtime_error("empty test split");
    std::vector<int> test_targets;
    for (const NodeId id : test_ids) test_targets.push_back(cls_index.at(graph.label(id)));

    EvalReport report;
    report.task = task;
    for (int r = 0; r < repeats; ++r) {
        std::vector<NodeId> train_ids;
        if (k_or_zero > 0) {
            auto split_rng = rng::make(rng::derive(seed, kStreamFewshotSplit,
                                                   static_cast<std::uint64_t>(r)));
            const FewShotSplit split = make_fewshot_split(graph, k_or_zero, split_rng);
            train_ids = split.labeled_ids();
        } else {
            train_ids = graph.split_members(Split::train);
            if (train_ids.empty()) throw std::runtime_error("empty train split");
        }
        std::vector<int> train_targets;
        for (const NodeId id : train_ids) train_targets.push_back(cls_index.at(graph.label(id)));

        const ProbeModel model =
            train_probe(probe, embeddings, train_ids, train_targets, num_classes, graph_arg,
                        rng::derive(seed, kStreamProbeSeed, static_cast<std::uint64_t>(r)));
        report.metrics["accuracy"].push_back(
            probe_accuracy(model, embeddings, test_ids, test_targets, graph_arg));
    }

    nlohmann::json snap;
    snap["task"] = task;
    if (k_or_zero > 0) snap["k"] = k_or_zero;
    snap["probe"] = probe.type == ProbeType::mlp ? "mlp" : "graphsage";
    snap["hidden_dim"] = probe.hidden_dim;
    snap["dropout"] = probe.dropout;
    snap["learning_rate"] = probe.learning_rate;
    snap["epochs"] = probe.epochs;
    snap["repeats"] = repeats;
    snap["seed"] = seed;
    report.config_snapshot = snap.dump();
    return report;
}

}  // namespace

EvalReport eval_fewshot_clf(const Eigen::MatrixXd& embeddings, const TagGraph& graph, int k,
                            const ProbeConfig& probe, int repeats, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("few-shot k must be >= 1");
    return eval_clf("fewshot", embeddings, graph, k, probe, repeats, seed);
}

EvalReport eval_full_clf(const Eigen::MatrixXd& embeddings, const TagGraph& graph,
                         const ProbeConfig& probe, int repeats, std::uint64_t seed) {
    return eval_clf("full", embeddings, graph, 0, probe, repeats, seed);
}

EvalReport eval_clustering(const Eigen::MatrixXd& embeddings, const TagGraph& graph, int runs,
                           std::uint64_t seed, bool test_split_only) {
    check_embeddings(embeddings, graph);
    if (!graph.has_labels()) throw std::runtime_error("clustering evaluation requires labels");
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");

    std::vector<NodeId> pool;
    if (test_split_only && graph.has_splits()) {
        pool = graph.split_members(Split::test);
    } else {
        for (NodeId i = 0; i < graph.num_nodes(); ++i) pool.push_back(i);
    }
    if (pool.empty()) throw std::runtime_error("empty clustering pool");

    const auto cls_index = class_index_map(graph);
    const int num_classes = static_cast<int>(cls_index.size());
    std::vector<int> labels;
    for (const NodeId id : pool) labels.push_back(cls_index.at(graph.label(id)));

    Eigen::MatrixXd points(static_cast<Eigen::Index>(pool.size()), embeddings.cols());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        points.row(static_cast<Eigen::Index>(i)) = embeddings.row(pool[i]);
    }

    EvalReport report;
    report.task = "cluster";
    for (int run = 0; run < runs; ++run) {
        auto run_rng = rng::make(rng::derive(seed, kStreamCluster, static_cast<std::uint64_t>(run)));
        const KMeansResult km = kmeans_pp(points, num_classes, run_rng);
        report.metrics["acc"].push_back(clustering_accuracy(km.assignments, labels));
        report.metrics["nmi"].push_back(normalized_mutual_information(km.assignments, labels));
        report.metrics["ari"].push_back(adjusted_rand_index(km.assignments, labels));
    }

    nlohmann::json snap;
    snap["task"] = "cluster";
    snap["runs"] = runs;
    snap["seed"] = seed;
    snap["num_clusters"] = num_classes;
    snap["pool"] = test_split_only && graph.has_splits() ? "test" : "all";
    report.config_snapshot = snap.dump();
    return report;
}

EvalReport eval_link_mrr(const Eigen::MatrixXd& embeddings, const LinkEvalSet& eval_set) {
    EvalReport report;
    report.task = "link";
    report.metrics["mrr"].push_back(mean_reciprocal_rank(embeddings, eval_set));
    nlohmann::json snap;
    snap["task"] = "link";
    snap["queries"] = eval_set.queries.size();
    snap["negatives_per_query"] = eval_set.negatives_per_query;
    report.config_snapshot = snap.dump();
    return report;
}

void write_report_table(const std::string& path, const EvalReport& report) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write report table: " + path);
    out << "task\tmetric\trepeat\tvalue\n";
    out.precision(17);
    for (const auto& [metric, values] : report.metrics) {
        for (std::size_t r = 0; r < values.size(); ++r) {
            out << report.task << '\t' << metric << '\t' << r << '\t' << values[r] << '\n';
        }
    }
}

void write_report_summary(const std::string& path, const EvalReport& report) {
    nlohmann::json j;
    j["task"] = report.task;
    j["config"] = nlohmann::json::parse(report.config_snapshot.empty() ? "{}"
                                                                       : report.config_snapshot);
    for (const auto& [metric, values] : report.metrics) {
        j["metrics"][metric] = {{"mean", report.mean(metric)},
                                {"std", report.stddev(metric)},
                                {"values", values}};
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write report summary: " + path);
    out << j.dump(2) << "\n";
}

std::string format_report(const EvalReport& report) {
    std::ostringstream os;
    os.precision(4);
    os << std::fixed;
    for (const auto& [metric, values] : report.metrics) {
        os << report.task << " " << metric << ": " << report.mean(metric) << " +/- "
           << report.stddev(metric) << " (" << values.size() << " repeats)\n";
    }
    return os.str();
}

}  // namespace tagembed
