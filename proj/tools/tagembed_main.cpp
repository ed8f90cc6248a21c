// tagembed CLI: composable pipeline stages with explicit file handoffs.
// Subcommands: gen-synthetic, ingest-check, pretrain, embed, eval.
// Every command writes a run manifest (also on failure) and exits nonzero
// on error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "tagembed/checkpoint.hpp"
#include "tagembed/config.hpp"
#include "tagembed/eval.hpp"
#include "tagembed/manifest.hpp"
#include "tagembed/synthetic.hpp"

namespace fs = std::filesystem;
using namespace tagembed;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    bool deterministic = true;
};

RunConfig resolve_config(const GlobalOptions& g) {
    RunConfig cfg;
    if (!g.config_path.empty()) cfg = load_run_config(g.config_path);
    if (g.seed) {
        cfg.train.seed = *g.seed;
        cfg.data.synthetic.seed = *g.seed;
    }
    cfg.train.deterministic = g.deterministic;
    return cfg;
}

std::string out_path(const GlobalOptions& g, const std::string& name) {
    return (fs::path(g.out_dir) / name).string();
}

void write_manifest(const GlobalOptions& g, RunManifest& manifest) {
    const std::string name = "manifest_" + manifest.command + ".json";
    try {
        manifest.write(out_path(g, name));
    } catch (const std::exception&) {
        manifest.write(name);  // out dir unusable: fall back to cwd
    }
}

// Runs a command body with timing and manifest capture.
int run_command(const GlobalOptions& g, const std::string& name, const RunConfig& cfg,
                const std::function<void(RunManifest&)>& body) {
    RunManifest manifest;
    manifest.command = name;
    manifest.resolved_config = serialize_run_config(cfg);
    manifest.seed = cfg.train.seed;
    const auto start = std::chrono::steady_clock::now();
    int exit_code = 0;
    try {
        std::error_code ec;
        fs::create_directories(g.out_dir, ec);
        body(manifest);
    } catch (const std::exception& e) {
        manifest.error = e.what();
        std::cerr << "error: " << e.what() << "\n";
        exit_code = 1;
    }
    manifest.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
        write_manifest(g, manifest);
    } catch (const std::exception& e) {
        std::cerr << "error: cannot write manifest: " << e.what() << "\n";
        exit_code = 1;
    }
    return exit_code;
}

TagGraph load_dataset(const RunConfig& cfg, RunManifest& manifest) {
    if (cfg.data.nodes.empty() || cfg.data.edges.empty()) {
        throw std::runtime_error("config is missing data.nodes / data.edges");
    }
    manifest.add_input(cfg.data.nodes);
    manifest.add_input(cfg.data.edges);
    return load_tag(cfg.data.nodes, cfg.data.edges);
}

int cmd_gen_synthetic(const GlobalOptions& g, const RunConfig& cfg) {
    return run_command(g, "gen-synthetic", cfg, [&](RunManifest& manifest) {
        manifest.seed = cfg.data.synthetic.seed;
        const TagGraph graph = generate_synthetic_tag(cfg.data.synthetic);
        const std::string nodes = out_path(g, "nodes.jsonl");
        const std::string edges = out_path(g, "edges.txt");
        save_tag(graph, nodes, edges);
        manifest.add_output(nodes);
        manifest.add_output(edges);
        std::cout << "generated " << graph.num_nodes() << " nodes, " << graph.num_edges()
                  << " undirected edges\n";
    });
}

int cmd_ingest_check(const GlobalOptions& g, const RunConfig& cfg) {
    return run_command(g, "ingest-check", cfg, [&](RunManifest& manifest) {
        const TagGraph graph = load_dataset(cfg, manifest);
        std::size_t isolated = 0, max_degree = 0;
        for (NodeId i = 0; i < graph.num_nodes(); ++i) {
            const auto deg = graph.degree(i);
            isolated += deg == 0 ? 1 : 0;
            max_degree = std::max(max_degree, deg);
        }
        std::cout << "nodes: " << graph.num_nodes() << "\n"
                  << "undirected edges: " << graph.num_edges() << "\n"
                  << "isolated nodes: " << isolated << "\n"
                  << "max degree: " << max_degree << "\n"
                  << "labels: " << (graph.has_labels() ? std::to_string(graph.label_set().size()) + " classes"
                                                       : std::string("absent"))
                  << "\n";
        if (graph.has_splits()) {
            std::cout << "splits: train=" << graph.split_members(Split::train).size()
                      << " valid=" << graph.split_members(Split::valid).size()
                      << " test=" << graph.split_members(Split::test).size() << "\n";
        } else {
            std::cout << "splits: absent\n";
        }
    });
}

int cmd_pretrain(const GlobalOptions& g, const RunConfig& cfg) {
    return run_command(g, "pretrain", cfg, [&](RunManifest& manifest) {
        cfg.loss.validate();  // refuses to start with all terms disabled
        const TagGraph graph = load_dataset(cfg, manifest);

        const Vocab vocab = build_vocab(graph.documents(), cfg.data.min_frequency);
        TrainState state = make_train_state(cfg.plm, cfg.gnn, cfg.loss, cfg.train, vocab);

        const TextEncoder initial_encoder = state.text_encoder();
        const std::uint64_t feature_hash = initial_encoder.content_hash();
        const std::string cache_path = out_path(g, "e0.cache");
        EmbeddingMatrix e0;
        bool cache_hit = false;
        if (fs::exists(cache_path)) {
            const EmbeddingCache cache = read_embedding_cache(cache_path);
            if (cache.emb.rows() != graph.num_nodes()) {
                throw std::runtime_error("cache/graph node-count mismatch: " + cache_path);
            }
            if (cache.config_hash == feature_hash) {
                e0 = cache.emb;
                cache_hit = true;
                std::cout << "reusing cached initial features: " << cache_path << "\n";
            }
        }
        if (!cache_hit) {
            std::cout << "computing initial features for " << graph.num_nodes() << " nodes\n";
            e0 = compute_initial_features(graph, initial_encoder);
            write_embedding_cache(cache_path, e0, feature_hash);
        }
        manifest.add_output(cache_path);

        const std::string checkpoint_path = out_path(g, "checkpoint.bin");
        std::vector<StepLogRow> log_rows;
        PretrainHooks hooks;
        hooks.on_step = [&](const StepLogRow& row) { log_rows.push_back(row); };
        hooks.on_warning = [](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; };
        hooks.on_epoch_end = [&](const TrainState& s) {
            if (cfg.train.checkpoint_every_epochs > 0 &&
                s.epoch % cfg.train.checkpoint_every_epochs == 0) {
                save_checkpoint(checkpoint_path, s);
            }
        };
        pretrain(state, graph, e0, hooks);
        save_checkpoint(checkpoint_path, state);
        manifest.add_output(checkpoint_path);

        const std::string log_path = out_path(g, "train_log.tsv");
        write_train_log(log_path, log_rows);
        manifest.add_output(log_path);

        const EmbeddingMatrix exported = export_embeddings(state, graph);
        const std::string emb_path = out_path(g, "embeddings.bin");
        write_embedding_cache(emb_path, exported, state.text_encoder().content_hash());
        manifest.add_output(emb_path);

        std::cout << "pretraining complete: " << log_rows.size() << " steps, final loss "
                  << (log_rows.empty() ? 0.0 : log_rows.back().total) << "\n";
    });
}

int cmd_embed(const GlobalOptions& g, const RunConfig& cfg, const std::string& checkpoint_path) {
    return run_command(g, "embed", cfg, [&](RunManifest& manifest) {
        manifest.add_input(checkpoint_path);
        const TrainState state = load_checkpoint(checkpoint_path);
        const TagGraph graph = load_dataset(cfg, manifest);
        const EmbeddingMatrix exported = export_embeddings(state, graph);
        const std::string emb_path = out_path(g, "embeddings.bin");
        write_embedding_cache(emb_path, exported, state.text_encoder().content_hash());
        manifest.add_output(emb_path);
        std::cout << "exported " << exported.rows() << " x " << exported.dim()
                  << " embeddings to " << emb_path << "\n";
    });
}

int cmd_eval(const GlobalOptions& g, const RunConfig& cfg, const std::string& embeddings_path,
             const std::string& task) {
    return run_command(g, "eval", cfg, [&](RunManifest& manifest) {
        manifest.add_input(embeddings_path);
        const TagGraph graph = load_dataset(cfg, manifest);
        const EmbeddingCache cache = read_embedding_cache(embeddings_path);
        if (cache.emb.rows() != graph.num_nodes()) {
            throw std::runtime_error("dataset/embedding mismatch: embeddings have " +
                                     std::to_string(cache.emb.rows()) + " rows, dataset has " +
                                     std::to_string(graph.num_nodes()) + " nodes");
        }
        cache.emb.check_finite();
        const Eigen::MatrixXd& emb = cache.emb.values;
        const std::uint64_t seed = cfg.train.seed;

        EvalReport report;
        if (task == "fewshot") {
            report = eval_fewshot_clf(emb, graph, cfg.eval.k, cfg.eval.probe_config(),
                                      cfg.eval.repeats, seed);
        } else if (task == "full") {
            report = eval_full_clf(emb, graph, cfg.eval.probe_config(), cfg.eval.repeats, seed);
        } else if (task == "cluster") {
            report = eval_clustering(emb, graph, cfg.eval.repeats, seed,
                                     cfg.eval.cluster_pool == "test");
        } else if (task == "link") {
            if (!(graph.num_nodes() > cfg.eval.negatives_per_query)) {
                throw std::runtime_error("dataset too small for configured negatives_per_query");
            }
            report.task = "link";
            std::vector<NodeId> queries;
            const auto pool = graph.has_splits() ? graph.split_members(Split::test)
                                                 : [&] {
                                                       std::vector<NodeId> all;
                                                       for (NodeId i = 0; i < graph.num_nodes(); ++i)
                                                           all.push_back(i);
                                                       return all;
                                                   }();
            for (const NodeId id : pool) {
                if (graph.degree(id) >= 1) queries.push_back(id);
            }
            if (queries.empty()) throw std::runtime_error("no link-eval queries with degree >= 1");
            for (int r = 0; r < cfg.eval.repeats; ++r) {
                auto rng = rng::make(rng::derive(seed, 601, static_cast<std::uint64_t>(r)));
                const LinkEvalSet set =
                    make_link_eval_set(graph, queries, cfg.eval.negatives_per_query, rng);
                report.metrics["mrr"].push_back(mean_reciprocal_rank(emb, set));
            }
            report.config_snapshot = "{\"task\":\"link\",\"negatives_per_query\":" +
                                     std::to_string(cfg.eval.negatives_per_query) +
                                     ",\"queries\":" + std::to_string(queries.size()) + "}";
        } else {
            throw std::runtime_error("unknown eval task: " + task);
        }

        const std::string table_path = out_path(g, "report_" + task + ".tsv");
        const std::string summary_path = out_path(g, "report_" + task + ".json");
        write_report_table(table_path, report);
        write_report_summary(summary_path, report);
        manifest.add_output(table_path);
        manifest.add_output(summary_path);
        std::cout << format_report(report);
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-supervised text-attributed-graph embedding pipeline"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOptions g;
    app.add_option("--config", g.config_path, "run configuration file");
    app.add_option("--seed", [&g](const CLI::results_t& res) {
        try {
            std::size_t pos = 0;
            const std::uint64_t v = std::stoull(res[0], &pos);
            if (pos != res[0].size()) return false;
            g.seed = v;
            return true;
        } catch (...) {
            return false;
        }
    }, "override the configured seed");
    app.add_option("--out", g.out_dir, "output directory (default: out)");
    app.add_flag("--deterministic,!--no-deterministic", g.deterministic,
                 "deterministic execution (default: on)");

    auto* gen = app.add_subcommand("gen-synthetic", "generate a planted-partition dataset");
    auto* ingest = app.add_subcommand("ingest-check", "load and validate a dataset");
    std::string ingest_nodes, ingest_edges;
    ingest->add_option("--nodes", ingest_nodes, "nodes file (overrides config)");
    ingest->add_option("--edges", ingest_edges, "edges file (overrides config)");

    auto* pre = app.add_subcommand("pretrain", "joint encoder pretraining + export");
    bool no_gc_cl = false, no_nd_ka = false, no_nbh_ka = false;
    pre->add_flag("--no-gc-cl", no_gc_cl, "disable both single-modality contrastive terms");
    pre->add_flag("--no-nd-ka", no_nd_ka, "disable node-level alignment");
    pre->add_flag("--no-nbh-ka", no_nbh_ka, "disable neighborhood-level alignment");

    auto* emb = app.add_subcommand("embed", "export embeddings from a checkpoint");
    std::string checkpoint_path;
    emb->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();

    auto* ev = app.add_subcommand("eval", "evaluate exported embeddings");
    std::string embeddings_path, task;
    ev->add_option("--embeddings", embeddings_path, "embeddings file")->required();
    ev->add_option("--task", task, "fewshot | full | cluster | link")->required();
    int eval_k = 0;
    ev->add_option("--k", eval_k, "shots per class for task=fewshot");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = resolve_config(g);
        if (gen->parsed()) return cmd_gen_synthetic(g, cfg);
        if (ingest->parsed()) {
            if (!ingest_nodes.empty()) cfg.data.nodes = ingest_nodes;
            if (!ingest_edges.empty()) cfg.data.edges = ingest_edges;
            return cmd_ingest_check(g, cfg);
        }
        if (pre->parsed()) {
            if (no_gc_cl) {
                cfg.loss.use_gc_cl_text = false;
                cfg.loss.use_gc_cl_gnn = false;
            }
            if (no_nd_ka) cfg.loss.use_nd_ka = false;
            if (no_nbh_ka) cfg.loss.use_nbh_ka = false;
            return cmd_pretrain(g, cfg);
        }
        if (emb->parsed()) return cmd_embed(g, cfg, checkpoint_path);
        if (ev->parsed()) {
            if (eval_k > 0) cfg.eval.k = eval_k;
            return cmd_eval(g, cfg, embeddings_path, task);
        }
    } catch (const std::exception& e) {
        // Config resolution failed before a manifest scope existed.
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
