#include "tagembed/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tagembed {

ProbeConfig EvalConfig::probe_config() const {
    ProbeConfig cfg = probe == "graphsage" ? ProbeConfig::graphsage_defaults()
                                           : ProbeConfig::mlp_defaults();
    if (probe != "mlp" && probe != "graphsage") {
        throw std::invalid_argument("eval.probe must be mlp or graphsage");
    }
    cfg.hidden_dim = hidden_dim;
    cfg.dropout = dropout;
    if (learning_rate > 0.0) cfg.learning_rate = learning_rate;
    if (epochs > 0) cfg.epochs = epochs;
    cfg.batch_size = batch_size;
    cfg.fanout_l1 = fanout_l1;
    cfg.fanout_l2 = fanout_l2;
    cfg.neighbor_sampling = neighbor_sampling;
    cfg.validate();
    return cfg;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

int to_int(const std::string& v, const std::string& key) {
    try {
        std::size_t pos;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::runtime_error("config: invalid integer for " + key + ": '" + v + "'");
    }
}

std::uint64_t to_u64(const std::string& v, const std::string& key) {
    try {
        std::size_t pos;
        const std::uint64_t x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::runtime_error("config: invalid unsigned integer for " + key + ": '" + v + "'");
    }
}

double to_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::runtime_error("config: invalid number for " + key + ": '" + v + "'");
    }
}

bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::runtime_error("config: invalid boolean for " + key + ": '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"data.nodes", [](RunConfig& c, const std::string&, const std::string& v) { c.data.nodes = v; }},
        {"data.edges", [](RunConfig& c, const std::string&, const std::string& v) { c.data.edges = v; }},
        {"data.min_frequency",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.data.min_frequency = to_int(v, k); }},
        {"data.num_classes",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.data.synthetic.num_classes = to_int(v, k); }},
        {"data.nodes_per_class",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.data.synthetic.nodes_per_class = to_int(v, k); }},
        {"data.p_in",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.data.synthetic.p_in = to_double(v, k); }},
        {"data.p_out",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.data.synthetic.p_out = to_double(v, k); }},
        {"data.vocab_per_class",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.data.synthetic.vocab_per_class = to_int(v, k); }},
        {"data.doc_length",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.data.synthetic.doc_length = to_int(v, k); }},
        {"data.noise_rate",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.data.synthetic.noise_rate = to_double(v, k); }},
        {"data.seed",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.data.synthetic.seed = to_u64(v, k); }},
        {"data.train_fraction",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.data.synthetic.train_fraction = to_double(v, k); }},
        {"data.valid_fraction",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.data.synthetic.valid_fraction = to_double(v, k); }},

        {"plm.hidden_dim",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.plm.hidden_dim = to_int(v, k); }},
        {"plm.num_layers",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.plm.num_layers = to_int(v, k); }},
        {"plm.num_heads",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.plm.num_heads = to_int(v, k); }},
        {"plm.max_sequence_length",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.plm.max_sequence_length = to_int(v, k); }},
        {"plm.dropout_rate",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.plm.dropout_rate = to_double(v, k); }},

        {"gnn.num_layers",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.gnn.num_layers = to_int(v, k); }},
        {"gnn.hidden_dim",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.gnn.hidden_dim = to_int(v, k); }},
        {"gnn.aggregator",
         [](RunConfig& c, const std::string&, const std::string& v) {
             if (v != "mean") throw std::runtime_error("config: unsupported gnn.aggregator '" + v + "'");
             c.gnn.aggregator = GnnAggregator::mean;
         }},
        {"gnn.activation",
         [](RunConfig& c, const std::string&, const std::string& v) { c.gnn.activation = activation_from_name(v); }},
        {"gnn.dropout_rate",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.gnn.dropout_rate = to_double(v, k); }},

        {"loss.temperature",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.loss.temperature = to_double(v, k); }},
        {"loss.hop_count",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.loss.hop_count = to_int(v, k); }},
        {"loss.neighbor_sample_size",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.loss.neighbor_sample_size = to_int(v, k); }},
        {"loss.use_gc_cl_text",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.loss.use_gc_cl_text = to_bool(v, k); }},
        {"loss.use_gc_cl_gnn",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.loss.use_gc_cl_gnn = to_bool(v, k); }},
        {"loss.use_nd_ka",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.loss.use_nd_ka = to_bool(v, k); }},
        {"loss.use_nbh_ka",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.loss.use_nbh_ka = to_bool(v, k); }},

        {"train.learning_rate",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.train.learning_rate = to_double(v, k); }},
        {"train.weight_decay",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.train.weight_decay = to_double(v, k); }},
        {"train.epochs",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.train.epochs = to_int(v, k); }},
        {"train.batch_size",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.train.batch_size = to_int(v, k); }},
        {"train.seed",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.train.seed = to_u64(v, k); }},
        {"train.grad_clip",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.train.grad_clip = to_double(v, k); }},
        {"train.checkpoint_every_epochs",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.train.checkpoint_every_epochs = to_int(v, k); }},
        {"train.deterministic",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.train.deterministic = to_bool(v, k); }},

        {"eval.probe", [](RunConfig& c, const std::string&, const std::string& v) { c.eval.probe = v; }},
        {"eval.hidden_dim",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.eval.hidden_dim = to_int(v, k); }},
        {"eval.dropout",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.eval.dropout = to_double(v, k); }},
        {"eval.learning_rate",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.eval.learning_rate = to_double(v, k); }},
        {"eval.epochs",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.eval.epochs = to_int(v, k); }},
        {"eval.batch_size",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.eval.batch_size = to_int(v, k); }},
        {"eval.fanout_l1",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.eval.fanout_l1 = to_int(v, k); }},
        {"eval.fanout_l2",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.eval.fanout_l2 = to_int(v, k); }},
        {"eval.neighbor_sampling",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.eval.neighbor_sampling = to_bool(v, k); }},
        {"eval.repeats",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.eval.repeats = to_int(v, k); }},
        {"eval.k", [](RunConfig& c, const std::string& k, const std::string& v) { c.eval.k = to_int(v, k); }},
        {"eval.negatives_per_query",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.eval.negatives_per_query = to_int(v, k); }},
        {"eval.cluster_pool",
         [](RunConfig& c, const std::string&, const std::string& v) {
             if (v != "test" && v != "all") throw std::runtime_error("config: eval.cluster_pool must be test or all");
             c.eval.cluster_pool = v;
         }},
    };
    return table;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    RunConfig config;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed section");
            }
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = section + "." + trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        auto it = setters().find(key);
        if (it == setters().end()) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        it->second(config, key, value);
    }
    return config;
}

std::string serialize_run_config(const RunConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "[data]\n";
    os << "nodes = " << c.data.nodes << "\n";
    os << "edges = " << c.data.edges << "\n";
    os << "min_frequency = " << c.data.min_frequency << "\n";
    os << "num_classes = " << c.data.synthetic.num_classes << "\n";
    os << "nodes_per_class = " << c.data.synthetic.nodes_per_class << "\n";
    os << "p_in = " << c.data.synthetic.p_in << "\n";
    os << "p_out = " << c.data.synthetic.p_out << "\n";
    os << "vocab_per_class = " << c.data.synthetic.vocab_per_class << "\n";
    os << "doc_length = " << c.data.synthetic.doc_length << "\n";
    os << "noise_rate = " << c.data.synthetic.noise_rate << "\n";
    os << "seed = " << c.data.synthetic.seed << "\n";
    os << "train_fraction = " << c.data.synthetic.train_fraction << "\n";
    os << "valid_fraction = " << c.data.synthetic.valid_fraction << "\n";
    os << "\n[plm]\n";
    os << "hidden_dim = " << c.plm.hidden_dim << "\n";
    os << "num_layers = " << c.plm.num_layers << "\n";
    os << "num_heads = " << c.plm.num_heads << "\n";
    os << "max_sequence_length = " << c.plm.max_sequence_length << "\n";
    os << "dropout_rate = " << c.plm.dropout_rate << "\n";
    os << "\n[gnn]\n";
    os << "num_layers = " << c.gnn.num_layers << "\n";
    os << "hidden_dim = " << c.gnn.hidden_dim << "\n";
    os << "aggregator = mean\n";
    os << "activation = " << activation_name(c.gnn.activation) << "\n";
    os << "dropout_rate = " << c.gnn.dropout_rate << "\n";
    os << "\n[loss]\n";
    os << "temperature = " << c.loss.temperature << "\n";
    os << "hop_count = " << c.loss.hop_count << "\n";
    os << "neighbor_sample_size = " << c.loss.neighbor_sample_size << "\n";
    os << "use_gc_cl_text = " << (c.loss.use_gc_cl_text ? "true" : "false") << "\n";
    os << "use_gc_cl_gnn = " << (c.loss.use_gc_cl_gnn ? "true" : "false") << "\n";
    os << "use_nd_ka = " << (c.loss.use_nd_ka ? "true" : "false") << "\n";
    os << "use_nbh_ka = " << (c.loss.use_nbh_ka ? "true" : "false") << "\n";
    os << "\n[train]\n";
    os << "learning_rate = " << c.train.learning_rate << "\n";
    os << "weight_decay = " << c.train.weight_decay << "\n";
    os << "epochs = " << c.train.epochs << "\n";
    os << "batch_size = " << c.train.batch_size << "\n";
    os << "seed = " << c.train.seed << "\n";
    os << "grad_clip = " << c.train.grad_clip << "\n";
    os << "checkpoint_every_epochs = " << c.train.checkpoint_every_epochs << "\n";
    os << "deterministic = " << (c.train.deterministic ? "true" : "false") << "\n";
    os << "\n[eval]\n";
    os << "probe = " << c.eval.probe << "\n";
    os << "hidden_dim = " << c.eval.hidden_dim << "\n";
    os << "dropout = " << c.eval.dropout << "\n";
    os << "learning_rate = " << c.eval.learning_rate << "\n";
    os << "epochs = " << c.eval.epochs << "\n";
    os << "batch_size = " << c.eval.batch_size << "\n";
    os << "fanout_l1 = " << c.eval.fanout_l1 << "\n";
    os << "fanout_l2 = " << c.eval.fanout_l2 << "\n";
    os << "neighbor_sampling = " << (c.eval.neighbor_sampling ? "true" : "false") << "\n";
    os << "repeats = " << c.eval.repeats << "\n";
    os << "k = " << c.eval.k << "\n";
    os << "negatives_per_query = " << c.eval.negatives_per_query << "\n";
    os << "cluster_pool = " << c.eval.cluster_pool << "\n";
    return os.str();
}

void save_run_config(const std::string& path, const RunConfig& config) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out << serialize_run_config(config);
}

}  // namespace tagembed
