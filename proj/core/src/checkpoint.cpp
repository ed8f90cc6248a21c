#include "tagembed/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace tagembed {

namespace {

constexpr char kMagic[8] = {'T', 'A', 'G', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

using nlohmann::json;

json config_header(const TrainState& s) {
    json j;
    j["plm"] = {{"vocab_size", s.plm_config.vocab_size},
                {"hidden_dim", s.plm_config.hidden_dim},
                {"num_layers", s.plm_config.num_layers},
                {"num_heads", s.plm_config.num_heads},
                {"max_sequence_length", s.plm_config.max_sequence_length},
                {"dropout_rate", s.plm_config.dropout_rate}};
    j["gnn"] = {{"num_layers", s.gnn_config.num_layers},
                {"hidden_dim", s.gnn_config.hidden_dim},
                {"activation", activation_name(s.gnn_config.activation)},
                {"dropout_rate", s.gnn_config.dropout_rate}};
    j["loss"] = {{"temperature", s.loss_config.temperature},
                 {"hop_count", s.loss_config.hop_count},
                 {"neighbor_sample_size", s.loss_config.neighbor_sample_size},
                 {"use_gc_cl_text", s.loss_config.use_gc_cl_text},
                 {"use_gc_cl_gnn", s.loss_config.use_gc_cl_gnn},
                 {"use_nd_ka", s.loss_config.use_nd_ka},
                 {"use_nbh_ka", s.loss_config.use_nbh_ka}};
    j["train"] = {{"learning_rate", s.train_config.learning_rate},
                  {"weight_decay", s.train_config.weight_decay},
                  {"epochs", s.train_config.epochs},
                  {"batch_size", s.train_config.batch_size},
                  {"seed", s.train_config.seed},
                  {"grad_clip", s.train_config.grad_clip},
                  {"checkpoint_every_epochs", s.train_config.checkpoint_every_epochs},
                  {"deterministic", s.train_config.deterministic}};
    j["vocab"] = s.vocab.id_to_token;
    j["epoch"] = s.epoch;
    j["global_step"] = s.global_step;
    j["optimizer_step_count"] = s.optimizer.step_count();
    return j;
}

void write_tensor(std::ofstream& out, const std::string& name, const ad::Mat& m) {
    const auto name_len = static_cast<std::uint64_t>(name.size());
    const auto rows = static_cast<std::uint64_t>(m.rows());
    const auto cols = static_cast<std::uint64_t>(m.cols());
    out.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
}

std::pair<std::string, ad::Mat> read_tensor(std::ifstream& in, const std::string& path) {
    std::uint64_t name_len, rows, cols;
    in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    std::string name(static_cast<std::size_t>(name_len), '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    ad::Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    return {std::move(name), std::move(m)};
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainState& state) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));

    const std::string header = config_header(state).dump();
    const auto header_len = static_cast<std::uint64_t>(header.size());
    out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    const auto& moments = state.optimizer.moments();
    const auto tensor_count =
        static_cast<std::uint64_t>(state.params.size() + 2 * moments.size());
    out.write(reinterpret_cast<const char*>(&tensor_count), sizeof(tensor_count));
    for (const auto& t : state.params.tensors()) write_tensor(out, t.name, t.value);
    for (const auto& entry : moments) {
        write_tensor(out, "opt.m." + entry.name, entry.m);
        write_tensor(out, "opt.v." + entry.name, entry.v);
    }
    if (!out) throw std::runtime_error("short write to checkpoint: " + path);
}

TrainState load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("not a checkpoint file: " + path);
    }
    std::uint32_t version;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || version != kVersion) throw std::runtime_error("unsupported checkpoint version");

    std::uint64_t header_len;
    in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
    std::string header(static_cast<std::size_t>(header_len), '\0');
    in.read(header.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
    const auto j = nlohmann::json::parse(header);

    TrainState state;
    const auto& jp = j.at("plm");
    state.plm_config.vocab_size = jp.at("vocab_size").get<int>();
    state.plm_config.hidden_dim = jp.at("hidden_dim").get<int>();
    state.plm_config.num_layers = jp.at("num_layers").get<int>();
    state.plm_config.num_heads = jp.at("num_heads").get<int>();
    state.plm_config.max_sequence_length = jp.at("max_sequence_length").get<int>();
    state.plm_config.dropout_rate = jp.at("dropout_rate").get<double>();
    const auto& jg = j.at("gnn");
    state.gnn_config.num_layers = jg.at("num_layers").get<int>();
    state.gnn_config.hidden_dim = jg.at("hidden_dim").get<int>();
    state.gnn_config.activation = activation_from_name(jg.at("activation").get<std::string>());
    state.gnn_config.dropout_rate = jg.at("dropout_rate").get<double>();
    const auto& jl = j.at("loss");
    state.loss_config.temperature = jl.at("temperature").get<double>();
    state.loss_config.hop_count = jl.at("hop_count").get<int>();
    state.loss_config.neighbor_sample_size = jl.at("neighbor_sample_size").get<int>();
    state.loss_config.use_gc_cl_text = jl.at("use_gc_cl_text").get<bool>();
    state.loss_config.use_gc_cl_gnn = jl.at("use_gc_cl_gnn").get<bool>();
    state.loss_config.use_nd_ka = jl.at("use_nd_ka").get<bool>();
    state.loss_config.use_nbh_ka = jl.at("use_nbh_ka").get<bool>();
    const auto& jt = j.at("train");
    state.train_config.learning_rate = jt.at("learning_rate").get<double>();
    state.train_config.weight_decay = jt.at("weight_decay").get<double>();
    state.train_config.epochs = jt.at("epochs").get<int>();
    state.train_config.batch_size = jt.at("batch_size").get<int>();
    state.train_config.seed = jt.at("seed").get<std::uint64_t>();
    state.train_config.grad_clip = jt.at("grad_clip").get<double>();
    state.train_config.checkpoint_every_epochs = jt.at("checkpoint_every_epochs").get<int>();
    state.train_config.deterministic = jt.at("deterministic").get<bool>();

    state.vocab.id_to_token = j.at("vocab").get<std::vector<std::string>>();
    for (std::int32_t i = 0; i < state.vocab.size(); ++i) {
        state.vocab.token_to_id[state.vocab.id_to_token[static_cast<std::size_t>(i)]] = i;
    }
    state.epoch = j.at("epoch").get<int>();
    state.global_step = j.at("global_step").get<std::int64_t>();

    std::uint64_t tensor_count;
    in.read(reinterpret_cast<char*>(&tensor_count), sizeof(tensor_count));
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);

    std::vector<std::pair<std::string, ad::Mat>> moment_tensors;
    for (std::uint64_t i = 0; i < tensor_count; ++i) {
        auto [name, m] = read_tensor(in, path);
        if (name.rfind("opt.", 0) == 0) {
            moment_tensors.emplace_back(std::move(name), std::move(m));
        } else {
            state.params.add(name, std::move(m));
        }
    }

    state.optimizer = AdamW(AdamWConfig{state.train_config.learning_rate, 0.9, 0.999, 1e-8,
                                        state.train_config.weight_decay});
    std::vector<AdamW::MomentEntry> moments;
    for (auto& [name, m] : moment_tensors) {
        if (name.rfind("opt.m.", 0) != 0) continue;
        AdamW::MomentEntry entry;
        entry.name = name.substr(6);
        entry.m = std::move(m);
        bool found = false;
        for (auto& [vname, vm] : moment_tensors) {
            if (vname == "opt.v." + entry.name) {
                entry.v = vm;
                found = true;
                break;
            }
        }
        if (!found) throw std::runtime_error("checkpoint missing second moment for " + entry.name);
        moments.push_back(std::move(entry));
    }
    state.optimizer.restore(j.at("optimizer_step_count").get<std::int64_t>(), std::move(moments));
    return state;
}

}  // namespace tagembed
