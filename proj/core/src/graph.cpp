#include "tagembed/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tagembed {

namespace {

std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void line_error(const std::string& path, std::size_t line_no, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::valid: return "valid";
        case Split::test: return "test";
        default: return "none";
    }
}

std::optional<Split> split_from_name(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "valid") return Split::valid;
    if (name == "test") return Split::test;
    return std::nullopt;
}

TagGraph::TagGraph(std::vector<Document> documents,
                   const std::vector<std::pair<NodeId, NodeId>>& edges,
                   std::vector<std::int32_t> labels,
                   std::vector<Split> splits)
    : documents_(std::move(documents)), labels_(std::move(labels)), splits_(std::move(splits)) {
    const auto n = static_cast<NodeId>(documents_.size());
    for (NodeId i = 0; i < n; ++i) {
        if (documents_[static_cast<std::size_t>(i)].node_id != i) {
            throw std::runtime_error("documents must be indexed by node id 0..n-1");
        }
    }
    if (!labels_.empty() && labels_.size() != documents_.size()) {
        throw std::runtime_error("labels size does not match node count");
    }
    if (!splits_.empty() && splits_.size() != documents_.size()) {
        throw std::runtime_error("splits size does not match node count");
    }

    std::set<std::pair<NodeId, NodeId>> canonical;
    for (const auto& [a, b] : edges) {
        if (a < 0 || b < 0 || a >= n || b >= n) {
            throw std::runtime_error("unknown node id in edge (" + std::to_string(a) + ", " +
                                     std::to_string(b) + ")");
        }
        if (a == b) continue;  // self-loops are not stored
        canonical.insert({std::min(a, b), std::max(a, b)});
    }
    edges_.assign(canonical.begin(), canonical.end());

    adjacency_.assign(static_cast<std::size_t>(n), {});
    for (const auto& [a, b] : edges_) {
        adjacency_[static_cast<std::size_t>(a)].push_back(b);
        adjacency_[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

const std::vector<NodeId>& TagGraph::neighbors(NodeId i) const {
    if (i < 0 || i >= num_nodes()) throw std::out_of_range("node id out of range");
    return adjacency_[static_cast<std::size_t>(i)];
}

bool TagGraph::has_edge(NodeId i, NodeId j) const {
    const auto& nbrs = neighbors(i);
    return std::binary_search(nbrs.begin(), nbrs.end(), j);
}

const Document& TagGraph::document(NodeId i) const {
    if (i < 0 || i >= num_nodes()) throw std::out_of_range("node id out of range");
    return documents_[static_cast<std::size_t>(i)];
}

std::int32_t TagGraph::label(NodeId i) const {
    if (!has_labels()) throw std::runtime_error("graph has no labels");
    if (i < 0 || i >= num_nodes()) throw std::out_of_range("node id out of range");
    return labels_[static_cast<std::size_t>(i)];
}

std::vector<std::int32_t> TagGraph::label_set() const {
    std::set<std::int32_t> s(labels_.begin(), labels_.end());
    return {s.begin(), s.end()};
}

Split TagGraph::split(NodeId i) const {
    if (!has_splits()) return Split::none;
    if (i < 0 || i >= num_nodes()) throw std::out_of_range("node id out of range");
    return splits_[static_cast<std::size_t>(i)];
}

std::vector<NodeId> TagGraph::split_members(Split s) const {
    std::vector<NodeId> out;
    for (NodeId i = 0; i < num_nodes(); ++i) {
        if (split(i) == s) out.push_back(i);
    }
    return out;
}

TagGraph load_tag(const std::string& nodes_path, const std::string& edges_path) {
    std::ifstream nodes_in(nodes_path);
    if (!nodes_in) throw std::runtime_error("cannot open nodes file: " + nodes_path);

    struct Record {
        NodeId id;
        std::string text;
        std::optional<std::int32_t> label;
        Split split = Split::none;
    };
    std::vector<Record> records;
    bool any_label = false, any_split = false;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(nodes_in, line)) {
        ++line_no;
        const std::string t = trimmed(line);
        if (t.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(t);
        } catch (const nlohmann::json::exception& e) {
            line_error(nodes_path, line_no, std::string("malformed record: ") + e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j.contains("text") ||
            !j["id"].is_number_integer() || !j["text"].is_string()) {
            line_error(nodes_path, line_no, "malformed record: need integer 'id' and string 'text'");
        }
        Record r;
        r.id = j["id"].get<NodeId>();
        r.text = j["text"].get<std::string>();
        if (trimmed(r.text).empty()) {
            line_error(nodes_path, line_no, "document text is empty");
        }
        if (j.contains("label")) {
            if (!j["label"].is_number_integer()) line_error(nodes_path, line_no, "label must be an integer");
            r.label = j["label"].get<std::int32_t>();
            any_label = true;
        }
        if (j.contains("split")) {
            if (!j["split"].is_string()) line_error(nodes_path, line_no, "split must be a string");
            const auto s = split_from_name(j["split"].get<std::string>());
            if (!s) line_error(nodes_path, line_no, "split must be one of train/valid/test");
            r.split = *s;
            any_split = true;
        }
        records.push_back(std::move(r));
    }
    if (records.empty()) throw std::runtime_error(nodes_path + ": no node records");

    const auto n = records.size();
    std::vector<bool> seen(n, false);
    std::vector<Document> docs(n);
    std::vector<std::int32_t> labels(any_label ? n : 0, -1);
    std::vector<Split> splits(any_split ? n : 0, Split::none);
    for (const auto& r : records) {
        if (r.id < 0 || static_cast<std::size_t>(r.id) >= n) {
            throw std::runtime_error(nodes_path + ": node ids must be dense 0.." +
                                     std::to_string(n - 1) + ", got " + std::to_string(r.id));
        }
        if (seen[static_cast<std::size_t>(r.id)]) {
            throw std::runtime_error(nodes_path + ": duplicate node id " + std::to_string(r.id));
        }
        seen[static_cast<std::size_t>(r.id)] = true;
        docs[static_cast<std::size_t>(r.id)] = Document{r.id, r.text, {}};
        if (any_label) labels[static_cast<std::size_t>(r.id)] = r.label.value_or(-1);
        if (any_split) splits[static_cast<std::size_t>(r.id)] = r.split;
    }

    std::ifstream edges_in(edges_path);
    if (!edges_in) throw std::runtime_error("cannot open edges file: " + edges_path);
    std::vector<std::pair<NodeId, NodeId>> edges;
    line_no = 0;
    while (std::getline(edges_in, line)) {
        ++line_no;
        const std::string t = trimmed(line);
        if (t.empty() || t[0] == '#') continue;
        std::istringstream ss(t);
        long long a, b;
        if (!(ss >> a >> b)) {
            line_error(edges_path, line_no, "malformed edge line: expected 'src dst'");
        }
        std::string extra;
        if (ss >> extra) {
            line_error(edges_path, line_no, "malformed edge line: trailing content '" + extra + "'");
        }
        if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n) {
            line_error(edges_path, line_no,
                       "unknown node id in edge (" + std::to_string(a) + ", " + std::to_string(b) + ")");
        }
        edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
    }

    return TagGraph(std::move(docs), edges, std::move(labels), std::move(splits));
}

void save_tag(const TagGraph& graph, const std::string& nodes_path, const std::string& edges_path) {
    std::ofstream nodes_out(nodes_path, std::ios::trunc);
    if (!nodes_out) throw std::runtime_error("cannot write nodes file: " + nodes_path);
    for (NodeId i = 0; i < graph.num_nodes(); ++i) {
        nlohmann::json j;
        j["id"] = i;
        j["text"] = graph.document(i).text;
        if (graph.has_labels()) j["label"] = graph.labels()[static_cast<std::size_t>(i)];
        if (graph.has_splits() && graph.split(i) != Split::none) j["split"] = split_name(graph.split(i));
        nodes_out << j.dump() << "\n";
    }

    std::ofstream edges_out(edges_path, std::ios::trunc);
    if (!edges_out) throw std::runtime_error("cannot write edges file: " + edges_path);
    edges_out << "# src dst\n";
    for (const auto& [a, b] : graph.edges()) {
        edges_out << a << " " << b << "\n";
    }
}

}  // namespace tagembed
