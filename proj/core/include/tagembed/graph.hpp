#pragma once
// Text-attributed graph data model: an undirected simple graph whose nodes
// carry text documents, optional class labels and optional train/valid/test
// split tags.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tagembed {

using NodeId = std::int32_t;

struct Document {
    NodeId node_id = -1;
    std::string text;
    std::vector<std::int32_t> tokens;  // filled by the tokenizer, empty until then
};

enum class Split : std::uint8_t { none = 0, train, valid, test };

const char* split_name(Split s);
std::optional<Split> split_from_name(const std::string& name);

class TagGraph {
  public:
    TagGraph() = default;

    // Builds a graph from documents and undirected edges. Edges are
    // symmetrized (both (i,j) and (j,i) collapse to one), self-loops are
    // dropped, endpoints are bounds-checked against the document count.
    TagGraph(std::vector<Document> documents,
             const std::vector<std::pair<NodeId, NodeId>>& edges,
             std::vector<std::int32_t> labels = {},
             std::vector<Split> splits = {});

    std::int32_t num_nodes() const { return static_cast<std::int32_t>(documents_.size()); }
    std::size_t num_edges() const { return edges_.size(); }

    // Canonical undirected edge list: i < j, sorted lexicographically.
    const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }
    // Sorted neighbor list of a node.
    const std::vector<NodeId>& neighbors(NodeId i) const;
    std::size_t degree(NodeId i) const { return neighbors(i).size(); }
    bool has_edge(NodeId i, NodeId j) const;

    const std::vector<Document>& documents() const { return documents_; }
    const Document& document(NodeId i) const;

    bool has_labels() const { return !labels_.empty(); }
    const std::vector<std::int32_t>& labels() const { return labels_; }
    std::int32_t label(NodeId i) const;
    // Distinct labels in ascending order.
    std::vector<std::int32_t> label_set() const;

    bool has_splits() const { return !splits_.empty(); }
    Split split(NodeId i) const;
    std::vector<NodeId> split_members(Split s) const;

  private:
    std::vector<Document> documents_;
    std::vector<std::pair<NodeId, NodeId>> edges_;
    std::vector<std::vector<NodeId>> adjacency_;
    std::vector<std::int32_t> labels_;
    std::vector<Split> splits_;
};

// Loads a graph from a nodes file (one JSON record per line with keys
// id, text, optional label, optional split) and an edges file
// (whitespace-delimited "src dst" pairs, '#' starts a comment line).
// Malformed input reports the offending line number.
TagGraph load_tag(const std::string& nodes_path, const std::string& edges_path);

// Writes the canonical on-disk form readable by load_tag.
void save_tag(const TagGraph& graph, const std::string& nodes_path,
              const std::string& edges_path);

}  // namespace tagembed
