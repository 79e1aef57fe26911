#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "episample/observed_graph.hpp"
#include "episample/rng.hpp"

namespace episample {

enum class NodeType : std::uint8_t { person = 0, location = 1, neighborhood = 2 };

const char* node_type_name(NodeType t);

struct NodeKey {
    NodeType type;
    std::int32_t id;

    friend bool operator==(const NodeKey& a, const NodeKey& b) {
        return a.type == b.type && a.id == b.id;
    }
    friend bool operator<(const NodeKey& a, const NodeKey& b) {
        if (a.type != b.type) return a.type < b.type;
        return a.id < b.id;
    }
};

// Flattened undirected view of a snapshot for walking: nodes are indexed
// densely with persons first, then locations, then neighborhoods, each
// block ascending by original id. Person-location edges carry the
// snapshot's distinct-day weights; location-neighborhood edges weigh 1.
struct EmbeddingGraph {
    std::vector<NodeKey> nodes;  // dense index -> key, sorted by (type, id)
    std::int32_t n_persons = 0;
    std::int32_t n_locations = 0;
    std::int32_t n_neighborhoods = 0;
    std::vector<std::int64_t> offsets;  // CSR over node index
    std::vector<std::int32_t> neighbors;
    std::vector<double> weights;

    std::int32_t node_count() const { return static_cast<std::int32_t>(nodes.size()); }
    NodeType type_of(std::int32_t idx) const { return nodes[idx].type; }
    std::int32_t degree(std::int32_t idx) const {
        return static_cast<std::int32_t>(offsets[idx + 1] - offsets[idx]);
    }
    // Dense index for a key, or -1 when absent.
    std::int32_t find(NodeKey key) const;
};

EmbeddingGraph build_embedding_graph(const HeteroView& view);

struct WalkCorpus {
    std::vector<std::vector<std::int32_t>> walks;  // dense node indices

    std::int64_t token_count() const {
        std::int64_t n = 0;
        for (const auto& w : walks) n += static_cast<std::int64_t>(w.size());
        return n;
    }
};

// Type pattern for constrained walks, e.g. person-location-person. Must
// begin and end with the same type so it can repeat cyclically.
using MetaPath = std::vector<NodeType>;

MetaPath parse_metapath(const std::string& text);  // e.g. "PLP" or "P,L,N,L,P"
void validate_metapath(const MetaPath& path);      // throws ConfigError

// Truncated walks choosing uniformly among all neighbors; one batch of
// walks_per_node from every node. A node with no neighbors yields the
// one-element walk [v].
WalkCorpus random_walks(const EmbeddingGraph& graph, int walk_len, int walks_per_node,
                        Rng& rng);

// Walks constrained to the cyclic type pattern, starting from every node
// of the pattern's first type. The next hop is drawn among neighbors of
// the required next type with probability proportional to edge weight;
// the walk stops early when no neighbor qualifies.
WalkCorpus metapath_walks(const EmbeddingGraph& graph, const MetaPath& path, int walk_len,
                          int walks_per_node, Rng& rng);

// Appends the ordered (center, context) pairs one window sweep produces
// for a walk; exposed so the pair bookkeeping can be checked on its own.
void window_pairs(std::span<const std::int32_t> walk, int window,
                  std::vector<std::pair<std::int32_t, std::int32_t>>& out);

struct SkipGramParams {
    int dim = 64;
    int window = 5;
    int negatives = 5;
    int epochs = 3;
    double lr = 0.025;        // linearly decayed over all tokens
    double lr_min = 1e-4;
    double neg_power = 0.75;  // unigram exponent for negative sampling

    void validate() const;  // throws ConfigError
};

struct EmbeddingTable {
    int dim = 0;
    std::vector<NodeKey> nodes;  // sorted by (type, id), parallel to rows
    std::vector<float> input;    // node vectors x_v, row-major
    std::vector<float> output;   // context vectors, kept for warm starts

    std::int32_t row_of(NodeKey key) const;  // -1 when absent
    std::span<const float> vec(std::int32_t row) const {
        return {input.data() + static_cast<std::size_t>(row) * dim,
                static_cast<std::size_t>(dim)};
    }
};

// Skip-gram with negative sampling over the walk corpus. Negative draws
// come from the unigram^neg_power distribution restricted to nodes of the
// context's type, which is what makes the training type-aware. Rows for
// keys present in `warm` start from the previous vectors instead of the
// random initialization, so day-over-day tables stay aligned.
EmbeddingTable train_skipgram(const EmbeddingGraph& graph, const WalkCorpus& corpus,
                              const SkipGramParams& params, Rng& rng,
                              const EmbeddingTable* warm = nullptr);

// Euclidean distance between two embedding rows.
double distance(std::span<const float> a, std::span<const float> b);

struct KnnHit {
    std::int32_t node;  // row index into the table
    double dist;
};

struct KnnResult {
    std::vector<KnnHit> hits;  // ascending (distance, node)
    bool truncated = false;    // fewer candidates than k existed
};

// The k candidates nearest to the query row, ascending by distance with
// ties broken by row index; the query row itself never appears. Uses a
// linear scan up to 5000 candidates and a vantage-point tree beyond, with
// identical results either way.
KnnResult knn(const EmbeddingTable& table, std::int32_t query_row,
              std::span<const std::int32_t> candidate_rows, int k);

// Exact nearest-neighbor index over table rows; built once, queried many
// times. Exposed for reuse when many queries share one candidate set.
class VpTree {
  public:
    VpTree(const EmbeddingTable& table, std::span<const std::int32_t> rows);
    // k nearest (excluding exclude_row) ascending by (distance, row).
    std::vector<KnnHit> query(std::span<const float> point, int k,
                              std::int32_t exclude_row) const;

  private:
    struct Node {
        std::int32_t row;
        double radius;
        std::int32_t inside;   // -1 when absent
        std::int32_t outside;  // -1 when absent
    };
    void search(std::int32_t node, std::span<const float> point, int k,
                std::int32_t exclude_row, std::vector<KnnHit>& heap) const;
    std::int32_t build(std::vector<std::int32_t>& rows, std::int32_t lo, std::int32_t hi);

    const EmbeddingTable* table_;
    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
};

// Text export: header line "<rows> <dim>", then per row "<type> <id> <d
// floats>"; for offline inspection.
void write_embeddings(const EmbeddingTable& table, const std::string& path);

}  // namespace episample
