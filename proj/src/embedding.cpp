#include "episample/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <utility>

#include "episample/errors.hpp"

namespace episample {

const char* node_type_name(NodeType t) {
    switch (t) {
        case NodeType::person: return "P";
        case NodeType::location: return "L";
        case NodeType::neighborhood: return "N";
    }
    return "?";
}

std::int32_t EmbeddingGraph::find(NodeKey key) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), key);
    if (it == nodes.end() || !(*it == key)) return -1;
    return static_cast<std::int32_t>(it - nodes.begin());
}

EmbeddingGraph build_embedding_graph(const HeteroView& view) {
    const GraphSnapshot& snap = view.graph;
    EmbeddingGraph g;
    g.n_persons = static_cast<std::int32_t>(snap.persons.size());
    g.n_locations = static_cast<std::int32_t>(snap.locations.size());
    g.n_neighborhoods = static_cast<std::int32_t>(view.neighborhoods.size());

    g.nodes.reserve(static_cast<std::size_t>(g.n_persons) + g.n_locations + g.n_neighborhoods);
    for (std::int32_t p : snap.persons) g.nodes.push_back({NodeType::person, p});
    for (std::int32_t l : snap.locations) g.nodes.push_back({NodeType::location, l});
    for (std::int32_t n : view.neighborhoods) g.nodes.push_back({NodeType::neighborhood, n});

    const std::int32_t n_nodes = g.node_count();
    std::vector<std::int64_t> deg(static_cast<std::size_t>(n_nodes) + 1, 0);

    // Resolve endpoint ids to dense indices once; both edge lists are small
    // relative to the simulation day, so binary search is fine here.
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs;  // dense endpoints
    std::vector<double> pair_weight;
    pairs.reserve(snap.edges.size() + view.location_neighborhood.size());
    pair_weight.reserve(pairs.capacity());
    for (const SnapshotEdge& e : snap.edges) {
        std::int32_t a = g.find({NodeType::person, e.person});
        std::int32_t b = g.find({NodeType::location, e.location});
        if (a < 0 || b < 0)
            throw ContractError("snapshot edge references a node missing from the node table");
        pairs.emplace_back(a, b);
        pair_weight.push_back(static_cast<double>(e.weight));
    }
    for (const auto& [loc, nta] : view.location_neighborhood) {
        std::int32_t a = g.find({NodeType::location, loc});
        std::int32_t b = g.find({NodeType::neighborhood, nta});
        if (a < 0 || b < 0)
            throw ContractError("district edge references a node missing from the node table");
        pairs.emplace_back(a, b);
        pair_weight.push_back(1.0);
    }

    for (const auto& [a, b] : pairs) {
        deg[static_cast<std::size_t>(a) + 1]++;
        deg[static_cast<std::size_t>(b) + 1]++;
    }
    for (std::int32_t i = 0; i < n_nodes; ++i) deg[i + 1] += deg[i];
    g.offsets = deg;

    g.neighbors.assign(static_cast<std::size_t>(g.offsets[n_nodes]), 0);
    g.weights.assign(g.neighbors.size(), 0.0);
    std::vector<std::int64_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        auto [a, b] = pairs[i];
        g.neighbors[static_cast<std::size_t>(cursor[a])] = b;
        g.weights[static_cast<std::size_t>(cursor[a]++)] = pair_weight[i];
        g.neighbors[static_cast<std::size_t>(cursor[b])] = a;
        g.weights[static_cast<std::size_t>(cursor[b]++)] = pair_weight[i];
    }
    return g;
}

MetaPath parse_metapath(const std::string& text) {
    MetaPath path;
    for (char c : text) {
        switch (std::toupper(static_cast<unsigned char>(c))) {
            case 'P': path.push_back(NodeType::person); break;
            case 'L': path.push_back(NodeType::location); break;
            case 'N': path.push_back(NodeType::neighborhood); break;
            case ',':
            case ' ':
            case '-': break;
            default:
                throw ConfigError(std::string("unknown node type '") + c +
                                  "' in type pattern (use P, L, N)");
        }
    }
    validate_metapath(path);
    return path;
}

void validate_metapath(const MetaPath& path) {
    if (path.size() < 2) throw ConfigError("type pattern needs at least two steps");
    if (path.front() != path.back())
        throw ConfigError("type pattern must start and end with the same type to repeat");
}

namespace {

void check_walk_params(int walk_len, int walks_per_node) {
    if (walk_len < 1) throw ConfigError("walk length must be at least 1");
    if (walks_per_node < 0) throw ConfigError("walks per node must be non-negative");
}

}  // namespace

WalkCorpus random_walks(const EmbeddingGraph& graph, int walk_len, int walks_per_node,
                        Rng& rng) {
    check_walk_params(walk_len, walks_per_node);
    WalkCorpus corpus;
    corpus.walks.reserve(static_cast<std::size_t>(graph.node_count()) * walks_per_node);
    for (std::int32_t start = 0; start < graph.node_count(); ++start) {
        for (int w = 0; w < walks_per_node; ++w) {
            std::vector<std::int32_t> walk;
            walk.reserve(static_cast<std::size_t>(walk_len));
            walk.push_back(start);
            std::int32_t cur = start;
            while (static_cast<int>(walk.size()) < walk_len) {
                const std::int32_t d = graph.degree(cur);
                if (d == 0) break;
                const std::int64_t off = graph.offsets[cur];
                cur = graph.neighbors[static_cast<std::size_t>(
                    off + static_cast<std::int64_t>(rng.uniform_int(d)))];
                walk.push_back(cur);
            }
            corpus.walks.push_back(std::move(walk));
        }
    }
    return corpus;
}

WalkCorpus metapath_walks(const EmbeddingGraph& graph, const MetaPath& path, int walk_len,
                          int walks_per_node, Rng& rng) {
    validate_metapath(path);
    check_walk_params(walk_len, walks_per_node);
    // The pattern repeats, so the final element is just the first again and
    // the cycle is everything before it.
    const std::size_t cycle = path.size() - 1;

    WalkCorpus corpus;
    std::vector<std::int32_t> step_nodes;
    std::vector<double> step_cum;
    for (std::int32_t start = 0; start < graph.node_count(); ++start) {
        if (graph.type_of(start) != path[0]) continue;
        for (int w = 0; w < walks_per_node; ++w) {
            std::vector<std::int32_t> walk;
            walk.reserve(static_cast<std::size_t>(walk_len));
            walk.push_back(start);
            std::int32_t cur = start;
            std::size_t pos = 0;
            while (static_cast<int>(walk.size()) < walk_len) {
                const NodeType want = path[(pos + 1) % cycle];
                step_nodes.clear();
                step_cum.clear();
                double total = 0.0;
                const std::int64_t lo = graph.offsets[cur];
                const std::int64_t hi = graph.offsets[cur + 1];
                for (std::int64_t i = lo; i < hi; ++i) {
                    const std::int32_t nb = graph.neighbors[static_cast<std::size_t>(i)];
                    if (graph.type_of(nb) != want) continue;
                    const double wgt = graph.weights[static_cast<std::size_t>(i)];
                    if (wgt <= 0.0) continue;
                    total += wgt;
                    step_nodes.push_back(nb);
                    step_cum.push_back(total);
                }
                if (step_nodes.empty()) break;
                const double u = rng.uniform() * total;
                const std::size_t pick =
                    std::lower_bound(step_cum.begin(), step_cum.end(), u) - step_cum.begin();
                cur = step_nodes[std::min(pick, step_nodes.size() - 1)];
                walk.push_back(cur);
                pos = (pos + 1) % cycle;
            }
            corpus.walks.push_back(std::move(walk));
        }
    }
    return corpus;
}

void window_pairs(std::span<const std::int32_t> walk, int window,
                  std::vector<std::pair<std::int32_t, std::int32_t>>& out) {
    if (window < 1) throw ConfigError("context window must be at least 1");
    const int len = static_cast<int>(walk.size());
    for (int c = 0; c < len; ++c) {
        const int lo = std::max(0, c - window);
        const int hi = std::min(len - 1, c + window);
        for (int j = lo; j <= hi; ++j)
            if (j != c) out.emplace_back(walk[c], walk[j]);
    }
}

void SkipGramParams::validate() const {
    if (dim < 1) throw ConfigError("embedding dimension must be at least 1");
    if (window < 1) throw ConfigError("context window must be at least 1");
    if (negatives < 0) throw ConfigError("negative sample count must be non-negative");
    if (epochs < 0) throw ConfigError("epoch count must be non-negative");
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (lr_min < 0.0 || lr_min > lr)
        throw ConfigError("learning-rate floor must lie in [0, lr]");
    if (neg_power < 0.0) throw ConfigError("unigram exponent must be non-negative");
}

std::int32_t EmbeddingTable::row_of(NodeKey key) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), key);
    if (it == nodes.end() || !(*it == key)) return -1;
    return static_cast<std::int32_t>(it - nodes.begin());
}

namespace {

// Cumulative unigram^power mass per node, kept per type so negatives can be
// drawn from the context node's own type.
struct NegativeTable {
    std::vector<std::int32_t> nodes;  // ascending node index
    std::vector<double> cum;
    double total = 0.0;

    std::int32_t draw(Rng& rng) const {
        const double u = rng.uniform() * total;
        const std::size_t pick = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
        return nodes[std::min(pick, nodes.size() - 1)];
    }
};

inline float sigmoid(double x) {
    if (x > 8.0) return 1.0f;
    if (x < -8.0) return 0.0f;
    return static_cast<float>(1.0 / (1.0 + std::exp(-x)));
}

}  // namespace

EmbeddingTable train_skipgram(const EmbeddingGraph& graph, const WalkCorpus& corpus,
                              const SkipGramParams& params, Rng& rng,
                              const EmbeddingTable* warm) {
    params.validate();
    if (corpus.walks.empty()) throw ContractError("walk corpus is empty");
    const std::int32_t n = graph.node_count();
    for (const auto& walk : corpus.walks) {
        if (walk.empty()) throw ContractError("walk corpus contains an empty walk");
        for (std::int32_t v : walk)
            if (v < 0 || v >= n) throw ContractError("walk corpus references an unknown node");
    }
    if (warm && warm->dim != params.dim)
        throw ContractError("warm-start table has a different dimension");

    const int d = params.dim;
    EmbeddingTable table;
    table.dim = d;
    table.nodes = graph.nodes;
    table.input.resize(static_cast<std::size_t>(n) * d);
    table.output.assign(static_cast<std::size_t>(n) * d, 0.0f);
    // Fresh rows start from small uniform noise; this always consumes one
    // draw per cell so the stream stays aligned whatever the warm table held.
    for (std::size_t i = 0; i < table.input.size(); ++i)
        table.input[i] = static_cast<float>((rng.uniform() - 0.5) / d);
    if (warm) {
        // Both node lists are sorted by (type, id); a single merge pass
        // carries the previous day's vectors over to surviving rows.
        std::size_t j = 0;
        for (std::int32_t row = 0; row < n; ++row) {
            while (j < warm->nodes.size() && warm->nodes[j] < table.nodes[row]) ++j;
            if (j == warm->nodes.size()) break;
            if (!(warm->nodes[j] == table.nodes[row])) continue;
            const std::size_t src = j * static_cast<std::size_t>(d);
            const std::size_t dst = static_cast<std::size_t>(row) * d;
            std::copy_n(warm->input.begin() + src, d, table.input.begin() + dst);
            std::copy_n(warm->output.begin() + src, d, table.output.begin() + dst);
        }
    }
    if (params.epochs == 0) return table;

    // Occurrence counts feed the per-type negative-sampling tables.
    std::vector<std::int64_t> count(static_cast<std::size_t>(n), 0);
    for (const auto& walk : corpus.walks)
        for (std::int32_t v : walk) count[static_cast<std::size_t>(v)]++;
    NegativeTable neg_table[3];
    int distinct_by_type[3] = {0, 0, 0};
    for (std::int32_t v = 0; v < n; ++v) {
        if (count[v] == 0) continue;
        const int t = static_cast<int>(graph.type_of(v));
        NegativeTable& nt = neg_table[t];
        nt.total += std::pow(static_cast<double>(count[v]), params.neg_power);
        nt.nodes.push_back(v);
        nt.cum.push_back(nt.total);
        distinct_by_type[t]++;
    }

    const double total_tokens =
        static_cast<double>(corpus.token_count()) * params.epochs;
    double processed = 0.0;
    std::vector<float> grad(static_cast<std::size_t>(d));
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
    float* const in = table.input.data();
    float* const out = table.output.data();

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        for (const auto& walk : corpus.walks) {
            const double lr_now = std::max(
                params.lr_min, params.lr * (1.0 - processed / (total_tokens + 1.0)));
            processed += static_cast<double>(walk.size());
            pairs.clear();
            window_pairs(walk, params.window, pairs);
            for (const auto& [center, context] : pairs) {
                float* const xc = in + static_cast<std::size_t>(center) * d;
                const int ctype = static_cast<int>(graph.type_of(context));
                std::fill(grad.begin(), grad.end(), 0.0f);
                // One positive target plus negatives drawn from the context
                // type; a draw that hits the true context is dropped rather
                // than redrawn.
                const int rounds = distinct_by_type[ctype] > 1 ? params.negatives : 0;
                for (int round = 0; round <= rounds; ++round) {
                    std::int32_t target;
                    float label;
                    if (round == 0) {
                        target = context;
                        label = 1.0f;
                    } else {
                        target = neg_table[ctype].draw(rng);
                        if (target == context) continue;
                        label = 0.0f;
                    }
                    float* const ot = out + static_cast<std::size_t>(target) * d;
                    double dot = 0.0;
                    for (int i = 0; i < d; ++i) dot += static_cast<double>(xc[i]) * ot[i];
                    const float g = (label - sigmoid(dot)) * static_cast<float>(lr_now);
                    for (int i = 0; i < d; ++i) grad[i] += g * ot[i];
                    for (int i = 0; i < d; ++i) ot[i] += g * xc[i];
                }
                for (int i = 0; i < d; ++i) xc[i] += grad[i];
            }
        }
    }
    return table;
}

double distance(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size())
        throw ContractError("embedding vectors have different dimensions");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = static_cast<double>(a[i]) - b[i];
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

namespace {

inline bool hit_less(const KnnHit& a, const KnnHit& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.node < b.node;
}

}  // namespace

VpTree::VpTree(const EmbeddingTable& table, std::span<const std::int32_t> rows)
    : table_(&table) {
    const std::int32_t n = static_cast<std::int32_t>(table.nodes.size());
    std::vector<std::int32_t> order(rows.begin(), rows.end());
    for (std::int32_t r : order)
        if (r < 0 || r >= n) throw ContractError("index row out of range");
    nodes_.reserve(order.size());
    root_ = build(order, 0, static_cast<std::int32_t>(order.size()));
}

std::int32_t VpTree::build(std::vector<std::int32_t>& rows, std::int32_t lo,
                           std::int32_t hi) {
    if (lo >= hi) return -1;
    const std::int32_t self = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({rows[lo], 0.0, -1, -1});
    if (hi - lo == 1) return self;

    // Fully sorting the children by (distance, row) keeps the layout
    // independent of library partitioning details.
    const auto vp = table_->vec(rows[lo]);
    std::vector<std::pair<double, std::int32_t>> kids;
    kids.reserve(static_cast<std::size_t>(hi - lo - 1));
    for (std::int32_t i = lo + 1; i < hi; ++i)
        kids.emplace_back(distance(vp, table_->vec(rows[i])), rows[i]);
    std::sort(kids.begin(), kids.end());
    for (std::size_t i = 0; i < kids.size(); ++i)
        rows[lo + 1 + static_cast<std::int32_t>(i)] = kids[i].second;

    const std::int32_t mid = lo + 1 + (hi - lo - 1) / 2;
    nodes_[self].radius = kids[static_cast<std::size_t>(mid - lo - 1)].first;
    const std::int32_t inside = build(rows, lo + 1, mid);
    const std::int32_t outside = build(rows, mid, hi);
    nodes_[self].inside = inside;
    nodes_[self].outside = outside;
    return self;
}

void VpTree::search(std::int32_t node, std::span<const float> point, int k,
                    std::int32_t exclude_row, std::vector<KnnHit>& heap) const {
    if (node < 0) return;
    const Node& nd = nodes_[static_cast<std::size_t>(node)];
    const double d = distance(point, table_->vec(nd.row));
    if (nd.row != exclude_row) {
        const KnnHit cand{nd.row, d};
        if (static_cast<int>(heap.size()) < k) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end(), hit_less);
        } else if (hit_less(cand, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), hit_less);
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end(), hit_less);
        }
    }
    // Non-strict bounds so subtrees that could tie the current worst hit
    // are still visited; the final (distance, row) ordering settles ties.
    const auto worst = [&]() {
        return static_cast<int>(heap.size()) < k ? std::numeric_limits<double>::infinity()
                                                 : heap.front().dist;
    };
    if (d < nd.radius) {
        search(nd.inside, point, k, exclude_row, heap);
        if (nd.radius - d <= worst()) search(nd.outside, point, k, exclude_row, heap);
    } else {
        search(nd.outside, point, k, exclude_row, heap);
        if (d - nd.radius <= worst()) search(nd.inside, point, k, exclude_row, heap);
    }
}

std::vector<KnnHit> VpTree::query(std::span<const float> point, int k,
                                  std::int32_t exclude_row) const {
    if (k < 1) throw ContractError("neighbor count must be at least 1");
    std::vector<KnnHit> heap;
    heap.reserve(static_cast<std::size_t>(k));
    search(root_, point, k, exclude_row, heap);
    std::sort(heap.begin(), heap.end(), hit_less);
    return heap;
}

KnnResult knn(const EmbeddingTable& table, std::int32_t query_row,
              std::span<const std::int32_t> candidate_rows, int k) {
    if (k < 1) throw ContractError("neighbor count must be at least 1");
    const std::int32_t n = static_cast<std::int32_t>(table.nodes.size());
    if (query_row < 0 || query_row >= n) throw ContractError("query row out of range");

    // The query node never counts as its own neighbor.
    constexpr std::size_t kLinearScanLimit = 5000;
    KnnResult res;
    if (candidate_rows.size() <= kLinearScanLimit) {
        std::vector<KnnHit> hits;
        hits.reserve(candidate_rows.size());
        const auto q = table.vec(query_row);
        for (std::int32_t row : candidate_rows) {
            if (row < 0 || row >= n) throw ContractError("candidate row out of range");
            if (row == query_row) continue;
            hits.push_back({row, distance(q, table.vec(row))});
        }
        std::sort(hits.begin(), hits.end(), hit_less);
        if (static_cast<int>(hits.size()) > k) hits.resize(static_cast<std::size_t>(k));
        res.hits = std::move(hits);
    } else {
        VpTree tree(table, candidate_rows);
        res.hits = tree.query(table.vec(query_row), k, query_row);
    }
    res.truncated = static_cast<int>(res.hits.size()) < k;
    return res;
}

void write_embeddings(const EmbeddingTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open embedding file for writing: " + path);
    out << table.nodes.size() << ' ' << table.dim << '\n';
    out.precision(std::numeric_limits<float>::max_digits10);
    for (std::size_t row = 0; row < table.nodes.size(); ++row) {
        out << node_type_name(table.nodes[row].type) << ' ' << table.nodes[row].id;
        const float* v = table.input.data() + row * static_cast<std::size_t>(table.dim);
        for (int i = 0; i < table.dim; ++i) out << ' ' << v[i];
        out << '\n';
    }
    if (!out) throw IoError("failed while writing embedding file: " + path);
}

}  // namespace episample
