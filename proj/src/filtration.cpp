#include "vrph/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vrph {

/* **************************************************************************
 * Combinatorial number system
 * *************************************************************************/

BinomialTable::BinomialTable(std::size_t n_max, unsigned k_max)
    : n_max_(n_max), k_max_(k_max), table_((n_max + 1) * (k_max + 1), 0) {
    const std::size_t stride = k_max_ + 1;
    for (std::size_t i = 0; i <= n_max_; ++i) {
        table_[i * stride] = 1;
        for (unsigned k = 1; k <= k_max_ && k <= i; ++k) {
            const simplex_index_t a = table_[(i - 1) * stride + k - 1];
            const simplex_index_t b = table_[(i - 1) * stride + k];
            simplex_index_t sum = 0;
            if (__builtin_add_overflow(a, b, &sum)) {
                std::ostringstream msg;
                msg << "C(" << i << ", " << k << ") exceeds 2^64 - 1";
                throw Error(ErrorKind::index_overflow, msg.str());
            }
            table_[i * stride + k] = sum;
        }
    }
}

void check_index_capacity(std::size_t n, unsigned max_dim) {
    // The largest entry needed is C(n, min(max_dim + 2, n / 2)).
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(max_dim) + 2, n / 2);
    unsigned __int128 c = 1;
    for (std::size_t i = 0; i < k; ++i) {
        c = c * (n - i) / (i + 1);
        if (c > std::numeric_limits<simplex_index_t>::max()) {
            std::ostringstream msg;
            msg << "simplices of dimension " << max_dim + 1 << " on " << n
                << " vertices cannot be indexed with 64 bits";
            throw Error(ErrorKind::index_overflow, msg.str());
        }
    }
}

SimplexRank rank_simplex(std::span<const vertex_t> vertices, const BinomialTable& binomial) {
    if (vertices.empty()) throw Error(ErrorKind::invalid_argument, "a simplex needs at least one vertex");
    const auto dim = static_cast<unsigned>(vertices.size() - 1);
    if (dim + 1 > binomial.k_max())
        throw Error(ErrorKind::index_overflow, "simplex dimension exceeds binomial table");
    simplex_index_t index = 0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const vertex_t v = vertices[i];
        if (v > binomial.n_max()) throw Error(ErrorKind::invalid_argument, "vertex outside binomial table");
        if (i > 0 && v >= vertices[i - 1])
            throw Error(ErrorKind::invalid_argument, "simplex vertices must be strictly decreasing");
        if (__builtin_add_overflow(index, binomial(v, dim + 1 - static_cast<unsigned>(i)), &index))
            throw Error(ErrorKind::index_overflow, "simplex index exceeds 2^64 - 1");
    }
    return {index, dim};
}

vertex_t max_vertex(simplex_index_t index, unsigned k, vertex_t top, const BinomialTable& binomial) {
    // Binary search for max{ v <= top : C(v, k) <= index }; C(k - 1, k) = 0 bounds it below.
    if (binomial(top, k) <= index) return top;
    vertex_t lo = k - 1;  // C(lo, k) <= index holds
    vertex_t hi = top;    // C(hi, k) > index holds
    while (hi - lo > 1) {
        const vertex_t mid = lo + (hi - lo) / 2;
        if (binomial(mid, k) <= index)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

std::vector<vertex_t> unrank_simplex(SimplexRank rank, std::size_t n, const BinomialTable& binomial) {
    if (n == 0 || rank.dim + 1 > n || rank.dim + 1 > binomial.k_max() || n > binomial.n_max() ||
        rank.index >= binomial(n, rank.dim + 1)) {
        std::ostringstream msg;
        msg << "index " << rank.index << " is not a " << rank.dim << "-simplex on " << n << " vertices";
        throw Error(ErrorKind::rank_out_of_range, msg.str());
    }
    std::vector<vertex_t> vertices(rank.dim + 1);
    simplex_index_t index = rank.index;
    auto top = static_cast<vertex_t>(n - 1);
    for (unsigned k = rank.dim + 1; k > 0; --k) {
        top = max_vertex(index, k, top, binomial);
        vertices[rank.dim + 1 - k] = top;
        index -= binomial(top, k);
        if (top > 0) --top;
    }
    return vertices;
}

std::vector<SimplexRank> facets(SimplexRank simplex, std::size_t n, const BinomialTable& binomial) {
    std::vector<SimplexRank> out;
    if (simplex.dim == 0) return out;
    const auto vertices = unrank_simplex(simplex, n, binomial);
    std::vector<vertex_t> facet;
    for (std::size_t drop = 0; drop < vertices.size(); ++drop) {
        facet.clear();
        for (std::size_t i = 0; i < vertices.size(); ++i)
            if (i != drop) facet.push_back(vertices[i]);
        out.push_back(rank_simplex(facet, binomial));
    }
    return out;
}

/* **************************************************************************
 * Raw-input filtration values
 * *************************************************************************/

namespace {

value_t sparse_edge_weight(const SparseGraph& g, vertex_t u, vertex_t v) {
    if (u > v) std::swap(u, v);
    auto it = std::lower_bound(g.edges.begin(), g.edges.end(), FilteredEdge{u, v, 0},
                               [](const FilteredEdge& a, const FilteredEdge& b) {
                                   return a.u != b.u ? a.u < b.u : a.v < b.v;
                               });
    if (it != g.edges.end() && it->u == u && it->v == v) return it->weight;
    // Unvalidated input: fall back to a scan.
    for (const auto& e : g.edges)
        if ((e.u == u && e.v == v) || (e.u == v && e.v == u)) return e.weight;
    return kInfinity;
}

value_t sparse_birth(const SparseGraph& g, vertex_t v) {
    return g.vertex_births.empty() ? 0.0 : g.vertex_births[v];
}

}  // namespace

value_t diameter(std::span<const vertex_t> vertices, const DistanceInput& input) {
    value_t result = -kInfinity;
    if (input.is_dense()) {
        const auto& m = input.dense();
        for (std::size_t i = 0; i < vertices.size(); ++i)
            for (std::size_t j = 0; j <= i; ++j) result = std::max(result, m(vertices[i], vertices[j]));
        return result;
    }
    const auto& g = input.sparse();
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        result = std::max(result, sparse_birth(g, vertices[i]));
        for (std::size_t j = 0; j < i; ++j)
            result = std::max(result, sparse_edge_weight(g, vertices[i], vertices[j]));
    }
    return result;
}

value_t enclosing_radius(const DenseMatrix& m) {
    if (m.n == 0) return 0;
    value_t radius = kInfinity;
    for (std::size_t i = 0; i < m.n; ++i) {
        value_t row_max = -kInfinity;
        for (std::size_t j = 0; j < m.n; ++j) row_max = std::max(row_max, m(i, j));
        radius = std::min(radius, row_max);
    }
    return radius;
}

std::vector<FilteredEdge> sorted_edges(const DistanceInput& input, value_t threshold) {
    std::vector<FilteredEdge> edges;
    if (input.is_dense()) {
        const auto& m = input.dense();
        for (vertex_t i = 0; i < m.n; ++i)
            for (vertex_t j = 0; j < i; ++j) {
                const value_t w = std::max({m(i, j), m(i, i), m(j, j)});
                if (w <= threshold) edges.push_back({j, i, w});
            }
    } else {
        const auto& g = input.sparse();
        for (const auto& e : g.edges) {
            const value_t w = std::max({e.weight, sparse_birth(g, e.u), sparse_birth(g, e.v)});
            if (w <= threshold) edges.push_back({std::min(e.u, e.v), std::max(e.u, e.v), w});
        }
    }
    std::sort(edges.begin(), edges.end(), edge_precedes);
    return edges;
}

/* **************************************************************************
 * Weighted filtrations
 * *************************************************************************/

std::vector<value_t> dtm_weights(const DenseMatrix& m, std::size_t k, double r) {
    if (k == 0) throw Error(ErrorKind::invalid_argument, "DTM needs at least one neighbor");
    if (k >= m.n) {
        std::ostringstream msg;
        msg << "k = " << k << " needs more than " << m.n << " points";
        throw Error(ErrorKind::k_too_large, msg.str());
    }
    if (!(r > 0)) throw Error(ErrorKind::invalid_argument, "DTM exponent must be positive");
    std::vector<value_t> weights(m.n);
    std::vector<value_t> row;
    for (std::size_t i = 0; i < m.n; ++i) {
        row.clear();
        for (std::size_t j = 0; j < m.n; ++j)
            if (j != i) row.push_back(m(i, j));
        std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
        std::sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k));
        value_t sum = 0;
        for (std::size_t j = 0; j < k; ++j) sum += std::pow(row[j], r);
        weights[i] = std::pow(sum / static_cast<value_t>(k), 1.0 / r);
    }
    return weights;
}

value_t mixed_edge_value(value_t d, value_t wi, value_t wj, MixExponent mix, WeightConvention convention) {
    // The strict convention measures ball radii; the compatible one doubles the
    // distance so that zero weights give back d.
    const value_t span = convention == WeightConvention::vr_compatible ? 2 * d : d;
    const value_t hi = std::max(wi, wj);
    switch (mix) {
    case MixExponent::infinity:
        return std::max(hi, span / 2);
    case MixExponent::one:
        if (span <= std::abs(wi - wj)) return hi;
        return (wi + wj + span) / 2;
    case MixExponent::two: {
        if (wi < 0 || wj < 0)
            throw Error(ErrorKind::invalid_argument, "p = 2 mixing needs non-negative weights");
        const value_t a = std::max(wi, wj) * std::max(wi, wj);
        const value_t b = std::min(wi, wj) * std::min(wi, wj);
        if (span * span <= a - b) return hi;
        // sqrt(t^2 - a) + sqrt(t^2 - b) = span
        const value_t s = (span * span + a - b) / (2 * span);
        return std::max(hi, std::sqrt(b + s * s));
    }
    }
    return hi;
}

DenseMatrix weighted_matrix(const DenseMatrix& m, std::span<const value_t> weights, MixExponent mix,
                            WeightConvention convention) {
    if (weights.size() != m.n) throw Error(ErrorKind::invalid_argument, "need one weight per point");
    DenseMatrix out(m.n, std::vector<value_t>(m.n * m.n, 0.0));
    for (std::size_t i = 0; i < m.n; ++i) {
        out.at(i, i) = weights[i];
        for (std::size_t j = 0; j < i; ++j) {
            const value_t t = mixed_edge_value(m(i, j), weights[i], weights[j], mix, convention);
            out.at(i, j) = t;
            out.at(j, i) = t;
        }
    }
    return out;
}

WeightedGraph weighted_graph(const DenseMatrix& m, std::span<const value_t> weights, MixExponent mix,
                             WeightConvention convention) {
    return to_weighted_graph(weighted_matrix(m, weights, mix, convention), kInfinity);
}

SparseGraph to_sparse_graph(const WeightedGraph& graph) {
    SparseGraph g;
    g.n = graph.n;
    g.vertex_births = graph.vertex_births;
    g.edges = graph.edges;
    std::sort(g.edges.begin(), g.edges.end(), [](const FilteredEdge& a, const FilteredEdge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    return g;
}

WeightedGraph to_weighted_graph(const DistanceInput& input, value_t threshold) {
    WeightedGraph graph;
    graph.n = input.size();
    if (input.is_dense()) {
        const auto& m = input.dense();
        graph.vertex_births.resize(m.n);
        for (std::size_t i = 0; i < m.n; ++i) graph.vertex_births[i] = m(i, i);
    } else {
        graph.vertex_births = input.sparse().vertex_births;
        if (graph.vertex_births.empty()) graph.vertex_births.assign(graph.n, 0.0);
    }
    graph.edges = sorted_edges(input, threshold);
    return graph;
}

/* **************************************************************************
 * Implicit flag filtrations
 * *************************************************************************/

FlagFiltrationBase::FlagFiltrationBase(std::size_t n, std::vector<value_t> births, value_t threshold,
                                       unsigned max_dim)
    : n_(n), births_(std::move(births)), threshold_(threshold), max_dim_(max_dim),
      binomial_((check_index_capacity(n, max_dim), n), max_dim + 2) {}

void FlagFiltrationBase::vertices_of(simplex_index_t index, unsigned dim, std::vector<vertex_t>& out) const {
    out.resize(dim + 1);
    auto top = static_cast<vertex_t>(n_ - 1);
    for (unsigned k = dim + 1; k > 0; --k) {
        top = max_vertex(index, k, top, binomial_);
        out[dim + 1 - k] = top;
        index -= binomial_(top, k);
        if (top > 0) --top;
    }
}

DenseFlagFiltration::DenseFlagFiltration(const DenseMatrix& m, value_t threshold, unsigned max_dim)
    : FlagFiltrationBase(m.n, {}, threshold, max_dim), values_(m.n * m.n) {
    births_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) births_[i] = m(i, i);
    for (std::size_t i = 0; i < n_; ++i) {
        values_[i * n_ + i] = births_[i];
        for (std::size_t j = 0; j < i; ++j) {
            const value_t w = std::max({m(i, j), births_[i], births_[j]});
            values_[i * n_ + j] = w;
            values_[j * n_ + i] = w;
        }
    }
}

value_t DenseFlagFiltration::diameter_of(std::span<const vertex_t> vertices) const {
    if (vertices.size() == 1) return births_[vertices[0]];
    value_t result = -kInfinity;
    for (std::size_t i = 0; i < vertices.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) result = std::max(result, edge_value(vertices[i], vertices[j]));
    return result;
}

value_t DenseFlagFiltration::diameter_of(simplex_index_t index, unsigned dim) const {
    std::vector<vertex_t> vertices;
    vertices_of(index, dim, vertices);
    return diameter_of(vertices);
}

std::vector<FilteredEdge> DenseFlagFiltration::edges() const {
    std::vector<FilteredEdge> out;
    for (vertex_t i = 0; i < n_; ++i)
        for (vertex_t j = 0; j < i; ++j)
            if (edge_value(i, j) <= threshold_) out.push_back({j, i, edge_value(i, j)});
    std::sort(out.begin(), out.end(), edge_precedes);
    return out;
}

void DenseFlagFiltration::CofacetEnumerator::reset(DiameterEntry simplex, unsigned dim) {
    f_->vertices_of(simplex.index, dim, vertices_);
    diameter_ = simplex.diameter;
    dim_ = dim;
    j_ = static_cast<std::int64_t>(f_->n_) - 1;
    pos_ = 0;
    above_ = 0;
    below_ = simplex.index;
}

bool DenseFlagFiltration::CofacetEnumerator::next(Cofacet& out, bool all_cofacets) {
    const auto& binomial = f_->binomial_;
    while (j_ >= 0) {
        const auto j = static_cast<vertex_t>(j_);
        if (pos_ <= dim_ && j == vertices_[pos_]) {
            below_ -= binomial(j, dim_ + 1 - pos_);
            above_ += binomial(j, dim_ + 2 - pos_);
            ++pos_;
            --j_;
            continue;
        }
        if (!all_cofacets && pos_ > 0) return false;
        --j_;
        const value_t* row = f_->values_.data() + static_cast<std::size_t>(j) * f_->n_;
        value_t d = diameter_;
        for (vertex_t v : vertices_) d = std::max(d, row[v]);
        if (d > f_->threshold_) continue;
        out.index = above_ + binomial(j, dim_ + 2 - pos_) + below_;
        out.diameter = d;
        out.odd = ((dim_ + 1 - pos_) & 1u) != 0;
        return true;
    }
    return false;
}

SparseFlagFiltration::SparseFlagFiltration(const SparseGraph& g, value_t threshold, unsigned max_dim)
    : FlagFiltrationBase(g.n, g.vertex_births, threshold, max_dim), adjacency_(g.n) {
    if (births_.empty()) births_.assign(n_, 0.0);
    for (const auto& e : g.edges) {
        const value_t w = std::max({e.weight, births_[e.u], births_[e.v]});
        if (w > threshold_) continue;
        adjacency_[e.u].push_back({e.v, w});
        adjacency_[e.v].push_back({e.u, w});
        ++edge_count_;
    }
    for (auto& list : adjacency_)
        std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) { return a.vertex > b.vertex; });
}

value_t SparseFlagFiltration::edge_value(vertex_t u, vertex_t v) const {
    const auto& list = adjacency_[u];
    auto it = std::lower_bound(list.begin(), list.end(), v,
                               [](const Neighbor& a, vertex_t key) { return a.vertex > key; });
    return it != list.end() && it->vertex == v ? it->value : kInfinity;
}

value_t SparseFlagFiltration::diameter_of(std::span<const vertex_t> vertices) const {
    if (vertices.size() == 1) return births_[vertices[0]];
    value_t result = -kInfinity;
    for (std::size_t i = 0; i < vertices.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) result = std::max(result, edge_value(vertices[i], vertices[j]));
    return result;
}

value_t SparseFlagFiltration::diameter_of(simplex_index_t index, unsigned dim) const {
    std::vector<vertex_t> vertices;
    vertices_of(index, dim, vertices);
    return diameter_of(vertices);
}

std::vector<FilteredEdge> SparseFlagFiltration::edges() const {
    std::vector<FilteredEdge> out;
    out.reserve(edge_count_);
    for (vertex_t u = 0; u < n_; ++u)
        for (const auto& nb : adjacency_[u])
            if (nb.vertex < u) out.push_back({nb.vertex, u, nb.value});
    std::sort(out.begin(), out.end(), edge_precedes);
    return out;
}

void SparseFlagFiltration::CofacetEnumerator::reset(DiameterEntry simplex, unsigned dim) {
    f_->vertices_of(simplex.index, dim, vertices_);
    cursors_.resize(vertices_.size());
    for (std::size_t i = 0; i < vertices_.size(); ++i) cursors_[i] = f_->adjacency_[vertices_[i]].begin();
    diameter_ = simplex.diameter;
    dim_ = dim;
    pos_ = 0;
    above_ = 0;
    below_ = simplex.index;
}

bool SparseFlagFiltration::CofacetEnumerator::next(Cofacet& out, bool all_cofacets) {
    const auto& binomial = f_->binomial_;
    const auto& base = f_->adjacency_[vertices_[0]];
    while (cursors_[0] != base.end()) {
        const Neighbor candidate = *cursors_[0]++;
        const vertex_t j = candidate.vertex;
        if (!all_cofacets && j < vertices_[0]) {
            cursors_[0] = base.end();
            return false;
        }
        value_t d = std::max(diameter_, candidate.value);
        bool common = true;
        for (std::size_t m = 1; m < vertices_.size(); ++m) {
            auto& it = cursors_[m];
            const auto end = f_->adjacency_[vertices_[m]].end();
            while (it != end && it->vertex > j) ++it;
            if (it == end) {
                // No smaller common neighbor can exist.
                cursors_[0] = base.end();
                return false;
            }
            if (it->vertex != j) {
                common = false;
                break;
            }
            d = std::max(d, it->value);
        }
        if (!common || d > f_->threshold_) continue;
        while (pos_ <= dim_ && vertices_[pos_] > j) {
            below_ -= binomial(vertices_[pos_], dim_ + 1 - pos_);
            above_ += binomial(vertices_[pos_], dim_ + 2 - pos_);
            ++pos_;
        }
        out.index = above_ + binomial(j, dim_ + 2 - pos_) + below_;
        out.diameter = d;
        out.odd = ((dim_ + 1 - pos_) & 1u) != 0;
        return true;
    }
    return false;
}

std::vector<Cofacet> cofacets(const DistanceInput& input, SimplexRank simplex, value_t threshold) {
    std::vector<Cofacet> out;
    Cofacet c;
    std::vector<vertex_t> vertices;
    auto collect = [&](const auto& f) {
        f.vertices_of(simplex.index, simplex.dim, vertices);
        const DiameterEntry entry{simplex.index, f.diameter_of(vertices)};
        typename std::decay_t<decltype(f)>::CofacetEnumerator e(f);
        e.reset(entry, simplex.dim);
        while (e.next(c)) out.push_back(c);
    };
    if (input.is_dense()) {
        collect(DenseFlagFiltration(input.dense(), threshold, simplex.dim));
    } else {
        collect(SparseFlagFiltration(input.sparse(), threshold, simplex.dim));
    }
    return out;
}

}  // namespace vrph
