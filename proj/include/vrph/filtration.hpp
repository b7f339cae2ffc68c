#pragma once

// Implicit Vietoris-Rips / flag filtrations.
//
// Simplices are never stored explicitly. A d-simplex with vertices
// v_d > ... > v_0 is identified by its combinatorial index
//   sum_{i=0..d} C(v_i, i + 1)
// and its dimension. The filtration order is (diameter ascending, index
// descending).

#include <cassert>
#include <cstdint>
#include <span>
#include <vector>

#include "vrph/core.hpp"

namespace vrph {

using simplex_index_t = std::uint64_t;

/* **************************************************************************
 * Combinatorial number system
 * *************************************************************************/

class BinomialTable {
public:
    /// Table of C(i, k) for 0 <= i <= n_max, 0 <= k <= k_max. Throws
    /// IndexOverflow if any entry exceeds 2^64 - 1.
    BinomialTable(std::size_t n_max, unsigned k_max);

    simplex_index_t operator()(std::size_t n, unsigned k) const {
        assert(n <= n_max_ && k <= k_max_);
        return table_[n * (k_max_ + 1) + k];
    }

    std::size_t n_max() const { return n_max_; }
    unsigned k_max() const { return k_max_; }

private:
    std::size_t n_max_;
    unsigned k_max_;
    std::vector<simplex_index_t> table_;
};

/// Throws IndexOverflow when simplices up to dimension max_dim + 1 on n
/// vertices cannot be indexed with 64 bits. Allocates nothing.
void check_index_capacity(std::size_t n, unsigned max_dim);

struct SimplexRank {
    simplex_index_t index = 0;
    unsigned dim = 0;

    friend bool operator==(const SimplexRank&, const SimplexRank&) = default;
};

/// Vertices must be strictly decreasing and covered by the table.
SimplexRank rank_simplex(std::span<const vertex_t> vertices, const BinomialTable& binomial);

/// Inverse of rank_simplex; vertices come out strictly decreasing.
std::vector<vertex_t> unrank_simplex(SimplexRank rank, std::size_t n, const BinomialTable& binomial);

/// Largest v <= top with C(v, k) <= index.
vertex_t max_vertex(simplex_index_t index, unsigned k, vertex_t top, const BinomialTable& binomial);

/// Facets in the order their vertex is dropped, largest vertex first.
std::vector<SimplexRank> facets(SimplexRank simplex, std::size_t n, const BinomialTable& binomial);

inline simplex_index_t edge_index(vertex_t u, vertex_t v) {
    if (u < v) std::swap(u, v);
    return static_cast<simplex_index_t>(u) * (u - 1) / 2 + v;
}

/* **************************************************************************
 * Filtration values on raw inputs
 * *************************************************************************/

/// Flag value of a simplex: max over member vertex births and pairwise entries
/// (+inf for a missing sparse edge).
value_t diameter(std::span<const vertex_t> vertices, const DistanceInput& input);

/// min_i max_j m(i, j).
value_t enclosing_radius(const DenseMatrix& m);

/// Edges with flag value <= threshold, sorted by (value ascending, index descending).
std::vector<FilteredEdge> sorted_edges(const DistanceInput& input, value_t threshold);

/// Filtration order on edges.
inline bool edge_precedes(const FilteredEdge& a, const FilteredEdge& b) {
    if (a.weight != b.weight) return a.weight < b.weight;
    return edge_index(a.u, a.v) > edge_index(b.u, b.v);
}

/* **************************************************************************
 * Weighted filtrations
 * *************************************************************************/

struct WeightedGraph {
    std::size_t n = 0;
    std::vector<value_t> vertex_births;
    std::vector<FilteredEdge> edges;  // filtration order

    friend bool operator==(const WeightedGraph&, const WeightedGraph&) = default;
};

/// Distance-to-measure weight of every point: the r-mean of the distances to
/// its k nearest other points.
std::vector<value_t> dtm_weights(const DenseMatrix& m, std::size_t k, double r);

/// Edge value of two weighted vertices at distance d.
value_t mixed_edge_value(value_t d, value_t wi, value_t wj, MixExponent mix, WeightConvention convention);

WeightedGraph weighted_graph(const DenseMatrix& m, std::span<const value_t> weights, MixExponent mix,
                             WeightConvention convention = WeightConvention::vr_compatible);

/// Same as weighted_graph but keeps the dense layout (diagonal = weights).
DenseMatrix weighted_matrix(const DenseMatrix& m, std::span<const value_t> weights, MixExponent mix,
                            WeightConvention convention = WeightConvention::vr_compatible);

SparseGraph to_sparse_graph(const WeightedGraph& graph);
WeightedGraph to_weighted_graph(const DistanceInput& input, value_t threshold);

/* **************************************************************************
 * Implicit flag filtrations
 * *************************************************************************/

struct DiameterEntry {
    simplex_index_t index = 0;
    value_t diameter = 0;
};

struct Cofacet {
    simplex_index_t index = 0;
    value_t diameter = 0;
    bool odd = false;  // coboundary coefficient is -1
};

// State shared by both representations.
class FlagFiltrationBase {
public:
    std::size_t size() const { return n_; }
    value_t threshold() const { return threshold_; }
    unsigned max_dim() const { return max_dim_; }
    const BinomialTable& binomial() const { return binomial_; }
    value_t vertex_birth(vertex_t v) const { return births_[v]; }
    std::span<const value_t> vertex_births() const { return births_; }

    /// Vertices of a simplex, strictly decreasing.
    void vertices_of(simplex_index_t index, unsigned dim, std::vector<vertex_t>& out) const;

protected:
    FlagFiltrationBase(std::size_t n, std::vector<value_t> births, value_t threshold, unsigned max_dim);

    std::size_t n_;
    std::vector<value_t> births_;
    value_t threshold_;
    unsigned max_dim_;
    BinomialTable binomial_;
};

class DenseFlagFiltration : public FlagFiltrationBase {
public:
    DenseFlagFiltration(const DenseMatrix& m, value_t threshold, unsigned max_dim);

    value_t edge_value(vertex_t u, vertex_t v) const { return values_[u * n_ + v]; }
    value_t diameter_of(std::span<const vertex_t> vertices) const;
    value_t diameter_of(simplex_index_t index, unsigned dim) const;
    std::vector<FilteredEdge> edges() const;

    class CofacetEnumerator {
    public:
        explicit CofacetEnumerator(const DenseFlagFiltration& f) : f_(&f) {}

        void reset(DiameterEntry simplex, unsigned dim);
        /// With all_cofacets = false only vertices above the simplex's top vertex are inserted.
        bool next(Cofacet& out, bool all_cofacets = true);

    private:
        const DenseFlagFiltration* f_;
        std::vector<vertex_t> vertices_;
        value_t diameter_ = 0;
        unsigned dim_ = 0;
        std::int64_t j_ = -1;
        unsigned pos_ = 0;
        simplex_index_t above_ = 0;
        simplex_index_t below_ = 0;
    };

private:
    std::vector<value_t> values_;  // flag values, births folded in
};

class SparseFlagFiltration : public FlagFiltrationBase {
public:
    struct Neighbor {
        vertex_t vertex;
        value_t value;
    };

    SparseFlagFiltration(const SparseGraph& g, value_t threshold, unsigned max_dim);

    value_t edge_value(vertex_t u, vertex_t v) const;
    value_t diameter_of(std::span<const vertex_t> vertices) const;
    value_t diameter_of(simplex_index_t index, unsigned dim) const;
    std::vector<FilteredEdge> edges() const;
    std::size_t edge_count() const { return edge_count_; }

    /// Neighbors sorted by decreasing vertex.
    std::span<const Neighbor> neighbors(vertex_t v) const { return adjacency_[v]; }

    class CofacetEnumerator {
    public:
        explicit CofacetEnumerator(const SparseFlagFiltration& f) : f_(&f) {}

        void reset(DiameterEntry simplex, unsigned dim);
        bool next(Cofacet& out, bool all_cofacets = true);

    private:
        using iterator = std::vector<Neighbor>::const_iterator;

        const SparseFlagFiltration* f_;
        std::vector<vertex_t> vertices_;
        std::vector<iterator> cursors_;
        value_t diameter_ = 0;
        unsigned dim_ = 0;
        unsigned pos_ = 0;
        simplex_index_t above_ = 0;
        simplex_index_t below_ = 0;
    };

private:
    std::vector<std::vector<Neighbor>> adjacency_;
    std::size_t edge_count_ = 0;
};

/// All cofacets of a simplex of a raw input with diameter <= threshold, in
/// decreasing inserted-vertex order.
std::vector<Cofacet> cofacets(const DistanceInput& input, SimplexRank simplex, value_t threshold);

}  // namespace vrph
