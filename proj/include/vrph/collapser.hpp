#pragma once

// Edge collapse of weighted flag filtrations.
//
// An edge {u, v} present at time t is dominated when some vertex w adjacent to
// both u and v is also adjacent to every other common neighbor of u and v; its
// removal is then a strong collapse of the flag complex at time t. collapse()
// walks the edges from the last to the first and pushes each one forward to the
// first time it stops being dominated, dropping it if that never happens. Every
// step is a homotopy equivalence at every filtration value, so barcodes are
// preserved in all dimensions.

#include <optional>
#include <span>
#include <vector>

#include "vrph/core.hpp"
#include "vrph/filtration.hpp"

namespace vrph {

class NeighborhoodIndex {
public:
    struct Entry {
        vertex_t vertex;
        value_t value;
    };

    explicit NeighborhoodIndex(const WeightedGraph& graph);

    std::size_t size() const { return adjacency_.size(); }

    /// Neighbors sorted by vertex; removed edges keep their slot with value +inf.
    std::span<const Entry> neighbors(vertex_t v) const { return adjacency_[v]; }

    value_t value(vertex_t u, vertex_t v) const;
    void set_value(vertex_t u, vertex_t v, value_t value);

private:
    Entry* find(vertex_t u, vertex_t v);

    std::vector<std::vector<Entry>> adjacency_;
};

/// A vertex w outside {u, v}, adjacent at value <= t to u, v and every common
/// neighbor of u and v, or nothing.
std::optional<vertex_t> is_dominated(const FilteredEdge& edge, value_t t, const NeighborhoodIndex& nbr);

/// Smaller weighted graph on the same vertices whose flag filtration has the
/// same barcode. Edge values may move later, never earlier.
WeightedGraph collapse(const WeightedGraph& graph);

}  // namespace vrph
