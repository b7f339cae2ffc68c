#include "vrph/collapser.hpp"

#include <algorithm>

namespace vrph {

NeighborhoodIndex::NeighborhoodIndex(const WeightedGraph& graph) : adjacency_(graph.n) {
    for (const auto& e : graph.edges) {
        adjacency_[e.u].push_back({e.v, e.weight});
        adjacency_[e.v].push_back({e.u, e.weight});
    }
    for (auto& list : adjacency_)
        std::sort(list.begin(), list.end(), [](const Entry& a, const Entry& b) { return a.vertex < b.vertex; });
}

NeighborhoodIndex::Entry* NeighborhoodIndex::find(vertex_t u, vertex_t v) {
    auto& list = adjacency_[u];
    auto it = std::lower_bound(list.begin(), list.end(), v,
                               [](const Entry& a, vertex_t key) { return a.vertex < key; });
    return it != list.end() && it->vertex == v ? &*it : nullptr;
}

value_t NeighborhoodIndex::value(vertex_t u, vertex_t v) const {
    const auto& list = adjacency_[u];
    auto it = std::lower_bound(list.begin(), list.end(), v,
                               [](const Entry& a, vertex_t key) { return a.vertex < key; });
    return it != list.end() && it->vertex == v ? it->value : kInfinity;
}

void NeighborhoodIndex::set_value(vertex_t u, vertex_t v, value_t value) {
    if (Entry* a = find(u, v)) a->value = value;
    if (Entry* b = find(v, u)) b->value = value;
}

namespace {

struct Joiner {
    vertex_t vertex;
    value_t time;  // first time the vertex is adjacent to both endpoints
};

// Common neighbors of u and v with the time each one joins, by vertex.
void common_neighbors(const NeighborhoodIndex& nbr, vertex_t u, vertex_t v, std::vector<Joiner>& out) {
    out.clear();
    const auto a = nbr.neighbors(u);
    const auto b = nbr.neighbors(v);
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].vertex < b[j].vertex) {
            ++i;
        } else if (b[j].vertex < a[i].vertex) {
            ++j;
        } else {
            const value_t time = std::max(a[i].value, b[j].value);
            if (time != kInfinity) out.push_back({a[i].vertex, time});
            ++i;
            ++j;
        }
    }
}

// Does w see every member of `members` (sorted by vertex) at time t?
bool sees_all(const NeighborhoodIndex& nbr, vertex_t w, std::span<const vertex_t> members, value_t t) {
    const auto list = nbr.neighbors(w);
    std::size_t k = 0;
    for (vertex_t x : members) {
        if (x == w) continue;
        while (k < list.size() && list[k].vertex < x) ++k;
        if (k == list.size() || list[k].vertex != x || list[k].value > t) return false;
    }
    return true;
}

std::optional<vertex_t> find_witness(const NeighborhoodIndex& nbr, std::span<const vertex_t> members, value_t t) {
    for (vertex_t w : members)
        if (sees_all(nbr, w, members, t)) return w;
    return std::nullopt;
}

}  // namespace

std::optional<vertex_t> is_dominated(const FilteredEdge& edge, value_t t, const NeighborhoodIndex& nbr) {
    std::vector<Joiner> joiners;
    common_neighbors(nbr, edge.u, edge.v, joiners);
    std::vector<vertex_t> members;
    for (const auto& j : joiners)
        if (j.time <= t) members.push_back(j.vertex);
    return find_witness(nbr, members, t);
}

WeightedGraph collapse(const WeightedGraph& graph) {
    std::vector<FilteredEdge> edges = graph.edges;
    std::sort(edges.begin(), edges.end(), edge_precedes);
    NeighborhoodIndex nbr(WeightedGraph{graph.n, graph.vertex_births, edges});

    std::vector<Joiner> joiners;
    std::vector<vertex_t> members;
    std::vector<Joiner> pending;

    for (auto e = edges.rbegin(); e != edges.rend(); ++e) {
        const value_t start = e->weight;
        common_neighbors(nbr, e->u, e->v, joiners);

        members.clear();
        pending.clear();
        for (const auto& j : joiners) {
            if (j.time <= start)
                members.push_back(j.vertex);
            else
                pending.push_back(j);
        }
        auto witness = find_witness(nbr, members, start);
        if (!witness) continue;

        std::sort(pending.begin(), pending.end(),
                  [](const Joiner& a, const Joiner& b) { return a.time < b.time; });

        // Domination can only be lost when the common neighborhood grows.
        value_t new_value = kInfinity;
        for (std::size_t i = 0; i < pending.size();) {
            const value_t t = pending[i].time;
            bool still = true;
            std::size_t k = i;
            for (; k < pending.size() && pending[k].time == t; ++k) {
                const vertex_t x = pending[k].vertex;
                members.insert(std::lower_bound(members.begin(), members.end(), x), x);
                if (still && nbr.value(*witness, x) > t) still = false;
            }
            i = k;
            if (still) continue;
            witness = find_witness(nbr, members, t);
            if (!witness) {
                new_value = t;
                break;
            }
        }
        e->weight = new_value;
        nbr.set_value(e->u, e->v, new_value);
    }

    WeightedGraph out;
    out.n = graph.n;
    out.vertex_births = graph.vertex_births;
    for (const auto& e : edges)
        if (e.weight != kInfinity) out.edges.push_back(e);
    std::sort(out.edges.begin(), out.edges.end(), edge_precedes);
    return out;
}

}  // namespace vrph
