#include "vrph/reduction.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <utility>

#if defined(__linux__)
#include <pthread.h>
#include <sched.h>
#endif

namespace vrph {

/* **************************************************************************
 * Thread pool
 * *************************************************************************/

WorkPool::WorkPool(unsigned threads, bool pin) {
    if (threads == 0) throw Error(ErrorKind::invalid_argument, "a work pool needs at least one thread");
    workers_.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) workers_.emplace_back([this, i] { loop(i); });
#if defined(__linux__)
    if (pin) {
        const unsigned cpus = std::max(1u, std::thread::hardware_concurrency());
        for (unsigned i = 0; i < threads; ++i) {
            cpu_set_t set;
            CPU_ZERO(&set);
            CPU_SET(i % cpus, &set);
            pthread_setaffinity_np(workers_[i].native_handle(), sizeof(set), &set);
        }
    }
#else
    (void)pin;
#endif
}

WorkPool::~WorkPool() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    wake_.notify_all();
    for (auto& t : workers_) t.join();
}

std::vector<std::thread::id> WorkPool::thread_ids() const {
    std::vector<std::thread::id> ids;
    for (const auto& t : workers_) ids.push_back(t.get_id());
    return ids;
}

void WorkPool::loop(unsigned worker) {
    std::uint64_t seen = 0;
    std::unique_lock lock(mutex_);
    while (true) {
        wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
        if (stopping_) return;
        seen = generation_;
        const auto* task = task_;
        lock.unlock();
        try {
            (*task)(worker);
        } catch (...) {
            std::lock_guard guard(mutex_);
            if (!error_) error_ = std::current_exception();
        }
        lock.lock();
        if (--pending_ == 0) done_.notify_all();
    }
}

void WorkPool::run(const std::function<void(unsigned)>& task) {
    std::unique_lock lock(mutex_);
    task_ = &task;
    pending_ = size();
    error_ = nullptr;
    ++generation_;
    wake_.notify_all();
    done_.wait(lock, [&] { return pending_ == 0; });
    task_ = nullptr;
    if (error_) {
        auto error = std::exchange(error_, nullptr);
        std::rethrow_exception(error);
    }
}

void run_parallel(WorkPool& pool, std::size_t count,
                  const std::function<void(std::size_t, std::size_t, unsigned)>& body) {
    if (count == 0) return;
    const std::size_t chunk = std::max<std::size_t>(1, count / (8 * static_cast<std::size_t>(pool.size())));
    std::atomic<std::size_t> next{0};
    pool.run([&](unsigned worker) {
        while (true) {
            const std::size_t begin = next.fetch_add(chunk, std::memory_order_relaxed);
            if (begin >= count) break;
            body(begin, std::min(begin + chunk, count), worker);
        }
    });
}

/* **************************************************************************
 * Pivot table
 * *************************************************************************/

namespace {

std::uint64_t mix_bits(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

}  // namespace

PivotTable::PivotTable(std::size_t columns) {
    std::size_t capacity = 16;
    while (capacity < 2 * columns) capacity <<= 1;
    slots_ = std::make_unique<Slot[]>(capacity);
    mask_ = capacity - 1;
}

std::size_t PivotTable::slot_for(simplex_index_t pivot) {
    std::size_t h = mix_bits(pivot) & mask_;
    for (std::size_t probes = 0; probes <= mask_; ++probes, h = (h + 1) & mask_) {
        auto key = slots_[h].key.load(std::memory_order_acquire);
        if (key == pivot) return h;
        if (key == kEmpty) {
            if (slots_[h].key.compare_exchange_strong(key, pivot, std::memory_order_acq_rel))
                return h;
            if (key == pivot) return h;
        }
    }
    throw std::logic_error("pivot table is full");
}

ClaimResult PivotTable::claim(simplex_index_t pivot, column_t column) {
    auto& slot = slots_[slot_for(pivot)].column;
    auto current = slot.load(std::memory_order_acquire);
    while (true) {
        if (current == kEmpty) {
            if (slot.compare_exchange_weak(current, column, std::memory_order_acq_rel, std::memory_order_acquire))
                return {ClaimOutcome::claimed, 0};
            continue;
        }
        assert(current != column);
        if (current < column) return {ClaimOutcome::loses_to, current};
        if (slot.compare_exchange_weak(current, column, std::memory_order_acq_rel, std::memory_order_acquire))
            return {ClaimOutcome::displaces, current};
    }
}

std::optional<column_t> PivotTable::owner(simplex_index_t pivot) const {
    std::size_t h = mix_bits(pivot) & mask_;
    for (std::size_t probes = 0; probes <= mask_; ++probes, h = (h + 1) & mask_) {
        const auto key = slots_[h].key.load(std::memory_order_acquire);
        if (key == kEmpty) return std::nullopt;
        if (key == pivot) {
            const auto col = slots_[h].column.load(std::memory_order_acquire);
            if (col == kEmpty) return std::nullopt;
            return col;
        }
    }
    return std::nullopt;
}

/* **************************************************************************
 * Dimension 0
 * *************************************************************************/

namespace {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), vertex_t{0});
    }

    vertex_t find(vertex_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // Returns the surviving root.
    vertex_t link(vertex_t a, vertex_t b) {
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
        return a;
    }

private:
    std::vector<vertex_t> parent_;
    std::vector<std::uint8_t> rank_;
};

}  // namespace

Dim0Result compute_dim0(std::span<const FilteredEdge> edges, std::span<const value_t> vertex_births,
                        value_t threshold) {
    const std::size_t n = vertex_births.size();
    Dim0Result result;
    UnionFind components(n);
    std::vector<value_t> birth(vertex_births.begin(), vertex_births.end());

    for (const auto& e : edges) {
        const vertex_t a = components.find(e.u);
        const vertex_t b = components.find(e.v);
        if (a == b) continue;
        // Elder rule: the component born last dies.
        const value_t younger = std::max(birth[a], birth[b]);
        const value_t elder = std::min(birth[a], birth[b]);
        if (e.weight > younger) result.bars.push_back({0, younger, e.weight});
        birth[components.link(a, b)] = elder;
        result.cleared.push_back(edge_index(e.u, e.v));
    }
    for (vertex_t v = 0; v < n; ++v)
        if (components.find(v) == v && vertex_births[v] <= threshold)
            result.bars.push_back({0, birth[v], kInfinity});
    std::sort(result.cleared.begin(), result.cleared.end());
    return result;
}

/* **************************************************************************
 * Coboundary reduction
 * *************************************************************************/

namespace {

struct Term {
    simplex_index_t index;
    value_t diameter;
    coefficient_t coeff;
};

// True when a comes later in the filtration than b, so the heap top is the
// earliest entry.
struct LaterInFiltration {
    bool operator()(const Term& a, const Term& b) const {
        return a.diameter > b.diameter || (a.diameter == b.diameter && a.index < b.index);
    }
};

// Reduced state of one column, published before its pivot is claimed and
// never modified afterwards.
struct Snapshot {
    simplex_index_t pivot;
    value_t pivot_diameter;
    coefficient_t pivot_coeff;
    std::vector<Term> combination;
};

class WorkingColumn {
public:
    void clear() { heap_.clear(); }
    void push(const Term& t) {
        heap_.push_back(t);
        std::push_heap(heap_.begin(), heap_.end(), LaterInFiltration{});
    }

    // Earliest entry with nonzero merged coefficient; stays in the column.
    std::optional<Term> pivot(const FieldTable& field) {
        while (!heap_.empty()) {
            Term top = pop();
            while (!heap_.empty() && heap_.front().index == top.index) top.coeff = field.add(top.coeff, pop().coeff);
            if (top.coeff != 0) {
                push(top);
                return top;
            }
        }
        return std::nullopt;
    }

private:
    Term pop() {
        std::pop_heap(heap_.begin(), heap_.end(), LaterInFiltration{});
        Term t = heap_.back();
        heap_.pop_back();
        return t;
    }

    std::vector<Term> heap_;
};

bool contains(std::span<const simplex_index_t> sorted, simplex_index_t key) {
    return std::binary_search(sorted.begin(), sorted.end(), key);
}

template <typename F>
struct ApparentOwner {
    DiameterEntry facet;
    bool odd;  // sign of the pivot in the facet's coboundary
};

// First facet of `simplex` (dimension dim) with the same diameter, i.e. the
// youngest such facet.
template <typename F>
std::optional<DiameterEntry> zero_facet(const F& f, DiameterEntry simplex, unsigned dim,
                                        std::vector<vertex_t>& vertices, std::vector<vertex_t>& facet) {
    f.vertices_of(simplex.index, dim, vertices);
    const auto& binomial = f.binomial();
    for (std::size_t drop = 0; drop < vertices.size(); ++drop) {
        facet.clear();
        simplex_index_t index = 0;
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            if (i == drop) continue;
            index += binomial(vertices[i], dim - static_cast<unsigned>(facet.size()));
            facet.push_back(vertices[i]);
        }
        if (f.diameter_of(facet) == simplex.diameter) return DiameterEntry{index, simplex.diameter};
    }
    return std::nullopt;
}

// First cofacet with the same diameter, i.e. the oldest such cofacet.
template <typename F>
std::optional<Cofacet> zero_cofacet(typename F::CofacetEnumerator& cofacets, DiameterEntry simplex, unsigned dim) {
    cofacets.reset(simplex, dim);
    Cofacet c;
    while (cofacets.next(c))
        if (c.diameter == simplex.diameter) return c;
    return std::nullopt;
}

template <typename F>
class DimensionReducer {
public:
    DimensionReducer(const F& f, unsigned dim, std::span<const DiameterEntry> simplices,
                     std::span<const simplex_index_t> cleared, const FieldTable& field, WorkPool& pool,
                     const ReductionOptions& options)
        : f_(f), dim_(dim), cleared_(cleared), field_(field), pool_(pool), options_(options) {
        columns_.reserve(simplices.size());
        for (const auto& s : simplices) {
            if (options_.clearing && contains(cleared_, s.index)) {
                ++stats_.cleared;
                continue;
            }
            columns_.push_back(s);
        }
        std::sort(columns_.begin(), columns_.end(), [](const DiameterEntry& a, const DiameterEntry& b) {
            return a.diameter > b.diameter || (a.diameter == b.diameter && a.index < b.index);
        });
        stats_.dim = dim;
        stats_.simplices = simplices.size();
        pivots_ = std::make_unique<PivotTable>(columns_.size());
        published_ = std::make_unique<std::atomic<const Snapshot*>[]>(columns_.size());
        for (std::size_t i = 0; i < columns_.size(); ++i) published_[i].store(nullptr, std::memory_order_relaxed);
        for (unsigned w = 0; w < pool.size(); ++w) workers_.emplace_back(f_);
    }

    DimensionResult run() {
        run_parallel(pool_, columns_.size(), [this](std::size_t begin, std::size_t end, unsigned w) {
            auto& worker = workers_[w];
            for (std::size_t i = begin; i < end; ++i) process(worker, i);
        });

        DimensionResult result;
        for (const auto& w : workers_) {
            stats_.apparent += w.apparent;
            stats_.emergent += w.emergent;
            stats_.reduced += w.reduced;
            result.pivots.insert(result.pivots.end(), w.apparent_pivots.begin(), w.apparent_pivots.end());
            for (column_t c : w.essential) result.bars.push_back({dim_, columns_[c].diameter, kInfinity});
            stats_.essential += w.essential.size();
        }
        stats_.zero_persistence = stats_.apparent;
        pivots_->for_each([&](simplex_index_t pivot, column_t column) {
            const Snapshot* s = published_[column].load(std::memory_order_acquire);
            assert(s != nullptr && s->pivot == pivot);
            result.pivots.push_back(pivot);
            if (s->pivot_diameter > columns_[column].diameter)
                result.bars.push_back({dim_, columns_[column].diameter, s->pivot_diameter});
            else
                ++stats_.zero_persistence;
        });
        std::sort(result.pivots.begin(), result.pivots.end());
        result.stats = stats_;
        return result;
    }

private:
    struct Worker {
        explicit Worker(const F& f) : cofacets(f), probe(f) {}

        typename F::CofacetEnumerator cofacets;
        typename F::CofacetEnumerator probe;
        WorkingColumn column;
        std::vector<Term> combination;
        std::vector<vertex_t> vertices;
        std::vector<vertex_t> facet;
        std::deque<Snapshot> arena;
        std::vector<column_t> essential;
        std::vector<simplex_index_t> apparent_pivots;
        std::size_t apparent = 0;
        std::size_t emergent = 0;
        std::size_t reduced = 0;
    };

    coefficient_t sign(bool odd) const { return odd ? field_.modulus() - 1 : 1; }

    void add_simplex(Worker& w, DiameterEntry simplex, coefficient_t coeff) {
        w.combination.push_back({simplex.index, simplex.diameter, coeff});
        w.cofacets.reset(simplex, dim_);
        Cofacet c;
        while (w.cofacets.next(c))
            w.column.push({c.index, c.diameter, c.odd ? field_.neg(coeff) : coeff});
    }

    void add_snapshot(Worker& w, const Snapshot& s, coefficient_t factor) {
        for (const auto& t : s.combination) add_simplex(w, {t.index, t.diameter}, field_.mul(factor, t.coeff));
    }

    // The facet that owns `pivot` through an apparent pair, if any.
    std::optional<ApparentOwner<F>> apparent_owner(Worker& w, const Term& pivot) {
        auto facet = zero_facet(f_, DiameterEntry{pivot.index, pivot.diameter}, dim_ + 1, w.vertices, w.facet);
        if (!facet) return std::nullopt;
        auto cofacet = zero_cofacet<F>(w.probe, *facet, dim_);
        if (!cofacet || cofacet->index != pivot.index) return std::nullopt;
        return ApparentOwner<F>{*facet, cofacet->odd};
    }

    const Snapshot* publish(Worker& w, column_t column, const Term& pivot) {
        auto& terms = w.combination;
        std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.index < b.index; });
        std::size_t out = 0;
        for (std::size_t i = 0; i < terms.size();) {
            Term t = terms[i++];
            while (i < terms.size() && terms[i].index == t.index) t.coeff = field_.add(t.coeff, terms[i++].coeff);
            if (t.coeff != 0) terms[out++] = t;
        }
        terms.resize(out);
        const Snapshot& s = w.arena.emplace_back(Snapshot{pivot.index, pivot.diameter, pivot.coeff, terms});
        published_[column].store(&s, std::memory_order_release);
        return &s;
    }

    // Emergent pair: the first same-diameter cofacet is the pivot, and if
    // nobody earlier owns it the column is done without building its coboundary.
    // Returns true when the column was settled (possibly adopting another one).
    bool try_emergent(Worker& w, column_t& current) {
        const DiameterEntry col = columns_[current];
        auto cofacet = zero_cofacet<F>(w.probe, col, dim_);
        if (!cofacet) return false;
        const Term pivot{cofacet->index, cofacet->diameter, sign(cofacet->odd)};
        if (options_.apparent_pairs && apparent_owner(w, pivot)) return false;
        const auto owner = pivots_->owner(pivot.index);
        if (owner && *owner < current) return false;
        w.combination.assign(1, Term{col.index, col.diameter, 1});
        publish(w, current, pivot);
        const auto r = pivots_->claim(pivot.index, current);
        if (r.outcome == ClaimOutcome::loses_to) return false;
        ++w.emergent;
        if (r.outcome == ClaimOutcome::displaces) {
            current = r.other;
            return reduce(w, current);
        }
        return true;
    }

    void process(Worker& w, column_t position) {
        const DiameterEntry col = columns_[position];
        if (options_.apparent_pairs) {
            if (auto cofacet = zero_cofacet<F>(w.probe, col, dim_)) {
                auto youngest = zero_facet(f_, DiameterEntry{cofacet->index, cofacet->diameter}, dim_ + 1,
                                           w.vertices, w.facet);
                if (youngest && youngest->index == col.index) {
                    ++w.apparent;
                    w.apparent_pivots.push_back(cofacet->index);
                    return;
                }
            }
        }
        ++w.reduced;
        column_t current = position;
        if (options_.emergent_pairs && try_emergent(w, current)) return;
        reduce(w, current);
    }

    // Reduces `current` until its pivot is claimed or it vanishes, adopting any
    // later column it pushes out of the table. Always returns true.
    bool reduce(Worker& w, column_t current) {
        while (true) {
            w.column.clear();
            w.combination.clear();
            if (const Snapshot* s = published_[current].load(std::memory_order_acquire))
                add_snapshot(w, *s, 1);
            else
                add_simplex(w, columns_[current], 1);

            bool adopted = false;
            auto pivot = w.column.pivot(field_);
            while (pivot && !adopted) {
                if (options_.apparent_pairs) {
                    if (auto owner = apparent_owner(w, *pivot)) {
                        const coefficient_t b = sign(owner->odd);
                        add_simplex(w, owner->facet, field_.neg(field_.mul(pivot->coeff, field_.inverse(b))));
                        pivot = w.column.pivot(field_);
                        continue;
                    }
                }
                const auto owner = pivots_->owner(pivot->index);
                if (owner && *owner < current) {
                    const Snapshot* s = published_[*owner].load(std::memory_order_acquire);
                    if (s == nullptr || s->pivot != pivot->index) continue;  // owner moved on, look again
                    add_snapshot(w, *s, field_.neg(field_.mul(pivot->coeff, field_.inverse(s->pivot_coeff))));
                    pivot = w.column.pivot(field_);
                    continue;
                }
                publish(w, current, *pivot);
                const auto r = pivots_->claim(pivot->index, current);
                if (r.outcome == ClaimOutcome::claimed) return true;
                if (r.outcome == ClaimOutcome::displaces) {
                    current = r.other;
                    adopted = true;
                }
                // loses_to: an earlier column got there first; add it on the next pass.
            }
            if (!adopted) {
                if (!contains(cleared_, columns_[current].index)) w.essential.push_back(current);
                return true;
            }
        }
    }

    const F& f_;
    unsigned dim_;
    std::span<const simplex_index_t> cleared_;
    const FieldTable& field_;
    WorkPool& pool_;
    const ReductionOptions& options_;
    std::vector<DiameterEntry> columns_;
    std::unique_ptr<PivotTable> pivots_;
    std::unique_ptr<std::atomic<const Snapshot*>[]> published_;
    std::deque<Worker> workers_;
    DimensionStats stats_;
};

}  // namespace

template <typename F>
std::optional<DiameterEntry> find_apparent_pair(const F& f, DiameterEntry column, unsigned dim) {
    typename F::CofacetEnumerator cofacets(f);
    auto cofacet = zero_cofacet<F>(cofacets, column, dim);
    if (!cofacet) return std::nullopt;
    std::vector<vertex_t> vertices;
    std::vector<vertex_t> facet;
    const DiameterEntry candidate{cofacet->index, cofacet->diameter};
    auto youngest = zero_facet(f, candidate, dim + 1, vertices, facet);
    if (!youngest || youngest->index != column.index) return std::nullopt;
    return candidate;
}

template <typename F>
DimensionResult reduce_dimension(const F& f, unsigned dim, std::span<const DiameterEntry> simplices,
                                 std::span<const simplex_index_t> cleared, const FieldTable& field, WorkPool& pool,
                                 const ReductionOptions& options) {
    if (dim == 0) throw Error(ErrorKind::invalid_argument, "dimension 0 is handled by compute_dim0");
    if (dim > f.max_dim()) throw Error(ErrorKind::invalid_argument, "dimension exceeds the filtration's range");
    DimensionReducer<F> reducer(f, dim, simplices, cleared, field, pool, options);
    return reducer.run();
}

template <typename F>
std::vector<DiameterEntry> assemble_cofacets(const F& f, std::span<const DiameterEntry> simplices, unsigned dim,
                                             WorkPool& pool) {
    std::vector<std::vector<DiameterEntry>> parts(pool.size());
    std::vector<std::unique_ptr<typename F::CofacetEnumerator>> enumerators;
    for (unsigned w = 0; w < pool.size(); ++w)
        enumerators.push_back(std::make_unique<typename F::CofacetEnumerator>(f));
    run_parallel(pool, simplices.size(), [&](std::size_t begin, std::size_t end, unsigned w) {
        auto& e = *enumerators[w];
        auto& out = parts[w];
        Cofacet c;
        for (std::size_t i = begin; i < end; ++i) {
            e.reset(simplices[i], dim);
            while (e.next(c, false)) out.push_back({c.index, c.diameter});
        }
    });
    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    std::vector<DiameterEntry> result;
    result.reserve(total);
    for (auto& p : parts) result.insert(result.end(), p.begin(), p.end());
    return result;
}

template <typename F>
Barcode compute_barcode(const F& f, unsigned max_dim, const FieldTable& field, WorkPool& pool,
                        const ReductionOptions& options, std::vector<DimensionStats>* stats) {
    if (max_dim > f.max_dim()) throw Error(ErrorKind::invalid_argument, "dimension exceeds the filtration's range");
    Barcode barcode(max_dim);
    const auto edges = f.edges();
    auto dim0 = compute_dim0(edges, f.vertex_births(), f.threshold());
    for (const auto& bar : dim0.bars) barcode.add(bar);
    if (stats) stats->push_back(DimensionStats{0, f.size(), 0, 0, 0, edges.size(), 0, 0});

    std::vector<DiameterEntry> simplices;
    simplices.reserve(edges.size());
    for (const auto& e : edges) simplices.push_back({edge_index(e.u, e.v), e.weight});
    std::vector<simplex_index_t> cleared = std::move(dim0.cleared);

    for (unsigned d = 1; d <= max_dim; ++d) {
        auto result = reduce_dimension(f, d, simplices, cleared, field, pool, options);
        for (const auto& bar : result.bars) barcode.add(bar);
        if (stats) stats->push_back(result.stats);
        if (d == max_dim) break;
        simplices = assemble_cofacets(f, simplices, d, pool);
        cleared = std::move(result.pivots);
    }
    barcode.canonicalize();
    return barcode;
}

#define VRPH_INSTANTIATE_REDUCTION(F)                                                                         \
    template std::optional<DiameterEntry> find_apparent_pair<F>(const F&, DiameterEntry, unsigned);            \
    template DimensionResult reduce_dimension<F>(const F&, unsigned, std::span<const DiameterEntry>,           \
                                                 std::span<const simplex_index_t>, const FieldTable&,          \
                                                 WorkPool&, const ReductionOptions&);                          \
    template std::vector<DiameterEntry> assemble_cofacets<F>(const F&, std::span<const DiameterEntry>, unsigned, \
                                                             WorkPool&);                                       \
    template Barcode compute_barcode<F>(const F&, unsigned, const FieldTable&, WorkPool&, const ReductionOptions&, \
                                        std::vector<DimensionStats>*);

VRPH_INSTANTIATE_REDUCTION(DenseFlagFiltration)
VRPH_INSTANTIATE_REDUCTION(SparseFlagFiltration)

}  // namespace vrph
