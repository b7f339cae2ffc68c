#pragma once

// Barcode computation: union-find in dimension 0, then implicit coboundary
// reduction with clearing, apparent and emergent pairs in dimensions >= 1.
//
// Columns of dimension d are the d-simplices in reverse filtration order.
// Column additions only ever go from an earlier column (in that order) into a
// later one, so any interleaving of the workers ends in the same pairing.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "vrph/core.hpp"
#include "vrph/filtration.hpp"

namespace vrph {

/* **************************************************************************
 * Thread pool
 * *************************************************************************/

class WorkPool {
public:
    /// Starts `threads` workers that live until the pool is destroyed.
    explicit WorkPool(unsigned threads, bool pin = false);
    ~WorkPool();

    WorkPool(const WorkPool&) = delete;
    WorkPool& operator=(const WorkPool&) = delete;

    unsigned size() const { return static_cast<unsigned>(workers_.size()); }
    std::vector<std::thread::id> thread_ids() const;

    /// Runs task(worker) once on every worker and waits for all of them. The
    /// first exception thrown by a worker is rethrown here.
    void run(const std::function<void(unsigned)>& task);

private:
    void loop(unsigned worker);

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(unsigned)>* task_ = nullptr;
    std::uint64_t generation_ = 0;
    unsigned pending_ = 0;
    bool stopping_ = false;
    std::exception_ptr error_;
};

/// Splits [0, count) into dynamically claimed chunks of
/// max(1, count / (8 * workers)) items; returns after every item is done.
void run_parallel(WorkPool& pool, std::size_t count,
                  const std::function<void(std::size_t begin, std::size_t end, unsigned worker)>& body);

/* **************************************************************************
 * Pivot table
 * *************************************************************************/

using column_t = std::uint64_t;

enum class ClaimOutcome { claimed, loses_to, displaces };

struct ClaimResult {
    ClaimOutcome outcome;
    column_t other = 0;  // owner that won, or the column that was pushed out
};

// Open-addressed map from pivot index to the owning column, fixed capacity.
// Lower column numbers come first in reduction order and win collisions.
class PivotTable {
public:
    explicit PivotTable(std::size_t columns);

    PivotTable(const PivotTable&) = delete;
    PivotTable& operator=(const PivotTable&) = delete;

    std::size_t capacity() const { return mask_ + 1; }

    ClaimResult claim(simplex_index_t pivot, column_t column);
    std::optional<column_t> owner(simplex_index_t pivot) const;

    template <typename F>
    void for_each(F&& f) const {
        for (std::size_t i = 0; i <= mask_; ++i) {
            const auto key = slots_[i].key.load(std::memory_order_acquire);
            const auto col = slots_[i].column.load(std::memory_order_acquire);
            if (key != kEmpty && col != kEmpty) f(key, col);
        }
    }

private:
    static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};

    struct Slot {
        std::atomic<std::uint64_t> key{kEmpty};
        std::atomic<std::uint64_t> column{kEmpty};
    };

    std::size_t slot_for(simplex_index_t pivot);

    std::unique_ptr<Slot[]> slots_;
    std::size_t mask_;
};

/* **************************************************************************
 * Dimension 0
 * *************************************************************************/

struct Dim0Result {
    std::vector<PersistenceBar> bars;
    std::vector<simplex_index_t> cleared;  // merging edges, sorted
};

/// Elder-rule union-find over edges in filtration order. Vertices born after
/// `threshold` are not part of the complex.
Dim0Result compute_dim0(std::span<const FilteredEdge> edges, std::span<const value_t> vertex_births,
                        value_t threshold = kInfinity);

/* **************************************************************************
 * Dimensions >= 1
 * *************************************************************************/

struct DimensionStats {
    unsigned dim = 0;
    std::size_t simplices = 0;
    std::size_t cleared = 0;
    std::size_t apparent = 0;
    std::size_t emergent = 0;
    std::size_t reduced = 0;
    std::size_t zero_persistence = 0;
    std::size_t essential = 0;
};

struct DimensionResult {
    std::vector<PersistenceBar> bars;
    std::vector<simplex_index_t> pivots;  // paired (d+1)-simplices, sorted
    DimensionStats stats;
};

/// Zero-persistence cofacet paired with `column` by the apparent pair rule.
template <typename Filtration>
std::optional<DiameterEntry> find_apparent_pair(const Filtration& f, DiameterEntry column, unsigned dim);

/// Reduces the coboundary columns of the d-simplices `simplices` (all of
/// them, diameter <= threshold). `cleared` holds the d-simplices already paired
/// by dimension d - 1, sorted.
template <typename Filtration>
DimensionResult reduce_dimension(const Filtration& f, unsigned dim, std::span<const DiameterEntry> simplices,
                                 std::span<const simplex_index_t> cleared, const FieldTable& field,
                                 WorkPool& pool, const ReductionOptions& options = {});

/// The (d+1)-simplices with diameter <= threshold, given all d-simplices.
template <typename Filtration>
std::vector<DiameterEntry> assemble_cofacets(const Filtration& f, std::span<const DiameterEntry> simplices,
                                             unsigned dim, WorkPool& pool);

/// Full barcode in dimensions 0..max_dim.
template <typename Filtration>
Barcode compute_barcode(const Filtration& f, unsigned max_dim, const FieldTable& field, WorkPool& pool,
                        const ReductionOptions& options = {}, std::vector<DimensionStats>* stats = nullptr);

#define VRPH_DECLARE_REDUCTION(F)                                                                          \
    extern template std::optional<DiameterEntry> find_apparent_pair<F>(const F&, DiameterEntry, unsigned); \
    extern template DimensionResult reduce_dimension<F>(const F&, unsigned, std::span<const DiameterEntry>, \
                                                        std::span<const simplex_index_t>, const FieldTable&, \
                                                        WorkPool&, const ReductionOptions&);                \
    extern template std::vector<DiameterEntry> assemble_cofacets<F>(const F&, std::span<const DiameterEntry>, \
                                                                    unsigned, WorkPool&);                   \
    extern template Barcode compute_barcode<F>(const F&, unsigned, const FieldTable&, WorkPool&,           \
                                               const ReductionOptions&, std::vector<DimensionStats>*);

VRPH_DECLARE_REDUCTION(DenseFlagFiltration)
VRPH_DECLARE_REDUCTION(SparseFlagFiltration)

#undef VRPH_DECLARE_REDUCTION

}  // namespace vrph
