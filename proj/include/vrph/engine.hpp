#pragma once

// Pipeline: validate -> weight -> threshold -> collapse -> reduce.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vrph/core.hpp"
#include "vrph/reduction.hpp"

namespace vrph {

struct StageTimes {
    double validate = 0;   // seconds
    double weighting = 0;
    double threshold = 0;
    double collapse = 0;
    double reduction = 0;
    double total = 0;
};

struct PipelineStats {
    std::size_t points = 0;
    unsigned threads = 1;
    value_t threshold = kInfinity;                  // the one actually used
    std::optional<value_t> enclosing_radius;        // dense inputs only
    std::size_t edges_before_collapse = 0;          // already thresholded
    std::size_t edges_after_collapse = 0;
    double fill_ratio = 0;                          // edges / (n choose 2) fed to the reducer
    bool collapsed = false;
    StageTimes times;
    std::vector<DimensionStats> dimensions;

    /// Flat key=value view, stable key order.
    std::vector<std::pair<std::string, std::string>> entries() const;
};

struct PipelineReport {
    Barcode barcode;
    PipelineStats stats;
};

/// Pairwise Euclidean distances, zero diagonal.
DenseMatrix euclidean_distances(const PointCloud& cloud);

class Engine {
public:
    /// threads == 0 picks the hardware concurrency.
    explicit Engine(unsigned threads = 0, bool pin = false);

    unsigned threads() const { return pool_.size(); }

    /// params.threads and params.pin_threads are ignored; the engine's pool is used.
    PipelineReport compute(const DistanceInput& input, const ComputeParams& params);
    PipelineReport compute(const PointCloud& cloud, const ComputeParams& params);

private:
    WorkPool pool_;
};

/// One-shot helpers that build an engine sized by params.threads.
PipelineReport compute_persistence(const DistanceInput& input, const ComputeParams& params);
PipelineReport compute_persistence(const PointCloud& cloud, const ComputeParams& params);

unsigned default_thread_count();

}  // namespace vrph
