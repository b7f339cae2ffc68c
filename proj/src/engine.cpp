#include "vrph/engine.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "vrph/collapser.hpp"
#include "vrph/filtration.hpp"
#include "vrph/io.hpp"

namespace vrph {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<value_t> resolve_weights(const DenseMatrix& m, const Weighting& weighting, MixExponent& mix) {
    if (const auto* explicit_weights = std::get_if<ExplicitWeights>(&weighting)) {
        if (explicit_weights->weights.size() != m.n)
            throw Error(ErrorKind::invalid_argument, "need exactly one weight per point");
        for (value_t w : explicit_weights->weights)
            if (!std::isfinite(w)) throw Error(ErrorKind::non_finite_entry, "weights must be finite");
        mix = explicit_weights->mix;
        return explicit_weights->weights;
    }
    const auto& dtm = std::get<DtmWeights>(weighting);
    mix = dtm.mix;
    if (m.n <= 1) return std::vector<value_t>(m.n, 0.0);
    const std::size_t k = dtm.neighbors ? *dtm.neighbors : std::min<std::size_t>(10, m.n - 1);
    return dtm_weights(m, k, dtm.exponent);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> PipelineStats::entries() const {
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("points", std::to_string(points));
    out.emplace_back("threads", std::to_string(threads));
    out.emplace_back("threshold", format_value(threshold));
    out.emplace_back("enclosing_radius", enclosing_radius ? format_value(*enclosing_radius) : "none");
    out.emplace_back("collapse", collapsed ? "true" : "false");
    out.emplace_back("edges_before_collapse", std::to_string(edges_before_collapse));
    out.emplace_back("edges_after_collapse", std::to_string(edges_after_collapse));
    out.emplace_back("fill_ratio", format_value(fill_ratio));
    out.emplace_back("time_validate", format_value(times.validate));
    out.emplace_back("time_weighting", format_value(times.weighting));
    out.emplace_back("time_threshold", format_value(times.threshold));
    out.emplace_back("time_collapse", format_value(times.collapse));
    out.emplace_back("time_reduction", format_value(times.reduction));
    out.emplace_back("time_total", format_value(times.total));
    for (const auto& d : dimensions) {
        const std::string p = "dim" + std::to_string(d.dim) + "_";
        out.emplace_back(p + "simplices", std::to_string(d.simplices));
        out.emplace_back(p + "cleared", std::to_string(d.cleared));
        out.emplace_back(p + "apparent", std::to_string(d.apparent));
        out.emplace_back(p + "emergent", std::to_string(d.emergent));
        out.emplace_back(p + "reduced", std::to_string(d.reduced));
        out.emplace_back(p + "zero_persistence", std::to_string(d.zero_persistence));
        out.emplace_back(p + "essential", std::to_string(d.essential));
    }
    return out;
}

DenseMatrix euclidean_distances(const PointCloud& cloud) {
    const std::size_t n = cloud.size();
    const std::size_t dim = cloud.dimension;
    if (dim != 0 && cloud.coordinates.size() % dim != 0)
        throw Error(ErrorKind::ragged_rows, "coordinate count is not a multiple of the dimension");
    for (value_t x : cloud.coordinates)
        if (!std::isfinite(x)) throw Error(ErrorKind::non_finite_entry, "point coordinates must be finite");
    DenseMatrix m(n, std::vector<value_t>(n * n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            value_t sum = 0;
            for (std::size_t k = 0; k < dim; ++k) {
                const value_t diff = cloud.coordinates[i * dim + k] - cloud.coordinates[j * dim + k];
                sum += diff * diff;
            }
            m.at(i, j) = m.at(j, i) = std::sqrt(sum);
        }
    return m;
}

unsigned default_thread_count() { return std::max(1u, std::thread::hardware_concurrency()); }

Engine::Engine(unsigned threads, bool pin) : pool_(threads == 0 ? default_thread_count() : threads, pin) {}

PipelineReport Engine::compute(const PointCloud& cloud, const ComputeParams& params) {
    params.validate();
    return compute(DistanceInput(euclidean_distances(cloud)), params);
}

PipelineReport Engine::compute(const DistanceInput& raw, const ComputeParams& params) {
    const auto started = Clock::now();
    params.validate();
    const FieldTable field = build_field_table(params.modulus);

    PipelineReport report{Barcode(params.max_dim), {}};
    auto& stats = report.stats;
    stats.threads = threads();
    stats.collapsed = params.collapse;

    auto stage = Clock::now();
    check_index_capacity(raw.size(), params.max_dim);
    DistanceInput input = validate_input(raw);
    const std::size_t n = input.size();
    stats.points = n;
    stats.times.validate = seconds_since(stage);

    stage = Clock::now();
    if (!std::holds_alternative<std::monostate>(params.weighting)) {
        if (!input.is_dense())
            throw Error(ErrorKind::invalid_argument, "weighting needs a distance matrix or point cloud");
        MixExponent mix = MixExponent::infinity;
        const auto weights = resolve_weights(input.dense(), params.weighting, mix);
        input = DistanceInput(weighted_matrix(input.dense(), weights, mix, params.convention));
    }
    stats.times.weighting = seconds_since(stage);

    stage = Clock::now();
    if (input.is_dense()) stats.enclosing_radius = enclosing_radius(input.dense());
    value_t threshold = kInfinity;
    if (params.threshold)
        threshold = *params.threshold;
    else if (stats.enclosing_radius)
        threshold = *stats.enclosing_radius;
    stats.threshold = threshold;
    stats.times.threshold = seconds_since(stage);

    if (n == 0) {
        stats.times.total = seconds_since(started);
        return report;
    }

    const double pairs = n > 1 ? static_cast<double>(n) * static_cast<double>(n - 1) / 2 : 1.0;
    stage = Clock::now();
    if (params.collapse) {
        const WeightedGraph graph = to_weighted_graph(input, threshold);
        stats.edges_before_collapse = graph.edges.size();
        const WeightedGraph collapsed = collapse(graph);
        stats.edges_after_collapse = collapsed.edges.size();
        stats.times.collapse = seconds_since(stage);

        stage = Clock::now();
        const SparseFlagFiltration f(to_sparse_graph(collapsed), threshold, params.max_dim);
        report.barcode = compute_barcode(f, params.max_dim, field, pool_, params.reduction, &stats.dimensions);
    } else {
        stage = Clock::now();
        if (input.is_dense()) {
            const DenseFlagFiltration f(input.dense(), threshold, params.max_dim);
            report.barcode = compute_barcode(f, params.max_dim, field, pool_, params.reduction, &stats.dimensions);
        } else {
            const SparseFlagFiltration f(input.sparse(), threshold, params.max_dim);
            report.barcode = compute_barcode(f, params.max_dim, field, pool_, params.reduction, &stats.dimensions);
        }
        // dimension 0 reports the thresholded edge count as its work
        stats.edges_before_collapse = stats.edges_after_collapse = stats.dimensions.front().reduced;
    }
    stats.times.reduction = seconds_since(stage);
    stats.fill_ratio = static_cast<double>(stats.edges_after_collapse) / pairs;
    stats.times.total = seconds_since(started);
    return report;
}

PipelineReport compute_persistence(const DistanceInput& input, const ComputeParams& params) {
    params.validate();
    Engine engine(params.threads, params.pin_threads);
    return engine.compute(input, params);
}

PipelineReport compute_persistence(const PointCloud& cloud, const ComputeParams& params) {
    params.validate();
    Engine engine(params.threads, params.pin_threads);
    return engine.compute(cloud, params);
}

}  // namespace vrph
