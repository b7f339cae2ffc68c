// One PASS/FAIL line per criterion; exit status is nonzero if any fails.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <functional>
#include <new>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracle.hpp"
#include "vrph/engine.hpp"
#include "vrph/io.hpp"

using namespace vrph;

/* Allocation tracking for the overflow guard. Only counts while armed. */

namespace {
std::atomic<bool> g_tracking{false};
std::atomic<std::size_t> g_largest{0};
std::atomic<std::size_t> g_total{0};

void note_allocation(std::size_t size) {
    if (!g_tracking.load(std::memory_order_relaxed)) return;
    g_total += size;
    std::size_t seen = g_largest.load();
    while (size > seen && !g_largest.compare_exchange_weak(seen, size)) {
    }
}
}  // namespace

void* operator new(std::size_t size) {
    note_allocation(size);
    if (void* p = std::malloc(size ? size : 1)) return p;
    throw std::bad_alloc();
}
void operator delete(void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

ComputeParams params(unsigned dim, std::optional<value_t> threshold, coefficient_t p = 2) {
    ComputeParams c;
    c.max_dim = dim;
    c.threshold = threshold;
    c.modulus = p;
    return c;
}

struct Case {
    DenseMatrix matrix;
    std::optional<value_t> threshold;  // empty: automatic
    coefficient_t p;
};

// 100 matrices, each under three thresholds and two moduli.
std::vector<Case> oracle_corpus() {
    std::mt19937_64 rng(20240611);
    std::vector<Case> cases;
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = 1 + i % 12;
        const auto m = oracle::random_matrix(n, rng);
        for (coefficient_t p : {2u, 3u})
            for (auto t : {std::optional<value_t>{kInfinity}, std::optional<value_t>{}, std::optional<value_t>{0.5}})
                cases.push_back({m, t, p});
    }
    return cases;
}

std::string describe(const Case& c) {
    std::ostringstream s;
    s << "n=" << c.matrix.n << " p=" << c.p << " threshold=";
    if (c.threshold) s << *c.threshold; else s << "auto";
    return s.str();
}

constexpr unsigned kCorpusDim = 3;

void oracle_equivalence(Engine& engine, const std::vector<Case>& corpus) {
    const auto start = Clock::now();
    std::size_t mismatches = 0;
    std::string first;
    for (const auto& c : corpus) {
        const value_t t = c.threshold ? *c.threshold : oracle::enclosing_radius(c.matrix);
        const auto expected = oracle::barcode(DistanceInput(c.matrix), t, kCorpusDim, c.p);
        const auto got = engine.compute(DistanceInput(c.matrix), params(kCorpusDim, c.threshold, c.p)).barcode;
        if (!(got == expected)) {
            if (mismatches++ == 0) first = describe(c);
        }
    }
    const double elapsed = seconds_since(start);
    std::ostringstream s;
    s << corpus.size() << " runs, " << mismatches << " mismatches, " << elapsed << " s (limit 60 s)";
    if (mismatches) s << ", first at " << first;
    report("oracle-equivalence", mismatches == 0 && elapsed < 60, s.str());
}

void schedule_independence(const std::vector<Case>& corpus) {
    std::deque<Engine> engines;
    for (unsigned t : {1u, 2u, 4u, 8u}) engines.emplace_back(t);
    std::size_t mismatches = 0;
    for (const auto& c : corpus) {
        const auto reference = engines[0].compute(DistanceInput(c.matrix), params(kCorpusDim, c.threshold, c.p)).barcode;
        for (std::size_t e = 1; e < engines.size(); ++e)
            if (!(engines[e].compute(DistanceInput(c.matrix), params(kCorpusDim, c.threshold, c.p)).barcode == reference))
                ++mismatches;
    }
    std::mt19937_64 rng(100);
    const auto cloud = oracle::random_cloud(100, 3, rng);
    const auto reference = engines[0].compute(cloud, params(2, std::nullopt)).barcode;
    std::size_t cloud_mismatches = 0;
    for (std::size_t e = 1; e < engines.size(); ++e)
        if (!(engines[e].compute(cloud, params(2, std::nullopt)).barcode == reference)) ++cloud_mismatches;
    std::ostringstream s;
    s << "threads 1/2/4/8 on " << corpus.size() << " corpus runs: " << mismatches << " mismatches; 100-point cloud ("
      << reference.total() << " bars): " << cloud_mismatches << " mismatches";
    report("schedule-independence", mismatches == 0 && cloud_mismatches == 0, s.str());
}

void enclosing_radius_property(Engine& engine, const std::vector<Case>& corpus) {
    std::size_t differ = 0, infinite = 0, checked = 0;
    for (const auto& c : corpus) {
        if (c.threshold.has_value()) continue;
        ++checked;
        const auto autobars = engine.compute(DistanceInput(c.matrix), params(kCorpusDim, std::nullopt, c.p)).barcode;
        const auto full = engine.compute(DistanceInput(c.matrix), params(kCorpusDim, kInfinity, c.p)).barcode;
        if (!(autobars == full)) ++differ;
        for (unsigned d = 1; d <= kCorpusDim; ++d)
            for (const auto& bar : autobars.bars(d))
                if (bar.essential()) ++infinite;
    }
    std::ostringstream s;
    s << checked << " inputs: " << differ << " differ from the infinite threshold, " << infinite
      << " infinite bars in dimension >= 1";
    report("enclosing-radius", differ == 0 && infinite == 0, s.str());
}

void collapse_preservation(Engine& engine) {
    std::mt19937_64 rng(508);
    std::size_t differ = 0, grew = 0, before = 0, after = 0;
    for (int i = 0; i < 50; ++i) {
        const std::size_t n = 6 + i % 20;
        DistanceInput input = i % 2 == 0 ? DistanceInput(oracle::random_matrix(n, rng))
                                         : DistanceInput(euclidean_distances(oracle::random_cloud(n, 3, rng)));
        for (auto t : {std::optional<value_t>{}, std::optional<value_t>{kInfinity}}) {
            auto with = params(3, t);
            with.collapse = true;
            const auto plain = engine.compute(input, params(3, t));
            const auto collapsed = engine.compute(input, with);
            if (!(plain.barcode == collapsed.barcode)) ++differ;
            if (collapsed.stats.edges_after_collapse > collapsed.stats.edges_before_collapse) ++grew;
            before += collapsed.stats.edges_before_collapse;
            after += collapsed.stats.edges_after_collapse;
        }
    }
    const std::size_t n = 12;
    DenseMatrix complete(n, std::vector<value_t>(n * n, 1.0));
    for (std::size_t i = 0; i < n; ++i) complete.values[i * n + i] = 0;
    auto with = params(3, kInfinity);
    with.collapse = true;
    const auto eq = engine.compute(DistanceInput(complete), with);
    const bool shrinks = eq.stats.edges_after_collapse < eq.stats.edges_before_collapse;
    const bool eq_same = eq.barcode == engine.compute(DistanceInput(complete), params(3, kInfinity)).barcode;
    std::ostringstream s;
    s << "100 runs on 50 inputs: " << differ << " barcode differences, " << grew << " edge-count increases, edges "
      << before << " -> " << after << "; equal-weight K" << n << ": " << eq.stats.edges_before_collapse << " -> "
      << eq.stats.edges_after_collapse << " edges";
    report("collapse-preservation", differ == 0 && grew == 0 && shrinks && eq_same, s.str());
}

void optimization_toggles(Engine& engine, const std::vector<Case>& corpus) {
    const std::vector<std::pair<std::string, std::function<void(ReductionOptions&)>>> toggles = {
        {"clearing", [](ReductionOptions& o) { o.clearing = false; }},
        {"apparent", [](ReductionOptions& o) { o.apparent_pairs = false; }},
        {"emergent", [](ReductionOptions& o) { o.emergent_pairs = false; }},
    };
    std::ostringstream s;
    bool pass = true;
    for (const auto& [name, off] : toggles) {
        std::size_t differ = 0;
        for (const auto& c : corpus) {
            auto p = params(kCorpusDim, c.threshold, c.p);
            const auto reference = engine.compute(DistanceInput(c.matrix), p).barcode;
            off(p.reduction);
            if (!(engine.compute(DistanceInput(c.matrix), p).barcode == reference)) ++differ;
        }
        pass = pass && differ == 0;
        s << name << " off: " << differ << " differences; ";
    }
    s << corpus.size() << " runs each";
    report("optimization-toggles", pass, s.str());
}

bool within_one_ulp(value_t a, value_t b) {
    return a == b || std::nextafter(a, b) == b;
}

void known_answers(Engine& engine) {
    std::ostringstream s;
    bool pass = true;

    const auto square = euclidean_distances(PointCloud{2, {0, 0, 1, 0, 1, 1, 0, 1}});
    const auto sq = engine.compute(DistanceInput(square), params(1, std::nullopt)).barcode;
    const auto& h1 = sq.bars(1);
    const bool square_ok = h1.size() == 1 && h1[0].birth == 1 && within_one_ulp(h1[0].death, std::sqrt(2.0)) &&
                           sq == oracle::barcode(DistanceInput(square), kInfinity, 1, 2);
    pass = pass && square_ok;
    s << "square H1 " << (square_ok ? "[1, sqrt 2)" : "wrong");

    DenseMatrix three(3, {0, 1, 2, 1, 0, 3, 2, 3, 0});
    const auto h0 = engine.compute(DistanceInput(three), params(0, std::nullopt)).barcode.bars(0);
    const std::vector<PersistenceBar> expected{{0, 0, 1}, {0, 0, 2}, {0, 0, kInfinity}};
    const bool three_ok = h0 == expected;
    pass = pass && three_ok;
    s << "; three-point H0 " << (three_ok ? "{[0,1),[0,2),[0,inf)}" : "wrong");

    // Chord lengths of the regular 20-gon, then the same circle sampled as coordinates.
    const value_t side = 2 * std::sin(std::numbers::pi / 20);
    DenseMatrix chords(20, std::vector<value_t>(400, 0.0));
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            const int steps = std::min(std::abs(i - j), 20 - std::abs(i - j));
            chords.values[i * 20 + j] = 2 * std::sin(std::numbers::pi * steps / 20);
        }
    const auto chord_bars = engine.compute(DistanceInput(chords), params(1, kInfinity)).barcode;
    const bool chord_ok = chord_bars.bars(1).size() == 1 && within_one_ulp(chord_bars.bars(1)[0].birth, side) &&
                          chord_bars == oracle::barcode(DistanceInput(chords), kInfinity, 1, 2);

    PointCloud circle{2, {}};
    for (int k = 0; k < 20; ++k) {
        const double angle = 2 * std::numbers::pi * k / 20;
        circle.coordinates.push_back(std::cos(angle));
        circle.coordinates.push_back(std::sin(angle));
    }
    const auto cm = euclidean_distances(circle);
    const auto cb = engine.compute(DistanceInput(cm), params(1, kInfinity)).barcode;
    const auto co = oracle::barcode(DistanceInput(cm), kInfinity, 1, 2);
    const bool sampled_ok = cb.bars(1).size() == 1 && co.bars(1).size() == 1 &&
                            within_one_ulp(cb.bars(1)[0].birth, co.bars(1)[0].birth) && cb == co;
    pass = pass && chord_ok && sampled_ok;
    s << "; circle chords H1 " << chord_bars.bars(1).size() << " bar(s)";
    if (!chord_bars.bars(1).empty())
        s << " born " << format_value(chord_bars.bars(1)[0].birth) << " vs 2 sin(pi/20) " << format_value(side);
    s << "; sampled circle H1 " << cb.bars(1).size() << " bar(s)";
    if (!cb.bars(1).empty() && !co.bars(1).empty())
        s << " born " << format_value(cb.bars(1)[0].birth) << " vs oracle " << format_value(co.bars(1)[0].birth);
    report("known-answers", pass, s.str());
}

void performance_smoke() {
    std::mt19937_64 rng(300);
    const auto cloud = oracle::random_cloud(300, 3, rng);
    auto best = [&](unsigned threads) {
        Engine engine(threads);
        double fastest = 1e300;
        for (int run = 0; run < 3; ++run) {
            const auto start = Clock::now();
            engine.compute(cloud, params(2, std::nullopt));
            fastest = std::min(fastest, seconds_since(start));
        }
        return fastest;
    };
    const double one = best(1);
    const double eight = best(8);
    const double ratio = one / eight;
    std::ostringstream s;
    s << "300 points, dim 2, best of 3: 1 thread " << one << " s, 8 threads " << eight << " s, speedup " << ratio
      << "x on " << std::thread::hardware_concurrency() << " hardware thread(s) (fails below 1.0x)";
    report("performance-smoke", ratio >= 1.0, s.str());
}

void overflow_guard() {
    SparseGraph g;
    g.n = 100000;  // C(100000, 7) > 2^64
    bool raised = false;
    std::string message;
    g_largest = 0;
    g_total = 0;
    g_tracking = true;
    try {
        compute_persistence(DistanceInput(g), params(5, std::nullopt));
    } catch (const Error& e) {
        raised = e.kind() == ErrorKind::index_overflow;
        message = e.what();
    } catch (...) {
    }
    g_tracking = false;
    const std::size_t largest = g_largest, total = g_total;
    // the error message itself allocates; anything sized by n would be far larger
    const bool small = largest < 4096 && total < 16384;
    std::ostringstream s;
    s << "n=100000 up to dimension 5: " << (raised ? message : std::string("no IndexOverflow")) << "; allocated "
      << total << " bytes, largest block " << largest;
    report("index-overflow-guard", raised && small, s.str());
}

void high_dimension_info() {
    std::mt19937_64 rng(16);
    const auto cloud = oracle::random_cloud(50, 16, rng);
    Engine engine(std::max(1u, std::thread::hardware_concurrency()));
    const auto start = Clock::now();
    const auto r = engine.compute(cloud, params(7, std::nullopt));
    std::printf("INFO high-dimension: 50 points in R^16 up to dimension 7, %zu bars, %.3f s\n", r.barcode.total(),
                seconds_since(start));
}

}  // namespace

int main() {
    const auto corpus = oracle_corpus();
    Engine engine(2);
    oracle_equivalence(engine, corpus);
    schedule_independence(corpus);
    enclosing_radius_property(engine, corpus);
    collapse_preservation(engine);
    optimization_toggles(engine, corpus);
    known_answers(engine);
    performance_smoke();
    overflow_guard();
    high_dimension_info();
    std::printf("%s: %d criterion(s) failed\n", g_failures ? "FAIL" : "PASS", g_failures);
    return g_failures ? 1 : 0;
}
