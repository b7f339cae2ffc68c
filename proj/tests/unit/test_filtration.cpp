#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracle.hpp"
#include "vrph/filtration.hpp"

using namespace vrph;

namespace {

std::vector<std::vector<vertex_t>> all_simplices(vertex_t n, unsigned dim) {
    std::vector<std::vector<vertex_t>> out;
    std::vector<vertex_t> current;
    auto rec = [&](auto&& self, vertex_t below) -> void {
        if (current.size() == dim + 1) {
            out.push_back(current);
            return;
        }
        for (vertex_t v = below; v-- > 0;) {
            current.push_back(v);
            self(self, v);
            current.pop_back();
        }
    };
    rec(rec, n);
    return out;
}

const DenseMatrix kPath({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}});

}  // namespace

TEST_SUITE("filtration") {

TEST_CASE("binomial coefficients") {
    const BinomialTable b(10, 5);
    CHECK(b(5, 2) == 10);
    CHECK(b(4, 5) == 0);
    CHECK(b(0, 0) == 1);
    CHECK(b(10, 5) == 252);
    for (std::size_t n = 1; n <= 10; ++n)
        for (unsigned k = 1; k <= 5; ++k) CHECK(b(n, k) == b(n - 1, k - 1) + b(n - 1, k));
}

TEST_CASE("binomial table refuses to overflow") {
    CHECK_NOTHROW(BinomialTable(67, 33));
    try {
        BinomialTable(200, 100);
        FAIL("expected IndexOverflow");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::index_overflow);
    }
}

TEST_CASE("index capacity check") {
    CHECK_NOTHROW(check_index_capacity(1000, 3));
    CHECK_NOTHROW(check_index_capacity(50, 7));
    CHECK_THROWS_AS(check_index_capacity(100000, 5), Error);
    CHECK_THROWS_AS(check_index_capacity(std::size_t{1} << 40, 1), Error);
}

TEST_CASE("simplex ranks") {
    const BinomialTable b(8, 5);
    CHECK(rank_simplex(std::vector<vertex_t>{2, 1, 0}, b) == SimplexRank{0, 2});
    CHECK(rank_simplex(std::vector<vertex_t>{3, 1, 0}, b) == SimplexRank{1, 2});
    CHECK(rank_simplex(std::vector<vertex_t>{5, 2}, b) == SimplexRank{12, 1});
    CHECK(unrank_simplex({0, 2}, 6, b) == std::vector<vertex_t>{2, 1, 0});
    CHECK(unrank_simplex({12, 1}, 6, b) == std::vector<vertex_t>{5, 2});
    CHECK(edge_index(2, 5) == 12);
}

TEST_CASE("out of range ranks are rejected") {
    const BinomialTable b(8, 5);
    try {
        unrank_simplex({35, 2}, 7, b);
        FAIL("expected RankOutOfRange");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::rank_out_of_range);
    }
    CHECK_NOTHROW(unrank_simplex({34, 2}, 7, b));
}

TEST_CASE("rank and unrank are inverse") {
    const BinomialTable b(8, 5);
    std::size_t count7 = 0;
    for (const auto& s : all_simplices(7, 2)) {
        CHECK(unrank_simplex(rank_simplex(s, b), 7, b) == s);
        ++count7;
    }
    CHECK(count7 == 35);
    for (unsigned dim = 0; dim <= 3; ++dim) {
        std::vector<simplex_index_t> seen;
        for (const auto& s : all_simplices(8, dim)) {
            const auto r = rank_simplex(s, b);
            CHECK(unrank_simplex(r, 8, b) == s);
            seen.push_back(r.index);
        }
        std::sort(seen.begin(), seen.end());
        // a bijection onto [0, C(8, dim + 1))
        REQUIRE(seen.size() == b(8, dim + 1));
        for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == i);
    }
}

TEST_CASE("facets drop the largest vertex first") {
    const BinomialTable b(8, 5);
    const auto f = facets({0, 2}, 3, b);
    REQUIRE(f.size() == 3);
    CHECK(unrank_simplex(f[0], 3, b) == std::vector<vertex_t>{1, 0});
    CHECK(unrank_simplex(f[1], 3, b) == std::vector<vertex_t>{2, 0});
    CHECK(unrank_simplex(f[2], 3, b) == std::vector<vertex_t>{2, 1});
    CHECK(facets({3, 0}, 5, b).empty());
}

TEST_CASE("diameters") {
    const DistanceInput path(kPath);
    CHECK(diameter(std::vector<vertex_t>{2, 1, 0}, path) == 2);
    const DistanceInput born(DenseMatrix({{0, 1, 2}, {1, 0.5, 1}, {2, 1, 0}}));
    CHECK(diameter(std::vector<vertex_t>{1}, born) == 0.5);
    const DistanceInput sparse(SparseGraph{3, {{1, 2, 1.0}}, {0, 0, 0}});
    CHECK(diameter(std::vector<vertex_t>{1, 0}, sparse) == kInfinity);
    CHECK(diameter(std::vector<vertex_t>{2, 1}, sparse) == 1.0);
}

TEST_CASE("enclosing radius") {
    CHECK(enclosing_radius(kPath) == 1);
    CHECK(enclosing_radius(DenseMatrix(1, {0.0})) == 0);
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = oracle::random_matrix(2 + trial % 8, rng);
        const auto r = enclosing_radius(m);
        CHECK(r == oracle::enclosing_radius(m));
        CHECK(r <= *std::max_element(m.values.begin(), m.values.end()));
        CHECK(r > 0);
    }
    CHECK(enclosing_radius(DenseMatrix(3, std::vector<value_t>(9, 0.0))) == 0);
}

TEST_CASE("cofacets come in decreasing inserted-vertex order") {
    std::mt19937_64 rng(2);
    const auto m = oracle::random_matrix(4, rng);
    const DistanceInput input(m);
    const auto c = cofacets(input, {edge_index(1, 0), 1}, kInfinity);
    const BinomialTable b(4, 3);
    REQUIRE(c.size() == 2);
    CHECK(unrank_simplex({c[0].index, 2}, 4, b) == std::vector<vertex_t>{3, 1, 0});
    CHECK(unrank_simplex({c[1].index, 2}, 4, b) == std::vector<vertex_t>{2, 1, 0});
    CHECK(cofacets(input, {edge_index(1, 0), 1}, 0.0).empty());
}

TEST_CASE("square triangles enter at the diagonal length") {
    const double r2 = std::sqrt(2.0);
    const DistanceInput square(DenseMatrix({{0, 1, r2, 1}, {1, 0, 1, r2}, {r2, 1, 0, 1}, {1, r2, 1, 0}}));
    for (const auto& c : cofacets(square, {edge_index(1, 0), 1}, kInfinity)) CHECK(c.diameter == r2);
}

TEST_CASE("facet and cofacet enumerations agree") {
    std::mt19937_64 rng(3);
    const auto m = oracle::random_matrix(6, rng);
    const DistanceInput input(m);
    const BinomialTable b(6, 5);
    for (unsigned dim = 1; dim <= 3; ++dim) {
        for (const auto& s : all_simplices(6, dim)) {
            const auto parent = rank_simplex(s, b);
            for (const auto& facet : facets(parent, 6, b)) {
                const auto up = cofacets(input, facet, kInfinity);
                CHECK(std::any_of(up.begin(), up.end(), [&](const Cofacet& c) { return c.index == parent.index; }));
            }
        }
    }
}

TEST_CASE("cofacets never enter before and facets never after") {
    std::mt19937_64 rng(4);
    const auto m = oracle::random_matrix(7, rng);
    const DistanceInput input(m);
    const BinomialTable b(7, 5);
    for (unsigned dim = 0; dim <= 3; ++dim) {
        for (const auto& s : all_simplices(7, dim)) {
            const auto rank = rank_simplex(s, b);
            const value_t d = diameter(s, input);
            for (const auto& c : cofacets(input, rank, kInfinity)) {
                CHECK(c.diameter >= d);
                CHECK(c.diameter == diameter(unrank_simplex({c.index, dim + 1}, 7, b), input));
            }
            for (const auto& f : facets(rank, 7, b)) CHECK(diameter(unrank_simplex(f, 7, b), input) <= d);
        }
    }
}

TEST_CASE("dense and sparse enumerators produce the same cofacets") {
    std::mt19937_64 rng(5);
    const auto m = oracle::random_matrix(8, rng);
    SparseGraph g;
    g.n = 8;
    g.vertex_births.assign(8, 0.0);
    for (vertex_t i = 0; i < 8; ++i)
        for (vertex_t j = i + 1; j < 8; ++j) g.edges.push_back({i, j, m(i, j)});
    for (value_t threshold : {kInfinity, 0.6}) {
        const DenseFlagFiltration dense(m, threshold, 2);
        const SparseFlagFiltration sparse(g, threshold, 2);
        DenseFlagFiltration::CofacetEnumerator a(dense);
        SparseFlagFiltration::CofacetEnumerator b(sparse);
        for (unsigned dim = 0; dim <= 2; ++dim) {
            for (const auto& s : all_simplices(8, dim)) {
                const auto rank = rank_simplex(s, dense.binomial());
                const value_t d = dense.diameter_of(s);
                if (d > threshold) continue;
                CHECK(d == sparse.diameter_of(s));
                for (bool all : {true, false}) {
                    a.reset({rank.index, d}, dim);
                    b.reset({rank.index, d}, dim);
                    Cofacet x, y;
                    while (true) {
                        const bool more = a.next(x, all);
                        REQUIRE(more == b.next(y, all));
                        if (!more) break;
                        CHECK(x.index == y.index);
                        CHECK(x.diameter == y.diameter);
                        CHECK(x.odd == y.odd);
                        if (!all) CHECK(unrank_simplex({x.index, dim + 1}, 8, dense.binomial())[0] > s[0]);
                    }
                }
            }
        }
        CHECK(dense.edges() == sparse.edges());
    }
}

TEST_CASE("sorted edges") {
    const DistanceInput input(kPath);
    auto edges = sorted_edges(input, kInfinity);
    REQUIRE(edges.size() == 3);
    CHECK(edges[0].weight == 1);
    CHECK(edges[1].weight == 1);
    CHECK(edges[2].weight == 2);
    // equal weights: larger index first
    CHECK(edge_index(edges[0].u, edges[0].v) == 2);
    CHECK(edge_index(edges[1].u, edges[1].v) == 0);
    edges = sorted_edges(input, 1.5);
    CHECK(edges.size() == 2);
}

TEST_CASE("distance to measure weights") {
    const DenseMatrix line({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}});
    CHECK(dtm_weights(line, 1, 2) == std::vector<value_t>{1, 1, 1});
    const auto w = dtm_weights(line, 2, 2);
    CHECK(w[0] == doctest::Approx(std::sqrt(2.5)).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(w[2] == doctest::Approx(std::sqrt(2.5)).epsilon(1e-15));
    const DenseMatrix twins({{0, 0, 3}, {0, 0, 3}, {3, 3, 0}});
    CHECK(dtm_weights(twins, 1, 2)[0] == 0);
    try {
        dtm_weights(line, 3, 2);
        FAIL("expected KTooLarge");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::k_too_large);
    }
}

TEST_CASE("mixed edge values") {
    const auto compat = WeightConvention::vr_compatible;
    const auto strict = WeightConvention::dtm_strict;
    for (auto mix : {MixExponent::one, MixExponent::two, MixExponent::infinity})
        for (double d : {0.0, 0.3, 1.0, 2.5}) CHECK(mixed_edge_value(d, 0, 0, mix, compat) == d);
    // equal weights under p = 1
    CHECK(mixed_edge_value(1.0, 0.25, 0.25, MixExponent::one, strict) == 0.25 + 0.5);
    CHECK(mixed_edge_value(1.0, 0.25, 0.25, MixExponent::one, compat) == 0.25 + 1.0);
    // one ball inside the other
    CHECK(mixed_edge_value(0.5, 0.2, 1.0, MixExponent::one, strict) == 1.0);
    CHECK(mixed_edge_value(0.5, 0.2, 1.0, MixExponent::two, strict) == 1.0);
    CHECK(mixed_edge_value(0.5, 0.2, 0.3, MixExponent::infinity, strict) == 0.3);
    // p = 2 solves sqrt(t^2 - wi^2) + sqrt(t^2 - wj^2) = d
    const double t = mixed_edge_value(2.0, 0.5, 0.7, MixExponent::two, strict);
    CHECK(std::sqrt(t * t - 0.25) + std::sqrt(t * t - 0.49) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(mixed_edge_value(1.0, -0.5, 0.0, MixExponent::two, strict), Error);
}

TEST_CASE("weighted graph keeps births below edge values") {
    std::mt19937_64 rng(6);
    const auto m = oracle::random_matrix(9, rng);
    const auto weights = dtm_weights(m, 3, 2);
    for (auto mix : {MixExponent::one, MixExponent::two, MixExponent::infinity}) {
        const auto g = weighted_graph(m, weights, mix);
        CHECK(g.vertex_births == weights);
        CHECK(g.edges.size() == 36);
        CHECK(std::is_sorted(g.edges.begin(), g.edges.end(), edge_precedes));
        for (const auto& e : g.edges) {
            CHECK(e.weight >= g.vertex_births[e.u]);
            CHECK(e.weight >= g.vertex_births[e.v]);
        }
    }
}

}  // TEST_SUITE
