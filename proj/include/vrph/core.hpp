#pragma once

// Shared domain types, validation and prime-field arithmetic.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace vrph {

using value_t = double;
using vertex_t = std::uint32_t;
using coefficient_t = std::uint32_t;

inline constexpr value_t kInfinity = std::numeric_limits<value_t>::infinity();

/* **************************************************************************
 * Errors
 * *************************************************************************/

enum class ErrorKind {
    asymmetric_matrix,
    non_finite_entry,
    duplicate_edge,
    invalid_input,
    not_prime,
    index_overflow,
    rank_out_of_range,
    k_too_large,
    unsupported_mix_exponent,
    non_triangular_count,
    parse_error,
    ragged_rows,
    invalid_argument,
    io_error,
};

/// Stable, user-facing name of an error kind ("NotPrime", "IndexOverflow", ...).
const char* error_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    const char* name() const noexcept { return error_name(kind_); }

private:
    ErrorKind kind_;
};

/* **************************************************************************
 * Input data
 * *************************************************************************/

struct FilteredEdge {
    vertex_t u = 0;
    vertex_t v = 0;
    value_t weight = 0;

    friend bool operator==(const FilteredEdge&, const FilteredEdge&) = default;
};

// Row-major n x n matrix. The diagonal holds vertex birth values.
struct DenseMatrix {
    std::size_t n = 0;
    std::vector<value_t> values;

    DenseMatrix() = default;
    DenseMatrix(std::size_t size, std::vector<value_t> entries);
    explicit DenseMatrix(const std::vector<std::vector<value_t>>& rows);

    value_t operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
    value_t& at(std::size_t i, std::size_t j) { return values[i * n + j]; }

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;
};

// Weighted graph; pairs without an edge have filtration value +inf.
struct SparseGraph {
    std::size_t n = 0;
    std::vector<FilteredEdge> edges;
    std::vector<value_t> vertex_births;

    friend bool operator==(const SparseGraph&, const SparseGraph&) = default;
};

class DistanceInput {
public:
    DistanceInput() = default;
    DistanceInput(DenseMatrix dense) : data_(std::move(dense)) {}
    DistanceInput(SparseGraph sparse) : data_(std::move(sparse)) {}

    bool is_dense() const { return std::holds_alternative<DenseMatrix>(data_); }
    bool is_sparse() const { return !is_dense(); }
    const DenseMatrix& dense() const { return std::get<DenseMatrix>(data_); }
    const SparseGraph& sparse() const { return std::get<SparseGraph>(data_); }
    std::size_t size() const;

    friend bool operator==(const DistanceInput&, const DistanceInput&) = default;

private:
    std::variant<DenseMatrix, SparseGraph> data_;
};

// n points of equal arity, stored row-major.
struct PointCloud {
    std::size_t dimension = 0;
    std::vector<value_t> coordinates;

    std::size_t size() const { return dimension == 0 ? 0 : coordinates.size() / dimension; }
};

/// Checks the input invariants and returns a canonical copy: dense matrices are
/// made exactly symmetric (within tolerance), sparse edges get u < v and are
/// sorted by (u, v).
DistanceInput validate_input(const DistanceInput& raw);

/* **************************************************************************
 * Parameters
 * *************************************************************************/

enum class MixExponent { one, two, infinity };

/// Maps 1, 2 and +inf to a mix exponent; anything else is UnsupportedMixExponent.
MixExponent parse_mix_exponent(double p);

enum class WeightConvention {
    vr_compatible,  // zero weights reproduce the plain Vietoris-Rips edge values
    dtm_strict,     // ball-intersection radii, i.e. half distances
};

struct ExplicitWeights {
    std::vector<value_t> weights;
    MixExponent mix = MixExponent::infinity;
};

struct DtmWeights {
    std::optional<std::size_t> neighbors;  // unset: min(10, n - 1)
    double exponent = 2.0;
    MixExponent mix = MixExponent::infinity;
};

using Weighting = std::variant<std::monostate, ExplicitWeights, DtmWeights>;

struct ReductionOptions {
    bool clearing = true;
    bool apparent_pairs = true;
    bool emergent_pairs = true;
};

struct ComputeParams {
    unsigned max_dim = 1;
    std::optional<value_t> threshold;  // empty means the enclosing radius
    coefficient_t modulus = 2;
    unsigned threads = 1;
    bool collapse = false;
    bool pin_threads = false;
    Weighting weighting;
    WeightConvention convention = WeightConvention::vr_compatible;
    ReductionOptions reduction;

    void validate() const;
};

/* **************************************************************************
 * Output
 * *************************************************************************/

struct PersistenceBar {
    unsigned dimension = 0;
    value_t birth = 0;
    value_t death = kInfinity;

    bool essential() const { return death == kInfinity; }

    friend bool operator==(const PersistenceBar&, const PersistenceBar&) = default;
};

class Barcode {
public:
    Barcode() = default;
    explicit Barcode(unsigned max_dim) : bars_(max_dim + 1) {}

    unsigned max_dim() const { return bars_.empty() ? 0 : static_cast<unsigned>(bars_.size() - 1); }
    std::size_t dimensions() const { return bars_.size(); }

    /// Adds a bar; zero-length bars are dropped.
    void add(const PersistenceBar& bar);
    void add(unsigned dim, value_t birth, value_t death) { add({dim, birth, death}); }

    const std::vector<PersistenceBar>& bars(unsigned dim) const { return bars_.at(dim); }
    std::size_t total() const;

    /// Sorts every dimension by (birth, death).
    void canonicalize();

    friend bool operator==(const Barcode&, const Barcode&) = default;

private:
    std::vector<std::vector<PersistenceBar>> bars_;
};

/* **************************************************************************
 * Prime field
 * *************************************************************************/

bool is_prime(coefficient_t p);

class FieldTable {
public:
    explicit FieldTable(coefficient_t p);

    coefficient_t modulus() const { return p_; }
    coefficient_t inverse(coefficient_t a) const { return inverses_[a]; }
    const std::vector<coefficient_t>& inverses() const { return inverses_; }

    coefficient_t add(coefficient_t a, coefficient_t b) const { return (a + b) % p_; }
    coefficient_t mul(coefficient_t a, coefficient_t b) const { return (a * b) % p_; }
    coefficient_t neg(coefficient_t a) const { return a == 0 ? 0 : p_ - a; }

private:
    coefficient_t p_;
    std::vector<coefficient_t> inverses_;
};

/// Throws NotPrime unless p is a prime below 2^16.
FieldTable build_field_table(coefficient_t p);

}  // namespace vrph
