#include "vrph/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vrph {

const char* error_name(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::asymmetric_matrix: return "AsymmetricMatrix";
    case ErrorKind::non_finite_entry: return "NonFiniteEntry";
    case ErrorKind::duplicate_edge: return "DuplicateEdge";
    case ErrorKind::invalid_input: return "InvalidInput";
    case ErrorKind::not_prime: return "NotPrime";
    case ErrorKind::index_overflow: return "IndexOverflow";
    case ErrorKind::rank_out_of_range: return "RankOutOfRange";
    case ErrorKind::k_too_large: return "KTooLarge";
    case ErrorKind::unsupported_mix_exponent: return "UnsupportedMixExponent";
    case ErrorKind::non_triangular_count: return "NonTriangularCount";
    case ErrorKind::parse_error: return "ParseError";
    case ErrorKind::ragged_rows: return "RaggedRows";
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::io_error: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(error_name(kind)) + ": " + message), kind_(kind) {}

DenseMatrix::DenseMatrix(std::size_t size, std::vector<value_t> entries)
    : n(size), values(std::move(entries)) {
    if (values.size() != n * n)
        throw Error(ErrorKind::invalid_input, "dense matrix needs n*n entries");
}

DenseMatrix::DenseMatrix(const std::vector<std::vector<value_t>>& rows) : n(rows.size()) {
    values.reserve(n * n);
    for (const auto& row : rows) {
        if (row.size() != n) throw Error(ErrorKind::invalid_input, "dense matrix must be square");
        values.insert(values.end(), row.begin(), row.end());
    }
}

std::size_t DistanceInput::size() const {
    return is_dense() ? dense().n : sparse().n;
}

namespace {

DenseMatrix validate_dense(const DenseMatrix& m) {
    if (m.values.size() != m.n * m.n)
        throw Error(ErrorKind::invalid_input, "dense matrix needs n*n entries");
    DenseMatrix out = m;
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const value_t a = m(i, j);
            const value_t b = m(j, i);
            if (!std::isfinite(a) || !std::isfinite(b)) {
                std::ostringstream msg;
                msg << "entry (" << i << ", " << j << ") is not finite";
                throw Error(ErrorKind::non_finite_entry, msg.str());
            }
            if (a != b && std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b))) {
                std::ostringstream msg;
                msg << "entries (" << i << ", " << j << ") and (" << j << ", " << i
                    << ") differ: " << a << " vs " << b;
                throw Error(ErrorKind::asymmetric_matrix, msg.str());
            }
            out.at(j, i) = a;
        }
    }
    return out;
}

SparseGraph validate_sparse(const SparseGraph& g) {
    SparseGraph out;
    out.n = g.n;
    out.vertex_births = g.vertex_births;
    if (out.vertex_births.empty()) out.vertex_births.assign(g.n, 0.0);
    if (out.vertex_births.size() != g.n)
        throw Error(ErrorKind::invalid_input, "vertex birth list must have n entries");
    for (value_t b : out.vertex_births)
        if (!std::isfinite(b)) throw Error(ErrorKind::non_finite_entry, "vertex birth is not finite");

    out.edges.reserve(g.edges.size());
    for (FilteredEdge e : g.edges) {
        if (e.u >= g.n || e.v >= g.n)
            throw Error(ErrorKind::invalid_input, "edge endpoint out of range");
        if (e.u == e.v) throw Error(ErrorKind::invalid_input, "self-loop in edge list");
        if (!std::isfinite(e.weight))
            throw Error(ErrorKind::non_finite_entry, "edge weight is not finite");
        if (e.u > e.v) std::swap(e.u, e.v);
        out.edges.push_back(e);
    }
    std::sort(out.edges.begin(), out.edges.end(), [](const FilteredEdge& a, const FilteredEdge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    auto dup = std::adjacent_find(out.edges.begin(), out.edges.end(),
                                  [](const FilteredEdge& a, const FilteredEdge& b) {
                                      return a.u == b.u && a.v == b.v;
                                  });
    if (dup != out.edges.end()) {
        std::ostringstream msg;
        msg << "edge {" << dup->u << ", " << dup->v << "} appears more than once";
        throw Error(ErrorKind::duplicate_edge, msg.str());
    }
    return out;
}

}  // namespace

DistanceInput validate_input(const DistanceInput& raw) {
    if (raw.is_dense()) return validate_dense(raw.dense());
    return validate_sparse(raw.sparse());
}

MixExponent parse_mix_exponent(double p) {
    if (p == 1.0) return MixExponent::one;
    if (p == 2.0) return MixExponent::two;
    if (p == kInfinity) return MixExponent::infinity;
    std::ostringstream msg;
    msg << "mixing exponent must be 1, 2 or inf, got " << p;
    throw Error(ErrorKind::unsupported_mix_exponent, msg.str());
}

void ComputeParams::validate() const {
    if (!is_prime(modulus) || modulus >= (1u << 16))
        throw Error(ErrorKind::not_prime, "modulus " + std::to_string(modulus) + " is not a prime below 65536");
    if (threads == 0) throw Error(ErrorKind::invalid_argument, "thread count must be positive");
    if (threshold && std::isnan(*threshold))
        throw Error(ErrorKind::invalid_argument, "threshold is NaN");
    if (const auto* dtm = std::get_if<DtmWeights>(&weighting)) {
        if (dtm->neighbors && *dtm->neighbors == 0) throw Error(ErrorKind::invalid_argument, "DTM needs k >= 1");
        if (!(dtm->exponent > 0)) throw Error(ErrorKind::invalid_argument, "DTM needs r > 0");
    }
}

void Barcode::add(const PersistenceBar& bar) {
    if (!(bar.death > bar.birth)) return;
    if (bar.dimension >= bars_.size()) bars_.resize(bar.dimension + 1);
    bars_[bar.dimension].push_back(bar);
}

std::size_t Barcode::total() const {
    std::size_t count = 0;
    for (const auto& dim : bars_) count += dim.size();
    return count;
}

void Barcode::canonicalize() {
    for (auto& dim : bars_) {
        std::sort(dim.begin(), dim.end(), [](const PersistenceBar& a, const PersistenceBar& b) {
            return a.birth != b.birth ? a.birth < b.birth : a.death < b.death;
        });
    }
}

bool is_prime(coefficient_t p) {
    if (p < 2) return false;
    for (coefficient_t d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

FieldTable::FieldTable(coefficient_t p) : p_(p), inverses_(p, 0) {
    if (p < 2) return;
    // inv(a) = -(p / a) * inv(p mod a)
    inverses_[1] = 1;
    for (coefficient_t a = 2; a < p; ++a)
        inverses_[a] = (p - (p / a) * inverses_[p % a] % p) % p;
}

FieldTable build_field_table(coefficient_t p) {
    if (p >= (1u << 16) || !is_prime(p))
        throw Error(ErrorKind::not_prime, std::to_string(p) + " is not a prime below 65536");
    return FieldTable(p);
}

}  // namespace vrph
