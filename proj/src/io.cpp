#include "vrph/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include "vrph/engine.hpp"

namespace vrph {

namespace {

struct Token {
    std::string_view text;
    std::size_t line;
    std::size_t column;
};

bool is_separator(char c) { return c == ',' || c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

Error parse_error(const Token& t, const std::string& what) {
    std::ostringstream msg;
    msg << "line " << t.line << ", column " << t.column << ": " << what << " '" << t.text << "'";
    return Error(ErrorKind::parse_error, msg.str());
}

// Calls row(tokens) for every non-empty, non-comment line.
template <typename RowFn>
void for_each_row(std::istream& in, RowFn&& row) {
    std::string line;
    std::vector<Token> tokens;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        tokens.clear();
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && is_separator(line[i])) ++i;
            if (i == line.size()) break;
            if (tokens.empty() && line[i] == '#') break;
            const std::size_t start = i;
            while (i < line.size() && !is_separator(line[i])) ++i;
            tokens.push_back({std::string_view(line).substr(start, i - start), number, start + 1});
        }
        if (!tokens.empty()) row(std::as_const(tokens));
    }
    if (in.bad()) throw Error(ErrorKind::io_error, "read failed");
}

value_t parse_real(const Token& t) {
    value_t x = 0;
    const char* begin = t.text.data();
    const char* end = begin + t.text.size();
    if (begin != end && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, x);
    if (ec != std::errc() || ptr != end) throw parse_error(t, "expected a number, got");
    return x;
}

vertex_t parse_vertex(const Token& t) {
    std::uint64_t v = 0;
    const char* end = t.text.data() + t.text.size();
    const auto [ptr, ec] = std::from_chars(t.text.data(), end, v);
    if (ec != std::errc() || ptr != end || v >= std::numeric_limits<vertex_t>::max())
        throw parse_error(t, "expected a vertex id, got");
    return static_cast<vertex_t>(v);
}

}  // namespace

InputFormat parse_input_format(const std::string& name) {
    if (name == "lower-distance") return InputFormat::lower_distance;
    if (name == "point-cloud") return InputFormat::point_cloud;
    if (name == "sparse") return InputFormat::sparse;
    throw Error(ErrorKind::invalid_argument, "unknown format '" + name + "'");
}

const char* format_name(InputFormat format) {
    switch (format) {
    case InputFormat::lower_distance: return "lower-distance";
    case InputFormat::point_cloud: return "point-cloud";
    case InputFormat::sparse: return "sparse";
    }
    return "?";
}

InputFormat infer_input_format(const std::string& path) {
    static const std::map<std::string, InputFormat> by_extension = {
        {"ldm", InputFormat::lower_distance},   {"lower_distance_matrix", InputFormat::lower_distance},
        {"dist", InputFormat::lower_distance},  {"dm", InputFormat::lower_distance},
        {"csv", InputFormat::point_cloud},      {"pc", InputFormat::point_cloud},
        {"xyz", InputFormat::point_cloud},      {"pts", InputFormat::point_cloud},
        {"points", InputFormat::point_cloud},   {"sparse", InputFormat::sparse},
        {"edges", InputFormat::sparse},         {"graph", InputFormat::sparse},
    };
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
        const auto it = by_extension.find(path.substr(dot + 1));
        if (it != by_extension.end()) return it->second;
    }
    throw Error(ErrorKind::invalid_argument, "cannot infer the format of '" + path + "'; pass --format");
}

DistanceInput read_lower_distance_matrix(std::istream& in) {
    std::vector<value_t> values;
    for_each_row(in, [&](const std::vector<Token>& tokens) {
        for (const auto& t : tokens) values.push_back(parse_real(t));
    });
    // k(k - 1)/2 values for k points
    const auto count = values.size();
    std::size_t n = static_cast<std::size_t>((1 + std::sqrt(1 + 8.0 * static_cast<double>(count))) / 2);
    while (n * (n - 1) / 2 > count) --n;
    while ((n + 1) * n / 2 <= count) ++n;
    if (n * (n - 1) / 2 != count) {
        throw Error(ErrorKind::non_triangular_count,
                    std::to_string(count) + " values do not form a lower triangle");
    }
    DenseMatrix m(n, std::vector<value_t>(n * n, 0.0));
    std::size_t k = 0;
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            m.at(i, j) = m.at(j, i) = values[k++];
        }
    return DistanceInput(std::move(m));
}

PointCloud read_point_cloud_rows(std::istream& in) {
    PointCloud cloud;
    std::size_t rows = 0;
    for_each_row(in, [&](const std::vector<Token>& tokens) {
        if (rows == 0) {
            cloud.dimension = tokens.size();
        } else if (tokens.size() != cloud.dimension) {
            std::ostringstream msg;
            msg << "line " << tokens.front().line << " has " << tokens.size() << " coordinates, expected "
                << cloud.dimension;
            throw Error(ErrorKind::ragged_rows, msg.str());
        }
        for (const auto& t : tokens) cloud.coordinates.push_back(parse_real(t));
        ++rows;
    });
    return cloud;
}

DistanceInput read_point_cloud(std::istream& in) {
    return DistanceInput(euclidean_distances(read_point_cloud_rows(in)));
}

DistanceInput read_sparse_graph(std::istream& in) {
    SparseGraph g;
    std::map<vertex_t, value_t> births;
    std::map<std::pair<vertex_t, vertex_t>, std::size_t> seen;
    std::size_t n = 0;
    for_each_row(in, [&](const std::vector<Token>& tokens) {
        if (tokens.size() != 3) {
            std::ostringstream msg;
            msg << "line " << tokens.front().line << ": expected 'i j w', got " << tokens.size() << " fields";
            throw Error(ErrorKind::parse_error, msg.str());
        }
        const vertex_t i = parse_vertex(tokens[0]);
        const vertex_t j = parse_vertex(tokens[1]);
        const value_t w = parse_real(tokens[2]);
        n = std::max<std::size_t>(n, std::max(i, j) + std::size_t{1});
        if (i == j) {
            if (!births.emplace(i, w).second) {
                throw Error(ErrorKind::duplicate_edge, "line " + std::to_string(tokens.front().line) +
                                                           ": second birth for vertex " + std::to_string(i));
            }
            return;
        }
        const std::pair<vertex_t, vertex_t> key{std::min(i, j), std::max(i, j)};
        if (const auto [it, fresh] = seen.emplace(key, tokens.front().line); !fresh) {
            throw Error(ErrorKind::duplicate_edge, "line " + std::to_string(tokens.front().line) + ": edge " +
                                                       std::to_string(key.first) + "-" + std::to_string(key.second) +
                                                       " already given on line " + std::to_string(it->second));
        }
        g.edges.push_back({key.first, key.second, w});
    });
    g.n = n;
    g.vertex_births.assign(n, 0.0);
    for (const auto& [v, b] : births) g.vertex_births[v] = b;
    return validate_input(DistanceInput(std::move(g)));
}

LoadedInput read_input(std::istream& in, InputFormat format) {
    switch (format) {
    case InputFormat::lower_distance: return {read_lower_distance_matrix(in)};
    case InputFormat::point_cloud: return {read_point_cloud_rows(in)};
    case InputFormat::sparse: return {read_sparse_graph(in)};
    }
    throw Error(ErrorKind::invalid_argument, "unknown format");
}

LoadedInput read_input_file(const std::string& path, InputFormat format) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io_error, "cannot open '" + path + "'");
    return read_input(in, format);
}

std::string format_value(value_t x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_sparse_graph(const SparseGraph& graph, std::ostream& out) {
    for (std::size_t v = 0; v < graph.n; ++v) {
        const value_t b = v < graph.vertex_births.size() ? graph.vertex_births[v] : 0.0;
        out << v << ' ' << v << ' ' << format_value(b) << '\n';
    }
    for (const auto& e : graph.edges) out << e.u << ' ' << e.v << ' ' << format_value(e.weight) << '\n';
    if (!out) throw Error(ErrorKind::io_error, "write failed");
}

void write_barcode(const Barcode& barcode, std::ostream& out, BarcodeFormat format) {
    if (format == BarcodeFormat::csv) {
        out << "dimension,birth,death\n";
        for (unsigned d = 0; d < barcode.dimensions(); ++d)
            for (const auto& bar : barcode.bars(d))
                out << d << ',' << format_value(bar.birth) << ',' << format_value(bar.death) << '\n';
    } else {
        for (unsigned d = 0; d < barcode.dimensions(); ++d) {
            out << "dimension " << d << ":\n";
            for (const auto& bar : barcode.bars(d))
                out << "  [" << format_value(bar.birth) << ", " << format_value(bar.death) << ")\n";
        }
    }
    if (!out) throw Error(ErrorKind::io_error, "write failed");
}

}  // namespace vrph
