#pragma once

// Text formats.
//
//   lower-distance  strictly lower triangle of a distance matrix, row by row,
//                   values separated by commas and/or whitespace
//   point-cloud     one point per line, coordinates separated the same way
//   sparse          "i j w" per edge; "i i w" sets the birth of vertex i
//
// Blank lines and lines starting with '#' are ignored everywhere.

#include <iosfwd>
#include <string>

#include "vrph/core.hpp"

namespace vrph {

enum class InputFormat { lower_distance, point_cloud, sparse };
enum class BarcodeFormat { csv, human };

/// "lower-distance", "point-cloud" or "sparse"; InvalidArgument otherwise.
InputFormat parse_input_format(const std::string& name);
const char* format_name(InputFormat format);

/// Guess from the file extension; InvalidArgument when unknown.
InputFormat infer_input_format(const std::string& path);

DistanceInput read_lower_distance_matrix(std::istream& in);
PointCloud read_point_cloud_rows(std::istream& in);
/// Euclidean distance matrix of the points.
DistanceInput read_point_cloud(std::istream& in);
DistanceInput read_sparse_graph(std::istream& in);

/// Point clouds come back as PointCloud, the rest as DistanceInput.
struct LoadedInput {
    std::variant<DistanceInput, PointCloud> data;
};
LoadedInput read_input(std::istream& in, InputFormat format);
LoadedInput read_input_file(const std::string& path, InputFormat format);

/// Every vertex birth as "i i b", then every edge as "u v w"; 17 significant digits.
void write_sparse_graph(const SparseGraph& graph, std::ostream& out);

/// csv: header "dimension,birth,death", "inf" for essential bars.
/// human: one section per dimension with [birth, death) intervals.
void write_barcode(const Barcode& barcode, std::ostream& out, BarcodeFormat format = BarcodeFormat::csv);

/// %.17g, with "inf" / "-inf".
std::string format_value(value_t x);

}  // namespace vrph
