#pragma once

#include <iosfwd>
#include <string>

#include "smplab/numerics/grid.hpp"

namespace smplab {

// CSV: a "# schema: smplab/field v1" comment, a header row, then one row per
// node. Fields use columns index,coordinate,value; tensors use
// i,j,lambda,mu,value in row-major order. Grid endpoints travel in a second
// comment line "# grid a=<a> b=<b> n=<n>".
void write_csv(std::ostream& os, const Field& f);
void write_csv(std::ostream& os, const TensorField& f);
Field read_field_csv(std::istream& is);
TensorField read_tensor_csv(std::istream& is);

// Binary: little-endian uint64 n followed by n (field) or n*n (tensor,
// row-major) IEEE doubles. The grid interval is not stored; the reader takes
// it from the caller.
void write_binary(std::ostream& os, const Field& f);
void write_binary(std::ostream& os, const TensorField& f);
Field read_field_binary(std::istream& is, double a, double b);
TensorField read_tensor_binary(std::istream& is, double a, double b);

/// Shortest round-trip decimal form of a double ("%.17g").
std::string format_double(double v);

} // namespace smplab
