#include "smplab/numerics/field_io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "smplab/error.hpp"

namespace smplab {

static_assert(std::endian::native == std::endian::little, "binary format assumes a little-endian host");

std::string format_double(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

void write_header(std::ostream& os, const char* kind, const Grid1D& g, const char* columns)
{
    os << "# schema: smplab/" << kind << " v1\n";
    os << "# grid a=" << format_double(g.a()) << " b=" << format_double(g.b()) << " n=" << g.size() << '\n';
    os << columns << '\n';
}

Grid1D read_header(std::istream& is, const std::string& kind)
{
    std::string line;
    if (!std::getline(is, line) || line != "# schema: smplab/" + kind + " v1") {
        throw ParseError(1, "expected schema line for smplab/" + kind);
    }
    if (!std::getline(is, line)) {
        throw ParseError(2, "missing grid line");
    }
    double a = 0.0;
    double b = 0.0;
    unsigned long long n = 0;
    if (std::sscanf(line.c_str(), "# grid a=%lf b=%lf n=%llu", &a, &b, &n) != 3) {
        throw ParseError(2, "malformed grid line");
    }
    std::getline(is, line);
    return Grid1D(a, b, static_cast<std::size_t>(n));
}

std::vector<double> read_last_column(std::istream& is, std::size_t expected)
{
    std::vector<double> values;
    values.reserve(expected);
    std::string line;
    std::size_t lineno = 3;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto pos = line.rfind(',');
        if (pos == std::string::npos) {
            throw ParseError(lineno, "expected comma-separated row");
        }
        double v = 0.0;
        const char* first = line.data() + pos + 1;
        const auto res = std::from_chars(first, line.data() + line.size(), v);
        if (res.ec != std::errc()) {
            throw ParseError(lineno, "unparsable value");
        }
        values.push_back(v);
    }
    if (values.size() != expected) {
        throw ParseError(lineno, "expected " + std::to_string(expected) + " rows, got " + std::to_string(values.size()));
    }
    return values;
}

void put_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }

void put_doubles(std::ostream& os, std::span<const double> v)
{
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::uint64_t get_u64(std::istream& is)
{
    std::uint64_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw ParseError(0, "truncated binary header");
    }
    return v;
}

std::vector<double> get_doubles(std::istream& is, std::size_t count)
{
    std::vector<double> v(count);
    if (!is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(double)))) {
        throw ParseError(0, "truncated binary payload");
    }
    return v;
}

} // namespace

void write_csv(std::ostream& os, const Field& f)
{
    write_header(os, "field", f.grid(), "index,coordinate,value");
    for (std::size_t i = 0; i < f.size(); ++i) {
        os << i << ',' << format_double(f.grid().node(i)) << ',' << format_double(f[i]) << '\n';
    }
}

void write_csv(std::ostream& os, const TensorField& f)
{
    const Grid1D& g = f.grid().base();
    write_header(os, "tensor", g, "i,j,lambda,mu,value");
    for (std::size_t i = 0; i < f.side(); ++i) {
        for (std::size_t j = 0; j < f.side(); ++j) {
            os << i << ',' << j << ',' << format_double(g.node(i)) << ',' << format_double(g.node(j)) << ','
               << format_double(f(i, j)) << '\n';
        }
    }
}

Field read_field_csv(std::istream& is)
{
    const Grid1D g = read_header(is, "field");
    return Field(g, read_last_column(is, g.size()));
}

TensorField read_tensor_csv(std::istream& is)
{
    const Grid1D g = read_header(is, "tensor");
    return TensorField(Grid2D(g), read_last_column(is, g.size() * g.size()));
}

void write_binary(std::ostream& os, const Field& f)
{
    put_u64(os, f.size());
    put_doubles(os, f.values());
}

void write_binary(std::ostream& os, const TensorField& f)
{
    put_u64(os, f.side());
    put_doubles(os, f.values());
}

Field read_field_binary(std::istream& is, double a, double b)
{
    const auto n = static_cast<std::size_t>(get_u64(is));
    Grid1D g(a, b, n);
    return Field(g, get_doubles(is, n));
}

TensorField read_tensor_binary(std::istream& is, double a, double b)
{
    const auto n = static_cast<std::size_t>(get_u64(is));
    Grid1D g(a, b, n);
    return TensorField(Grid2D(g), get_doubles(is, n * n));
}

} // namespace smplab
