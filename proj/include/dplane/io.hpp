// File formats: phantom text files, plane lists, binary grid fields, PGM
// slices, and CSV number formatting.
#pragma once

#include "dplane/geometry.hpp"
#include "dplane/grid_field.hpp"
#include "dplane/phantoms.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace dplane {

/// Malformed input; `line` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// One term per line, `gaussian <a> <mu_1> ... <mu_n> <s>`. Everything after
/// `#` is a comment; blank lines are skipped.
GaussianMixture parse_phantom(std::istream& in);
GaussianMixture read_phantom(const std::string& path);
void write_phantom(std::ostream& out, const GaussianMixture& f);

/// One plane per line: the n*d frame entries column by column, then the n
/// offset entries. Frames must be orthonormal and offsets orthogonal to them.
std::vector<AffinePlane> parse_planes(std::istream& in, int d, int n);

/// One point per line, n coordinates.
std::vector<Eigen::VectorXd> parse_points(std::istream& in, int n);

/// Binary layout, little-endian: "DPLF", u32 version, u32 n, u32 dims[n],
/// f64 spacing, f64 origin[n], f64 values[prod dims].
inline constexpr std::uint32_t kGridFieldVersion = 1;
void write_grid_field(std::ostream& out, const GridField& field);
GridField read_grid_field(std::istream& in);

/// 8-bit binary PGM of a 2-D field, or of the plane at index dims[0]/2 of a
/// 3-D field. Values are mapped linearly from [min, max] to [0, 255].
void write_pgm_slice(std::ostream& out, const GridField& field);

/// 17 significant digits, '.' as the separator; round-trips every double.
std::string format_double(double value);

}  // namespace dplane
