#include "dplane/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace dplane {

static_assert(std::endian::native == std::endian::little, "grid field I/O assumes a little-endian host");

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

namespace {

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

std::vector<double> parse_numbers(std::istringstream& tokens, std::size_t line_no) {
  std::vector<double> out;
  std::string tok;
  while (tokens >> tok) {
    double v = 0.0;
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
      throw ParseError(line_no, "not a finite number: '" + tok + "'");
    }
    out.push_back(v);
  }
  return out;
}

template <typename PerLine>
void for_each_data_line(std::istream& in, PerLine&& per_line) {
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::istringstream tokens(strip_comment(raw));
    if (!(tokens >> std::ws) || tokens.peek() == std::char_traits<char>::eof()) {
      continue;
    }
    per_line(tokens, line_no);
  }
}

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw ParseError(0, "grid field: truncated file");
  }
  return value;
}

}  // namespace

GaussianMixture parse_phantom(std::istream& in) {
  std::vector<GaussianTerm> terms;
  int n = -1;
  for_each_data_line(in, [&](std::istringstream& tokens, std::size_t line_no) {
    std::string keyword;
    tokens >> keyword;
    if (keyword != "gaussian") {
      throw ParseError(line_no, "expected 'gaussian', got '" + keyword + "'");
    }
    const std::vector<double> v = parse_numbers(tokens, line_no);
    if (v.size() < 3) {
      throw ParseError(line_no, "need amplitude, center coordinates and width");
    }
    const int dim = static_cast<int>(v.size()) - 2;
    if (n < 0) {
      n = dim;
    } else if (dim != n) {
      throw ParseError(line_no, "term has dimension " + std::to_string(dim) + ", expected " + std::to_string(n));
    }
    GaussianTerm t;
    t.amplitude = v.front();
    t.width = v.back();
    t.center = Eigen::Map<const Eigen::VectorXd>(v.data() + 1, dim);
    if (!(t.width > 0.0)) {
      throw ParseError(line_no, "width must be positive");
    }
    terms.push_back(std::move(t));
  });
  if (terms.empty()) {
    throw ParseError(0, "phantom has no terms");
  }
  return GaussianMixture(std::move(terms));
}

GaussianMixture read_phantom(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open phantom file '" + path + "'");
  }
  return parse_phantom(in);
}

void write_phantom(std::ostream& out, const GaussianMixture& f) {
  for (const auto& t : f.terms()) {
    out << "gaussian " << format_double(t.amplitude);
    for (Eigen::Index i = 0; i < t.center.size(); ++i) {
      out << ' ' << format_double(t.center(i));
    }
    out << ' ' << format_double(t.width) << '\n';
  }
}

std::vector<AffinePlane> parse_planes(std::istream& in, int d, int n) {
  std::vector<AffinePlane> planes;
  const auto expected = static_cast<std::size_t>(n * d + n);
  for_each_data_line(in, [&](std::istringstream& tokens, std::size_t line_no) {
    const std::vector<double> v = parse_numbers(tokens, line_no);
    if (v.size() != expected) {
      throw ParseError(line_no, "expected " + std::to_string(expected) + " numbers, got " + std::to_string(v.size()));
    }
    try {
      Frame frame(Eigen::Map<const Eigen::MatrixXd>(v.data(), n, d));
      planes.emplace_back(std::move(frame), Eigen::Map<const Eigen::VectorXd>(v.data() + n * d, n));
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
  });
  return planes;
}

std::vector<Eigen::VectorXd> parse_points(std::istream& in, int n) {
  std::vector<Eigen::VectorXd> points;
  for_each_data_line(in, [&](std::istringstream& tokens, std::size_t line_no) {
    const std::vector<double> v = parse_numbers(tokens, line_no);
    if (v.size() != static_cast<std::size_t>(n)) {
      throw ParseError(line_no, "expected " + std::to_string(n) + " coordinates, got " + std::to_string(v.size()));
    }
    points.emplace_back(Eigen::Map<const Eigen::VectorXd>(v.data(), n));
  });
  return points;
}

void write_grid_field(std::ostream& out, const GridField& field) {
  out.write("DPLF", 4);
  put<std::uint32_t>(out, kGridFieldVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.dim()));
  for (int s : field.dims()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s));
  }
  put<double>(out, field.spacing());
  for (Eigen::Index i = 0; i < field.origin().size(); ++i) {
    put<double>(out, field.origin()(i));
  }
  out.write(reinterpret_cast<const char*>(field.values().data()),
            static_cast<std::streamsize>(field.values().size() * sizeof(double)));
}

GridField read_grid_field(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "DPLF", 4) != 0) {
    throw ParseError(0, "grid field: bad magic");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kGridFieldVersion) {
    throw ParseError(0, "grid field: unsupported version " + std::to_string(version));
  }
  const auto n = get<std::uint32_t>(in);
  if (n == 0 || n > 16) {
    throw ParseError(0, "grid field: bad dimension");
  }
  std::vector<int> dims(n);
  std::size_t total = 1;
  for (auto& s : dims) {
    s = static_cast<int>(get<std::uint32_t>(in));
    total *= static_cast<std::size_t>(std::max(s, 0));
  }
  const double spacing = get<double>(in);
  Eigen::VectorXd origin(n);
  for (std::uint32_t a = 0; a < n; ++a) {
    origin(a) = get<double>(in);
  }
  Eigen::VectorXd values(static_cast<Eigen::Index>(total));
  if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(total * sizeof(double)))) {
    throw ParseError(0, "grid field: truncated values");
  }
  return GridField(std::move(dims), spacing, std::move(origin), std::move(values));
}

void write_pgm_slice(std::ostream& out, const GridField& field) {
  if (field.dim() != 2 && field.dim() != 3) {
    throw std::invalid_argument("write_pgm_slice: only 2-D and 3-D fields");
  }
  const int rows = field.dims()[field.dim() - 2];
  const int cols = field.dims()[field.dim() - 1];
  const std::size_t plane = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  const std::size_t first = field.dim() == 3 ? static_cast<std::size_t>(field.dims()[0] / 2) * plane : 0;
  const auto slice = field.values().segment(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(plane));
  const double lo = slice.minCoeff();
  const double hi = slice.maxCoeff();
  const double range = hi > lo ? hi - lo : 1.0;
  out << "P5\n" << cols << ' ' << rows << "\n255\n";
  for (Eigen::Index i = 0; i < slice.size(); ++i) {
    const double t = (slice(i) - lo) / range;
    out.put(static_cast<char>(static_cast<unsigned char>(std::clamp(std::lround(255.0 * t), 0L, 255L))));
  }
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value == 0.0 ? 0.0 : value, std::chars_format::general, 17);
  if (ec != std::errc()) {
    throw std::runtime_error("format_double: conversion failed");
  }
  return std::string(buf, ptr);
}

}  // namespace dplane
