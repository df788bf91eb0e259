#include "mst/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mst {

static_assert(std::endian::native == std::endian::little,
              "MSFLD1 writer assumes a little-endian host");

namespace {

constexpr char kMagic[6] = {'M', 'S', 'F', 'L', 'D', '1'};

void write_header(std::ofstream& os, const Grid3& g, std::uint8_t rank) {
  os.write(kMagic, 6);
  for (int a = 0; a < 3; ++a) {
    std::uint64_t d = g.dims[a];
    os.write(reinterpret_cast<const char*>(&d), 8);
  }
  for (int a = 0; a < 3; ++a) os.write(reinterpret_cast<const char*>(&g.origin[a]), 8);
  for (int a = 0; a < 3; ++a) os.write(reinterpret_cast<const char*>(&g.spacing[a]), 8);
  os.write(reinterpret_cast<const char*>(&rank), 1);
}

Grid3 read_header(std::ifstream& is, std::uint8_t& rank) {
  char magic[6];
  is.read(magic, 6);
  if (!is || std::memcmp(magic, kMagic, 6) != 0)
    throw std::runtime_error("MSFLD1: bad magic");
  std::array<std::size_t, 3> dims;
  std::array<double, 3> origin, spacing;
  for (int a = 0; a < 3; ++a) {
    std::uint64_t d;
    is.read(reinterpret_cast<char*>(&d), 8);
    dims[a] = std::size_t(d);
  }
  for (int a = 0; a < 3; ++a) is.read(reinterpret_cast<char*>(&origin[a]), 8);
  for (int a = 0; a < 3; ++a) is.read(reinterpret_cast<char*>(&spacing[a]), 8);
  is.read(reinterpret_cast<char*>(&rank), 1);
  if (!is) throw std::runtime_error("MSFLD1: truncated header");
  if (rank != 1 && rank != 3) throw std::runtime_error("MSFLD1: rank must be 1 or 3");
  return Grid3(origin, spacing, dims);
}

}  // namespace

void write_field(const std::string& path, const ScalarField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("MSFLD1: cannot open " + path);
  write_header(os, f.grid, 1);
  os.write(reinterpret_cast<const char*>(f.v.data()),
           std::streamsize(f.v.size() * sizeof(cplx)));
  if (!os) throw std::runtime_error("MSFLD1: write failed on " + path);
}

void write_field(const std::string& path, const VectorField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("MSFLD1: cannot open " + path);
  write_header(os, f.grid, 3);
  for (std::size_t n = 0; n < f.grid.size(); ++n) {
    cplx node[3] = {f.v[0][n], f.v[1][n], f.v[2][n]};
    os.write(reinterpret_cast<const char*>(node), sizeof(node));
  }
  if (!os) throw std::runtime_error("MSFLD1: write failed on " + path);
}

AnyField read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("MSFLD1: cannot open " + path);
  std::uint8_t rank;
  Grid3 g = read_header(is, rank);
  if (rank == 1) {
    ScalarField f(g);
    is.read(reinterpret_cast<char*>(f.v.data()), std::streamsize(f.v.size() * sizeof(cplx)));
    if (!is) throw std::runtime_error("MSFLD1: truncated payload");
    return f;
  }
  VectorField f(g);
  for (std::size_t n = 0; n < g.size(); ++n) {
    cplx node[3];
    is.read(reinterpret_cast<char*>(node), sizeof(node));
    for (int c = 0; c < 3; ++c) f.v[c][n] = node[c];
  }
  if (!is) throw std::runtime_error("MSFLD1: truncated payload");
  return f;
}

}  // namespace mst
