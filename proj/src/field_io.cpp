#include "cgoh/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace cgoh::io {
namespace {

static_assert(std::endian::native == std::endian::little, "field dumps assume a little-endian host");

void write_header(std::ofstream& os, const Grid3& g) {
  os.write("CGF1", 4);
  for (int d = 0; d < 3; ++d) {
    const std::int32_t n = g.n(d);
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
  }
  for (int d = 0; d < 3; ++d) os.write(reinterpret_cast<const char*>(&g.box().lo[d]), sizeof(double));
  for (int d = 0; d < 3; ++d) os.write(reinterpret_cast<const char*>(&g.box().hi[d]), sizeof(double));
}

void write_block(std::ofstream& os, const std::vector<cplx>& v) {
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(cplx)));
}

void write_sidecar(const std::string& path, const Grid3& g, int components, const nlohmann::json& meta) {
  nlohmann::json j = meta;
  j["format"] = "CGF1";
  j["components"] = components;
  j["grid"] = {{"n", {g.n(0), g.n(1), g.n(2)}},
               {"lo", {g.box().lo[0], g.box().lo[1], g.box().lo[2]}},
               {"hi", {g.box().hi[0], g.box().hi[1], g.box().hi[2]}}};
  std::ofstream os(path + ".json");
  if (!os) throw InputError("write_field: cannot open " + path + ".json");
  os << j.dump(2) << "\n";
}

Grid3 read_header(std::ifstream& is, const std::string& path) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "CGF1", 4) != 0) throw InputError("read_field: bad magic in " + path);
  std::int32_t n[3];
  double lo[3], hi[3];
  is.read(reinterpret_cast<char*>(n), sizeof n);
  is.read(reinterpret_cast<char*>(lo), sizeof lo);
  is.read(reinterpret_cast<char*>(hi), sizeof hi);
  if (!is) throw InputError("read_field: truncated header in " + path);
  return Grid3(Box3{{lo[0], lo[1], lo[2]}, {hi[0], hi[1], hi[2]}}, {n[0], n[1], n[2]});
}

std::vector<cplx> read_block(std::ifstream& is, std::size_t count, const std::string& path) {
  std::vector<cplx> v(count);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(cplx)));
  if (!is) throw InputError("read_field: truncated data in " + path);
  return v;
}

}  // namespace

void write_field(const std::string& path, const ScalarField& f, const nlohmann::json& meta) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("write_field: cannot open " + path);
  write_header(os, f.grid);
  write_block(os, f.v);
  write_sidecar(path, f.grid, 1, meta);
}

void write_field(const std::string& path, const VectorField3& V, const nlohmann::json& meta) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("write_field: cannot open " + path);
  write_header(os, V.grid);
  for (const auto& c : V.c) write_block(os, c);
  write_sidecar(path, V.grid, 3, meta);
}

ScalarField read_scalar(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("read_field: cannot open " + path);
  ScalarField f(read_header(is, path));
  f.v = read_block(is, f.grid.size(), path);
  return f;
}

VectorField3 read_vector(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("read_field: cannot open " + path);
  VectorField3 V(read_header(is, path), false);
  for (auto& c : V.c) c = read_block(is, V.grid.size(), path);
  bool real = true;
  for (const auto& c : V.c)
    for (const auto& z : c) real = real && z.imag() == 0.0;
  V.real_valued = real;
  return V;
}

}  // namespace cgoh::io
