#include "fedreg/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "fedreg/errors.hpp"

namespace fedreg {

namespace {

constexpr char kMagic[4] = {'F', 'R', 'S', 'M'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, 4);
}

void write_u64(std::ostream& os, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, 8);
}

void write_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(os, bits);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char buf[4];
  is.read(reinterpret_cast<char*>(buf), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& is) {
  std::uint64_t bits = read_u64(is);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open checkpoint for writing: " + path);
  const ModelConfig& cfg = params.config();
  os.write(kMagic, 4);
  write_u32(os, kVersion);
  write_u32(os, static_cast<std::uint32_t>(cfg.n_blocks));
  write_u32(os, static_cast<std::uint32_t>(cfg.d_model));
  write_u32(os, static_cast<std::uint32_t>(cfg.n_heads));
  write_u32(os, static_cast<std::uint32_t>(cfg.d_ff));
  write_u32(os, static_cast<std::uint32_t>(cfg.vocab_size));
  write_u32(os, static_cast<std::uint32_t>(cfg.input_dim));
  write_u32(os, static_cast<std::uint32_t>(cfg.tap_positions.size()));
  for (int t : cfg.tap_positions) write_u32(os, static_cast<std::uint32_t>(t));
  std::vector<double> flat = params.flatten();
  write_u64(os, flat.size());
  for (double v : flat) write_f64(os, v);
  if (!os) throw DataError("failed writing checkpoint: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("bad checkpoint magic in " + path);
  }
  std::uint32_t version = read_u32(is);
  if (version != kVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  ModelConfig cfg;
  cfg.n_blocks = static_cast<int>(read_u32(is));
  cfg.d_model = static_cast<int>(read_u32(is));
  cfg.n_heads = static_cast<int>(read_u32(is));
  cfg.d_ff = static_cast<int>(read_u32(is));
  cfg.vocab_size = static_cast<int>(read_u32(is));
  cfg.input_dim = static_cast<int>(read_u32(is));
  std::uint32_t n_taps = read_u32(is);
  for (std::uint32_t i = 0; i < n_taps; ++i) cfg.tap_positions.insert(static_cast<int>(read_u32(is)));
  std::uint64_t count = read_u64(is);
  std::vector<double> flat(count);
  for (auto& v : flat) v = read_f64(is);
  if (!is) throw DataError("truncated checkpoint: " + path);
  return ModelParams::unflatten(cfg, flat);
}

}  // namespace fedreg
