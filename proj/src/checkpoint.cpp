#include "distlab/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace distlab {
namespace {

constexpr std::array<char, 5> kMagic = {'D', 'F', 'C', 'K', '1'};
constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 32;

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void write_checkpoint(std::ostream& out, const MlpModel& model) {
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, model.layer_dims.size());
  for (std::size_t d : model.layer_dims) put_u64(out, d);
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    for (double w : model.weights[l].data()) put_f64(out, w);
    for (double b : model.biases[l]) put_f64(out, b);
  }
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

MlpModel read_checkpoint(std::istream& in) {
  std::array<char, 5> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error("checkpoint: bad magic (expected DFCK1)");
  const std::uint64_t n = get_u64(in);
  if (n < 2 || n > 1024) throw std::runtime_error("checkpoint: implausible layer count");
  MlpModel model;
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t d = get_u64(in);
    if (d == 0 || d > kMaxDim) throw std::runtime_error("checkpoint: invalid layer dim");
    model.layer_dims.push_back(static_cast<std::size_t>(d));
  }
  for (std::size_t l = 0; l + 1 < model.layer_dims.size(); ++l) {
    Matrix w(model.layer_dims[l + 1], model.layer_dims[l]);
    for (double& v : w.data()) v = get_f64(in);
    std::vector<double> b(model.layer_dims[l + 1]);
    for (double& v : b) v = get_f64(in);
    model.weights.push_back(std::move(w));
    model.biases.push_back(std::move(b));
  }
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const MlpModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
  write_checkpoint(out, model);
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace distlab
