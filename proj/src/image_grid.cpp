#include "mlgan/image_grid.hpp"

#include <array>
#include <fstream>
#include <stdexcept>

namespace mlgan {

namespace {

std::uint32_t read_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                              static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b.data(), 4);
}

}  // namespace

ImageGrid read_image_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("image grid: cannot open '" + path.string() + "'");
  ImageGrid g;
  g.width = read_u32(in);
  g.height = read_u32(in);
  g.count = read_u32(in);
  if (!in) throw std::runtime_error("image grid: truncated header in '" + path.string() + "'");
  if (g.width == 0 || g.height == 0 || g.count == 0) throw std::runtime_error("image grid: empty dimensions");
  g.pixels.resize(g.image_size() * g.count);
  in.read(reinterpret_cast<char*>(g.pixels.data()), static_cast<std::streamsize>(g.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(g.pixels.size()))
    throw std::runtime_error("image grid: '" + path.string() + "' holds fewer pixels than its header declares");
  return g;
}

void write_image_grid(const ImageGrid& grid, const std::filesystem::path& path) {
  if (grid.pixels.size() != grid.image_size() * grid.count)
    throw std::invalid_argument("image grid: pixel buffer does not match width * height * count");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("image grid: cannot open '" + path.string() + "' for writing");
  write_u32(out, grid.width);
  write_u32(out, grid.height);
  write_u32(out, grid.count);
  out.write(reinterpret_cast<const char*>(grid.pixels.data()), static_cast<std::streamsize>(grid.pixels.size()));
}

Tensor image_grid_to_tensor(const ImageGrid& grid) {
  Tensor out({grid.count, grid.image_size()});
  for (std::size_t i = 0; i < grid.pixels.size(); ++i) out[i] = grid.pixels[i] / 127.5 - 1.0;
  return out;
}

Tensor sample_images(const ImageGrid& grid, std::size_t n, Rng& rng) {
  const std::size_t d = grid.image_size();
  Tensor out({n, d});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = rng.index(grid.count);
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] = grid.pixels[k * d + j] / 127.5 - 1.0;
  }
  return out;
}

}  // namespace mlgan
