#pragma once

// Raw grayscale image collections:
//   uint32 width, uint32 height, uint32 count   (little-endian)
//   count * height * width bytes, row-major, one image after another.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mlgan/random.hpp"
#include "mlgan/tensor.hpp"

namespace mlgan {

struct ImageGrid {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t count = 0;
  std::vector<std::uint8_t> pixels;

  std::size_t image_size() const { return static_cast<std::size_t>(width) * height; }
};

ImageGrid read_image_grid(const std::filesystem::path& path);
void write_image_grid(const ImageGrid& grid, const std::filesystem::path& path);

/// [count, width * height] with pixel values mapped to [-1, 1].
Tensor image_grid_to_tensor(const ImageGrid& grid);

/// Draws n images uniformly with replacement, scaled to [-1, 1].
Tensor sample_images(const ImageGrid& grid, std::size_t n, Rng& rng);

}  // namespace mlgan
