#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace roidet {

using Rgb = std::array<std::uint8_t, 3>;

// Row-major 8-bit RGB raster.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb fill = {0, 0, 0});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  Rgb at(int x, int y) const noexcept {
    const std::size_t i = offset(x, y);
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
  }
  void set(int x, int y, Rgb c) noexcept {
    const std::size_t i = offset(x, y);
    pixels_[i] = c[0];
    pixels_[i + 1] = c[1];
    pixels_[i + 2] = c[2];
  }

  const std::vector<std::uint8_t>& bytes() const noexcept { return pixels_; }
  std::vector<std::uint8_t>& bytes() noexcept { return pixels_; }

  bool operator==(const RgbImage&) const = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// PNG or PPM, by whatever the decoder recognizes. Throws Error(Io).
RgbImage read_image(const std::filesystem::path& path);

// 8-bit RGB PNG, no alpha, fixed compression level.
void write_png(const std::filesystem::path& path, const RgbImage& image);

}  // namespace roidet
