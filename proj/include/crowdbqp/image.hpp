// RGB raster and binary PPM (P6) input/output.
#ifndef CROWDBQP_IMAGE_HPP
#define CROWDBQP_IMAGE_HPP

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace crowdbqp {

using Point = Eigen::Vector2d;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Interleaved 8-bit RGB image, row-major.
class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::uint8_t& at(int x, int y, int channel) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + channel];
  }
  std::uint8_t at(int x, int y, int channel) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + channel];
  }
  /// Pixel access with coordinates clamped to the nearest edge pixel.
  std::uint8_t clamped(int x, int y, int channel) const;
  Rgb pixel(int x, int y) const { return {at(x, y, 0), at(x, y, 1), at(x, y, 2)}; }
  void set(int x, int y, Rgb c) {
    at(x, y, 0) = c.r;
    at(x, y, 1) = c.g;
    at(x, y, 2) = c.b;
  }

  const std::vector<std::uint8_t>& data() const { return data_; }
  std::vector<std::uint8_t>& data() { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0, height_ = 0;
  std::vector<std::uint8_t> data_;
};

void write_ppm(const std::filesystem::path& path, const Image& img);
Image read_ppm(const std::filesystem::path& path);
std::string encode_ppm(const Image& img);
Image decode_ppm(const std::string& bytes);

/// frame_%06d.ppm
std::string frame_filename(int index);
std::vector<Image> read_frames(const std::filesystem::path& dir);

}  // namespace crowdbqp

#endif  // CROWDBQP_IMAGE_HPP
