#include "crowdbqp/image.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace crowdbqp {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw std::invalid_argument("Image: negative size");
  data_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

std::uint8_t Image::clamped(int x, int y, int channel) const {
  return at(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1), channel);
}

std::string encode_ppm(const Image& img) {
  std::string out = "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.data().data()), img.data().size());
  return out;
}

namespace {

// next whitespace-delimited header token, skipping '#' comments
std::string header_token(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(start, pos - start);
}

}  // namespace

Image decode_ppm(const std::string& bytes) {
  std::size_t pos = 0;
  if (header_token(bytes, pos) != "P6") throw std::runtime_error("ppm: not a binary P6 file");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(header_token(bytes, pos));
    h = std::stoi(header_token(bytes, pos));
    maxval = std::stoi(header_token(bytes, pos));
  } catch (const std::exception&) {
    throw std::runtime_error("ppm: malformed header");
  }
  if (maxval != 255 || w <= 0 || h <= 0) throw std::runtime_error("ppm: unsupported header");
  ++pos;  // single whitespace before the raster
  const std::size_t n = static_cast<std::size_t>(w) * h * 3;
  if (bytes.size() < pos + n) throw std::runtime_error("ppm: truncated raster");
  Image img(w, h);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), n, img.data().begin());
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  const std::string bytes = encode_ppm(img);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return decode_ppm(ss.str());
}

std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06d.ppm", index);
  return buf;
}

std::vector<Image> read_frames(const std::filesystem::path& dir) {
  std::vector<Image> frames;
  for (int i = 0;; ++i) {
    const auto path = dir / frame_filename(i);
    if (!std::filesystem::exists(path)) break;
    frames.push_back(read_ppm(path));
  }
  if (frames.empty()) throw std::runtime_error("no frames found in " + dir.string());
  return frames;
}

}  // namespace crowdbqp
