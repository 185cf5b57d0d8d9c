#include "nsp/privacy/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "nsp/error.hpp"
#include "nsp/io/nspw.hpp"
#include "nsp/rng.hpp"

namespace nsp {

Image::Image(TensorShape s, std::vector<double> p) : shape(s), pixels(std::move(p)) {
  if (pixels.size() != shape.size()) {
    throw ShapeError("Image: " + std::to_string(pixels.size()) + " pixels for shape of size " +
                     std::to_string(shape.size()));
  }
}

Image synthetic_image(TensorShape shape, std::uint64_t seed) {
  Image img(shape);
  Rng rng(seed);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t c = 0; c < shape.channels; ++c) {
    std::vector<double> v(shape.height * shape.width, rng.uniform(-0.5, 0.5));
    for (int wave = 0; wave < 4; ++wave) {
      const double fx = rng.uniform(0.5, 3.0);
      const double fy = rng.uniform(0.5, 3.0);
      const double phase = rng.uniform(0.0, two_pi);
      const double amp = rng.uniform(0.2, 0.6);
      for (std::size_t y = 0; y < shape.height; ++y) {
        const double yy = static_cast<double>(y) / static_cast<double>(shape.height);
        for (std::size_t x = 0; x < shape.width; ++x) {
          const double xx = static_cast<double>(x) / static_cast<double>(shape.width);
          v[y * shape.width + x] += amp * std::sin(two_pi * (fx * xx + fy * yy) + phase);
        }
      }
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      img.pixels[c * v.size() + i] = 0.5 + 0.35 * std::tanh(v[i]);
    }
  }
  return img;
}

double max_bound_violation(const Image& img) {
  double worst = 0.0;
  for (double v : img.pixels) worst = std::max({worst, -v, v - 1.0});
  return worst;
}

Image normalized_for_viewing(const Image& img) {
  Image out = img;
  if (img.pixels.empty()) return out;
  const auto [lo, hi] = std::minmax_element(img.pixels.begin(), img.pixels.end());
  const double span = *hi - *lo;
  for (double& v : out.pixels) v = span > 0.0 ? (v - *lo) / span : 0.5;
  return out;
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  if (img.shape.channels != 1 && img.shape.channels != 3) {
    throw ShapeError("write_ppm: only 1- or 3-channel images can be exported, got " +
                     std::to_string(img.shape.channels));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write image " + path.string());
  out << (img.shape.channels == 3 ? "P6" : "P5") << '\n'
      << img.shape.width << ' ' << img.shape.height << "\n255\n";
  for (std::size_t y = 0; y < img.shape.height; ++y) {
    for (std::size_t x = 0; x < img.shape.width; ++x) {
      for (std::size_t c = 0; c < img.shape.channels; ++c) {
        const double v = std::clamp(img.at(c, y, x), 0.0, 1.0);
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
      }
    }
  }
  if (!out) throw Error("failed writing image " + path.string());
}

namespace {

// Next whitespace-separated header token, skipping '#' comments.
std::string header_token(std::istream& in, const std::string& what) {
  std::string token;
  char ch = 0;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(ch);
  }
  if (token.empty()) throw FormatError(what + ": truncated header");
  return token;
}

std::size_t header_number(std::istream& in, const std::string& what) {
  const std::string t = header_token(in, what);
  if (t.empty() || t.size() > 9 || !std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw FormatError(what + ": bad header value '" + t + "'");
  }
  return std::stoul(t);
}

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open image " + path.string());
  const std::string what = "image " + path.string();
  const std::string magic = header_token(in, what);
  std::size_t channels = 0;
  if (magic == "P6") {
    channels = 3;
  } else if (magic == "P5") {
    channels = 1;
  } else {
    throw FormatError(what + ": expected binary PPM (P6) or PGM (P5), got '" + magic + "'");
  }
  const std::size_t width = header_number(in, what);
  const std::size_t height = header_number(in, what);
  const std::size_t maxval = header_number(in, what);
  if (width == 0 || height == 0) throw FormatError(what + ": empty image");
  if (maxval == 0 || maxval > 255) throw FormatError(what + ": only 8-bit images are supported");
  Image img({channels, height, width});
  std::vector<unsigned char> raw(channels * height * width);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw FormatError(what + ": truncated pixel data");
  }
  std::size_t k = 0;
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        img.at(c, y, x) = static_cast<double>(raw[k++]) / static_cast<double>(maxval);
      }
    }
  }
  return img;
}

void write_image_blob(const std::filesystem::path& path, const Image& img) {
  io::write_nspw(path, {{"image", {img.shape.channels, img.shape.height, img.shape.width}, img.pixels}});
}

Image read_image_blob(const std::filesystem::path& path) {
  const auto tensors = io::read_nspw(path);
  const io::Tensor& t = io::find_tensor(tensors, "image");
  if (t.shape.size() != 3) throw FormatError("image blob " + path.string() + ": tensor 'image' must have rank 3");
  return Image({t.shape[0], t.shape[1], t.shape[2]}, t.data);
}

}  // namespace nsp
