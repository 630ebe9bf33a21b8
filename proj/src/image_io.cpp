#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include <png.h>

#include "mvskit/dataio.hpp"
#include "mvskit/error.hpp"

namespace mvskit {

namespace {

std::string extension(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

unsigned char quantize(double v) { return static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))); }

Image read_png(const std::string& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw Error(path + ": cannot decode PNG: " + img.message);
  }
  const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int ch = color ? 3 : 1;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw Error(path + ": cannot decode PNG: " + msg);
  }
  Image out(static_cast<int>(img.height), static_cast<int>(img.width), ch);
  for (std::size_t i = 0; i < buf.size(); ++i) out.data()[i] = buf[i] / 255.0;
  return out;
}

void write_png(const std::string& path, const Image& image) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<unsigned char> buf(image.data().size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = quantize(image.data()[i]);
  if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr)) {
    throw Error(path + ": cannot encode PNG: " + img.message);
  }
}

// Binary PGM (P5) / PPM (P6), maxval 255, '#' comments in the header.
Image read_pnm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open: " + path);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto skip_space = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto header_int = [&](const char* what) {
    skip_space();
    const std::size_t start = pos;
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > 1000000) throw ParseError(path, 0, start, std::string(what) + " is too large");
    }
    if (pos == start) throw ParseError(path, 0, start, std::string("expected ") + what);
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw ParseError(path, 0, 0, "expected binary PGM (P5) or PPM (P6)");
  }
  const int ch = bytes[1] == '6' ? 3 : 1;
  pos = 2;
  const long w = header_int("width");
  const long h = header_int("height");
  const long maxval = header_int("maxval");
  if (w < 1 || h < 1) throw ParseError(path, 0, pos, "dimensions must be positive");
  if (maxval != 255) throw ParseError(path, 0, pos, "only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw ParseError(path, 0, pos, "expected whitespace after maxval");
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * h * ch;
  if (bytes.size() - pos != n) throw ParseError(path, 0, pos, "payload size does not match the header");
  Image out(static_cast<int>(h), static_cast<int>(w), ch);
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = bytes[pos + i] / 255.0;
  return out;
}

void write_pnm(const std::string& path, const Image& image, int channels) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path);
  os << (channels == 3 ? "P6" : "P5") << '\n' << image.width() << ' ' << image.height() << "\n255\n";
  const Image src = channels == 1 && image.channels() == 3 ? image.gray() : image;
  std::vector<unsigned char> buf;
  buf.reserve(src.pixel_count() * channels);
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      for (int c = 0; c < channels; ++c) buf.push_back(quantize(src.at(y, x, src.channels() == 1 ? 0 : c)));
    }
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) throw Error("write failed: " + path);
}

}  // namespace

Image read_image(const std::string& path) {
  if (!std::filesystem::exists(path)) throw Error("cannot open: " + path);
  const std::string ext = extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return read_pnm(path);
  throw Error(path + ": unsupported image format '" + ext + "'");
}

void write_image(const std::string& path, const Image& image) {
  if (image.channels() != 1 && image.channels() != 3) throw DimensionError("write_image: channels must be 1 or 3");
  const std::string ext = extension(path);
  if (ext == ".png") return write_png(path, image);
  if (ext == ".ppm") return write_pnm(path, image, 3);
  if (ext == ".pgm") return write_pnm(path, image, 1);
  throw Error(path + ": unsupported image format '" + ext + "'");
}

}  // namespace mvskit
