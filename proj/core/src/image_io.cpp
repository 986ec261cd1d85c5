#include "spectraldip/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <vector>

namespace spectraldip {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::string lower_ext(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::uint8_t quantize8(double v) {
  const double x = std::clamp(v, 0.0, 1.0) * 255.0;
  return static_cast<std::uint8_t>(std::nearbyint(x));  // round half to even
}

Image load_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open '" + path + "'");

  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
    throw std::runtime_error("'" + path + "' is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("PNG decode error in '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int bit_depth = png_get_bit_depth(png, info);
  if (bit_depth == 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("16-bit PNG is not supported: '" + path + "'");
  }
  const int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int ch = static_cast<int>(png_get_channels(png, info));
  if (ch != 1 && ch != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("unsupported PNG channel count in '" + path + "'");
  }

  std::vector<std::uint8_t> rowbuf(static_cast<std::size_t>(w) * ch);
  Image img(ch, h, w);
  for (int y = 0; y < h; ++y) {
    png_read_row(png, rowbuf.data(), nullptr);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c)
        img.at(c, y, x) = rowbuf[static_cast<std::size_t>(x) * ch + c] / 255.0;
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void save_png(const Image& image, const std::string& path) {
  if (image.channels != 1 && image.channels != 3)
    throw std::runtime_error("save_image: PNG needs 1 or 3 channels");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot write '" + path + "'");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("PNG encode error for '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8,
               image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<std::uint8_t> row(static_cast<std::size_t>(image.width) * image.channels);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < image.channels; ++c)
        row[static_cast<std::size_t>(x) * image.channels + c] =
            quantize8(image.at(c, y, x));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void skip_pnm_whitespace(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

Image load_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P6")
    throw std::runtime_error("unsupported PNM format '" + magic + "' in '" +
                             path + "' (only binary P5/P6)");
  const int channels = magic == "P5" ? 1 : 3;
  skip_pnm_whitespace(in);
  int w = 0, h = 0, maxval = 0;
  in >> w;
  skip_pnm_whitespace(in);
  in >> h;
  skip_pnm_whitespace(in);
  in >> maxval;
  if (!in || w <= 0 || h <= 0)
    throw std::runtime_error("bad PNM header in '" + path + "'");
  if (maxval != 255)
    throw std::runtime_error("unsupported PNM bit depth (maxval " +
                             std::to_string(maxval) + ") in '" + path + "'");
  in.get();  // single whitespace after maxval

  std::vector<std::uint8_t> buf(static_cast<std::size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!in) throw std::runtime_error("truncated PNM data in '" + path + "'");

  Image img(channels, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c)
        img.at(c, y, x) =
            buf[(static_cast<std::size_t>(y) * w + x) * channels + c] / 255.0;
  return img;
}

void save_pnm(const Image& image, const std::string& path, bool gray) {
  if (gray && image.channels != 1)
    throw std::runtime_error("save_image: PGM needs 1 channel");
  if (!gray && image.channels != 3)
    throw std::runtime_error("save_image: PPM needs 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << (gray ? "P5" : "P6") << "\n"
      << image.width << " " << image.height << "\n255\n";
  std::vector<std::uint8_t> buf(image.data.size());
  std::size_t i = 0;
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < image.channels; ++c) buf[i++] = quantize8(image.at(c, y, x));
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
}

}  // namespace

Image load_image(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "png") return load_png(path);
  if (ext == "pgm" || ext == "ppm" || ext == "pnm") return load_pnm(path);
  throw std::runtime_error("unsupported image format '." + ext + "' for '" +
                           path + "' (PNG/PGM/PPM only)");
}

void save_image(const Image& image, const std::string& path) {
  if (image.channels == 0 || image.height == 0 || image.width == 0)
    throw std::runtime_error("save_image: empty image");
  const std::string ext = lower_ext(path);
  if (ext == "png") return save_png(image, path);
  if (ext == "pgm") return save_pnm(image, path, true);
  if (ext == "ppm") return save_pnm(image, path, false);
  throw std::runtime_error("unsupported image format '." + ext + "' for '" +
                           path + "' (PNG/PGM/PPM only)");
}

}  // namespace spectraldip
