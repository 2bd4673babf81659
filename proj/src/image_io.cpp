#include "facectl/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include <png.h>

namespace facectl {
namespace {

std::string extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

thread_local std::string png_error_message;

// libpng is C: errors must leave through its longjmp, never a C++ throw.
[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  png_error_message = msg;
  png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

template <int C>
void write_png(const std::filesystem::path& path, const Image<C>& img) {
  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  if (!png) throw IoError("png: cannot allocate writer");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};

  if (setjmp(png_jmpbuf(png))) throw FormatError("png: " + png_error_message + " (" + path.string() + ")");
  png_init_io(png, file.get());
  png_set_compression_level(png, 6);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               C == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_BASE, PNG_FILTER_TYPE_BASE);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(img.data.data() + img.offset(0, y)));
  }
  png_write_end(png, nullptr);
}

template <int C>
void write_pnm(const std::filesystem::path& path, const Image<C>& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << (C == 3 ? "P6" : "P5") << '\n' << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

template <int C>
void write_any(const std::filesystem::path& path, const Image<C>& img) {
  const auto ext = extension(path);
  if (ext == ".png") {
    write_png(path, img);
  } else if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") {
    write_pnm(path, img);
  } else {
    throw FormatError("unsupported image extension: " + path.string());
  }
}

RgbImage read_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  if (!png) throw IoError("png: cannot allocate reader");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  RgbImage img;
  if (setjmp(png_jmpbuf(png))) throw FormatError("png: " + png_error_message + " (" + path.string() + ")");
  png_init_io(png, file.get());
  png_read_info(png, info);
  const auto color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  if (png_get_channels(png, info) != 3) throw FormatError("png: unsupported channel layout in " + path.string());

  img = RgbImage(static_cast<int>(png_get_image_width(png, info)), static_cast<int>(png_get_image_height(png, info)));
  for (int y = 0; y < img.height; ++y) png_read_row(png, img.data.data() + img.offset(0, y), nullptr);
  png_read_end(png, nullptr);
  return img;
}

RgbImage read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  in >> magic;
  auto next_int = [&]() {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string skip;
      std::getline(in, skip);
      in >> std::ws;
    }
    int v = 0;
    if (!(in >> v)) throw FormatError("pnm: malformed header in " + path.string());
    return v;
  };
  if (magic != "P5" && magic != "P6") throw FormatError("pnm: only binary P5/P6 supported: " + path.string());
  const int w = next_int();
  const int h = next_int();
  const int maxval = next_int();
  if (w <= 0 || h <= 0 || maxval != 255) throw FormatError("pnm: unsupported header in " + path.string());
  in.get();
  const int channels = magic == "P6" ? 3 : 1;
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw FormatError("pnm: truncated " + path.string());
  RgbImage img(w, h);
  if (channels == 3) {
    img.data = std::move(raw);
  } else {
    for (std::size_t i = 0; i < raw.size(); ++i) {
      img.data[3 * i] = img.data[3 * i + 1] = img.data[3 * i + 2] = raw[i];
    }
  }
  return img;
}

}  // namespace

void write_image(const std::filesystem::path& path, const RgbImage& img) { write_any(path, img); }
void write_image(const std::filesystem::path& path, const GrayImage& img) { write_any(path, img); }

RgbImage read_rgb_image(const std::filesystem::path& path) {
  const auto ext = extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return read_pnm(path);
  throw FormatError("unsupported image extension: " + path.string());
}

bool is_image_path(const std::filesystem::path& path) {
  const auto ext = extension(path);
  return ext == ".png" || ext == ".ppm" || ext == ".pgm" || ext == ".pnm";
}

}  // namespace facectl
