#include "mfuse/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>

namespace mfuse {
namespace {

namespace fs = std::filesystem;

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors through longjmp. Everything that must survive the
// jump lives on the heap or was fully set before setjmp.
struct PngErrorState {
  std::jmp_buf jump;
  char message[256] = {};
};

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof state->message, "%s", msg);
  std::longjmp(state->jump, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

struct PngDecoded {
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int channels = 0;
};

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

LoadedImage decode_png(const fs::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  check(fp != nullptr, "cannot open image file: " + path.string());

  png_byte signature[8];
  check(std::fread(signature, 1, 8, fp.get()) == 8 && png_sig_cmp(signature, 0, 8) == 0,
        "not a PNG file: " + path.string());

  auto state = std::make_unique<PngErrorState>();
  auto out = std::make_unique<PngDecoded>();
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, state.get(),
                                           png_error_handler, png_warning_handler);
  check(png != nullptr, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("libpng initialisation failed");
  }

  if (setjmp(state->jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("corrupt or truncated PNG '" + path.string() + "': " + state->message);
  }

  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int raw_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && raw_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  out->channels = png_get_channels(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  out->pixels.resize(row_bytes * out->height);
  out->rows.resize(out->height);
  for (png_uint_32 y = 0; y < out->height; ++y) out->rows[y] = out->pixels.data() + y * row_bytes;
  png_read_image(png, out->rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  check(out->width > 0 && out->height > 0, "zero-sized image: " + path.string());
  check(out->channels == 1 || out->channels == 3,
        "unsupported PNG channel layout in " + path.string());
  check(out->bit_depth == 8 || out->bit_depth == 16, "unsupported PNG bit depth");

  const int w = static_cast<int>(out->width);
  const int h = static_cast<int>(out->height);
  const double max_code = out->bit_depth == 16 ? 65535.0 : 255.0;
  const int bytes = out->bit_depth / 8;
  Raster r(w, h);
  for (int y = 0; y < h; ++y) {
    const png_byte* row = out->rows[static_cast<std::size_t>(y)];
    for (int x = 0; x < w; ++x) {
      auto code = [&](int c) -> double {
        const png_byte* p = row + (static_cast<std::size_t>(x) * out->channels + c) * bytes;
        return bytes == 2 ? static_cast<double>((p[0] << 8) | p[1]) : static_cast<double>(p[0]);
      };
      double v = out->channels == 1 ? code(0)
                                    : 0.299 * code(0) + 0.587 * code(1) + 0.114 * code(2);
      r(x, y) = v / max_code;
    }
  }
  return {ImageF::clamped(std::move(r)), max_code};
}

// channels == 0 writes a palette image with the given palette.
void encode_png(const fs::path& path, int width, int height, int channels, int bit_depth,
                const std::vector<png_byte>& pixels,
                std::span<const std::array<std::uint8_t, 3>> palette = {}) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  check(fp != nullptr, "cannot open output file: " + path.string());

  auto state = std::make_unique<PngErrorState>();
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, state.get(),
                                            png_error_handler, png_warning_handler);
  check(png != nullptr, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("libpng initialisation failed");
  }
  auto rows = std::make_unique<std::vector<png_bytep>>(static_cast<std::size_t>(height));
  const std::size_t row_bytes = static_cast<std::size_t>(width) *
                                static_cast<std::size_t>(std::max(channels, 1)) * (bit_depth / 8);
  auto plte = std::make_unique<std::vector<png_color>>();
  for (const auto& c : palette) plte->push_back(png_color{c[0], c[1], c[2]});
  for (int y = 0; y < height; ++y)
    (*rows)[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(pixels.data()) + static_cast<std::size_t>(y) * row_bytes;

  if (setjmp(state->jump)) {
    png_destroy_write_struct(&png, &info);
    throw Error("failed writing PNG '" + path.string() + "': " + state->message);
  }
  png_init_io(png, fp.get());
  const int color_type = channels == 0   ? PNG_COLOR_TYPE_PALETTE
                         : channels == 3 ? PNG_COLOR_TYPE_RGB
                                         : PNG_COLOR_TYPE_GRAY;
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  if (channels == 0) png_set_PLTE(png, info, plte->data(), static_cast<int>(plte->size()));
  png_write_info(png, info);
  png_write_image(png, rows->data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  check(std::fflush(fp.get()) == 0, "failed flushing " + path.string());
}

// Binary PGM: "P5" <ws> width <ws> height <ws> maxval <single ws> data,
// with '#' comments allowed in the header.
LoadedImage decode_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), "cannot open image file: " + path.string());
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  check(in.good() && magic == "P5", "not a binary PGM file: " + path.string());

  auto read_header_int = [&]() -> long {
    int c = in.get();
    while (in.good()) {
      if (c == '#') {
        while (in.good() && c != '\n') c = in.get();
      } else if (!std::isspace(c)) {
        break;
      }
      c = in.get();
    }
    check(in.good() && std::isdigit(c), "malformed PGM header in " + path.string());
    long value = 0;
    while (in.good() && std::isdigit(c)) {
      value = value * 10 + (c - '0');
      check(value < (1L << 30), "PGM header value too large");
      c = in.get();
    }
    check(in.good() && std::isspace(c), "malformed PGM header in " + path.string());
    return value;
  };
  const long width = read_header_int();
  const long height = read_header_int();
  const long maxval = read_header_int();
  check(width > 0 && height > 0, "zero-sized image: " + path.string());
  check(maxval >= 1 && maxval <= 65535, "PGM maxval out of range in " + path.string());

  const int bytes = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<unsigned char> data(count * bytes);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  check(static_cast<std::size_t>(in.gcount()) == data.size(),
        "truncated PGM data in " + path.string());

  std::vector<double> samples(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double code = bytes == 2 ? static_cast<double>((data[2 * i] << 8) | data[2 * i + 1])
                                   : static_cast<double>(data[i]);
    samples[i] = std::min(code, static_cast<double>(maxval)) / static_cast<double>(maxval);
  }
  return {ImageF::from_samples(static_cast<int>(width), static_cast<int>(height),
                               std::move(samples)),
          static_cast<double>(maxval)};
}

void encode_pgm(const ImageF& img, const fs::path& path, BitDepth depth) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  check(out.good(), "cannot open output file: " + path.string());
  const int maxval = depth == BitDepth::k16 ? 65535 : 255;
  out << "P5\n" << img.width() << ' ' << img.height() << '\n' << maxval << '\n';
  std::vector<unsigned char> data;
  data.reserve(img.size() * (depth == BitDepth::k16 ? 2 : 1));
  for (double s : img.samples()) {
    const std::uint16_t code = quantize(s, depth);
    if (depth == BitDepth::k16) data.push_back(static_cast<unsigned char>(code >> 8));
    data.push_back(static_cast<unsigned char>(code & 0xFF));
  }
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  out.flush();
  check(out.good(), "failed writing " + path.string());
}

}  // namespace

std::uint16_t quantize(double sample, BitDepth depth) {
  const double max_code = depth == BitDepth::k16 ? 65535.0 : 255.0;
  return static_cast<std::uint16_t>(std::lround(std::clamp(sample, 0.0, 1.0) * max_code));
}

ImageF load_image(const fs::path& path) { return load_image_with_range(path).image; }

LoadedImage load_image_with_range(const fs::path& path) {
  std::ifstream probe(path, std::ios::binary);
  check(probe.good(), "cannot open image file: " + path.string());
  char head[8] = {};
  probe.read(head, 8);
  const auto got = probe.gcount();
  probe.close();
  if (got >= 2 && head[0] == 'P' && head[1] == '5') return decode_pgm(path);
  if (got == 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(head), 0, 8) == 0)
    return decode_png(path);
  throw Error("unsupported image format (expected PNG or binary PGM): " + path.string());
}

void save_image(const ImageF& img, const fs::path& path, BitDepth depth) {
  check(!img.empty(), "cannot save an empty image");
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") {
    encode_pgm(img, path, depth);
    return;
  }
  check(ext == ".png", "unsupported output extension '" + ext + "' (use .png or .pgm)");
  const int bytes = depth == BitDepth::k16 ? 2 : 1;
  std::vector<png_byte> pixels(img.size() * bytes);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const std::uint16_t code = quantize(img[i], depth);
    if (bytes == 2) {
      pixels[2 * i] = static_cast<png_byte>(code >> 8);
      pixels[2 * i + 1] = static_cast<png_byte>(code & 0xFF);
    } else {
      pixels[i] = static_cast<png_byte>(code);
    }
  }
  encode_png(path, img.width(), img.height(), 1, bytes * 8, pixels);
}

void save_rgb_png(const RgbImage& img, const fs::path& path) {
  check(img.width > 0 && img.height > 0 &&
            img.pixels.size() == static_cast<std::size_t>(img.width) *
                                     static_cast<std::size_t>(img.height),
        "invalid RGB image");
  std::vector<png_byte> pixels;
  pixels.reserve(img.pixels.size() * 3);
  for (const auto& px : img.pixels) pixels.insert(pixels.end(), px.begin(), px.end());
  encode_png(path, img.width, img.height, 3, 8, pixels);
}

void save_indexed_png(const Grid<std::uint8_t>& indices,
                      std::span<const std::array<std::uint8_t, 3>> palette, const fs::path& path) {
  check(!palette.empty() && palette.size() <= 256, "palette must hold 1..256 colors");
  std::vector<png_byte> pixels(indices.data().begin(), indices.data().end());
  for (auto i : pixels) check(i < palette.size(), "palette index out of range");
  encode_png(path, indices.width(), indices.height(), 0, 8, pixels, palette);
}

}  // namespace mfuse
