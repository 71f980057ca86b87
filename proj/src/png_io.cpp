#include "gradmix/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace gradmix::png {
namespace {

struct ReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

struct ErrorSlot {
  std::jmp_buf jump;
  char message[256] = {0};
};

void on_error(png_structp png_ptr, png_const_charp msg) {
  auto* slot = static_cast<ErrorSlot*>(png_get_error_ptr(png_ptr));
  std::strncpy(slot->message, msg, sizeof(slot->message) - 1);
  std::longjmp(slot->jump, 1);
}

void on_warning(png_structp, png_const_charp) {}

void write_to_vector(png_structp png_ptr, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png_ptr));
  out->insert(out->end(), data, data + length);
}

void flush_noop(png_structp) {}

void read_from_span(png_structp png_ptr, png_bytep data, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png_ptr));
  if (cursor->offset + length > cursor->bytes.size())
    png_error(png_ptr, "truncated PNG stream");
  std::memcpy(data, cursor->bytes.data() + cursor->offset, length);
  cursor->offset += length;
}

// `rows` must hold height * row_bytes bytes laid out row by row.
std::vector<std::uint8_t> encode(int width, int height, int bit_depth,
                                 int color_type,
                                 std::vector<std::uint8_t>& rows,
                                 std::size_t row_bytes) {
  std::vector<std::uint8_t> out;
  std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r) row_ptrs[r] = rows.data() + r * row_bytes;

  ErrorSlot slot;
  png_structp png_ptr = png_create_write_struct(PNG_LIBPNG_VER_STRING, &slot,
                                                on_error, on_warning);
  if (!png_ptr) throw Error("png: cannot create write struct");
  png_infop info_ptr = png_create_info_struct(png_ptr);
  if (!info_ptr) {
    png_destroy_write_struct(&png_ptr, nullptr);
    throw Error("png: cannot create info struct");
  }
  if (setjmp(slot.jump)) {
    png_destroy_write_struct(&png_ptr, &info_ptr);
    throw Error(std::string("png encode: ") + slot.message);
  }
  png_set_write_fn(png_ptr, &out, write_to_vector, flush_noop);
  png_set_filter(png_ptr, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_set_compression_level(png_ptr, 6);
  png_set_IHDR(png_ptr, info_ptr, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_BASE,
               PNG_FILTER_TYPE_BASE);
  png_write_info(png_ptr, info_ptr);
  png_write_image(png_ptr, row_ptrs.data());
  png_write_end(png_ptr, nullptr);
  png_destroy_write_struct(&png_ptr, &info_ptr);
  return out;
}

struct Decoded {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> rows;
  std::size_t row_bytes = 0;
};

Decoded decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    throw Error("png decode: not a PNG stream");
  Decoded d;
  std::vector<png_bytep> row_ptrs;
  ReadCursor cursor{bytes, 0};
  ErrorSlot slot;
  png_structp png_ptr = png_create_read_struct(PNG_LIBPNG_VER_STRING, &slot,
                                               on_error, on_warning);
  if (!png_ptr) throw Error("png: cannot create read struct");
  png_infop info_ptr = png_create_info_struct(png_ptr);
  if (!info_ptr) {
    png_destroy_read_struct(&png_ptr, nullptr, nullptr);
    throw Error("png: cannot create info struct");
  }
  if (setjmp(slot.jump)) {
    png_destroy_read_struct(&png_ptr, &info_ptr, nullptr);
    throw Error(std::string("png decode: ") + slot.message);
  }
  png_set_read_fn(png_ptr, &cursor, read_from_span);
  png_read_info(png_ptr, info_ptr);

  const int color_type = png_get_color_type(png_ptr, info_ptr);
  const int depth = png_get_bit_depth(png_ptr, info_ptr);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png_ptr);
  if ((color_type & PNG_COLOR_MASK_COLOR) == 0 && depth < 8)
    png_set_expand_gray_1_2_4_to_8(png_ptr);
  if (png_get_valid(png_ptr, info_ptr, PNG_INFO_tRNS))
    png_set_tRNS_to_alpha(png_ptr);
  png_set_strip_alpha(png_ptr);
  png_set_interlace_handling(png_ptr);
  png_read_update_info(png_ptr, info_ptr);

  d.width = static_cast<int>(png_get_image_width(png_ptr, info_ptr));
  d.height = static_cast<int>(png_get_image_height(png_ptr, info_ptr));
  d.channels = png_get_channels(png_ptr, info_ptr);
  d.bit_depth = png_get_bit_depth(png_ptr, info_ptr);
  d.row_bytes = png_get_rowbytes(png_ptr, info_ptr);
  d.rows.resize(d.row_bytes * static_cast<std::size_t>(d.height));
  row_ptrs.resize(static_cast<std::size_t>(d.height));
  for (int r = 0; r < d.height; ++r) row_ptrs[r] = d.rows.data() + r * d.row_bytes;
  png_read_image(png_ptr, row_ptrs.data());
  png_read_end(png_ptr, nullptr);
  png_destroy_read_struct(&png_ptr, &info_ptr, nullptr);
  return d;
}

}  // namespace

std::vector<std::uint8_t> encode_rgb(const RgbImage& image) {
  const std::size_t row_bytes = static_cast<std::size_t>(image.width()) * 3;
  std::vector<std::uint8_t> rows(row_bytes * image.height());
  std::size_t i = 0;
  for (const Rgb& px : image.pixels()) {
    rows[i++] = px.r;
    rows[i++] = px.g;
    rows[i++] = px.b;
  }
  return encode(image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB, rows,
                row_bytes);
}

std::vector<std::uint8_t> encode_gray16(const Raster<std::uint16_t>& image) {
  const std::size_t row_bytes = static_cast<std::size_t>(image.width()) * 2;
  std::vector<std::uint8_t> rows(row_bytes * image.height());
  std::size_t i = 0;
  for (std::uint16_t v : image.pixels()) {
    rows[i++] = static_cast<std::uint8_t>(v >> 8);  // PNG is big-endian
    rows[i++] = static_cast<std::uint8_t>(v & 0xff);
  }
  return encode(image.width(), image.height(), 16, PNG_COLOR_TYPE_GRAY, rows,
                row_bytes);
}

RgbImage decode_rgb(std::span<const std::uint8_t> bytes) {
  Decoded d = decode(bytes);
  if (d.bit_depth != 8) throw Error("png decode: expected 8-bit samples");
  RgbImage img(d.height, d.width);
  for (int r = 0; r < d.height; ++r) {
    const std::uint8_t* src = d.rows.data() + r * d.row_bytes;
    auto dst = img.row(r);
    for (int c = 0; c < d.width; ++c) {
      if (d.channels >= 3)
        dst[c] = {src[3 * c], src[3 * c + 1], src[3 * c + 2]};
      else
        dst[c] = {src[c], src[c], src[c]};
    }
  }
  return img;
}

Raster<std::uint16_t> decode_gray16(std::span<const std::uint8_t> bytes) {
  Decoded d = decode(bytes);
  if (d.channels != 1) throw Error("png decode: expected single-channel image");
  Raster<std::uint16_t> img(d.height, d.width);
  for (int r = 0; r < d.height; ++r) {
    const std::uint8_t* src = d.rows.data() + r * d.row_bytes;
    auto dst = img.row(r);
    for (int c = 0; c < d.width; ++c)
      dst[c] = d.bit_depth == 16
                   ? static_cast<std::uint16_t>((src[2 * c] << 8) | src[2 * c + 1])
                   : src[c];
  }
  return img;
}

RgbImage read_rgb(const std::filesystem::path& path) {
  try {
    return decode_rgb(io::read_file(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

Raster<std::uint16_t> read_gray16(const std::filesystem::path& path) {
  try {
    return decode_gray16(io::read_file(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_rgb(const std::filesystem::path& path, const RgbImage& image) {
  io::write_file_atomic(path, encode_rgb(image));
}

void write_gray16(const std::filesystem::path& path,
                  const Raster<std::uint16_t>& image) {
  io::write_file_atomic(path, encode_gray16(image));
}

}  // namespace gradmix::png

namespace gradmix::io {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot rename into " + path.string());
  }
}

void write_text_atomic(const std::filesystem::path& path,
                       const std::string& text) {
  write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()),
                           text.size()});
}

}  // namespace gradmix::io
