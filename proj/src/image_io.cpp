#include "asw/image_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <csetjmp>

#include <jpeglib.h>
#include <png.h>

namespace asw {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

// libjpeg's default error handler exits the process; route it to longjmp.
struct JpegErrorJump {
  jpeg_error_mgr mgr;
  std::jmp_buf env;
};

void jpeg_error_to_jump(j_common_ptr cinfo) {
  std::longjmp(reinterpret_cast<JpegErrorJump*>(cinfo->err)->env, 1);
}

struct PngReadState {
  const std::uint8_t* data;
  size_t size;
  size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t n) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->pos + n > st->size) png_error(png, "unexpected end of PNG stream");
  std::memcpy(out, st->data + st->pos, n);
  st->pos += n;
}

ImageU8 decode_png(const std::vector<std::uint8_t>& bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png: allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png: allocation failed");
  }

  ImageU8 out;
  std::vector<png_bytep> rows;
  PngReadState state{bytes.data(), bytes.size(), 0};

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("png: decode failed");
  }

  png_set_read_fn(png, &state, png_read_from_memory);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.rgb.resize(static_cast<size_t>(out.width) * out.height * 3);
  rows.resize(static_cast<size_t>(out.height));
  for (int y = 0; y < out.height; ++y)
    rows[static_cast<size_t>(y)] = out.rgb.data() + static_cast<size_t>(y) * out.width * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

}  // namespace

ImageU8 load_image(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' &&
      bytes[3] == 'G')
    return decode_png(bytes);
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF)
    return jpeg_decode(bytes);
  throw std::runtime_error(path + ": not a PNG or JPEG file");
}

void save_png(const ImageU8& img, const std::string& path) {
  if (!img.valid()) throw std::invalid_argument("save_png: invalid image");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(f);
    throw std::runtime_error("png: allocation failed");
  }

  std::vector<png_const_bytep> rows(static_cast<size_t>(img.height));
  for (int y = 0; y < img.height; ++y)
    rows[static_cast<size_t>(y)] = img.rgb.data() + static_cast<size_t>(y) * img.width * 3;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(f);
    throw std::runtime_error("png: encode failed");
  }

  png_init_io(png, f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(rows[static_cast<size_t>(y)]));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(f) != 0) throw std::runtime_error("png: write failed for " + path);
}

std::vector<std::uint8_t> jpeg_encode(const ImageU8& img, int quality) {
  if (!img.valid()) throw std::invalid_argument("jpeg_encode: invalid image");
  if (quality < 1 || quality > 100)
    throw std::invalid_argument("jpeg_encode: quality must be in [1,100]");

  jpeg_compress_struct c;
  JpegErrorJump err;
  c.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_to_jump;

  unsigned char* buf = nullptr;
  unsigned long buf_size = 0;
  if (setjmp(err.env)) {
    jpeg_destroy_compress(&c);
    std::free(buf);
    throw std::runtime_error("jpeg: encode failed");
  }

  jpeg_create_compress(&c);
  jpeg_mem_dest(&c, &buf, &buf_size);
  c.image_width = static_cast<JDIMENSION>(img.width);
  c.image_height = static_cast<JDIMENSION>(img.height);
  c.input_components = 3;
  c.in_color_space = JCS_RGB;
  jpeg_set_defaults(&c);
  jpeg_set_quality(&c, quality, TRUE);
  // 4:2:0: full-resolution luma, chroma halved both ways.
  c.comp_info[0].h_samp_factor = 2;
  c.comp_info[0].v_samp_factor = 2;
  c.comp_info[1].h_samp_factor = 1;
  c.comp_info[1].v_samp_factor = 1;
  c.comp_info[2].h_samp_factor = 1;
  c.comp_info[2].v_samp_factor = 1;

  jpeg_start_compress(&c, TRUE);
  while (c.next_scanline < c.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(
        img.rgb.data() + static_cast<size_t>(c.next_scanline) * img.width * 3);
    jpeg_write_scanlines(&c, &row, 1);
  }
  jpeg_finish_compress(&c);
  jpeg_destroy_compress(&c);

  std::vector<std::uint8_t> out(buf, buf + buf_size);
  std::free(buf);
  return out;
}

ImageU8 jpeg_decode(const std::vector<std::uint8_t>& bytes) {
  jpeg_decompress_struct d;
  JpegErrorJump err;
  d.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_to_jump;

  ImageU8 out;
  if (setjmp(err.env)) {
    jpeg_destroy_decompress(&d);
    throw std::runtime_error("jpeg: decode failed");
  }

  jpeg_create_decompress(&d);
  jpeg_mem_src(&d, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&d, TRUE);
  d.out_color_space = JCS_RGB;
  jpeg_start_decompress(&d);

  out.width = static_cast<int>(d.output_width);
  out.height = static_cast<int>(d.output_height);
  out.rgb.resize(static_cast<size_t>(out.width) * out.height * 3);
  while (d.output_scanline < d.output_height) {
    JSAMPROW row = out.rgb.data() + static_cast<size_t>(d.output_scanline) * out.width * 3;
    jpeg_read_scanlines(&d, &row, 1);
  }
  jpeg_finish_decompress(&d);
  jpeg_destroy_decompress(&d);
  return out;
}

}  // namespace asw
