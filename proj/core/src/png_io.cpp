#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "dt6d/errors.hpp"
#include "dt6d/image.hpp"
#include "dt6d/math.hpp"

// Minimal PNG codec on top of zlib. Writes filter-0 scanlines; reads any of
// the five standard filters, 8-bit RGB/RGBA/gray and 16-bit gray.

namespace dt6d {

namespace {

constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};

void put_u32(std::vector<unsigned char>& out, uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

uint32_t get_u32(const unsigned char* p) {
  return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
         (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
}

void write_chunk(std::vector<unsigned char>& out, const char type[4],
                 const unsigned char* data, size_t len) {
  put_u32(out, static_cast<uint32_t>(len));
  const size_t type_pos = out.size();
  out.insert(out.end(), type, type + 4);
  if (len) out.insert(out.end(), data, data + len);
  uint32_t crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, out.data() + type_pos, static_cast<uInt>(4 + len));
  put_u32(out, crc);
}

void write_png(const std::string& path, int width, int height, int bit_depth,
               int color_type, const std::vector<unsigned char>& raster, size_t bytes_per_row) {
  std::vector<unsigned char> filtered;
  filtered.reserve((bytes_per_row + 1) * static_cast<size_t>(height));
  for (int y = 0; y < height; ++y) {
    filtered.push_back(0);  // filter: none
    const unsigned char* row = raster.data() + static_cast<size_t>(y) * bytes_per_row;
    filtered.insert(filtered.end(), row, row + bytes_per_row);
  }

  uLongf comp_cap = compressBound(static_cast<uLong>(filtered.size()));
  std::vector<unsigned char> comp(comp_cap);
  if (compress2(comp.data(), &comp_cap, filtered.data(), static_cast<uLong>(filtered.size()), 6) != Z_OK)
    throw FormatError("png: deflate failed for " + path);
  comp.resize(comp_cap);

  std::vector<unsigned char> out;
  out.insert(out.end(), kPngSig, kPngSig + 8);
  unsigned char ihdr[13];
  ihdr[0] = static_cast<unsigned char>(width >> 24);
  ihdr[1] = static_cast<unsigned char>(width >> 16);
  ihdr[2] = static_cast<unsigned char>(width >> 8);
  ihdr[3] = static_cast<unsigned char>(width);
  ihdr[4] = static_cast<unsigned char>(height >> 24);
  ihdr[5] = static_cast<unsigned char>(height >> 16);
  ihdr[6] = static_cast<unsigned char>(height >> 8);
  ihdr[7] = static_cast<unsigned char>(height);
  ihdr[8] = static_cast<unsigned char>(bit_depth);
  ihdr[9] = static_cast<unsigned char>(color_type);
  ihdr[10] = ihdr[11] = ihdr[12] = 0;
  write_chunk(out, "IHDR", ihdr, 13);
  write_chunk(out, "IDAT", comp.data(), comp.size());
  write_chunk(out, "IEND", nullptr, 0);

  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("png: cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw FormatError("png: short write: " + path);
}

struct DecodedPng {
  int width = 0, height = 0;
  int bit_depth = 0, color_type = 0;
  std::vector<unsigned char> raster;  // unfiltered scanline bytes
  size_t bytes_per_row = 0;
};

int channels_for_color_type(int color_type) {
  switch (color_type) {
    case 0: return 1;  // gray
    case 2: return 3;  // rgb
    case 4: return 2;  // gray+alpha
    case 6: return 4;  // rgba
    default: return 0;
  }
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

DecodedPng read_png(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("png: cannot open: " + path);
  std::vector<unsigned char> file((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (file.size() < 8 || std::memcmp(file.data(), kPngSig, 8) != 0)
    throw FormatError("png: bad signature: " + path);

  DecodedPng png;
  std::vector<unsigned char> idat;
  size_t pos = 8;
  bool saw_ihdr = false, saw_iend = false;
  while (pos + 8 <= file.size()) {
    const uint32_t len = get_u32(&file[pos]);
    if (pos + 12 + len > file.size()) throw FormatError("png: truncated chunk: " + path);
    const char* type = reinterpret_cast<const char*>(&file[pos + 4]);
    const unsigned char* data = &file[pos + 8];
    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw FormatError("png: bad IHDR: " + path);
      png.width = static_cast<int>(get_u32(data));
      png.height = static_cast<int>(get_u32(data + 4));
      png.bit_depth = data[8];
      png.color_type = data[9];
      if (data[10] != 0 || data[11] != 0) throw FormatError("png: unsupported compression/filter: " + path);
      if (data[12] != 0) throw FormatError("png: interlaced images unsupported: " + path);
      saw_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      saw_iend = true;
      break;
    }
    pos += 12 + len;
  }
  if (!saw_ihdr || !saw_iend) throw FormatError("png: missing IHDR/IEND: " + path);
  const int channels = channels_for_color_type(png.color_type);
  if (channels == 0 || (png.bit_depth != 8 && png.bit_depth != 16))
    throw FormatError("png: unsupported format: " + path);

  const size_t bpp = static_cast<size_t>(channels) * (png.bit_depth / 8);
  png.bytes_per_row = bpp * static_cast<size_t>(png.width);
  const size_t expect = (png.bytes_per_row + 1) * static_cast<size_t>(png.height);

  std::vector<unsigned char> raw(expect);
  uLongf raw_len = static_cast<uLongf>(expect);
  if (uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
      raw_len != expect)
    throw FormatError("png: inflate failed: " + path);

  png.raster.resize(png.bytes_per_row * static_cast<size_t>(png.height));
  for (int y = 0; y < png.height; ++y) {
    const unsigned char filter = raw[static_cast<size_t>(y) * (png.bytes_per_row + 1)];
    const unsigned char* src = &raw[static_cast<size_t>(y) * (png.bytes_per_row + 1) + 1];
    unsigned char* dst = &png.raster[static_cast<size_t>(y) * png.bytes_per_row];
    const unsigned char* prev = y > 0 ? dst - png.bytes_per_row : nullptr;
    for (size_t i = 0; i < png.bytes_per_row; ++i) {
      const int a = i >= bpp ? dst[i - bpp] : 0;
      const int b = prev ? prev[i] : 0;
      const int c = (prev && i >= bpp) ? prev[i - bpp] : 0;
      int v = src[i];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += paeth(a, b, c); break;
        default: throw FormatError("png: unknown filter type: " + path);
      }
      dst[i] = static_cast<unsigned char>(v & 0xff);
    }
  }
  return png;
}

}  // namespace

void write_color_png(const RgbdFrame& frame, const std::string& path) {
  const size_t n = frame.pixel_count();
  std::vector<unsigned char> raster(n * 3);
  for (size_t i = 0; i < n * 3; ++i)
    raster[i] = static_cast<unsigned char>(std::lround(clamp01(frame.rgb[i]) * 255.0));
  write_png(path, frame.width, frame.height, 8, 2, raster, static_cast<size_t>(frame.width) * 3);
}

void write_depth_png(const RgbdFrame& frame, const std::string& path) {
  const size_t n = frame.pixel_count();
  std::vector<unsigned char> raster(n * 2);
  for (size_t i = 0; i < n; ++i) {
    const double units = frame.depth[i] * 10000.0;  // 0.1 mm units
    const uint16_t v = static_cast<uint16_t>(clamp(std::llround(units), 0LL, 65535LL));
    raster[i * 2] = static_cast<unsigned char>(v >> 8);  // PNG is big-endian
    raster[i * 2 + 1] = static_cast<unsigned char>(v & 0xff);
  }
  write_png(path, frame.width, frame.height, 16, 0, raster, static_cast<size_t>(frame.width) * 2);
}

RgbdFrame read_rgbd_pngs(const std::string& color_path, const std::string& depth_path) {
  const DecodedPng color = read_png(color_path);
  const DecodedPng depth = read_png(depth_path);
  if (color.width != depth.width || color.height != depth.height)
    throw FormatError("rgbd: color/depth size mismatch: " + color_path);
  if (depth.bit_depth != 16 || depth.color_type != 0)
    throw FormatError("rgbd: depth must be 16-bit grayscale: " + depth_path);
  if (color.bit_depth != 8) throw FormatError("rgbd: color must be 8-bit: " + color_path);

  RgbdFrame frame(color.width, color.height);
  const int channels = channels_for_color_type(color.color_type);
  const size_t n = frame.pixel_count();
  for (size_t i = 0; i < n; ++i) {
    const unsigned char* px = &color.raster[i * static_cast<size_t>(channels)];
    float r, g, b;
    if (channels >= 3) {
      r = px[0] / 255.0f;
      g = px[1] / 255.0f;
      b = px[2] / 255.0f;
    } else {
      r = g = b = px[0] / 255.0f;
    }
    frame.rgb[i * 3] = r;
    frame.rgb[i * 3 + 1] = g;
    frame.rgb[i * 3 + 2] = b;
    const uint16_t d = static_cast<uint16_t>((depth.raster[i * 2] << 8) | depth.raster[i * 2 + 1]);
    frame.depth[i] = static_cast<float>(d) / 10000.0f;
  }
  return frame;
}

}  // namespace dt6d
