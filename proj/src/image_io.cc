// Copyright 2026 The Lumiparam Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lumiparam/image_io.h"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>

#include <zlib.h>

#include "lumiparam/error.h"

namespace lumiparam {

namespace {

// Sequential reader over a byte span that reports truncation with the
// current offset.
class ByteCursor {
 public:
  explicit ByteCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  bool at_end() const { return pos_ >= bytes_.size(); }

  std::uint8_t Peek(std::size_t ahead = 0) const { return bytes_[pos_ + ahead]; }

  std::uint8_t Next(const char* what) {
    if (at_end()) throw FormatError(std::string("truncated ") + what, pos_);
    return bytes_[pos_++];
  }

  std::span<const std::uint8_t> Take(std::size_t n, const char* what) {
    if (remaining() < n) throw FormatError(std::string("truncated ") + what, pos_);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  // Reads up to (not including) the next '\n'.
  std::string Line(const char* what) {
    std::string line;
    while (true) {
      const std::uint8_t c = Next(what);
      if (c == '\n') return line;
      line.push_back(static_cast<char>(c));
    }
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t ByteSwap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

bool StartsWith(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

using RgbeScanline = std::vector<std::array<std::uint8_t, 4>>;

void ReadAdaptiveRleScanline(ByteCursor& in, int width, RgbeScanline& line) {
  const std::size_t start = in.offset();
  in.Take(4, "scanline header");
  for (int channel = 0; channel < 4; ++channel) {
    int x = 0;
    while (x < width) {
      int count = in.Next("scanline");
      if (count > 128) {
        count -= 128;
        if (x + count > width) throw FormatError("run overflows scanline", in.offset());
        const std::uint8_t value = in.Next("scanline");
        for (int i = 0; i < count; ++i) line[x++][channel] = value;
      } else {
        if (count == 0 || x + count > width) {
          throw FormatError("bad literal run in scanline starting", start);
        }
        for (int i = 0; i < count; ++i) line[x++][channel] = in.Next("scanline");
      }
    }
  }
}

void ReadFlatScanline(ByteCursor& in, int width, RgbeScanline& line) {
  // Old-style files repeat the previous pixel for (1, 1, 1, n) markers, with
  // consecutive markers forming higher-order count bytes.
  int x = 0;
  int shift = 0;
  while (x < width) {
    auto px = in.Take(4, "scanline");
    if (px[0] == 1 && px[1] == 1 && px[2] == 1) {
      if (x == 0) throw FormatError("run marker without a previous pixel", in.offset() - 4);
      const long long count = static_cast<long long>(px[3]) << shift;
      if (x + count > width) throw FormatError("run overflows scanline", in.offset() - 4);
      for (long long i = 0; i < count; ++i, ++x) line[x] = line[x - 1];
      shift += 8;
    } else {
      line[x++] = {px[0], px[1], px[2], px[3]};
      shift = 0;
    }
  }
}

int ParseInt(const std::string& token, std::size_t offset) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw FormatError("expected integer, got '" + token + "'", offset);
  }
  return value;
}

GridGeometry CheckedGeometry(int width, int height, std::size_t offset) {
  try {
    return GridGeometry(width, height);
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what(), offset);
  }
}

void AppendBe32(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void AppendPngChunk(Bytes& out, const char type[4], std::span<const std::uint8_t> data) {
  AppendBe32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t type_pos = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = crc32(0L, out.data() + type_pos, static_cast<uInt>(4 + data.size()));
  AppendBe32(out, static_cast<std::uint32_t>(crc));
}

void RequireValid(const EquirectImage& img, const char* what) {
  if (!img.IsRadiometric()) {
    throw InvalidArgument(std::string(what) +
                          ": image has negative or non-finite components");
  }
}

}  // namespace

std::array<std::uint8_t, 4> EncodeRgbe(const Eigen::Vector3d& rgb) {
  const double v = rgb.maxCoeff();
  if (!(v >= 1e-38)) return {0, 0, 0, 0};
  int exponent = 0;
  const double mantissa = std::frexp(v, &exponent);
  if (exponent + 128 > 255) {
    throw InvalidArgument("radiance " + std::to_string(v) + " exceeds RGBE range");
  }
  if (exponent + 128 < 1) return {0, 0, 0, 0};
  // The largest component always lands in [128, 255], so an encoded pixel can
  // never look like an adaptive-RLE scanline header (2, 2, <128, ...).
  const double scale = mantissa * 256.0 / v;
  std::array<std::uint8_t, 4> out{};
  for (int c = 0; c < 3; ++c) {
    const double m = std::floor(std::max(rgb[c], 0.0) * scale);
    out[c] = static_cast<std::uint8_t>(std::min(m, 255.0));
  }
  out[3] = static_cast<std::uint8_t>(exponent + 128);
  return out;
}

Eigen::Vector3d DecodeRgbe(const std::array<std::uint8_t, 4>& rgbe) {
  if (rgbe[3] == 0) return Eigen::Vector3d::Zero();
  // Mantissas are bucket centers: (m + 0.5) / 256 * 2^(e - 128).
  const double f = std::ldexp(1.0, static_cast<int>(rgbe[3]) - (128 + 8));
  return {(rgbe[0] + 0.5) * f, (rgbe[1] + 0.5) * f, (rgbe[2] + 0.5) * f};
}

EquirectImage ReadHdr(std::span<const std::uint8_t> bytes) {
  ByteCursor in(bytes);
  const std::string magic = in.Line("header");
  if (!StartsWith(magic, "#?RADIANCE") && !StartsWith(magic, "#?RGBE")) {
    throw FormatError("bad magic, expected #?RADIANCE or #?RGBE", 0);
  }
  while (true) {
    const std::size_t line_start = in.offset();
    const std::string line = in.Line("header");
    if (line.empty()) break;
    if (StartsWith(line, "FORMAT=") && line != "FORMAT=32-bit_rle_rgbe") {
      throw FormatError("unsupported pixel format '" + line.substr(7) + "'", line_start);
    }
  }

  const std::size_t res_start = in.offset();
  std::istringstream res(in.Line("resolution line"));
  std::string axis0, n0, axis1, n1, extra;
  res >> axis0 >> n0 >> axis1 >> n1;
  if (!res || (res >> extra)) throw FormatError("malformed resolution line", res_start);
  if (axis0 != "-Y" || axis1 != "+X") {
    throw FormatError("unsupported pixel order '" + axis0 + " " + axis1 + "'", res_start);
  }
  const GridGeometry geom =
      CheckedGeometry(ParseInt(n1, res_start), ParseInt(n0, res_start), res_start);

  EquirectImage img(geom);
  const int width = geom.width();
  RgbeScanline line(width);
  for (int y = 0; y < geom.height(); ++y) {
    const bool adaptive = width >= 8 && width < 0x8000 && in.remaining() >= 4 &&
                          in.Peek(0) == 2 && in.Peek(1) == 2 && !(in.Peek(2) & 0x80);
    if (adaptive) {
      const int encoded_width = (in.Peek(2) << 8) | in.Peek(3);
      if (encoded_width != width) {
        throw FormatError("scanline width " + std::to_string(encoded_width) +
                              " does not match image width",
                          in.offset());
      }
      ReadAdaptiveRleScanline(in, width, line);
    } else {
      ReadFlatScanline(in, width, line);
    }
    for (int x = 0; x < width; ++x) img.pixel(x, y) = DecodeRgbe(line[x]).transpose();
  }
  return img;
}

Bytes WriteHdr(const EquirectImage& img) {
  RequireValid(img, "WriteHdr");
  const std::string header = "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y " +
                             std::to_string(img.height()) + " +X " +
                             std::to_string(img.width()) + "\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + 4 * static_cast<std::size_t>(img.geometry().pixel_count()));
  for (Eigen::Index i = 0; i < img.pixels().rows(); ++i) {
    const auto rgbe = EncodeRgbe(img.pixels().row(i).transpose());
    out.insert(out.end(), rgbe.begin(), rgbe.end());
  }
  return out;
}

EquirectImage ReadPfm(std::span<const std::uint8_t> bytes) {
  ByteCursor in(bytes);
  // Header: three whitespace-separated tokens after the magic, the last one
  // followed by exactly one whitespace byte.
  auto token = [&](const char* what) {
    while (!in.at_end() && std::isspace(in.Peek())) in.Next(what);
    std::string t;
    while (!in.at_end() && !std::isspace(in.Peek())) t.push_back(static_cast<char>(in.Next(what)));
    if (t.empty()) throw FormatError(std::string("truncated ") + what, in.offset());
    return t;
  };
  const std::string magic = token("header");
  if (magic == "Pf") throw FormatError("single-channel PFM is not supported", 0);
  if (magic != "PF") throw FormatError("bad magic, expected PF", 0);
  const std::size_t dims_start = in.offset();
  const int width = ParseInt(token("header"), dims_start);
  const int height = ParseInt(token("header"), dims_start);
  const GridGeometry geom = CheckedGeometry(width, height, dims_start);
  const std::size_t scale_start = in.offset();
  const std::string scale_text = token("header");
  double scale = 0.0;
  {
    auto [ptr, ec] = std::from_chars(scale_text.data(), scale_text.data() + scale_text.size(), scale);
    if (ec != std::errc() || ptr != scale_text.data() + scale_text.size() ||
        !std::isfinite(scale) || scale == 0.0) {
      throw FormatError("bad scale '" + scale_text + "'", scale_start);
    }
  }
  if (!std::isspace(in.Next("header"))) throw FormatError("missing header terminator", in.offset());

  const bool little = scale < 0.0;
  const bool swap = little != (std::endian::native == std::endian::little);
  EquirectImage img(geom);
  const std::size_t data_start = in.offset();
  const std::size_t row_bytes = static_cast<std::size_t>(width) * 3 * sizeof(float);
  for (int file_row = 0; file_row < height; ++file_row) {
    auto row = in.Take(row_bytes, "pixel data");
    const int y = height - 1 - file_row;
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        std::uint32_t word;
        std::memcpy(&word, row.data() + (static_cast<std::size_t>(x) * 3 + c) * 4, 4);
        if (swap) word = ByteSwap32(word);
        const float v = std::bit_cast<float>(word);
        if (!std::isfinite(v) || v < 0.0f) {
          throw FormatError("non-finite or negative sample",
                            data_start + file_row * row_bytes + (x * 3 + c) * 4);
        }
        img.pixel(x, y)[c] = v;
      }
    }
  }
  return img;
}

Bytes WritePfm(const EquirectImage& img, Endian endian) {
  RequireValid(img, "WritePfm");
  const std::string header = "PF\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n" +
                             (endian == Endian::kLittle ? "-1.0\n" : "1.0\n");
  Bytes out(header.begin(), header.end());
  const bool swap = (endian == Endian::kLittle) != (std::endian::native == std::endian::little);
  for (int y = img.height() - 1; y >= 0; --y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        std::uint32_t word = std::bit_cast<std::uint32_t>(static_cast<float>(img.pixel(x, y)[c]));
        if (swap) word = ByteSwap32(word);
        std::uint8_t raw[4];
        std::memcpy(raw, &word, 4);
        out.insert(out.end(), raw, raw + 4);
      }
    }
  }
  return out;
}

std::uint8_t TonemapValue(double v, double exposure, double gamma) {
  const double clamped = std::clamp(exposure * v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(std::pow(clamped, 1.0 / gamma) * 255.0 + 0.5));
}

Bytes EncodePng(int width, int height, std::span<const std::uint8_t> rgb) {
  if (width < 1 || height < 1 ||
      rgb.size() != static_cast<std::size_t>(width) * height * 3) {
    throw InvalidArgument("EncodePng: buffer does not match dimensions");
  }
  Bytes raw;
  raw.reserve(static_cast<std::size_t>(height) * (1 + 3 * width));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);  // filter: none
    auto row = rgb.subspan(static_cast<std::size_t>(y) * width * 3, static_cast<std::size_t>(width) * 3);
    raw.insert(raw.end(), row.begin(), row.end());
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  Bytes packed(packed_size);
  if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw Error("EncodePng: deflate failed");
  }
  packed.resize(packed_size);

  Bytes out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  Bytes ihdr;
  AppendBe32(ihdr, static_cast<std::uint32_t>(width));
  AppendBe32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});  // 8-bit truecolor, no interlace
  AppendPngChunk(out, "IHDR", ihdr);
  AppendPngChunk(out, "IDAT", packed);
  AppendPngChunk(out, "IEND", {});
  return out;
}

Bytes WritePreviewPng(const EquirectImage& img, double exposure, double gamma) {
  if (!(exposure > 0.0) || !(gamma > 0.0)) {
    throw InvalidArgument("preview exposure and gamma must be positive");
  }
  std::vector<std::uint8_t> rgb;
  rgb.reserve(static_cast<std::size_t>(img.geometry().pixel_count()) * 3);
  for (Eigen::Index i = 0; i < img.pixels().rows(); ++i) {
    for (int c = 0; c < 3; ++c) rgb.push_back(TonemapValue(img.pixels()(i, c), exposure, gamma));
  }
  return EncodePng(img.width(), img.height(), rgb);
}

Bytes ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open '" + path.string() + "'");
  return Bytes(std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>());
}

void WriteFileBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot open '" + path.string() + "' for writing");
  file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw Error("write to '" + path.string() + "' failed");
}

namespace {

std::string LowerExtension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

EquirectImage ReadImageFile(const std::filesystem::path& path) {
  const std::string ext = LowerExtension(path);
  if (ext == ".hdr") return ReadHdr(ReadFileBytes(path));
  if (ext == ".pfm") return ReadPfm(ReadFileBytes(path));
  throw InvalidArgument("unsupported image extension '" + ext + "'");
}

void WriteImageFile(const std::filesystem::path& path, const EquirectImage& img) {
  const std::string ext = LowerExtension(path);
  if (ext == ".hdr") return WriteFileBytes(path, WriteHdr(img));
  if (ext == ".pfm") return WriteFileBytes(path, WritePfm(img));
  throw InvalidArgument("unsupported image extension '" + ext + "'");
}

}  // namespace lumiparam
