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

#ifndef LUMIPARAM_IMAGE_IO_H_
#define LUMIPARAM_IMAGE_IO_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lumiparam/image.h"

namespace lumiparam {

using Bytes = std::vector<std::uint8_t>;

// Radiance RGBE (.hdr). Accepts "#?RADIANCE" and "#?RGBE" magic, the
// "-Y H +X W" orientation only, and flat, old-style run-length or adaptive
// run-length scanlines. Throws FormatError on anything else.
EquirectImage ReadHdr(std::span<const std::uint8_t> bytes);

// Flat (uncompressed) RGBE. Components are quantized with a shared exponent
// and decode back within 2^-8 of the pixel's largest component.
Bytes WriteHdr(const EquirectImage& img);

// Shared-exponent encoding of one pixel. Exposed for tests.
std::array<std::uint8_t, 4> EncodeRgbe(const Eigen::Vector3d& rgb);
Eigen::Vector3d DecodeRgbe(const std::array<std::uint8_t, 4>& rgbe);

enum class Endian { kLittle, kBig };

// Portable float map, 3-channel "PF" variant. Rows are stored bottom to top;
// a negative scale marks little-endian data.
EquirectImage ReadPfm(std::span<const std::uint8_t> bytes);
Bytes WritePfm(const EquirectImage& img, Endian endian = Endian::kLittle);

// 8-bit RGB PNG of clamp(exposure * v, 0, 1)^(1 / gamma), rounded half-up.
Bytes WritePreviewPng(const EquirectImage& img, double exposure = 1.0,
                      double gamma = 2.2);

// Generic 8-bit RGB PNG encoder; `rgb` holds width*height*3 bytes.
Bytes EncodePng(int width, int height, std::span<const std::uint8_t> rgb);

// Tone curve used by the previews.
std::uint8_t TonemapValue(double v, double exposure, double gamma);

Bytes ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes);

// Dispatch on extension (.hdr / .pfm, case-insensitive).
EquirectImage ReadImageFile(const std::filesystem::path& path);
void WriteImageFile(const std::filesystem::path& path, const EquirectImage& img);

}  // namespace lumiparam

#endif  // LUMIPARAM_IMAGE_IO_H_
