// Copyright 2026-present the tactile360 authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// File formats: NetPBM (P6 / P5), float sidecars (raw little-endian float32
// plus a JSON header), base64, and number formatting for CSV output.

#pragma once

#include "t360/common.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace t360::io {

/// Shortest representation that parses back to the same double.
std::string num(double v);

/// Writes an Image (1 or 3 channels, values in [0, 1]) as P6 / P5 8-bit.
void write_pnm(const std::filesystem::path& path, const Image& img);
void write_mask_pgm(const std::filesystem::path& path, const Mask& mask);
Image read_pnm(const std::filesystem::path& path);
Mask read_mask_pgm(const std::filesystem::path& path);

/// `<stem>.f32` holds the values, `<stem>.json` holds {width, height, channels}.
/// `path` may name either file or the bare stem.
void write_sidecar(const std::filesystem::path& path, const Map& map);
void write_sidecar(const std::filesystem::path& path, const Image& img);
Map read_sidecar(const std::filesystem::path& path);
std::filesystem::path sidecar_data_path(const std::filesystem::path& path);
std::filesystem::path sidecar_header_path(const std::filesystem::path& path);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);
std::string doubles_to_base64(const std::vector<double>& values);
std::vector<double> base64_to_doubles(std::string_view text);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace t360::io
