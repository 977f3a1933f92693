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

#include "t360/io.hpp"

#include <json.hpp>

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace t360::io {

namespace fs = std::filesystem;

std::string num(double v) {
    if (v == 0.0) return "0";  // folds -0
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

uint8_t quantize(float v) {
    double c = std::clamp(static_cast<double>(v), 0.0, 1.0);
    return static_cast<uint8_t>(std::lround(c * 255.0));
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(ErrorCode::Io, "cannot open for writing: " + path.string());
    return os;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(ErrorCode::Io, "cannot open: " + path.string());
    return is;
}

int read_header_int(std::istream& is) {
    int c = is.peek();
    while (c == '#' || std::isspace(c)) {
        if (c == '#') {
            std::string line;
            std::getline(is, line);
        } else {
            is.get();
        }
        c = is.peek();
    }
    int v = 0;
    if (!(is >> v)) fail(ErrorCode::Parse, "malformed NetPBM header");
    return v;
}

}  // namespace

void write_pnm(const fs::path& path, const Image& img) {
    if (img.channels() != 1 && img.channels() != 3) fail(ErrorCode::InvalidArgument, "PNM needs 1 or 3 channels");
    auto os = open_out(path);
    os << (img.channels() == 3 ? "P6" : "P5") << "\n" << img.width() << " " << img.height() << "\n255\n";
    std::vector<uint8_t> bytes(img.size());
    for (size_t i = 0; i < img.size(); ++i) bytes[i] = quantize(img.values()[i]);
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_mask_pgm(const fs::path& path, const Mask& mask) {
    auto os = open_out(path);
    os << "P5\n" << mask.width() << " " << mask.height() << "\n255\n";
    std::vector<uint8_t> bytes(mask.size());
    for (size_t i = 0; i < mask.size(); ++i) bytes[i] = mask.values()[i] ? 255 : 0;
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Image read_pnm(const fs::path& path) {
    auto is = open_in(path);
    std::string magic(2, '\0');
    is.read(magic.data(), 2);
    int channels = magic == "P6" ? 3 : magic == "P5" ? 1 : 0;
    if (!channels) fail(ErrorCode::Parse, "not a binary PPM/PGM: " + path.string());
    int w = read_header_int(is), h = read_header_int(is), maxval = read_header_int(is);
    if (maxval != 255) fail(ErrorCode::Parse, "only 8-bit NetPBM is supported: " + path.string());
    is.get();
    Image img(w, h, channels);
    std::vector<uint8_t> bytes(img.size());
    is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (is.gcount() != static_cast<std::streamsize>(bytes.size())) fail(ErrorCode::Parse, "truncated NetPBM: " + path.string());
    for (size_t i = 0; i < bytes.size(); ++i) img.values()[i] = bytes[i] / 255.0f;
    return img;
}

Mask read_mask_pgm(const fs::path& path) {
    Image img = read_pnm(path);
    Mask m(img.width(), img.height());
    for (int v = 0; v < img.height(); ++v)
        for (int u = 0; u < img.width(); ++u) m(u, v) = img(u, v, 0) >= 0.5f;
    return m;
}

fs::path sidecar_data_path(const fs::path& path) {
    fs::path p = path;
    return p.replace_extension(".f32");
}

fs::path sidecar_header_path(const fs::path& path) {
    fs::path p = path;
    return p.replace_extension(".json");
}

namespace {

template <typename T>
void write_sidecar_impl(const fs::path& path, const Grid<T>& g) {
    std::vector<char> bytes(g.size() * 4);
    for (size_t i = 0; i < g.size(); ++i) {
        float f = static_cast<float>(g.values()[i]);
        uint32_t u = std::bit_cast<uint32_t>(f);
        for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<char>((u >> (8 * b)) & 0xff);
    }
    auto os = open_out(sidecar_data_path(path));
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    nlohmann::ordered_json hdr;
    hdr["width"] = g.width();
    hdr["height"] = g.height();
    hdr["channels"] = g.channels();
    write_text(sidecar_header_path(path), hdr.dump(2) + "\n");
}

}  // namespace

void write_sidecar(const fs::path& path, const Map& map) { write_sidecar_impl(path, map); }
void write_sidecar(const fs::path& path, const Image& img) { write_sidecar_impl(path, img); }

Map read_sidecar(const fs::path& path) {
    nlohmann::json hdr;
    try {
        hdr = nlohmann::json::parse(read_text(sidecar_header_path(path)));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, "bad sidecar header " + sidecar_header_path(path).string() + ": " + e.what());
    }
    int w = hdr.at("width"), h = hdr.at("height"), c = hdr.at("channels");
    Map m(w, h, c);
    std::string bytes = read_text(sidecar_data_path(path));
    if (bytes.size() != m.size() * 4) fail(ErrorCode::Parse, "sidecar size mismatch: " + path.string());
    for (size_t i = 0; i < m.size(); ++i) {
        uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= static_cast<uint32_t>(static_cast<uint8_t>(bytes[i * 4 + b])) << (8 * b);
        m.values()[i] = std::bit_cast<float>(u);
    }
    return m;
}

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::string_view bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        uint32_t n = (static_cast<uint8_t>(bytes[i]) << 16) | (static_cast<uint8_t>(bytes[i + 1]) << 8) |
                     static_cast<uint8_t>(bytes[i + 2]);
        out += kAlphabet[(n >> 18) & 63];
        out += kAlphabet[(n >> 12) & 63];
        out += kAlphabet[(n >> 6) & 63];
        out += kAlphabet[n & 63];
    }
    size_t rest = bytes.size() - i;
    if (rest) {
        uint32_t n = static_cast<uint8_t>(bytes[i]) << 16;
        if (rest == 2) n |= static_cast<uint8_t>(bytes[i + 1]) << 8;
        out += kAlphabet[(n >> 18) & 63];
        out += kAlphabet[(n >> 12) & 63];
        out += rest == 2 ? kAlphabet[(n >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

std::string base64_decode(std::string_view text) {
    auto value = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (text.size() % 4) fail(ErrorCode::Parse, "base64 length must be a multiple of 4");
    std::string out;
    out.reserve(text.size() / 4 * 3);
    for (size_t i = 0; i < text.size(); i += 4) {
        int pad = 0;
        uint32_t n = 0;
        for (int k = 0; k < 4; ++k) {
            char c = text[i + k];
            int val;
            if (c == '=') {
                ++pad;
                val = 0;
            } else {
                val = value(c);
                if (val < 0 || pad) fail(ErrorCode::Parse, "invalid base64 character");
            }
            n = (n << 6) | static_cast<uint32_t>(val);
        }
        out += static_cast<char>((n >> 16) & 0xff);
        if (pad < 2) out += static_cast<char>((n >> 8) & 0xff);
        if (pad < 1) out += static_cast<char>(n & 0xff);
    }
    return out;
}

std::string doubles_to_base64(const std::vector<double>& values) {
    std::string bytes(values.size() * 8, '\0');
    for (size_t i = 0; i < values.size(); ++i) {
        uint64_t u = std::bit_cast<uint64_t>(values[i]);
        for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<char>((u >> (8 * b)) & 0xff);
    }
    return base64_encode(bytes);
}

std::vector<double> base64_to_doubles(std::string_view text) {
    std::string bytes = base64_decode(text);
    if (bytes.size() % 8) fail(ErrorCode::Parse, "float64 payload length must be a multiple of 8");
    std::vector<double> out(bytes.size() / 8);
    for (size_t i = 0; i < out.size(); ++i) {
        uint64_t u = 0;
        for (int b = 0; b < 8; ++b) u |= static_cast<uint64_t>(static_cast<uint8_t>(bytes[i * 8 + b])) << (8 * b);
        out[i] = std::bit_cast<double>(u);
    }
    return out;
}

std::string read_text(const fs::path& path) {
    auto is = open_in(path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    auto os = open_out(path);
    os << text;
}

}  // namespace t360::io
