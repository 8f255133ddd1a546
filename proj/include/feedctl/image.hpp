#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "feedctl/errors.hpp"

namespace feedctl {

// Row-major gray image with intensities in [0, 1].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    bool empty() const { return width <= 0 || height <= 0; }

    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

    void validate() const {
        if (width < 1 || height < 1) throw ValidationError("image must be non-empty");
        if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
            throw ValidationError("image pixel count does not match its size");
        }
        for (double v : pixels) {
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw ValidationError("pixel outside [0, 1]");
        }
    }
};

inline double luminance(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

namespace detail {

inline std::string pnm_token(std::istream& in) {
    std::string tok;
    char c;
    while (in.get(c)) {
        if (c == '#') {
            std::string rest;
            std::getline(in, rest);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(c);
    }
    return tok;
}

inline int pnm_int(std::istream& in) {
    const std::string tok = pnm_token(in);
    try {
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size()) throw IoError("bad PNM header value '" + tok + "'");
        return v;
    } catch (const std::logic_error&) {
        throw IoError("bad PNM header value '" + tok + "'");
    }
}

}  // namespace detail

// Binary 8-bit PGM (P5); binary PPM (P6) is converted to gray by luminance.
inline GrayImage read_pnm(std::istream& in) {
    const std::string magic = detail::pnm_token(in);
    if (magic != "P5" && magic != "P6") throw IoError("unsupported image format '" + magic + "'");
    const int w = detail::pnm_int(in);
    const int h = detail::pnm_int(in);
    const int maxval = detail::pnm_int(in);
    if (w < 1 || h < 1) throw IoError("image must be non-empty");
    if (maxval < 1 || maxval > 255) throw IoError("only 8-bit images are supported");
    const int channels = magic == "P6" ? 3 : 1;
    std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * channels);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw IoError("truncated image data");

    GrayImage img(w, h);
    const double scale = 1.0 / 255.0;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        if (channels == 1) {
            img.pixels[i] = std::min(1.0, raw[i] * scale * (255.0 / maxval));
        } else {
            const double k = scale * (255.0 / maxval);
            img.pixels[i] = std::min(1.0, luminance(raw[3 * i] * k, raw[3 * i + 1] * k, raw[3 * i + 2] * k));
        }
    }
    return img;
}

inline GrayImage read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image " + path.string());
    return read_pnm(in);
}

inline void write_pgm(std::ostream& out, const GrayImage& img) {
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.pixels.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        raw[i] = static_cast<unsigned char>(std::lround(std::clamp(img.pixels[i], 0.0, 1.0) * 255.0));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError("failed to write image");
}

inline void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot create image " + path.string());
    write_pgm(out, img);
}

}  // namespace feedctl
