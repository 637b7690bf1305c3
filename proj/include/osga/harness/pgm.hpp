#ifndef OSGA_HARNESS_PGM_HPP
#define OSGA_HARNESS_PGM_HPP

#include "osga/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace osga::harness {

struct GrayImage {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vector pixels; // row-major, scaled to [0,1]
};

namespace detail {

inline std::string next_token(std::istream& in)
{
    std::string tok;
    char c;
    while (in.get(c)) {
        if (c == '#') {
            std::string skip;
            std::getline(in, skip);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!tok.empty())
                return tok;
            continue;
        }
        tok.push_back(c);
    }
    return tok;
}

} // namespace detail

/// Reads plain (P2) or raw (P5) PGM with maxval <= 255 or 16-bit raw.
inline GrayImage read_pgm(std::istream& in)
{
    const std::string magic = detail::next_token(in);
    if (magic != "P2" && magic != "P5")
        throw std::runtime_error("not a PGM file (magic '" + magic + "')");
    GrayImage img;
    img.cols = std::stoul(detail::next_token(in));
    img.rows = std::stoul(detail::next_token(in));
    const unsigned long maxval = std::stoul(detail::next_token(in));
    if (img.rows == 0 || img.cols == 0 || maxval == 0 || maxval > 65535)
        throw std::runtime_error("invalid PGM header");
    const std::size_t count = img.rows * img.cols;
    img.pixels.resize(static_cast<Eigen::Index>(count));
    if (magic == "P2") {
        for (std::size_t i = 0; i < count; ++i) {
            const std::string tok = detail::next_token(in);
            if (tok.empty())
                throw std::runtime_error("truncated PGM data");
            img.pixels[static_cast<Eigen::Index>(i)] = std::stod(tok) / static_cast<double>(maxval);
        }
    } else {
        const std::size_t bytes = maxval < 256 ? 1 : 2;
        for (std::size_t i = 0; i < count; ++i) {
            unsigned v = 0;
            for (std::size_t b = 0; b < bytes; ++b) {
                char c;
                if (!in.get(c))
                    throw std::runtime_error("truncated PGM data");
                v = (v << 8) | static_cast<unsigned char>(c);
            }
            img.pixels[static_cast<Eigen::Index>(i)] = static_cast<double>(v) / static_cast<double>(maxval);
        }
    }
    return img;
}

inline GrayImage read_pgm_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open image '" + path + "'");
    return read_pgm(in);
}

/// Writes 8-bit raw PGM (P5), clamping to [0,1].
inline void write_pgm(std::ostream& out, const GrayImage& img)
{
    out << "P5\n" << img.cols << " " << img.rows << "\n255\n";
    for (Eigen::Index i = 0; i < img.pixels.size(); ++i) {
        const double v = std::clamp(img.pixels[i], 0.0, 1.0);
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
}

} // namespace osga::harness

#endif
