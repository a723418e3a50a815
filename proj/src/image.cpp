#include "densctl/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

namespace densctl {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

// Next whitespace-delimited token, skipping '#' comments to end of line.
std::string next_token(std::istream& in) {
    std::string tok;
    while (in) {
        int c = in.get();
        if (c == EOF) break;
        if (c == '#') {
            while (in && in.get() != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

long parse_long(std::istream& in, const std::string& path, const char* what) {
    const std::string tok = next_token(in);
    if (tok.empty()) fail(path, std::string("missing ") + what);
    try {
        return std::stol(tok);
    } catch (const std::exception&) {
        fail(path, std::string("bad ") + what + " '" + tok + "'");
    }
}

}  // namespace

GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    const std::string magic = next_token(in);
    if (magic != "P2" && magic != "P5") fail(path, "not a PGM (expected P2 or P5)");
    const long w = parse_long(in, path, "width");
    const long h = parse_long(in, path, "height");
    const long maxval = parse_long(in, path, "maxval");
    if (w <= 0 || h <= 0) fail(path, "empty image");
    if (maxval <= 0 || maxval > 65535) fail(path, "maxval out of range");

    GrayImage img;
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.v.resize(static_cast<std::size_t>(w) * h);

    if (magic == "P2") {
        for (std::size_t k = 0; k < img.v.size(); ++k) {
            const long s = parse_long(in, path, "sample");
            if (s < 0 || s > maxval) fail(path, "sample out of range");
            img.v[k] = static_cast<double>(s) / maxval;
        }
    } else {
        // raw: exactly one whitespace byte after maxval, then samples
        const int bytes = maxval < 256 ? 1 : 2;
        std::string buf(img.v.size() * bytes, '\0');
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() != static_cast<std::streamsize>(buf.size()))
            fail(path, "truncated raster");
        for (std::size_t k = 0; k < img.v.size(); ++k) {
            unsigned s;
            if (bytes == 1) {
                s = static_cast<unsigned char>(buf[k]);
            } else {
                s = (static_cast<unsigned>(static_cast<unsigned char>(buf[2 * k])) << 8) |
                    static_cast<unsigned>(static_cast<unsigned char>(buf[2 * k + 1]));
            }
            if (s > static_cast<unsigned>(maxval)) fail(path, "sample out of range");
            img.v[k] = static_cast<double>(s) / maxval;
        }
    }
    return img;
}

GrayImage load_matrix_f64(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    std::uint32_t dims[2];
    in.read(reinterpret_cast<char*>(dims), sizeof dims);
    if (!in) fail(path, "truncated header");
    const std::size_t rows = dims[0], cols = dims[1];
    if (rows == 0 || cols == 0) fail(path, "empty matrix");
    if (rows > 1u << 20 || cols > 1u << 20) fail(path, "implausible dimensions");

    GrayImage img;
    img.width = static_cast<int>(cols);
    img.height = static_cast<int>(rows);
    img.v.resize(rows * cols);
    in.read(reinterpret_cast<char*>(img.v.data()),
            static_cast<std::streamsize>(img.v.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(img.v.size() * sizeof(double)))
        fail(path, "truncated values");

    double mx = 0.0;
    for (double x : img.v) {
        if (!std::isfinite(x) || x < 0.0) fail(path, "values must be finite and nonnegative");
        mx = std::max(mx, x);
    }
    if (mx > 0.0)
        for (double& x : img.v) x /= mx;
    return img;
}

}  // namespace densctl
