/// @file images.cpp

#include "mmc/images.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mmc/error.h"
#include "mmc/keyed_rng.h"
#include "mmc/record_io.h"

namespace mmc {

Image SyntheticImage(int population, std::uint64_t seed, int index, int height, int width) {
    KeyedStream rng(DeriveKey(seed, "image", population, index));
    Image img{height, width, std::vector<double>(static_cast<std::size_t>(height * width))};
    const double scale = std::min(height, width) / 32.0;
    const bool adult = population == 0;
    const double cy = height / 2.0 + 2.5 * scale * rng.Normal();
    const double cx = width / 2.0 + 2.5 * scale * rng.Normal();
    const double ry = scale * ((adult ? 11.0 : 7.5) + 1.5 * rng.Normal());
    const double rx = scale * ((adult ? 9.0 : 7.0) + 1.5 * rng.Normal());
    const double level = (adult ? 0.75 : 0.6) + 0.08 * rng.Normal();
    const double background = 0.12 + 0.04 * rng.Normal();
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double dy = (y + 0.5 - cy) / std::max(ry, 1.0);
            const double dx = (x + 0.5 - cx) / std::max(rx, 1.0);
            // Soft-edged ellipse.
            const double inside = 1.0 / (1.0 + std::exp(8.0 * (std::sqrt(dx * dx + dy * dy) - 1.0)));
            const double v = background + (level - background) * inside + 0.04 * rng.Normal();
            img.pixels[static_cast<std::size_t>(y * width + x)] = std::clamp(v, 0.0, 1.0);
        }
    }
    return img;
}

std::vector<Image> SyntheticImages(int population, std::uint64_t seed, int count, int height,
                                   int width) {
    std::vector<Image> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(SyntheticImage(population, seed, i, height, width));
    return out;
}

namespace {

// Next header token of a PGM file, skipping comments.
std::string PgmToken(std::istream& in) {
    std::string tok;
    char c = 0;
    while (in.get(c)) {
        if (c == '#') {
            std::string skip;
            std::getline(in, skip);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!tok.empty()) break;
            continue;
        }
        tok += c;
    }
    return tok;
}

int PgmInt(std::istream& in, const std::string& path) {
    const std::string tok = PgmToken(in);
    try {
        std::size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::kParse, "'" + path + "': bad PGM header value '" + tok + "'");
    }
}

}  // namespace

Image ReadPgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
    const std::string magic = PgmToken(in);
    if (magic != "P5" && magic != "P2") {
        throw Error(ErrorCode::kParse, "'" + path + "' is not a PGM file");
    }
    Image img;
    img.width = PgmInt(in, path);
    img.height = PgmInt(in, path);
    const int maxval = PgmInt(in, path);
    if (maxval > 65535) throw Error(ErrorCode::kParse, "'" + path + "': maxval too large");
    const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
    img.pixels.resize(n);
    if (magic == "P2") {
        for (auto& p : img.pixels) {
            int v = 0;
            if (!(in >> v) || v < 0 || v > maxval) {
                throw Error(ErrorCode::kParse, "'" + path + "': bad pixel value");
            }
            p = static_cast<double>(v) / maxval;
        }
        return img;
    }
    const int bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> buf(n * static_cast<std::size_t>(bytes));
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
        throw Error(ErrorCode::kParse, "'" + path + "': truncated pixel data");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const int v = bytes == 1 ? buf[i] : (buf[2 * i] << 8) | buf[2 * i + 1];
        img.pixels[i] = std::min(1.0, static_cast<double>(v) / maxval);
    }
    return img;
}

void WritePgm(const std::string& path, const Image& image) {
    std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                      "\n255\n";
    for (double p : image.pixels) {
        out += static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(p, 0.0, 1.0) * 255)));
    }
    WriteFileAtomic(path, out);
}

Image ReadTextImage(const std::string& path, int height, int width) {
    std::istringstream in(ReadFile(path));
    Image img{height, width, {}};
    double v = 0.0;
    while (in >> v) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw Error(ErrorCode::kParse, "'" + path + "': pixel outside [0, 1]");
        }
        img.pixels.push_back(v);
    }
    if (!in.eof()) throw Error(ErrorCode::kParse, "'" + path + "': non-numeric content");
    if (img.pixels.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "'" + path + "' holds " + std::to_string(img.pixels.size()) +
                        " pixels, expected " + std::to_string(height * width));
    }
    return img;
}

Image ReadImage(const std::string& path, int height, int width) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".pgm") == 0) {
        return ReadPgm(path);
    }
    return ReadTextImage(path, height, width);
}

}  // namespace mmc
