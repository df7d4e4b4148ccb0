/// @file images.h
/// @brief Grayscale images: synthetic populations and file readers

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mmc {

/// Row-major grayscale image with pixels in [0, 1].
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> pixels;
};

/// Synthetic chest-like images. Population 0 shows a large bright field,
/// population 1 a smaller and dimmer one; both with random placement, size
/// jitter and pixel noise. Deterministic in (seed, population, index).
Image SyntheticImage(int population, std::uint64_t seed, int index, int height = 32,
                     int width = 32);

std::vector<Image> SyntheticImages(int population, std::uint64_t seed, int count,
                                   int height = 32, int width = 32);

/// Binary (P5) or ASCII (P2) portable graymap, scaled to [0, 1].
/// Throws Error(kParse) or Error(kIo).
Image ReadPgm(const std::string& path);
void WritePgm(const std::string& path, const Image& image);

/// Whitespace-separated pixel values in [0, 1], row-major.
/// Throws Error(kDimensionMismatch) when the count is not height * width.
Image ReadTextImage(const std::string& path, int height, int width);

/// Dispatches on the extension: .pgm, otherwise text.
Image ReadImage(const std::string& path, int height, int width);

}  // namespace mmc
