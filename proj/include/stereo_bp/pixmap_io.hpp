#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "stereo_bp/image.hpp"

namespace stereo_bp {

/// Decodes a P2 (plain) or P5 (raw) PGM held in memory. Samples are kept as stored;
/// maxval only bounds them. Throws FormatError with the failing byte offset.
GrayImage decode_pgm(std::string_view bytes);

/// Encodes as P5 when `binary`, otherwise P2 with maxval 255.
std::string encode_pgm(const GrayImage& image, bool binary = true);

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& image, const std::filesystem::path& path, bool binary = true);

/// Writes gray = label * scale_factor; INVALID labels are written as 0.
void write_pgm(const DisparityMap& map, const std::filesystem::path& path, bool binary = true);

/// Throws Error when a scaled label does not fit in a byte.
GrayImage disparity_to_gray(const DisparityMap& map);

/// Inverse of disparity_to_gray: label = round(gray / scale_factor). Gray 0 decodes to
/// disparity 0. `levels` <= 0 means one past the largest decoded label.
DisparityMap gray_to_disparity(const GrayImage& image, int scale_factor, int levels = 0);

/// Rec. 601 luma, rounded and clamped.
GrayImage to_grayscale(const RgbImage& rgb);

}  // namespace stereo_bp
