#include "stereo_bp/pixmap_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace stereo_bp {

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

    std::size_t pos() const { return pos_; }

    // Skips whitespace and '#' comments, then reads one non-negative integer.
    long next_int(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > std::numeric_limits<int>::max())
                throw FormatError(std::string("value too large for ") + what, start);
            ++pos_;
        }
        if (pos_ == start) {
            if (pos_ >= bytes_.size())
                throw FormatError(std::string("unexpected end of data reading ") + what, pos_);
            throw FormatError(std::string("expected integer for ") + what, pos_);
        }
        return value;
    }

    // Exactly one whitespace byte separates maxval from a raw raster.
    void single_space() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
            throw FormatError("expected whitespace after maxval", pos_);
        ++pos_;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

GrayImage decode_pgm(std::string_view bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
        throw FormatError("not a PGM file (expected magic P2 or P5)", 0);
    const bool binary = bytes[1] == '5';

    HeaderReader reader(bytes.substr(2));
    const long width = reader.next_int("width");
    const long height = reader.next_int("height");
    const std::size_t maxval_offset = reader.pos() + 2;
    const long maxval = reader.next_int("maxval");
    if (width < 1 || height < 1)
        throw FormatError("image dimensions must be positive", 2);
    if (maxval < 1 || maxval > 255)
        throw FormatError("maxval " + std::to_string(maxval) + " outside [1, 255]", maxval_offset);

    GrayImage image(static_cast<int>(width), static_cast<int>(height));
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::uint8_t* out = image.samples.data();

    if (binary) {
        reader.single_space();
        const std::size_t start = reader.pos() + 2;
        const std::size_t available = bytes.size() - std::min(start, bytes.size());
        if (available < count)
            throw FormatError("truncated pixel data: expected " + std::to_string(count) + " bytes, found " +
                                  std::to_string(available),
                              bytes.size());
        for (std::size_t i = 0; i < count; ++i) {
            const auto v = static_cast<unsigned char>(bytes[start + i]);
            if (v > maxval) throw FormatError("sample exceeds maxval", start + i);
            out[i] = v;
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const long v = reader.next_int("sample");
            if (v > maxval) throw FormatError("sample exceeds maxval", reader.pos() + 2);
            out[i] = static_cast<std::uint8_t>(v);
        }
    }
    return image;
}

std::string encode_pgm(const GrayImage& image, bool binary) {
    std::ostringstream os;
    os << (binary ? "P5" : "P2") << '\n' << image.width() << ' ' << image.height() << "\n255\n";
    if (binary) {
        os.write(reinterpret_cast<const char*>(image.samples.data()),
                 static_cast<std::streamsize>(image.samples.size()));
    } else {
        for (int y = 0; y < image.height(); ++y) {
            for (int x = 0; x < image.width(); ++x) {
                if (x) os << ' ';
                os << static_cast<int>(image(x, y));
            }
            os << '\n';
        }
    }
    return os.str();
}

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_pgm(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what(), e.offset());
    }
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path, bool binary) {
    const std::string bytes = encode_pgm(image, binary);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

void write_pgm(const DisparityMap& map, const std::filesystem::path& path, bool binary) {
    write_pgm(disparity_to_gray(map), path, binary);
}

GrayImage disparity_to_gray(const DisparityMap& map) {
    GrayImage image(map.width(), map.height());
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            const int label = map(x, y);
            if (label == DisparityMap::kInvalid) continue;
            const long gray = static_cast<long>(label) * map.scale_factor;
            if (label < 0 || gray > 255)
                throw Error("disparity " + std::to_string(label) + " x scale " + std::to_string(map.scale_factor) +
                            " = " + std::to_string(gray) + " does not fit in 8 bits");
            image(x, y) = static_cast<std::uint8_t>(gray);
        }
    }
    return image;
}

DisparityMap gray_to_disparity(const GrayImage& image, int scale_factor, int levels) {
    if (scale_factor < 1) throw Error("disparity scale factor must be >= 1");
    DisparityMap map(image.width(), image.height(), 1, scale_factor);
    int max_label = 0;
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            const int label = static_cast<int>(std::lround(static_cast<double>(image(x, y)) / scale_factor));
            map(x, y) = label;
            max_label = std::max(max_label, label);
        }
    }
    map.levels = levels > 0 ? levels : max_label + 1;
    return map;
}

GrayImage to_grayscale(const RgbImage& rgb) {
    if (rgb.red.rows() != rgb.green.rows() || rgb.red.rows() != rgb.blue.rows() ||
        rgb.red.cols() != rgb.green.cols() || rgb.red.cols() != rgb.blue.cols())
        throw Error("color channels differ in size");
    const Eigen::ArrayXXd luma = 0.299 * rgb.red.cast<double>() + 0.587 * rgb.green.cast<double>() +
                                 0.114 * rgb.blue.cast<double>();
    GrayImage::Raster raster(rgb.red.rows(), rgb.red.cols());
    for (Eigen::Index r = 0; r < raster.rows(); ++r)
        for (Eigen::Index c = 0; c < raster.cols(); ++c)
            raster(r, c) = static_cast<std::uint8_t>(std::clamp(std::lround(luma(r, c)), 0L, 255L));
    return GrayImage(std::move(raster));
}

}  // namespace stereo_bp
