#include "pottsrf/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include <png.h>

#include "pottsrf/errors.hpp"
#include "pottsrf/io.hpp"

namespace pottsrf {

namespace {

struct FileHandle {
    std::FILE* fp = nullptr;
    explicit FileHandle(const std::string& path, const char* mode) {
        fp = std::fopen(path.c_str(), mode);
    }
    ~FileHandle() {
        if (fp) std::fclose(fp);
    }
    FileHandle(const FileHandle&) = delete;
    FileHandle& operator=(const FileHandle&) = delete;
};

Image load_png_file(const std::string& path) {
    FileHandle file(path, "rb");
    if (!file.fp) throw io_error("cannot open image: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw io_error("png reader allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw io_error("png reader allocation failed");
    }

    std::vector<png_byte> buffer;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0, height = 0;
    int bit_depth = 0, color_type = 0, channels = 0;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error("failed to read png: " + path);
    }
    png_init_io(png, file.fp);
    png_read_info(png, info);
    png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (bit_depth == 16) png_set_swap(png);  // read 16-bit samples little-endian
    png_read_update_info(png, info);

    bit_depth = png_get_bit_depth(png, info);
    channels = png_get_channels(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    buffer.resize(rowbytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * rowbytes;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error("failed to read png: " + path);
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    if (channels != 1 && channels != 3)
        throw io_error("unsupported png channel count in " + path);
    Image img(static_cast<int>(width), static_cast<int>(height), channels);
    const std::size_t total = static_cast<std::size_t>(width) * height * channels;
    if (bit_depth == 16) {
        const auto* samples = reinterpret_cast<const std::uint16_t*>(buffer.data());
        for (std::size_t t = 0; t < total; ++t) img.data[t] = samples[t] / 65535.0;
    } else {
        for (std::size_t t = 0; t < total; ++t) img.data[t] = buffer[t] / 255.0;
    }
    return img;
}

// P5/P6 binary netpbm
Image load_pnm_file(const std::string& path) {
    const std::string content = read_file(path);
    if (content.size() < 2) throw io_error("truncated image file: " + path);
    const int channels = content[1] == '6' ? 3 : 1;
    std::size_t pos = 2;
    auto next_int = [&]() -> long {
        while (pos < content.size()) {
            if (content[pos] == '#') {
                while (pos < content.size() && content[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(content[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
        if (pos >= content.size() || !std::isdigit(static_cast<unsigned char>(content[pos])))
            throw parse_error("malformed netpbm header in " + path);
        long v = 0;
        while (pos < content.size() && std::isdigit(static_cast<unsigned char>(content[pos]))) {
            v = v * 10 + (content[pos++] - '0');
        }
        return v;
    };
    const long width = next_int();
    const long height = next_int();
    const long maxval = next_int();
    if (width < 1 || height < 1 || maxval < 1 || maxval > 65535)
        throw parse_error("bad netpbm dimensions in " + path);
    ++pos;  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    const std::size_t need = static_cast<std::size_t>(width) * height * channels * bytes;
    if (content.size() - pos < need) throw io_error("truncated image file: " + path);

    Image img(static_cast<int>(width), static_cast<int>(height), channels);
    const auto* raw = reinterpret_cast<const unsigned char*>(content.data()) + pos;
    const std::size_t total = static_cast<std::size_t>(width) * height * channels;
    for (std::size_t t = 0; t < total; ++t) {
        long v = bytes == 2 ? (raw[2 * t] << 8) | raw[2 * t + 1] : raw[t];
        img.data[t] = static_cast<double>(v) / maxval;
    }
    return img;
}

}  // namespace

Image load_image(const std::string& path) {
    const std::string head = [&] {
        FileHandle file(path, "rb");
        if (!file.fp) throw io_error("cannot open image: " + path);
        char buf[8] = {};
        const std::size_t got = std::fread(buf, 1, sizeof buf, file.fp);
        return std::string(buf, got);
    }();
    static const unsigned char png_magic[4] = {0x89, 'P', 'N', 'G'};
    if (head.size() >= 4 && std::memcmp(head.data(), png_magic, 4) == 0) {
        return load_png_file(path);
    }
    if (head.size() >= 2 && head[0] == 'P' && (head[1] == '5' || head[1] == '6')) {
        return load_pnm_file(path);
    }
    throw io_error("unsupported image format: " + path);
}

namespace {

unsigned char to_byte(double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void png_sink(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::string*>(png_get_io_ptr(png));
    out->append(reinterpret_cast<char*>(data), length);
}

void png_sink_flush(png_structp) {}

// encodes to memory, then writes atomically so failures leave no partial file
void write_png_bytes(const std::vector<unsigned char>& bytes, int width, int height,
                     int channels, const std::string& path) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw io_error("png writer allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw io_error("png writer allocation failed");
    }
    std::string encoded;
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) {
        rows[y] = const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(y) * width * channels);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw io_error("failed to encode png for " + path);
    }
    png_set_write_fn(png, &encoded, png_sink, png_sink_flush);
    png_set_IHDR(png, info, width, height, 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    write_file_atomic(path, encoded);
}

}  // namespace

void save_png(const Image& img, const std::string& path) {
    std::vector<unsigned char> bytes(img.data.size());
    for (std::size_t t = 0; t < img.data.size(); ++t) bytes[t] = to_byte(img.data[t]);
    write_png_bytes(bytes, img.width, img.height, img.channels, path);
}

void save_pgm(const Image& img, const std::string& path) {
    if (img.channels != 1) throw std::invalid_argument("pgm output requires a grayscale image");
    std::string content = "P5\n" + std::to_string(img.width) + " " +
                          std::to_string(img.height) + "\n255\n";
    content.reserve(content.size() + img.data.size());
    for (double v : img.data) content.push_back(static_cast<char>(to_byte(v)));
    write_file_atomic(path, content);
}

std::array<unsigned char, 3> label_color(int k) {
    static const std::array<std::array<unsigned char, 3>, 20> palette = {{
        {230, 25, 75},   {60, 180, 75},   {255, 225, 25}, {0, 130, 200},
        {245, 130, 48},  {145, 30, 180},  {70, 240, 240}, {240, 50, 230},
        {210, 245, 60},  {250, 190, 190}, {0, 128, 128},  {230, 190, 255},
        {170, 110, 40},  {255, 250, 200}, {128, 0, 0},    {170, 255, 195},
        {128, 128, 0},   {255, 215, 180}, {0, 0, 128},    {128, 128, 128},
    }};
    return palette[static_cast<std::size_t>(k < 0 ? 0 : k) % palette.size()];
}

void save_label_map(const std::vector<int>& labels, int width, int height,
                    const std::string& path) {
    if (static_cast<int>(labels.size()) != width * height)
        throw std::invalid_argument("label count does not match dimensions");
    std::vector<unsigned char> bytes(labels.size() * 3);
    for (std::size_t t = 0; t < labels.size(); ++t) {
        const auto c = label_color(labels[t]);
        bytes[3 * t] = c[0];
        bytes[3 * t + 1] = c[1];
        bytes[3 * t + 2] = c[2];
    }
    write_png_bytes(bytes, width, height, 3, path);
}

Image gaussian_blur(const Image& img, double sigma) {
    if (sigma <= 0.0) return img;
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int t = -radius; t <= radius; ++t) {
        kernel[t + radius] = std::exp(-t * t / (2.0 * sigma * sigma));
        sum += kernel[t + radius];
    }
    for (auto& k : kernel) k /= sum;

    const int w = img.width, h = img.height, ch = img.channels;
    Image mid(w, h, ch), out(w, h, ch);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                double v = 0.0;
                for (int t = -radius; t <= radius; ++t) {
                    const int xx = std::clamp(x + t, 0, w - 1);
                    v += kernel[t + radius] * img.at(xx, y, c);
                }
                mid.at(x, y, c) = v;
            }
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                double v = 0.0;
                for (int t = -radius; t <= radius; ++t) {
                    const int yy = std::clamp(y + t, 0, h - 1);
                    v += kernel[t + radius] * mid.at(x, yy, c);
                }
                out.at(x, y, c) = v;
            }
        }
    }
    return out;
}

NodeField edge_detector(const Image& img, double beta, double gamma, double blur_sigma,
                        double intensity_scale) {
    if (beta <= 0.0) throw std::invalid_argument("beta must be positive");
    if (gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
    const Image smooth = gaussian_blur(img, blur_sigma);
    const int w = img.width, h = img.height;
    NodeField alpha(static_cast<std::size_t>(w) * h, beta);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double g2 = 0.0;
            for (int c = 0; c < img.channels; ++c) {
                const double gx = x + 1 < w ? smooth.at(x + 1, y, c) - smooth.at(x, y, c) : 0.0;
                const double gy = y + 1 < h ? smooth.at(x, y + 1, c) - smooth.at(x, y, c) : 0.0;
                g2 += gx * gx + gy * gy;
            }
            alpha[static_cast<std::size_t>(y) * w + x] =
                beta / (1.0 + gamma * intensity_scale * g2);
        }
    }
    return alpha;
}

Matrix image_colors(const Image& img) {
    Matrix m(img.n_pixels(), img.channels, 0.0);
    for (int p = 0; p < img.n_pixels(); ++p) {
        for (int c = 0; c < img.channels; ++c) {
            m(p, c) = img.data[static_cast<std::size_t>(p) * img.channels + c];
        }
    }
    return m;
}

SegmentResult segment_image(const Image& img, const SegmentParams& params) {
    if (params.n_classes < 2) throw std::invalid_argument("segmentation needs at least 2 classes");
    const Matrix features = image_colors(img);
    Rng rng(params.seed);
    SegmentResult res;
    res.centroids = kmeans_centroids(features, params.n_classes, rng);

    Matrix force;
    switch (params.force) {
        case RegionForceKind::log:
            force = region_force_log(
                image_probabilities(features, res.centroids, params.sigma,
                                    params.squared_distance),
                params.delta);
            break;
        case RegionForceKind::linear:
            force = region_force_linear(image_probabilities(
                features, res.centroids, params.sigma, params.squared_distance));
            break;
        case RegionForceKind::l2:
            force = region_force_l2(features, res.centroids);
            break;
    }

    const NodeField alpha = edge_detector(img, params.alpha, params.edge_gamma,
                                          params.blur_sigma, params.intensity_scale);
    const GridGeometry geom{img.width, img.height};
    GridSolveResult sol = solve(geom, force, alpha, params.solver);
    res.labels = assign_labels(sol.phi);
    res.phi = std::move(sol.phi);
    res.report = std::move(sol.report);
    return res;
}

}  // namespace pottsrf
