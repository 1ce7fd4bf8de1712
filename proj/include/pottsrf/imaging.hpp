#pragma once

#include <array>
#include <string>
#include <vector>

#include "pottsrf/graph.hpp"
#include "pottsrf/matrix.hpp"
#include "pottsrf/region_force.hpp"
#include "pottsrf/solver.hpp"

namespace pottsrf {

/// Interleaved row-major image with 1 (gray) or 3 (rgb) channels, values in [0, 1].
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, int c)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * c, 0.0) {}

    double& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    int n_pixels() const { return width * height; }
};

/// Reads PNG, PPM (P6) or PGM (P5) by file content, 8 or 16 bit.
Image load_image(const std::string& path);

void save_png(const Image& img, const std::string& path);
void save_pgm(const Image& img, const std::string& path);

/// Distinct colors used for label visualizations; k wraps past 20.
std::array<unsigned char, 3> label_color(int k);

/// Writes labels as a color PNG using the palette.
void save_label_map(const std::vector<int>& labels, int width, int height,
                    const std::string& path);

/// Separable Gaussian blur with replicate boundary, kernel radius ceil(3 sigma);
/// sigma <= 0 returns the input untouched.
Image gaussian_blur(const Image& img, double sigma);

/// Edge-adaptive TV weight alpha(x) = beta / (1 + gamma * |grad I_sigma(x)|^2),
/// channel-summed squared forward differences on the blurred image, scaled by
/// intensity_scale before entering the denominator. 0 < alpha <= beta.
NodeField edge_detector(const Image& img, double beta, double gamma, double blur_sigma,
                        double intensity_scale = 1.0);

/// n_pixels x channels feature matrix of an image.
Matrix image_colors(const Image& img);

struct SegmentParams {
    int n_classes = 4;
    RegionForceKind force = RegionForceKind::log;
    double delta = 1e-3;      // log force offset
    double sigma = 1.0;       // probability bandwidth
    bool squared_distance = false;
    double alpha = 1.0;       // TV weight beta in the edge detector
    double edge_gamma = 0.0;  // 0 keeps alpha constant
    double blur_sigma = 0.0;
    double intensity_scale = 1.0;
    std::uint64_t seed = 0;   // k-means initialization seed
    SolverConfig solver;
};

struct SegmentResult {
    std::vector<int> labels;
    Matrix phi;
    Matrix centroids;
    SolverReport report;
};

/// Full pipeline: k-means centroids -> probabilities -> region force ->
/// edge-adaptive alpha -> relaxed Potts solve -> argmax labels.
SegmentResult segment_image(const Image& img, const SegmentParams& params);

}  // namespace pottsrf
