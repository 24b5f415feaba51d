#pragma once

#include <string>
#include <vector>

namespace s2f {

enum class ImageScale { linear, log_normalized };

struct ImageProvenance {
    std::string window;  // "full" or "c=<...>,b=<...>"
    int bscan = -1;
    int repeat = -1;
    std::string model_id;  // denoiser checkpoint id, when applicable
    std::string notes;
};

// Real 2D b-scan image, rows = depth, cols = lateral (a-lines).
struct BScanImage {
    int rows = 0;
    int cols = 0;
    ImageScale scale = ImageScale::linear;
    std::vector<float> px;  // row-major
    ImageProvenance prov;

    float& at(int r, int c) { return px[static_cast<std::size_t>(r) * cols + c]; }
    float at(int r, int c) const { return px[static_cast<std::size_t>(r) * cols + c]; }
    std::size_t size() const { return px.size(); }
};

}  // namespace s2f
