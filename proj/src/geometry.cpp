#include "tabrec/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace tabrec {

namespace {

void require_same_form(const Box& a, const Box& b) {
    if (a.form != b.form) {
        throw Error(ErrorKind::MixedCoordinateForms,
                    "boxes must be in the same coordinate form");
    }
}

} // namespace

double iou(const Box& a, const Box& b) {
    require_same_form(a, b);
    double ix0 = std::max(a.x0, b.x0);
    double iy0 = std::max(a.y0, b.y0);
    double ix1 = std::min(a.x1, b.x1);
    double iy1 = std::min(a.y1, b.y1);
    double iw = ix1 - ix0;
    double ih = iy1 - iy0;
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    double inter = iw * ih;
    double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

bool contains_center(const Box& cell, const Box& line) {
    require_same_form(cell, line);
    double cx = line.center_x();
    double cy = line.center_y();
    return cx >= cell.x0 && cx <= cell.x1 && cy >= cell.y0 && cy <= cell.y1;
}

double center_distance(const Box& a, const Box& b) {
    require_same_form(a, b);
    double dx = a.center_x() - b.center_x();
    double dy = a.center_y() - b.center_y();
    return std::sqrt(dx * dx + dy * dy);
}

Box convert(const Box& box, ImageSize image, BoxForm target) {
    if (image.width <= 0 || image.height <= 0) {
        throw Error(ErrorKind::DegenerateImageSize,
                    "image size must be positive in both dimensions");
    }
    if (box.form == target) return box;
    double w = static_cast<double>(image.width);
    double h = static_cast<double>(image.height);
    Box out = box;
    out.form = target;
    if (target == BoxForm::Normalized) {
        out.x0 = box.x0 / w;
        out.y0 = box.y0 / h;
        out.x1 = box.x1 / w;
        out.y1 = box.y1 / h;
    } else {
        out.x0 = box.x0 * w;
        out.y0 = box.y0 * h;
        out.x1 = box.x1 * w;
        out.y1 = box.y1 * h;
    }
    return out;
}

} // namespace tabrec
