#pragma once

#include <array>

#include "tabrec/error.hpp"

namespace tabrec {

struct ImageSize {
    int width = 0;
    int height = 0;
    bool operator==(const ImageSize&) const = default;
};

enum class BoxForm { Pixel, Normalized };

// Axis-aligned rectangle stored as corners. `form` tags the coordinate space:
// pixel boxes live in image coordinates, normalized boxes in [0,1] fractions.
// Zero-area boxes are legal values (collapsed detections); geometric ops treat
// them as having no overlap rather than failing.
struct Box {
    BoxForm form = BoxForm::Pixel;
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    static Box pixel(double x0, double y0, double x1, double y1) {
        return Box{BoxForm::Pixel, x0, y0, x1, y1};
    }

    // Normalized boxes are built from [x,y,w,h] fractions.
    static Box normalized(double x, double y, double w, double h) {
        return Box{BoxForm::Normalized, x, y, x + w, y + h};
    }

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const {
        double w = width(), h = height();
        return (w > 0.0 && h > 0.0) ? w * h : 0.0;
    }
    double center_x() const { return 0.5 * (x0 + x1); }
    double center_y() const { return 0.5 * (y0 + y1); }

    std::array<double, 4> xywh() const { return {x0, y0, width(), height()}; }
    std::array<double, 4> xyxy() const { return {x0, y0, x1, y1}; }

    Box translated(double dx, double dy) const { return Box{form, x0 + dx, y0 + dy, x1 + dx, y1 + dy}; }

    bool operator==(const Box&) const = default;
};

// Intersection area over union area; 0 for disjoint or degenerate boxes.
double iou(const Box& a, const Box& b);

// True iff the center of `line` lies inside `cell`, boundary included.
bool contains_center(const Box& cell, const Box& line);

// Euclidean distance between box centers.
double center_distance(const Box& a, const Box& b);

// Affine conversion between pixel corners and normalized fractions.
Box convert(const Box& box, ImageSize image, BoxForm target);

} // namespace tabrec
