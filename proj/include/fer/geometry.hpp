#pragma once

#include "fer/common.hpp"
#include "fer/data_io.hpp"
#include "fer/image.hpp"

#include <vector>

namespace fer::geometry {

struct AlignmentTransform {
    double angle = 0.0;  ///< radians, in (-pi, pi]
    Point2 center;       ///< rotation pivot (eye midpoint)

    /// Maps an input-image point into aligned coordinates (rotation by -angle).
    [[nodiscard]] Point2 forward(Point2 p) const;
    /// Maps an aligned point back to input-image coordinates.
    [[nodiscard]] Point2 inverse(Point2 p) const;
};

struct PatchBox {
    PatchId patch_id = PatchId::face;
    Point2 origin;  ///< top-left, aligned-image coordinates
    double width = 0.0;
    double height = 0.0;
};

/// Box sizes as multiples of the inter-ocular distance D.
struct PatchGeometryConfig {
    double eye_box_scale = 0.45;
    double mouth_box_width_scale = 0.9;
    double mouth_box_height_scale = 0.5;
    double face_box_scale = 2.2;
    double face_center_drop = 0.55;
};

void validate(const PatchGeometryConfig& cfg);
PatchGeometryConfig load_geometry_config(const std::filesystem::path& path);

/// atan2 of the right-eye minus left-eye vector.
double estimate_inplane_angle(const io::LandmarkSet& landmarks);

AlignmentTransform alignment_transform(const io::LandmarkSet& landmarks);

struct AlignedFace {
    Image image;
    io::LandmarkSet landmarks;
    AlignmentTransform transform;
};

/// Rotates by -angle about the eye midpoint; bilinear, zero fill.
AlignedFace align_face(const Image& image, const io::LandmarkSet& landmarks);

io::LandmarkSet transform_landmarks(const io::LandmarkSet& landmarks, const AlignmentTransform& t);

/// Face, left eye, right eye, mouth boxes, clipped to [0,w] x [0,h].
std::vector<PatchBox> extract_patch_boxes(const io::LandmarkSet& aligned, const PatchGeometryConfig& cfg,
                                          int image_width, int image_height);

/// Bilinear resample of the box region to out_w x out_h (edge-clamped).
Image crop_and_resize(const Image& image, const PatchBox& box, int out_w, int out_h);

/// Whole-image resize; crop_and_resize with the full extent.
Image resize(const Image& image, int out_w, int out_h);

}  // namespace fer::geometry
