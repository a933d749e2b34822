#include "fer/geometry.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace fer::geometry {

Point2 AlignmentTransform::forward(Point2 p) const {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double dx = p.x - center.x;
    const double dy = p.y - center.y;
    return {center.x + c * dx + s * dy, center.y - s * dx + c * dy};
}

Point2 AlignmentTransform::inverse(Point2 p) const {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double dx = p.x - center.x;
    const double dy = p.y - center.y;
    return {center.x + c * dx - s * dy, center.y + s * dx + c * dy};
}

void validate(const PatchGeometryConfig& cfg) {
    for (double v : {cfg.eye_box_scale, cfg.mouth_box_width_scale, cfg.mouth_box_height_scale, cfg.face_box_scale}) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InputError("patch geometry scales must be positive");
    }
    if (!std::isfinite(cfg.face_center_drop)) throw InputError("face_center_drop must be finite");
}

PatchGeometryConfig load_geometry_config(const std::filesystem::path& path) {
    PatchGeometryConfig cfg;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_file(path));
        cfg.eye_box_scale = j.value("eye_box_scale", cfg.eye_box_scale);
        cfg.mouth_box_width_scale = j.value("mouth_box_width_scale", cfg.mouth_box_width_scale);
        cfg.mouth_box_height_scale = j.value("mouth_box_height_scale", cfg.mouth_box_height_scale);
        cfg.face_box_scale = j.value("face_box_scale", cfg.face_box_scale);
        cfg.face_center_drop = j.value("face_center_drop", cfg.face_center_drop);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    validate(cfg);
    return cfg;
}

double estimate_inplane_angle(const io::LandmarkSet& landmarks) {
    const Point2 l = landmarks.left_eye();
    const Point2 r = landmarks.right_eye();
    if (l.x == r.x && l.y == r.y) throw InputError("eye centers coincide; in-plane angle undefined");
    return std::atan2(r.y - l.y, r.x - l.x);
}

AlignmentTransform alignment_transform(const io::LandmarkSet& landmarks) {
    const Point2 l = landmarks.left_eye();
    const Point2 r = landmarks.right_eye();
    return {estimate_inplane_angle(landmarks), {(l.x + r.x) / 2.0, (l.y + r.y) / 2.0}};
}

io::LandmarkSet transform_landmarks(const io::LandmarkSet& landmarks, const AlignmentTransform& t) {
    io::LandmarkSet out;
    out.mirrored = landmarks.mirrored;
    for (const auto& [name, p] : landmarks.points) out.points.emplace(name, t.forward(p));
    return out;
}

AlignedFace align_face(const Image& image, const io::LandmarkSet& landmarks) {
    validate(image);
    io::validate(landmarks);
    const AlignmentTransform t = alignment_transform(landmarks);
    AlignedFace out{image, transform_landmarks(landmarks, t), t};
    if (t.angle == 0.0) return out;

    const double c = std::cos(t.angle);
    const double s = std::sin(t.angle);
    Image& dst = out.image;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < dst.height; ++y) {
        for (int x = 0; x < dst.width; ++x) {
            const double dx = x - t.center.x;
            const double dy = y - t.center.y;
            const double sx = t.center.x + c * dx - s * dy;
            const double sy = t.center.y + s * dx + c * dy;
            for (int ch = 0; ch < dst.channels; ++ch) {
                dst.at(x, y, ch) = round_to_u8(sample_bilinear_zero(image, sx, sy, ch));
            }
        }
    }
    return out;
}

namespace {

PatchBox clip_box(PatchId id, double cx, double cy, double w, double h, int img_w, int img_h) {
    const double x0 = std::max(0.0, cx - w / 2.0);
    const double y0 = std::max(0.0, cy - h / 2.0);
    const double x1 = std::min(static_cast<double>(img_w), cx + w / 2.0);
    const double y1 = std::min(static_cast<double>(img_h), cy + h / 2.0);
    if (x1 - x0 < 1.0 || y1 - y0 < 1.0) {
        throw InputError(std::string(to_string(id)) + " patch box degenerates after clipping to the image");
    }
    return {id, {x0, y0}, x1 - x0, y1 - y0};
}

}  // namespace

std::vector<PatchBox> extract_patch_boxes(const io::LandmarkSet& aligned, const PatchGeometryConfig& cfg,
                                          int image_width, int image_height) {
    validate(cfg);
    const Point2 l = aligned.left_eye();
    const Point2 r = aligned.right_eye();
    const Point2 m = aligned.mouth();
    const double d = std::hypot(r.x - l.x, r.y - l.y);
    if (!(d > 0.0)) throw InputError("inter-ocular distance is zero");
    const double mid_x = (l.x + r.x) / 2.0;
    const double mid_y = (l.y + r.y) / 2.0;

    std::vector<PatchBox> boxes;
    boxes.push_back(clip_box(PatchId::face, mid_x, mid_y + cfg.face_center_drop * d, cfg.face_box_scale * d,
                             cfg.face_box_scale * d, image_width, image_height));
    boxes.push_back(clip_box(PatchId::left_eye, l.x, l.y, cfg.eye_box_scale * d, cfg.eye_box_scale * d, image_width,
                             image_height));
    boxes.push_back(clip_box(PatchId::right_eye, r.x, r.y, cfg.eye_box_scale * d, cfg.eye_box_scale * d,
                             image_width, image_height));
    boxes.push_back(clip_box(PatchId::mouth, m.x, m.y, cfg.mouth_box_width_scale * d,
                             cfg.mouth_box_height_scale * d, image_width, image_height));
    return boxes;
}

Image crop_and_resize(const Image& image, const PatchBox& box, int out_w, int out_h) {
    validate(image);
    if (!(box.width > 0.0) || !(box.height > 0.0)) throw InputError("crop box has zero area");
    if (out_w < 1 || out_h < 1) throw InputError("resize target must be at least 1x1");
    Image out(out_w, out_h, image.channels);
    const double sx = box.width / out_w;
    const double sy = box.height / out_h;
    for (int y = 0; y < out_h; ++y) {
        // pixel-center mapping: output (i + 0.5) covers input (origin + (i + 0.5) * scale)
        const double src_y = box.origin.y + (y + 0.5) * sy - 0.5;
        for (int x = 0; x < out_w; ++x) {
            const double src_x = box.origin.x + (x + 0.5) * sx - 0.5;
            for (int c = 0; c < image.channels; ++c) {
                out.at(x, y, c) = round_to_u8(sample_bilinear_clamp(image, src_x, src_y, c));
            }
        }
    }
    return out;
}

Image resize(const Image& image, int out_w, int out_h) {
    return crop_and_resize(image, {PatchId::face, {0.0, 0.0}, static_cast<double>(image.width),
                                   static_cast<double>(image.height)},
                           out_w, out_h);
}

}  // namespace fer::geometry
