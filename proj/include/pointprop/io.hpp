#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pointprop/geometry.hpp"
#include "pointprop/linalg.hpp"
#include "pointprop/mask.hpp"
#include "pointprop/retrieval.hpp"
#include "pointprop/scene.hpp"

namespace pointprop {

// On-disk formats. Binary masks and images are PGM (P5) / PPM (P6) with
// maxval 255. Probability masks and matrices are raw little-endian float32
// with a 16-byte header:
//   "EXPM" u32 width  u32 height  u32 reserved(=0)   probability mask
//   "EXTM" u32 n      u32 reserved(=0) u32 reserved(=0)   n x n matrix
// Annotations are JSON lines:
//   {"object_id":0,"class_id":1,"extreme":[[xt,yt],[xl,yl],[xb,yb],[xr,yr]],"image":"..."}

/// Binary mask as PGM: 0 = background, 255 = foreground; reads threshold at 128.
void write_binary_mask(const std::filesystem::path& path, const BinaryMask& mask);
BinaryMask read_binary_mask(const std::filesystem::path& path);

/// 1-channel images write as PGM, 3-channel as PPM; byte values round-trip
/// exactly (used for appearance and for the semantic class-id field).
void write_image(const std::filesystem::path& path, const Image& img);
Image read_image(const std::filesystem::path& path);

void write_prob_mask(const std::filesystem::path& path, const ProbMask& mask);
ProbMask read_prob_mask(const std::filesystem::path& path);

/// Square matrix in the EXTM container; reading rejects negative entries.
void write_matrix(const std::filesystem::path& path, const Mat& m);
Mat read_matrix(const std::filesystem::path& path);

/// Node labels as a patch_side x patch_side PGM: 0 unlabeled, 128 background,
/// 255 foreground. The file stores labels only; thresholds live in run.json.
void write_labels(const std::filesystem::path& path, const PseudoPointLabels& labels,
                  int patch_side);
PseudoPointLabels read_labels(const std::filesystem::path& path);

struct AnnotationRecord {
    int object_id = 0;
    int class_id = 0;
    ExtremePoints extreme;
    std::string image_ref;

    bool operator==(const AnnotationRecord&) const = default;
};

void write_annotations(const std::filesystem::path& path,
                       const std::vector<AnnotationRecord>& records);
std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path);

/// Scene directory layout: image.ppm, semantic.pgm, gt_<k>.pgm,
/// annotations.jsonl, scene.json (seed and class metadata).
void save_scene(const std::filesystem::path& dir, const Scene& scene);
Scene load_scene(const std::filesystem::path& dir);

} // namespace pointprop
