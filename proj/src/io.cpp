#include "pointprop/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian; big-endian hosts are unsupported");

namespace pointprop {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for reading: " + path.string());
    }
    return in;
}

// Skips PGM/PPM whitespace and '#' comments, then reads one unsigned value.
int read_pnm_int(std::istream& in, const fs::path& path) {
    int c = in.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#') {
            while (c != EOF && c != '\n') {
                c = in.get();
            }
        }
        c = in.get();
    }
    if (c == EOF || !std::isdigit(c)) {
        throw TruncatedFile("malformed PNM header in " + path.string());
    }
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        c = in.get();
    }
    return value;
}

Image read_pnm(const fs::path& path) {
    std::ifstream in = open_in(path);
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || (m1 != '5' && m1 != '6')) {
        throw BadMagic("not a P5/P6 PNM file: " + path.string());
    }
    const int channels = m1 == '5' ? 1 : 3;
    const int width = read_pnm_int(in, path);
    const int height = read_pnm_int(in, path);
    const int maxval = read_pnm_int(in, path);
    if (width <= 0 || height <= 0) {
        throw BadDimensions("nonpositive PNM dimensions in " + path.string());
    }
    if (maxval != 255) {
        throw BadDimensions("PNM maxval must be 255 in " + path.string());
    }
    Image img(width, height, channels);
    in.read(reinterpret_cast<char*>(img.values.data()),
            static_cast<std::streamsize>(img.values.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.values.size())) {
        throw TruncatedFile("PNM payload short in " + path.string());
    }
    return img;
}

void write_pnm(const fs::path& path, const Image& img) {
    std::ofstream out = open_out(path);
    out << (img.channels == 1 ? "P5" : "P6") << "\n"
        << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.values.data()),
              static_cast<std::streamsize>(img.values.size()));
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::istream& in, const fs::path& path) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    if (in.gcount() != 4) {
        throw TruncatedFile("header short in " + path.string());
    }
    return v;
}

void write_f32_payload(std::ostream& out, const double* values, std::size_t count) {
    std::vector<float> buf(count);
    for (std::size_t i = 0; i < count; ++i) {
        buf[i] = static_cast<float>(values[i]);
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(count * sizeof(float)));
}

std::vector<float> read_f32_payload(std::istream& in, std::size_t count, const fs::path& path) {
    std::vector<float> buf(count);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(count * sizeof(float))) {
        throw TruncatedFile("payload short in " + path.string());
    }
    return buf;
}

void check_magic(std::istream& in, const char* expected, const fs::path& path) {
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, expected, 4) != 0) {
        throw BadMagic("expected " + std::string(expected, 4) + " magic in " + path.string());
    }
}

} // namespace

void write_binary_mask(const fs::path& path, const BinaryMask& mask) {
    Image img(mask.width, mask.height, 1);
    for (std::size_t i = 0; i < mask.values.size(); ++i) {
        img.values[i] = mask.values[i] ? 255 : 0;
    }
    write_pnm(path, img);
}

BinaryMask read_binary_mask(const fs::path& path) {
    const Image img = read_pnm(path);
    if (img.channels != 1) {
        throw BadDimensions("binary mask must be single-channel: " + path.string());
    }
    BinaryMask mask(img.width, img.height);
    for (std::size_t i = 0; i < img.values.size(); ++i) {
        mask.values[i] = img.values[i] >= 128 ? 1 : 0;
    }
    return mask;
}

void write_image(const fs::path& path, const Image& img) {
    write_pnm(path, img);
}

Image read_image(const fs::path& path) {
    return read_pnm(path);
}

void write_prob_mask(const fs::path& path, const ProbMask& mask) {
    std::ofstream out = open_out(path);
    out.write("EXPM", 4);
    write_u32(out, static_cast<std::uint32_t>(mask.width));
    write_u32(out, static_cast<std::uint32_t>(mask.height));
    write_u32(out, 0);
    write_f32_payload(out, mask.values.data(), mask.values.size());
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

ProbMask read_prob_mask(const fs::path& path) {
    std::ifstream in = open_in(path);
    check_magic(in, "EXPM", path);
    const std::uint32_t width = read_u32(in, path);
    const std::uint32_t height = read_u32(in, path);
    read_u32(in, path); // reserved
    if (width == 0 || height == 0 || width > (1u << 20) || height > (1u << 20)) {
        throw BadDimensions("implausible prob-mask dimensions in " + path.string());
    }
    const std::size_t count = static_cast<std::size_t>(width) * height;
    const std::vector<float> buf = read_f32_payload(in, count, path);
    ProbMask mask(static_cast<int>(width), static_cast<int>(height));
    for (std::size_t i = 0; i < count; ++i) {
        mask.values[i] = static_cast<double>(buf[i]);
    }
    return mask;
}

void write_matrix(const fs::path& path, const Mat& m) {
    if (m.rows() != m.cols()) {
        throw BadDimensions("write_matrix: matrix must be square");
    }
    std::ofstream out = open_out(path);
    out.write("EXTM", 4);
    write_u32(out, static_cast<std::uint32_t>(m.rows()));
    write_u32(out, 0);
    write_u32(out, 0);
    write_f32_payload(out, m.data(), static_cast<std::size_t>(m.size()));
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

Mat read_matrix(const fs::path& path) {
    std::ifstream in = open_in(path);
    check_magic(in, "EXTM", path);
    const std::uint32_t n = read_u32(in, path);
    read_u32(in, path);
    read_u32(in, path);
    if (n == 0 || n > 65536) {
        throw BadDimensions("implausible matrix size in " + path.string());
    }
    const std::size_t count = static_cast<std::size_t>(n) * n;
    const std::vector<float> buf = read_f32_payload(in, count, path);
    Mat m(n, n);
    for (std::size_t i = 0; i < count; ++i) {
        if (buf[i] < 0.0f) {
            throw NegativeEntry("negative entry at index " + std::to_string(i) + " in " +
                                path.string());
        }
        m.data()[i] = static_cast<double>(buf[i]);
    }
    return m;
}

void write_labels(const fs::path& path, const PseudoPointLabels& labels, int patch_side) {
    if (static_cast<int>(labels.labels.size()) != patch_side * patch_side) {
        throw SizeMismatch("write_labels: label count does not match the patch grid");
    }
    Image img(patch_side, patch_side, 1);
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
        switch (labels.labels[i]) {
            case NodeLabel::Foreground: img.values[i] = 255; break;
            case NodeLabel::Background: img.values[i] = 128; break;
            case NodeLabel::Unlabeled: img.values[i] = 0; break;
        }
    }
    write_pnm(path, img);
}

PseudoPointLabels read_labels(const fs::path& path) {
    const Image img = read_pnm(path);
    if (img.channels != 1 || img.width != img.height) {
        throw BadDimensions("label grid must be a square PGM: " + path.string());
    }
    PseudoPointLabels labels;
    labels.labels.resize(img.values.size());
    for (std::size_t i = 0; i < img.values.size(); ++i) {
        switch (img.values[i]) {
            case 255: labels.labels[i] = NodeLabel::Foreground; break;
            case 128: labels.labels[i] = NodeLabel::Background; break;
            case 0: labels.labels[i] = NodeLabel::Unlabeled; break;
            default:
                throw ParseError("unexpected label byte " + std::to_string(img.values[i]) +
                                 " in " + path.string());
        }
    }
    return labels;
}

void write_annotations(const fs::path& path, const std::vector<AnnotationRecord>& records) {
    std::ofstream out = open_out(path);
    for (const AnnotationRecord& r : records) {
        json j;
        j["object_id"] = r.object_id;
        j["class_id"] = r.class_id;
        j["extreme"] = {{r.extreme.top.x, r.extreme.top.y},
                        {r.extreme.left.x, r.extreme.left.y},
                        {r.extreme.bottom.x, r.extreme.bottom.y},
                        {r.extreme.right.x, r.extreme.right.y}};
        j["image"] = r.image_ref;
        out << j.dump() << "\n";
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

std::vector<AnnotationRecord> read_annotations(const fs::path& path) {
    std::ifstream in = open_in(path);
    std::vector<AnnotationRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("annotations line " + std::to_string(line_no) + ": " + e.what());
        }
        try {
            AnnotationRecord r;
            r.object_id = j.at("object_id").get<int>();
            r.class_id = j.at("class_id").get<int>();
            const auto& ex = j.at("extreme");
            if (!ex.is_array() || ex.size() != 4) {
                throw ParseError("annotations line " + std::to_string(line_no) +
                                 ": extreme must hold 4 points");
            }
            auto pt = [&](int i) {
                return Pixel{ex.at(i).at(0).get<int>(), ex.at(i).at(1).get<int>()};
            };
            r.extreme = ExtremePoints{pt(0), pt(1), pt(2), pt(3)};
            if (!r.extreme.ordered()) {
                throw ParseError("annotations line " + std::to_string(line_no) +
                                 ": extreme points violate ordering");
            }
            r.image_ref = j.value("image", std::string{});
            records.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw ParseError("annotations line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

void save_scene(const fs::path& dir, const Scene& scene) {
    fs::create_directories(dir);
    write_image(dir / "image.ppm", scene.image);
    write_image(dir / "semantic.pgm", scene.semantic);
    std::vector<AnnotationRecord> records;
    for (int i = 0; i < scene.n_objects(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "gt_%03d.pgm", i);
        write_binary_mask(dir / name, scene.gt_masks[i]);
        records.push_back(AnnotationRecord{i, scene.class_ids[i], scene.annotations[i],
                                           "image.ppm"});
    }
    write_annotations(dir / "annotations.jsonl", records);
    json meta;
    meta["seed"] = scene.seed;
    meta["noise_sigma"] = scene.noise_sigma;
    meta["class_ids"] = scene.class_ids;
    meta["occluder_class"] = scene.occluder_class;
    std::ofstream out = open_out(dir / "scene.json");
    out << meta.dump(2) << "\n";
}

Scene load_scene(const fs::path& dir) {
    Scene scene;
    scene.image = read_image(dir / "image.ppm");
    scene.semantic = read_image(dir / "semantic.pgm");
    std::ifstream meta_in = open_in(dir / "scene.json");
    json meta;
    try {
        meta = json::parse(meta_in);
    } catch (const json::exception& e) {
        throw ParseError("scene.json in " + dir.string() + ": " + e.what());
    }
    scene.seed = meta.at("seed").get<std::uint64_t>();
    scene.noise_sigma = meta.at("noise_sigma").get<double>();
    scene.class_ids = meta.at("class_ids").get<std::vector<int>>();
    scene.occluder_class = meta.at("occluder_class").get<int>();
    const auto records = read_annotations(dir / "annotations.jsonl");
    for (std::size_t i = 0; i < scene.class_ids.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "gt_%03d.pgm", static_cast<int>(i));
        scene.gt_masks.push_back(read_binary_mask(dir / name));
    }
    for (const AnnotationRecord& r : records) {
        scene.annotations.push_back(r.extreme);
    }
    if (scene.annotations.size() != scene.gt_masks.size()) {
        throw ParseError("scene " + dir.string() + ": annotation count != mask count");
    }
    return scene;
}

} // namespace pointprop
