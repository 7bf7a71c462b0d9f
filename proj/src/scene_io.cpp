// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
// Binary scene format, little-endian:
//
//   "GSC1" u32 version=1 u32 N u32 F u32 K u32 L f32 d0 f32[6] bbox(min, max)
//   N x { f32[3] position, f32[F] feature, f32[3K] offsets, f32[3] scale, u8 lod }
//   u32 in_dim u32 hidden_dim u32 out_dim
//   f32 w1[hidden*in] f32 b1[hidden] f32 w2[out*hidden] f32 b2[out]
//
#include "gscache/errors.hpp"
#include "gscache/scene.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace gscache {

static_assert(std::endian::native == std::endian::little,
              "scene IO assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'G', 'S', 'C', '1'};
constexpr std::uint32_t kVersion = 1;

class Writer {
  public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void f32(float v) { raw(&v, 4); }
    void f32s(std::span<const float> v) { raw(v.data(), v.size() * 4); }
    void raw(const void *p, std::size_t n) {
        const auto *b = static_cast<const std::uint8_t *>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

  private:
    std::vector<std::uint8_t> buf_;
};

class Reader {
  public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t u8() {
        need(1, "u8");
        return bytes_[pos_++];
    }
    std::uint32_t u32() {
        std::uint32_t v;
        read(&v, 4, "u32");
        return v;
    }
    float f32() {
        float v;
        read(&v, 4, "f32");
        return v;
    }
    void f32s(float *out, std::size_t n, const char *what) { read(out, n * 4, what); }
    void read(void *out, std::size_t n, const char *what) {
        need(n, what);
        std::memcpy(out, bytes_.data() + pos_, n);
        pos_ += n;
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

  private:
    void need(std::size_t n, const char *what) const {
        if (remaining() < n)
            throw FormatError(std::string("scene file truncated while reading ") + what, pos_);
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t> encode_scene(const SceneModel &scene) {
    const auto &m = scene.meta();
    Writer w;
    w.raw(kMagic, 4);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(scene.size()));
    w.u32(m.feature_dim);
    w.u32(m.gaussians_per_anchor);
    w.u32(m.lod_levels);
    w.f32(m.lod_base_distance);
    for (float v : {m.bbox.min.x, m.bbox.min.y, m.bbox.min.z, m.bbox.max.x, m.bbox.max.y, m.bbox.max.z})
        w.f32(v);
    for (std::uint32_t i = 0; i < scene.size(); ++i) {
        const AnchorView a = scene.anchor(i);
        w.f32(a.position.x), w.f32(a.position.y), w.f32(a.position.z);
        w.f32s(a.feature);
        w.f32s(a.offsets);
        w.f32(a.scale.x), w.f32(a.scale.y), w.f32(a.scale.z);
        w.u8(a.lod_level);
    }
    const auto &dw = scene.weights();
    w.u32(static_cast<std::uint32_t>(dw.in_dim));
    w.u32(static_cast<std::uint32_t>(dw.hidden_dim));
    w.u32(static_cast<std::uint32_t>(dw.out_dim));
    w.f32s(dw.w1);
    w.f32s(dw.b1);
    w.f32s(dw.w2);
    w.f32s(dw.b2);
    return w.take();
}

SceneModel decode_scene(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    char magic[4];
    r.read(magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("bad magic, expected GSC1", 0);
    const std::size_t version_at = r.pos();
    if (r.u32() != kVersion)
        throw FormatError("unsupported scene version", version_at);

    const std::uint32_t n = r.u32();
    SceneMeta meta;
    meta.feature_dim = r.u32();
    meta.gaussians_per_anchor = r.u32();
    const std::size_t lod_at = r.pos();
    meta.lod_levels = r.u32();
    meta.lod_base_distance = r.f32();
    meta.bbox.min = {r.f32(), r.f32(), r.f32()};
    meta.bbox.max = {r.f32(), r.f32(), r.f32()};
    if (meta.lod_levels < 1 || meta.lod_levels > 256)
        throw FormatError("lod level count out of range", lod_at);

    const std::size_t f = meta.feature_dim;
    const std::size_t k3 = 3 * std::size_t(meta.gaussians_per_anchor);
    // Reject absurd headers before allocating.
    const std::size_t per_anchor = 4 * (3 + f + k3 + 3) + 1;
    if (n > 0 && per_anchor > 0 && r.remaining() / per_anchor < n)
        throw FormatError("scene file truncated: header promises " + std::to_string(n) +
                              " anchors",
                          r.pos());

    std::vector<Vec3f> positions(n);
    std::vector<float> features(n * f);
    std::vector<float> offsets(n * k3);
    std::vector<Vec3f> scales(n);
    std::vector<std::uint8_t> lods(n);
    for (std::size_t i = 0; i < n; ++i) {
        positions[i] = {r.f32(), r.f32(), r.f32()};
        r.f32s(features.data() + i * f, f, "feature");
        r.f32s(offsets.data() + i * k3, k3, "offsets");
        scales[i] = {r.f32(), r.f32(), r.f32()};
        const std::size_t at = r.pos();
        lods[i] = r.u8();
        if (lods[i] >= meta.lod_levels)
            throw FormatError("anchor lod level out of range", at);
    }

    const std::size_t dims_at = r.pos();
    DecoderWeights w;
    w.in_dim = static_cast<int>(r.u32());
    w.hidden_dim = static_cast<int>(r.u32());
    w.out_dim = static_cast<int>(r.u32());
    if (w.in_dim != static_cast<int>(f + 3) ||
        w.out_dim != static_cast<int>(meta.gaussians_per_anchor) * kHeadWidth ||
        w.hidden_dim <= 0 || w.hidden_dim > (1 << 16))
        throw FormatError("decoder dimensions do not match scene header", dims_at);
    w.w1.resize(std::size_t(w.hidden_dim) * w.in_dim);
    w.b1.resize(std::size_t(w.hidden_dim));
    w.w2.resize(std::size_t(w.out_dim) * w.hidden_dim);
    w.b2.resize(std::size_t(w.out_dim));
    r.f32s(w.w1.data(), w.w1.size(), "w1");
    r.f32s(w.b1.data(), w.b1.size(), "b1");
    r.f32s(w.w2.data(), w.w2.size(), "w2");
    r.f32s(w.b2.data(), w.b2.size(), "b2");
    if (r.remaining() != 0)
        throw FormatError("trailing bytes after decoder weights", r.pos());

    try {
        return SceneModel(meta, std::move(positions), std::move(features), std::move(offsets),
                          std::move(scales), std::move(lods), std::move(w));
    } catch (const InvalidArgument &e) {
        throw FormatError(e.what(), 0);
    }
}

void save_scene(const SceneModel &scene, const std::filesystem::path &path) {
    const auto bytes = encode_scene(scene);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("write failed for " + path.string());
}

SceneModel load_scene(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_scene(bytes);
}

} // namespace gscache
