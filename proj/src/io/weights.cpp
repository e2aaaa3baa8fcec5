#include "io/weights.hpp"

#include <zlib.h>

#include "io/binary.hpp"

namespace ddnet {

namespace {

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
    return static_cast<std::uint32_t>(crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

void write_entry(io::ByteWriter& w, const std::string& name, const ad::Shape& shape, std::span<const float> values) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) w.u32(static_cast<std::uint32_t>(d));
    w.floats(values);
}

void read_entry(io::ByteReader& r, const std::string& expected_name, const ad::Shape& expected_shape,
                std::span<float> dst) {
    const std::string name = r.str(4096);
    require(name == expected_name, ErrorCode::Version,
            "weight file: expected entry '" + expected_name + "', found '" + name + "'");
    const std::uint32_t rank = r.u32();
    ad::Shape shape(rank);
    for (auto& d : shape) d = r.u32();
    require(shape == expected_shape, ErrorCode::Version,
            "weight file: entry '" + name + "' has shape " + ad::shape_string(shape) + ", model expects " +
                ad::shape_string(expected_shape));
    auto values = r.floats(dst.size());
    std::copy(values.begin(), values.end(), dst.begin());
}

}  // namespace

std::vector<std::uint8_t> encode_weights(const DDNetModel<float>& model) {
    const ModelConfig& c = model.config();
    io::ByteWriter w;
    for (char ch : kWeightMagic) w.u8(static_cast<std::uint8_t>(ch));
    w.u32(kWeightVersion);
    w.u32(static_cast<std::uint32_t>(c.filters));
    w.u32(static_cast<std::uint32_t>(c.num_joints));
    w.u32(static_cast<std::uint32_t>(c.coord_dim));
    w.u32(static_cast<std::uint32_t>(c.seq_len));
    w.u32(static_cast<std::uint32_t>(c.num_classes));
    w.u32(c.streams);
    w.f32(c.leaky_slope);
    w.f32(c.dropout_rate);
    w.f32(c.bn_epsilon);
    w.f32(c.bn_momentum);

    const auto& params = model.parameters();
    const auto& norms = model.norm_stats();
    w.u32(static_cast<std::uint32_t>(params.size() + 2 * norms.size()));
    for (const auto& p : params) write_entry(w, p.name, p.tensor.shape(), p.tensor.data());
    for (const auto& n : norms) {
        write_entry(w, n.name + ".running_mean", {n.running_mean.size()}, n.running_mean);
        write_entry(w, n.name + ".running_var", {n.running_var.size()}, n.running_var);
    }
    auto bytes = w.bytes();
    const std::uint32_t crc = crc_of(bytes);
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));
    return bytes;
}

DDNetModel<float> decode_weights(std::span<const std::uint8_t> bytes) {
    require(bytes.size() >= 12, ErrorCode::Corrupt, "weight file: too short");
    io::ByteReader r(bytes, ErrorCode::Corrupt, "weight file");
    auto magic = r.take(4);
    require(std::equal(magic.begin(), magic.end(), kWeightMagic), ErrorCode::Corrupt,
            "weight file: bad magic (not a DDNW file)");
    auto payload = bytes.first(bytes.size() - 4);
    io::ByteReader tail(bytes.last(4), ErrorCode::Corrupt, "weight file");
    require(tail.u32() == crc_of(payload), ErrorCode::Corrupt, "weight file: checksum mismatch");
    const std::uint32_t version = r.u32();
    require(version == kWeightVersion, ErrorCode::Version,
            "weight file: unsupported version " + std::to_string(version));

    ModelConfig c;
    c.filters = r.u32();
    c.num_joints = r.u32();
    c.coord_dim = r.u32();
    c.seq_len = r.u32();
    c.num_classes = r.u32();
    c.streams = r.u32();
    c.leaky_slope = r.f32();
    c.dropout_rate = r.f32();
    c.bn_epsilon = r.f32();
    c.bn_momentum = r.f32();
    try {
        c.validate();
    } catch (const Error& e) {
        fail(ErrorCode::Version, std::string("weight file: embedded config is not usable: ") + e.what());
    }

    DDNetModel<float> model(c);
    const std::uint32_t entries = r.u32();
    require(entries == model.parameters().size() + 2 * model.norm_stats().size(), ErrorCode::Version,
            "weight file: entry count does not match the embedded config");
    for (auto& p : model.parameters()) read_entry(r, p.name, p.tensor.shape(), p.tensor.mutable_data());
    for (auto& n : model.norm_stats()) {
        read_entry(r, n.name + ".running_mean", {n.running_mean.size()}, n.running_mean);
        read_entry(r, n.name + ".running_var", {n.running_var.size()}, n.running_var);
    }
    require(r.remaining() == 4, ErrorCode::Corrupt, "weight file: trailing bytes after last entry");
    return model;
}

void save_weights(const DDNetModel<float>& model, const std::string& path) {
    io::write_file(path, encode_weights(model));
}

DDNetModel<float> load_weights(const std::string& path) {
    return decode_weights(io::read_file(path));
}

}  // namespace ddnet
