#include "io/canonical.hpp"

#include <zlib.h>

#include "io/binary.hpp"

namespace ddnet {

namespace {

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
    return static_cast<std::uint32_t>(crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

}  // namespace

std::vector<std::uint8_t> encode_canonical(const CanonicalDataset& dataset) {
    dataset.validate();
    io::ByteWriter w;
    for (char c : kCanonicalMagic) w.u8(static_cast<std::uint8_t>(c));
    w.u32(kCanonicalVersion);
    w.u32(static_cast<std::uint32_t>(dataset.num_joints));
    w.u32(static_cast<std::uint32_t>(dataset.coord_dim));
    w.u32(static_cast<std::uint32_t>(dataset.label_names.size()));
    for (const auto& name : dataset.label_names) w.str(name);
    w.u32(static_cast<std::uint32_t>(dataset.samples.size()));
    for (const auto& s : dataset.samples) {
        w.str(s.id);
        w.u32(static_cast<std::uint32_t>(s.label));
        w.u32(static_cast<std::uint32_t>(s.sequence.num_frames()));
        w.floats(s.sequence.coords());
    }
    auto bytes = w.bytes();
    const std::uint32_t crc = crc_of(bytes);
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));
    return bytes;
}

CanonicalDataset decode_canonical(std::span<const std::uint8_t> bytes) {
    require(bytes.size() >= 12, ErrorCode::Corrupt, "canonical dataset: file too short");
    io::ByteReader r(bytes, ErrorCode::Corrupt, "canonical dataset");
    auto magic = r.take(4);
    require(std::equal(magic.begin(), magic.end(), kCanonicalMagic), ErrorCode::Corrupt,
            "canonical dataset: bad magic (not a DDNC file)");
    const std::uint32_t version = r.u32();
    require(version == kCanonicalVersion, ErrorCode::Version,
            "canonical dataset: unsupported version " + std::to_string(version));

    auto payload = bytes.first(bytes.size() - 4);
    io::ByteReader tail(bytes.last(4), ErrorCode::Corrupt, "canonical dataset");
    require(tail.u32() == crc_of(payload), ErrorCode::Corrupt, "canonical dataset: checksum mismatch");

    CanonicalDataset ds;
    ds.num_joints = r.u32();
    ds.coord_dim = r.u32();
    require(ds.num_joints >= 2 && ds.num_joints <= 4096, ErrorCode::InvalidInput,
            "canonical dataset: implausible joint count " + std::to_string(ds.num_joints));
    require(ds.coord_dim == 2 || ds.coord_dim == 3, ErrorCode::InvalidInput,
            "canonical dataset: coord_dim must be 2 or 3");
    const std::uint32_t labels = r.u32();
    require(labels <= r.remaining(), ErrorCode::Corrupt, "canonical dataset: label count exceeds file size");
    for (std::uint32_t i = 0; i < labels; ++i) ds.label_names.push_back(r.str());
    const std::uint32_t count = r.u32();
    require(count <= r.remaining(), ErrorCode::Corrupt, "canonical dataset: sample count exceeds file size");
    const std::size_t frame_size = ds.num_joints * ds.coord_dim;
    ds.samples.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        LabeledSequence s;
        s.id = r.str();
        s.label = static_cast<int>(r.u32());
        const std::uint32_t frames = r.u32();
        require(frames >= 2, ErrorCode::InvalidInput, "canonical dataset: sample '" + s.id + "' has fewer than 2 frames");
        require(frames <= r.remaining() / (4 * frame_size), ErrorCode::Corrupt,
                "canonical dataset: sample '" + s.id + "' is truncated");
        s.sequence = SkeletonSequence(ds.num_joints, ds.coord_dim, r.floats(frames * frame_size));
        ds.samples.push_back(std::move(s));
    }
    require(r.remaining() == 4, ErrorCode::Corrupt, "canonical dataset: trailing bytes after last sample");
    ds.validate();
    return ds;
}

void save_canonical(const CanonicalDataset& dataset, const std::string& path) {
    io::write_file(path, encode_canonical(dataset));
}

CanonicalDataset load_canonical(const std::string& path) {
    return decode_canonical(io::read_file(path));
}

}  // namespace ddnet
