#include "io/binary.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>

namespace ddnet::io {

std::vector<std::uint8_t> read_file(const std::string& path) {
    require(!std::filesystem::is_directory(path), ErrorCode::Io, path + " is a directory, expected a file");
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::Io, "cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    require(!in.bad(), ErrorCode::Io, "error while reading " + path);
    return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::Io, "cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(out.good(), ErrorCode::Io, "error while writing " + path);
}

}  // namespace ddnet::io
