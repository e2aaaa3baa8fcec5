#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "model/ddnet_model.hpp"

namespace ddnet {

// Weight file layout (all integers u32 little-endian, floats IEEE-754 f32 LE):
//   "DDNW" | version | config block | entry count |
//   entries: name length, name bytes, rank, dims..., values |
//   CRC-32 of every preceding byte.
// Entries hold every parameter in model order, then every normalization
// layer's running mean and variance ("<layer>.running_mean" / ".running_var").
inline constexpr char kWeightMagic[4] = {'D', 'D', 'N', 'W'};
inline constexpr std::uint32_t kWeightVersion = 1;

std::vector<std::uint8_t> encode_weights(const DDNetModel<float>& model);
DDNetModel<float> decode_weights(std::span<const std::uint8_t> bytes);

void save_weights(const DDNetModel<float>& model, const std::string& path);
DDNetModel<float> load_weights(const std::string& path);

}  // namespace ddnet
