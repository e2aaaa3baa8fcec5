#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "io/dataset.hpp"

namespace ddnet {

// Binary interchange container for labeled skeleton sequences; layout is
// documented in docs/canonical_format.md.
inline constexpr char kCanonicalMagic[4] = {'D', 'D', 'N', 'C'};
inline constexpr std::uint32_t kCanonicalVersion = 1;

std::vector<std::uint8_t> encode_canonical(const CanonicalDataset& dataset);
CanonicalDataset decode_canonical(std::span<const std::uint8_t> bytes);

void save_canonical(const CanonicalDataset& dataset, const std::string& path);
CanonicalDataset load_canonical(const std::string& path);

}  // namespace ddnet
