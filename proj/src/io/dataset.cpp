#include "io/dataset.hpp"

#include <charconv>

#include "core/error.hpp"

namespace ddnet {

void CanonicalDataset::validate() const {
    require(!samples.empty(), ErrorCode::InvalidInput, "dataset has no samples");
    require(!label_names.empty(), ErrorCode::InvalidInput, "dataset has no labels");
    require(num_joints >= 2, ErrorCode::InvalidInput, "dataset needs at least 2 joints");
    require(coord_dim == 2 || coord_dim == 3, ErrorCode::InvalidInput, "dataset coord_dim must be 2 or 3");
    for (const auto& s : samples) {
        require(s.sequence.num_joints() == num_joints && s.sequence.coord_dim() == coord_dim,
                ErrorCode::InvalidInput, "sample '" + s.id + "' does not match the dataset joint layout");
        require(s.label >= 0 && static_cast<std::size_t>(s.label) < label_names.size(), ErrorCode::InvalidInput,
                "sample '" + s.id + "' has unknown label " + std::to_string(s.label));
    }
}

std::size_t CanonicalDataset::find(const std::string& selector) const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].id == selector) return i;
    }
    std::size_t index = 0;
    const auto* end = selector.data() + selector.size();
    auto [ptr, ec] = std::from_chars(selector.data(), end, index);
    if (ec == std::errc() && ptr == end && index < samples.size()) return index;
    fail(ErrorCode::NotFound, "no sample matches '" + selector + "'");
}

}  // namespace ddnet
