#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "skel/skeleton.hpp"

namespace ddnet {

struct LabeledSequence {
    SkeletonSequence sequence;
    int label = 0;
    std::string id;
};

struct CanonicalDataset {
    std::vector<LabeledSequence> samples;
    std::vector<std::string> label_names;  // index = class id
    std::size_t num_joints = 0;
    std::size_t coord_dim = 0;

    std::size_t size() const { return samples.size(); }
    std::size_t num_classes() const { return label_names.size(); }

    // Throws InvalidInput if any sample disagrees with the dataset layout or
    // carries a label outside [0, num_classes).
    void validate() const;

    // Index of the sample with this id, or of the sample at this decimal
    // index when no id matches. Throws NotFound.
    std::size_t find(const std::string& selector) const;
};

}  // namespace ddnet
