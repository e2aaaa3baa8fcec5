#pragma once

#include <string>
#include <utility>

#include "io/dataset.hpp"

namespace ddnet {

inline constexpr std::size_t kShrecJoints = 22;

struct ShrecSplits {
    CanonicalDataset train;
    CanonicalDataset test;
};

// Reads the SHREC'17 hand gesture distribution rooted at `root`:
//
//   root/train_gestures.txt, root/test_gestures.txt
//     one row per sample: gesture finger subject essai label_14 label_28 size
//   root/gesture_G/finger_F/subject_S/essai_E/skeletons_world.txt
//     one frame per line, 22 joints x (x y z) world coordinates
//
// label_mode selects the 14- or 28-class column. Labels are re-indexed to
// dense 0-based ids shared by both splits; samples keep index-file order.
ShrecSplits parse_shrec(const std::string& root, int label_mode);

// One skeletons_world.txt file.
SkeletonSequence parse_shrec_skeleton_file(const std::string& path);

}  // namespace ddnet
