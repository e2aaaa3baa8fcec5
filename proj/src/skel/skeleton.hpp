#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "core/matrix.hpp"

namespace ddnet {

// One frame: N joints, each a 2D or 3D world coordinate. Coordinates are
// stored joint-major, i.e. x0 y0 z0 x1 y1 z1 ...
class JointFrame {
public:
    JointFrame(std::size_t num_joints, std::size_t coord_dim, std::vector<float> coords);

    // Throws InvalidInput when joints disagree on dimensionality.
    static JointFrame from_joints(const std::vector<std::vector<float>>& joints);

    std::size_t num_joints() const { return num_joints_; }
    std::size_t coord_dim() const { return coord_dim_; }
    std::span<const float> coords() const { return coords_; }

private:
    std::size_t num_joints_;
    std::size_t coord_dim_;
    std::vector<float> coords_;
};

class SkeletonSequence {
public:
    SkeletonSequence() = default;
    // `coords` holds num_frames * num_joints * coord_dim values, frame-major.
    SkeletonSequence(std::size_t num_joints, std::size_t coord_dim, std::vector<float> coords);

    static SkeletonSequence from_frames(const std::vector<JointFrame>& frames);

    std::size_t num_frames() const { return frame_size() == 0 ? 0 : coords_.size() / frame_size(); }
    std::size_t num_joints() const { return num_joints_; }
    std::size_t coord_dim() const { return coord_dim_; }
    std::size_t frame_size() const { return num_joints_ * coord_dim_; }

    std::span<const float> frame(std::size_t k) const {
        return {coords_.data() + k * frame_size(), frame_size()};
    }
    std::span<const float> coords() const { return coords_; }

    // View as a (frames x N*d) matrix.
    Matrix as_matrix() const;
    static SkeletonSequence from_matrix(const Matrix& m, std::size_t num_joints, std::size_t coord_dim);

    bool operator==(const SkeletonSequence&) const = default;

private:
    std::size_t num_joints_ = 0;
    std::size_t coord_dim_ = 0;
    std::vector<float> coords_;
};

struct FeatureBundle {
    Matrix jcd;   // K x N(N-1)/2
    Matrix slow;  // K x N*d
    Matrix fast;  // K/2 x N*d
};

constexpr std::size_t jcd_width(std::size_t num_joints) { return num_joints * (num_joints - 1) / 2; }

// Pairwise joint distances of one frame, strictly-lower-triangular,
// row-major: (1,0), (2,0), (2,1), (3,0), ...
std::vector<float> compute_jcd(std::span<const float> coords, std::size_t num_joints, std::size_t coord_dim);
std::vector<float> compute_jcd(const JointFrame& frame);

// stride 1: S[k+1]-S[k] for every k (K-1 rows).
// stride 2: S[k+2]-S[k] for k = 0, 2, 4, ... (K/2-1 rows).
Matrix compute_motion(const SkeletonSequence& seq, int stride);

// Linear resampling along rows; row t reads the input at t*(T-1)/(target-1).
Matrix resample_linear(const Matrix& series, std::size_t target_len);

SkeletonSequence resample_sequence(const SkeletonSequence& seq, std::size_t target_len);

// Keeps a uniformly random, order-preserving subset of ceil(ratio*L) frames.
SkeletonSequence augment_subsample(const SkeletonSequence& seq, double ratio, std::uint64_t rng_seed);

FeatureBundle build_feature_bundle(const SkeletonSequence& seq, std::size_t seq_len);

}  // namespace ddnet
