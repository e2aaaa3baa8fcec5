#include "skel/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "core/error.hpp"

namespace ddnet {

namespace {

void check_finite(std::span<const float> values) {
    for (float v : values) {
        require(std::isfinite(v), ErrorCode::InvalidInput, "non-finite joint coordinate");
    }
}

void check_layout(std::size_t num_joints, std::size_t coord_dim) {
    require(num_joints >= 2, ErrorCode::InvalidInput, "a skeleton needs at least 2 joints");
    require(coord_dim == 2 || coord_dim == 3, ErrorCode::InvalidInput,
            "coordinate dimension must be 2 or 3, got " + std::to_string(coord_dim));
}

}  // namespace

JointFrame::JointFrame(std::size_t num_joints, std::size_t coord_dim, std::vector<float> coords)
    : num_joints_(num_joints), coord_dim_(coord_dim), coords_(std::move(coords)) {
    check_layout(num_joints_, coord_dim_);
    require(coords_.size() == num_joints_ * coord_dim_, ErrorCode::InvalidInput,
            "frame holds " + std::to_string(coords_.size()) + " values, expected " +
                std::to_string(num_joints_ * coord_dim_));
    check_finite(coords_);
}

JointFrame JointFrame::from_joints(const std::vector<std::vector<float>>& joints) {
    require(!joints.empty(), ErrorCode::InvalidInput, "frame has no joints");
    const std::size_t dim = joints.front().size();
    std::vector<float> flat;
    flat.reserve(joints.size() * dim);
    for (std::size_t i = 0; i < joints.size(); ++i) {
        require(joints[i].size() == dim, ErrorCode::InvalidInput,
                "joint " + std::to_string(i) + " has " + std::to_string(joints[i].size()) +
                    " coordinates, joint 0 has " + std::to_string(dim));
        flat.insert(flat.end(), joints[i].begin(), joints[i].end());
    }
    return JointFrame(joints.size(), dim, std::move(flat));
}

SkeletonSequence::SkeletonSequence(std::size_t num_joints, std::size_t coord_dim, std::vector<float> coords)
    : num_joints_(num_joints), coord_dim_(coord_dim), coords_(std::move(coords)) {
    check_layout(num_joints_, coord_dim_);
    require(coords_.size() % frame_size() == 0, ErrorCode::InvalidInput,
            "coordinate count is not a whole number of frames");
    require(num_frames() >= 2, ErrorCode::InvalidInput, "a sequence needs at least 2 frames");
    check_finite(coords_);
}

SkeletonSequence SkeletonSequence::from_frames(const std::vector<JointFrame>& frames) {
    require(!frames.empty(), ErrorCode::InvalidInput, "sequence has no frames");
    const std::size_t n = frames.front().num_joints();
    const std::size_t d = frames.front().coord_dim();
    std::vector<float> flat;
    flat.reserve(frames.size() * n * d);
    for (std::size_t k = 0; k < frames.size(); ++k) {
        require(frames[k].num_joints() == n && frames[k].coord_dim() == d, ErrorCode::InvalidInput,
                "frame " + std::to_string(k) + " does not match the joint layout of frame 0");
        flat.insert(flat.end(), frames[k].coords().begin(), frames[k].coords().end());
    }
    return SkeletonSequence(n, d, std::move(flat));
}

Matrix SkeletonSequence::as_matrix() const {
    Matrix m(num_frames(), frame_size());
    m.data = coords_;
    return m;
}

SkeletonSequence SkeletonSequence::from_matrix(const Matrix& m, std::size_t num_joints, std::size_t coord_dim) {
    require(m.cols == num_joints * coord_dim, ErrorCode::Shape, "matrix width does not match joint layout");
    return SkeletonSequence(num_joints, coord_dim, m.data);
}

std::vector<float> compute_jcd(std::span<const float> coords, std::size_t num_joints, std::size_t coord_dim) {
    require(coords.size() == num_joints * coord_dim, ErrorCode::InvalidInput,
            "frame size does not match joint layout");
    std::vector<float> out;
    out.reserve(jcd_width(num_joints));
    for (std::size_t i = 1; i < num_joints; ++i) {
        const float* a = coords.data() + i * coord_dim;
        for (std::size_t j = 0; j < i; ++j) {
            const float* b = coords.data() + j * coord_dim;
            double sq = 0.0;
            for (std::size_t c = 0; c < coord_dim; ++c) {
                const double diff = static_cast<double>(a[c]) - static_cast<double>(b[c]);
                sq += diff * diff;
            }
            out.push_back(static_cast<float>(std::sqrt(sq)));
        }
    }
    return out;
}

std::vector<float> compute_jcd(const JointFrame& frame) {
    return compute_jcd(frame.coords(), frame.num_joints(), frame.coord_dim());
}

Matrix compute_motion(const SkeletonSequence& seq, int stride) {
    require(stride == 1 || stride == 2, ErrorCode::InvalidArgument,
            "motion stride must be 1 or 2, got " + std::to_string(stride));
    const std::size_t frames = seq.num_frames();
    const std::size_t width = seq.frame_size();
    std::size_t rows = 0;
    if (stride == 1) {
        rows = frames - 1;
    } else {
        require(frames >= 4 && frames % 2 == 0, ErrorCode::InvalidArgument,
                "fast motion needs an even frame count >= 4");
        rows = frames / 2 - 1;
    }
    Matrix out(rows, width);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t k = stride == 1 ? r : 2 * r;
        auto from = seq.frame(k);
        auto to = seq.frame(k + static_cast<std::size_t>(stride));
        auto dst = out.row(r);
        for (std::size_t c = 0; c < width; ++c) dst[c] = to[c] - from[c];
    }
    return out;
}

Matrix resample_linear(const Matrix& series, std::size_t target_len) {
    require(series.rows >= 1, ErrorCode::InvalidInput, "cannot resample an empty series");
    require(target_len >= 1, ErrorCode::InvalidArgument, "target length must be >= 1");
    Matrix out(target_len, series.cols);
    if (target_len == 1 || series.rows == 1) {
        for (std::size_t t = 0; t < target_len; ++t) std::copy_n(series.row(0).begin(), series.cols, out.row(t).begin());
        return out;
    }
    const double span = static_cast<double>(series.rows - 1);
    const double steps = static_cast<double>(target_len - 1);
    for (std::size_t t = 0; t < target_len; ++t) {
        const double pos = static_cast<double>(t) * span / steps;
        const auto lo = std::min(static_cast<std::size_t>(pos), series.rows - 1);
        const double w = pos - static_cast<double>(lo);
        auto dst = out.row(t);
        auto a = series.row(lo);
        if (w == 0.0 || lo + 1 >= series.rows) {
            std::copy(a.begin(), a.end(), dst.begin());
            continue;
        }
        auto b = series.row(lo + 1);
        for (std::size_t c = 0; c < series.cols; ++c) {
            const double av = a[c];
            dst[c] = static_cast<float>(av + w * (static_cast<double>(b[c]) - av));
        }
    }
    return out;
}

SkeletonSequence resample_sequence(const SkeletonSequence& seq, std::size_t target_len) {
    require(seq.num_frames() >= 2, ErrorCode::InvalidInput, "resampling needs at least 2 frames");
    if (target_len == seq.num_frames()) return seq;
    return SkeletonSequence::from_matrix(resample_linear(seq.as_matrix(), target_len), seq.num_joints(),
                                         seq.coord_dim());
}

SkeletonSequence augment_subsample(const SkeletonSequence& seq, double ratio, std::uint64_t rng_seed) {
    require(ratio > 0.0 && ratio <= 1.0, ErrorCode::InvalidArgument,
            "subsample ratio must lie in (0, 1], got " + std::to_string(ratio));
    const std::size_t frames = seq.num_frames();
    // The epsilon keeps products like 0.9 * 10 from rounding up to 10.
    const auto keep = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(frames) - 1e-9));
    require(keep >= 2, ErrorCode::InvalidArgument, "subsampling would keep fewer than 2 frames");
    if (keep >= frames) return seq;

    std::vector<std::size_t> all(frames);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::size_t> picked;
    picked.reserve(keep);
    std::mt19937_64 rng(rng_seed);
    std::sample(all.begin(), all.end(), std::back_inserter(picked), keep, rng);

    std::vector<float> coords;
    coords.reserve(keep * seq.frame_size());
    for (std::size_t k : picked) {
        auto f = seq.frame(k);
        coords.insert(coords.end(), f.begin(), f.end());
    }
    return SkeletonSequence(seq.num_joints(), seq.coord_dim(), std::move(coords));
}

namespace {

// Positions relative to the first frame, resampled to `target_len` frames in
// double precision. Interpolating absolute coordinates rounds differently
// once the whole sequence is shifted; offsets from frame 0 do not see the
// shift at all whenever the shifted coordinates are exact.
std::vector<double> resampled_offsets(const SkeletonSequence& seq, std::size_t target_len) {
    const std::size_t frames = seq.num_frames();
    const std::size_t width = seq.frame_size();
    const auto origin = seq.frame(0);
    auto offset = [&](std::size_t f, std::size_t c) {
        return static_cast<double>(seq.frame(f)[c]) - static_cast<double>(origin[c]);
    };
    std::vector<double> out(target_len * width);
    const double span = static_cast<double>(frames - 1);
    const double steps = static_cast<double>(target_len - 1);
    for (std::size_t t = 0; t < target_len; ++t) {
        const double pos = target_len == frames ? static_cast<double>(t) : static_cast<double>(t) * span / steps;
        const auto lo = std::min(static_cast<std::size_t>(pos), frames - 1);
        const double w = pos - static_cast<double>(lo);
        for (std::size_t c = 0; c < width; ++c) {
            const double a = offset(lo, c);
            out[t * width + c] = (w == 0.0 || lo + 1 >= frames) ? a : a + w * (offset(lo + 1, c) - a);
        }
    }
    return out;
}

// Same rows as compute_motion on the resampled sequence, rounded to float
// once, after the subtraction.
Matrix motion_from_offsets(const std::vector<double>& offsets, std::size_t width, std::size_t stride) {
    const std::size_t frames = offsets.size() / width;
    const std::size_t rows = stride == 1 ? frames - 1 : frames / 2 - 1;
    Matrix out(rows, width);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t k = stride == 1 ? r : 2 * r;
        for (std::size_t c = 0; c < width; ++c)
            out(r, c) = static_cast<float>(offsets[(k + stride) * width + c] - offsets[k * width + c]);
    }
    return out;
}

}  // namespace

FeatureBundle build_feature_bundle(const SkeletonSequence& seq, std::size_t seq_len) {
    require(seq_len >= 4 && seq_len % 2 == 0, ErrorCode::InvalidArgument,
            "feature length must be even and >= 4, got " + std::to_string(seq_len));
    const SkeletonSequence fixed = resample_sequence(seq, seq_len);

    FeatureBundle bundle;
    bundle.jcd = Matrix(seq_len, jcd_width(fixed.num_joints()));
    for (std::size_t k = 0; k < seq_len; ++k) {
        const auto row = compute_jcd(fixed.frame(k), fixed.num_joints(), fixed.coord_dim());
        std::copy(row.begin(), row.end(), bundle.jcd.row(k).begin());
    }
    const std::vector<double> offsets = resampled_offsets(seq, seq_len);
    bundle.slow = resample_linear(motion_from_offsets(offsets, seq.frame_size(), 1), seq_len);
    bundle.fast = resample_linear(motion_from_offsets(offsets, seq.frame_size(), 2), seq_len / 2);
    return bundle;
}

}  // namespace ddnet
