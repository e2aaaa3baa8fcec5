#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "model/ddnet_model.hpp"

namespace ddnet {

struct BenchConfig {
    std::size_t filters = 16;
    std::size_t batch = 64;
    std::size_t iterations = 10;  // batches per measured run
    std::size_t runs = 5;         // measured runs
    std::size_t warmup = 1;       // unmeasured batches before the first run
    std::size_t threads = 1;
    std::uint64_t seed = 0;
    // Synthetic input shape, SHREC-like by default.
    std::size_t num_joints = 22;
    std::size_t coord_dim = 3;
    std::size_t num_classes = 14;
    std::size_t seq_len = 32;
    std::size_t min_frames = 40;
    std::size_t max_frames = 120;

    void validate() const;
};

struct BenchReport {
    std::size_t batch = 0;
    std::size_t sequences = 0;        // per run: batch x iterations
    std::size_t runs = 0;
    std::size_t threads = 0;
    double wall_seconds = 0.0;        // mean wall time of one run
    double throughput = 0.0;          // sequences / wall_seconds
    double throughput_mean = 0.0;     // mean of per-run throughputs
    double throughput_stddev = 0.0;
    double feature_seconds = 0.0;     // mean per run
    double network_seconds = 0.0;     // mean per run
    std::vector<double> run_throughput;
    std::string config_summary;
};

// Classifies synthetic raw sequences end to end (feature extraction plus
// network). `weights` may be null, in which case a seeded random model with
// the benchmark's shape is used; otherwise inputs follow the model's layout.
BenchReport run_benchmark(const BenchConfig& config, const DDNetModel<float>* weights = nullptr);

std::string to_json(const BenchReport& report);

}  // namespace ddnet
