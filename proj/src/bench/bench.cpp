#include "bench/bench.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"

namespace ddnet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<SkeletonSequence> synthetic_sequences(const BenchConfig& c, std::size_t joints, std::size_t dim,
                                                  std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> length(c.min_frames, c.max_frames);
    std::normal_distribution<float> coord(0.0f, 0.1f);
    std::vector<SkeletonSequence> out;
    out.reserve(c.batch);
    for (std::size_t n = 0; n < c.batch; ++n) {
        std::vector<float> xs(length(rng) * joints * dim);
        for (auto& v : xs) v = coord(rng);
        out.emplace_back(joints, dim, std::move(xs));
    }
    return out;
}

// Splits [0, total) into `parts` contiguous chunks and runs fn on each in
// parallel, the first chunk on the calling thread.
template <typename Fn>
void parallel_chunks(std::size_t total, std::size_t parts, Fn&& fn) {
    parts = std::max<std::size_t>(1, std::min(parts, total));
    const std::size_t step = (total + parts - 1) / parts;
    std::vector<std::future<void>> pending;
    for (std::size_t p = 1; p < parts; ++p) {
        const std::size_t lo = p * step, hi = std::min(total, lo + step);
        if (lo < hi) pending.push_back(std::async(std::launch::async, [&fn, lo, hi] { fn(lo, hi); }));
    }
    fn(0, std::min(total, step));
    for (auto& f : pending) f.get();
}

}  // namespace

void BenchConfig::validate() const {
    require(filters >= 1, ErrorCode::InvalidArgument, "bench: filters must be >= 1");
    require(batch >= 1, ErrorCode::InvalidArgument, "bench: batch must be >= 1");
    require(iterations >= 1, ErrorCode::InvalidArgument, "bench: iterations must be >= 1");
    require(runs >= 1, ErrorCode::InvalidArgument, "bench: runs must be >= 1");
    require(threads >= 1, ErrorCode::InvalidArgument, "bench: threads must be >= 1");
    require(min_frames >= 2 && min_frames <= max_frames, ErrorCode::InvalidArgument, "bench: bad frame range");
}

BenchReport run_benchmark(const BenchConfig& config, const DDNetModel<float>* weights) {
    config.validate();
    std::mt19937_64 rng(config.seed);

    std::optional<DDNetModel<float>> owned;
    if (weights == nullptr) {
        ModelConfig mc;
        mc.filters = config.filters;
        mc.num_joints = config.num_joints;
        mc.coord_dim = config.coord_dim;
        mc.num_classes = config.num_classes;
        mc.seq_len = config.seq_len;
        owned.emplace(init_model<float>(mc, rng()));
        weights = &*owned;
    }
    const DDNetModel<float>& model = *weights;
    const ModelConfig& mc = model.config();
    const auto inputs = synthetic_sequences(config, mc.num_joints, mc.coord_dim, rng);

    std::vector<FeatureBundle> bundles(config.batch);
    std::vector<int> sink(config.batch);
    double feature_time = 0.0, network_time = 0.0;
    auto classify_batch = [&]() {
        auto t0 = Clock::now();
        parallel_chunks(config.batch, config.threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) bundles[i] = build_feature_bundle(inputs[i], mc.seq_len);
        });
        feature_time += seconds_since(t0);
        t0 = Clock::now();
        parallel_chunks(config.batch, config.threads, [&](std::size_t lo, std::size_t hi) {
            const auto preds = predict(model, std::span<const FeatureBundle>(bundles).subspan(lo, hi - lo));
            for (std::size_t i = lo; i < hi; ++i) sink[i] = preds[i - lo].class_id;
        });
        network_time += seconds_since(t0);
    };

    for (std::size_t i = 0; i < config.warmup; ++i) classify_batch();

    BenchReport report;
    report.batch = config.batch;
    report.sequences = config.batch * config.iterations;
    report.runs = config.runs;
    report.threads = config.threads;
    feature_time = network_time = 0.0;
    double wall_total = 0.0;
    for (std::size_t r = 0; r < config.runs; ++r) {
        const auto start = Clock::now();
        for (std::size_t i = 0; i < config.iterations; ++i) classify_batch();
        const double wall = seconds_since(start);
        wall_total += wall;
        report.run_throughput.push_back(static_cast<double>(report.sequences) / wall);
    }
    const double runs = static_cast<double>(config.runs);
    report.wall_seconds = wall_total / runs;
    report.throughput = static_cast<double>(report.sequences) / report.wall_seconds;
    report.feature_seconds = feature_time / runs;
    report.network_seconds = network_time / runs;
    report.throughput_mean =
        std::accumulate(report.run_throughput.begin(), report.run_throughput.end(), 0.0) / runs;
    double var = 0.0;
    for (double t : report.run_throughput) var += (t - report.throughput_mean) * (t - report.throughput_mean);
    report.throughput_stddev = config.runs > 1 ? std::sqrt(var / (runs - 1.0)) : 0.0;

    std::ostringstream summary;
    summary << "filters=" << mc.filters << " joints=" << mc.num_joints << " dim=" << mc.coord_dim
            << " K=" << mc.seq_len << " classes=" << mc.num_classes << " params=" << model.param_count();
    report.config_summary = summary.str();
    return report;
}

std::string to_json(const BenchReport& r) {
    nlohmann::json j;
    j["batch"] = r.batch;
    j["sequences"] = r.sequences;
    j["runs"] = r.runs;
    j["threads"] = r.threads;
    j["wall_seconds"] = r.wall_seconds;
    j["throughput"] = r.throughput;
    j["throughput_mean"] = r.throughput_mean;
    j["throughput_stddev"] = r.throughput_stddev;
    j["feature_seconds"] = r.feature_seconds;
    j["network_seconds"] = r.network_seconds;
    j["run_throughput"] = r.run_throughput;
    j["config"] = r.config_summary;
    return j.dump(2);
}

}  // namespace ddnet
