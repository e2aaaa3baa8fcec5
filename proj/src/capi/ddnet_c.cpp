#include "ddnet/ddnet.h"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <new>
#include <string>

#include "bench/bench.hpp"
#include "core/error.hpp"
#include "io/canonical.hpp"
#include "io/shrec.hpp"
#include "io/weights.hpp"
#include "train/trainer.hpp"

struct ddnet_dataset {
    ddnet::CanonicalDataset data;
};

struct ddnet_model {
    ddnet::DDNetModel<float> model;
};

struct ddnet_history {
    ddnet::TrainHistory records;
    std::size_t best_epoch = 0;
};

namespace {

thread_local std::string g_last_error;

struct BufferTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ddnet_status to_status(ddnet::ErrorCode code) {
    using ddnet::ErrorCode;
    switch (code) {
        case ErrorCode::InvalidArgument: return DDNET_ERR_INVALID_ARGUMENT;
        case ErrorCode::InvalidInput: return DDNET_ERR_INVALID_INPUT;
        case ErrorCode::Shape: return DDNET_ERR_SHAPE;
        case ErrorCode::Config: return DDNET_ERR_CONFIG;
        case ErrorCode::Io: return DDNET_ERR_IO;
        case ErrorCode::Parse: return DDNET_ERR_PARSE;
        case ErrorCode::Corrupt: return DDNET_ERR_CORRUPT;
        case ErrorCode::Version: return DDNET_ERR_VERSION;
        case ErrorCode::Diverged: return DDNET_ERR_DIVERGED;
        case ErrorCode::NotFound: return DDNET_ERR_NOT_FOUND;
        case ErrorCode::DegenerateBatch: return DDNET_ERR_DEGENERATE_BATCH;
    }
    return DDNET_ERR_INTERNAL;
}

template <typename Fn>
ddnet_status guarded(Fn&& fn) noexcept {
    try {
        fn();
        g_last_error.clear();
        return DDNET_OK;
    } catch (const ddnet::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const BufferTooSmall& e) {
        g_last_error = e.what();
        return DDNET_ERR_BUFFER_TOO_SMALL;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return DDNET_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return DDNET_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return DDNET_ERR_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    ddnet::require(p != nullptr, ddnet::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

ddnet::ModelConfig from_c(const ddnet_model_config& c) {
    ddnet::ModelConfig m;
    m.filters = c.filters;
    m.num_joints = c.num_joints;
    m.coord_dim = c.coord_dim;
    m.seq_len = c.seq_len;
    m.num_classes = c.num_classes;
    m.leaky_slope = c.leaky_slope;
    m.dropout_rate = c.dropout_rate;
    m.bn_epsilon = c.bn_epsilon;
    m.bn_momentum = c.bn_momentum;
    m.streams = c.streams;
    return m;
}

ddnet_model_config to_c(const ddnet::ModelConfig& m) {
    ddnet_model_config c;
    c.filters = m.filters;
    c.num_joints = m.num_joints;
    c.coord_dim = m.coord_dim;
    c.seq_len = m.seq_len;
    c.num_classes = m.num_classes;
    c.leaky_slope = m.leaky_slope;
    c.dropout_rate = m.dropout_rate;
    c.bn_epsilon = m.bn_epsilon;
    c.bn_momentum = m.bn_momentum;
    c.streams = m.streams;
    return c;
}

ddnet::TrainConfig from_c(const ddnet_train_config& c) {
    ddnet::TrainConfig t;
    t.epochs = c.epochs;
    t.batch_size = c.batch_size;
    t.lr_max = c.lr_max;
    t.lr_min = c.lr_min;
    t.plateau_patience = c.plateau_patience;
    t.plateau_factor = c.plateau_factor;
    t.augment_ratio = c.augment_ratio;
    t.seed = c.seed;
    return t;
}

ddnet_epoch_record to_c(const ddnet::EpochRecord& r) {
    return {r.epoch, r.train_loss, r.train_acc, r.val_acc, r.lr};
}

void copy_matrix(const ddnet::Matrix& m, float* dst) {
    if (dst != nullptr) std::copy(m.data.begin(), m.data.end(), dst);
}

}  // namespace

extern "C" {

const char* ddnet_version(void) { return "1.0.0"; }

const char* ddnet_status_string(ddnet_status status) {
    switch (status) {
        case DDNET_OK: return "ok";
        case DDNET_ERR_BUFFER_TOO_SMALL: return "buffer too small";
        case DDNET_ERR_INTERNAL: return "internal error";
        default:
            if (status >= DDNET_ERR_INVALID_ARGUMENT && status <= DDNET_ERR_DEGENERATE_BATCH) {
                return ddnet::to_string(static_cast<ddnet::ErrorCode>(status));
            }
            return "unknown status";
    }
}

const char* ddnet_last_error(void) { return g_last_error.c_str(); }

ddnet_status ddnet_dataset_load_shrec(const char* root, int label_mode, ddnet_dataset** train, ddnet_dataset** test) {
    return guarded([&] {
        need(root, "root");
        need(train, "train");
        auto splits = ddnet::parse_shrec(root, label_mode);
        auto* tr = new ddnet_dataset{std::move(splits.train)};
        if (test != nullptr) {
            *test = new ddnet_dataset{std::move(splits.test)};
        }
        *train = tr;
    });
}

ddnet_status ddnet_dataset_load_canonical(const char* path, ddnet_dataset** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new ddnet_dataset{ddnet::load_canonical(path)};
    });
}

ddnet_status ddnet_dataset_save_canonical(const ddnet_dataset* dataset, const char* path) {
    return guarded([&] {
        need(dataset, "dataset");
        need(path, "path");
        ddnet::save_canonical(dataset->data, path);
    });
}

void ddnet_dataset_free(ddnet_dataset* dataset) { delete dataset; }

size_t ddnet_dataset_size(const ddnet_dataset* d) { return d ? d->data.size() : 0; }
size_t ddnet_dataset_num_joints(const ddnet_dataset* d) { return d ? d->data.num_joints : 0; }
size_t ddnet_dataset_coord_dim(const ddnet_dataset* d) { return d ? d->data.coord_dim : 0; }
size_t ddnet_dataset_num_classes(const ddnet_dataset* d) { return d ? d->data.num_classes() : 0; }

const char* ddnet_dataset_class_name(const ddnet_dataset* d, size_t class_id) {
    if (d == nullptr || class_id >= d->data.label_names.size()) return nullptr;
    return d->data.label_names[class_id].c_str();
}

const char* ddnet_dataset_sample_id(const ddnet_dataset* d, size_t index) {
    if (d == nullptr || index >= d->data.size()) return nullptr;
    return d->data.samples[index].id.c_str();
}

int ddnet_dataset_sample_label(const ddnet_dataset* d, size_t index) {
    if (d == nullptr || index >= d->data.size()) return -1;
    return d->data.samples[index].label;
}

size_t ddnet_dataset_sample_frames(const ddnet_dataset* d, size_t index) {
    if (d == nullptr || index >= d->data.size()) return 0;
    return d->data.samples[index].sequence.num_frames();
}

ddnet_status ddnet_dataset_find(const ddnet_dataset* dataset, const char* selector, size_t* index) {
    return guarded([&] {
        need(dataset, "dataset");
        need(selector, "selector");
        need(index, "index");
        *index = dataset->data.find(selector);
    });
}

ddnet_status ddnet_feature_dims_for(size_t num_joints, size_t coord_dim, size_t seq_len, ddnet_feature_dims* dims) {
    return guarded([&] {
        need(dims, "dims");
        ddnet::require(num_joints >= 2, ddnet::ErrorCode::InvalidArgument, "num_joints must be >= 2");
        ddnet::require(coord_dim == 2 || coord_dim == 3, ddnet::ErrorCode::InvalidArgument, "coord_dim must be 2 or 3");
        ddnet::require(seq_len >= 4 && seq_len % 2 == 0, ddnet::ErrorCode::InvalidArgument,
                       "seq_len must be even and >= 4");
        *dims = {seq_len, seq_len / 2, ddnet::jcd_width(num_joints), num_joints * coord_dim};
    });
}

ddnet_status ddnet_features_compute(const float* coords, size_t frames, size_t num_joints, size_t coord_dim,
                                    size_t seq_len, float* jcd, float* slow, float* fast) {
    return guarded([&] {
        need(coords, "coords");
        ddnet::SkeletonSequence seq(num_joints, coord_dim,
                                    std::vector<float>(coords, coords + frames * num_joints * coord_dim));
        const auto bundle = ddnet::build_feature_bundle(seq, seq_len);
        copy_matrix(bundle.jcd, jcd);
        copy_matrix(bundle.slow, slow);
        copy_matrix(bundle.fast, fast);
    });
}

ddnet_status ddnet_dataset_features(const ddnet_dataset* dataset, size_t index, size_t seq_len, float* jcd,
                                    float* slow, float* fast) {
    return guarded([&] {
        need(dataset, "dataset");
        ddnet::require(index < dataset->data.size(), ddnet::ErrorCode::NotFound,
                       "sample index " + std::to_string(index) + " out of range");
        const auto bundle = ddnet::build_feature_bundle(dataset->data.samples[index].sequence, seq_len);
        copy_matrix(bundle.jcd, jcd);
        copy_matrix(bundle.slow, slow);
        copy_matrix(bundle.fast, fast);
    });
}

void ddnet_model_config_default(ddnet_model_config* config) {
    if (config != nullptr) *config = to_c(ddnet::ModelConfig{});
}

ddnet_status ddnet_param_count(const ddnet_model_config* config, size_t* count) {
    return guarded([&] {
        need(config, "config");
        need(count, "count");
        *count = ddnet::param_count(from_c(*config));
    });
}

ddnet_status ddnet_model_create(const ddnet_model_config* config, uint64_t seed, ddnet_model** out) {
    return guarded([&] {
        need(config, "config");
        need(out, "out");
        *out = new ddnet_model{ddnet::init_model<float>(from_c(*config), seed)};
    });
}

ddnet_status ddnet_model_load(const char* path, ddnet_model** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new ddnet_model{ddnet::load_weights(path)};
    });
}

ddnet_status ddnet_model_save(const ddnet_model* model, const char* path) {
    return guarded([&] {
        need(model, "model");
        need(path, "path");
        ddnet::save_weights(model->model, path);
    });
}

void ddnet_model_free(ddnet_model* model) { delete model; }

ddnet_status ddnet_model_get_config(const ddnet_model* model, ddnet_model_config* config) {
    return guarded([&] {
        need(model, "model");
        need(config, "config");
        *config = to_c(model->model.config());
    });
}

ddnet_status ddnet_model_predict(const ddnet_model* model, const float* coords, size_t frames, int* class_id,
                                 float* probabilities) {
    return guarded([&] {
        need(model, "model");
        need(coords, "coords");
        const auto& c = model->model.config();
        ddnet::SkeletonSequence seq(c.num_joints, c.coord_dim,
                                    std::vector<float>(coords, coords + frames * c.num_joints * c.coord_dim));
        const auto pred = ddnet::predict(model->model, ddnet::build_feature_bundle(seq, c.seq_len));
        if (class_id != nullptr) *class_id = pred.class_id;
        if (probabilities != nullptr) std::copy(pred.probabilities.begin(), pred.probabilities.end(), probabilities);
    });
}

ddnet_status ddnet_model_logits(const ddnet_model* model, size_t batch, const float* jcd, const float* slow,
                                const float* fast, float* logits) {
    return guarded([&] {
        need(model, "model");
        need(jcd, "jcd");
        need(slow, "slow");
        need(fast, "fast");
        need(logits, "logits");
        ddnet::require(batch >= 1, ddnet::ErrorCode::InvalidArgument, "batch must be >= 1");
        const auto& c = model->model.config();
        const std::size_t k = c.seq_len, j = c.jcd_dim(), m = c.motion_dim();
        auto wrap = [batch](const float* p, std::size_t rows, std::size_t cols) {
            return ddnet::ad::Tensor<float>(
                ddnet::ad::NdArray<float>({batch, rows, cols}, std::vector<float>(p, p + batch * rows * cols)));
        };
        ddnet::ModelInputs<float> in{wrap(jcd, k, j), wrap(slow, k, m), wrap(fast, k / 2, m)};
        const auto out = model->model.infer(in);
        std::copy(out.data().begin(), out.data().end(), logits);
    });
}

void ddnet_train_config_default(ddnet_train_config* config) {
    if (config == nullptr) return;
    const ddnet::TrainConfig t;
    *config = {t.epochs, t.batch_size, t.lr_max, t.lr_min, t.plateau_patience, t.plateau_factor, t.augment_ratio, t.seed};
}

ddnet_status ddnet_train(const ddnet_dataset* train, const ddnet_dataset* validation,
                         const ddnet_model_config* model_config, const ddnet_train_config* config,
                         ddnet_epoch_callback callback, void* user_data, ddnet_model** model_out,
                         ddnet_history** history_out) {
    return guarded([&] {
        need(train, "train");
        need(model_config, "model_config");
        need(config, "config");
        need(model_out, "model_out");
        ddnet::EpochCallback cb;
        if (callback != nullptr) {
            cb = [callback, user_data](const ddnet::EpochRecord& r) {
                const auto rec = to_c(r);
                callback(&rec, user_data);
            };
        }
        auto result = ddnet::train(train->data, validation ? &validation->data : nullptr, from_c(*model_config),
                                   from_c(*config), cb);
        auto* m = new ddnet_model{std::move(result.model)};
        if (history_out != nullptr) *history_out = new ddnet_history{std::move(result.history), result.best_epoch};
        *model_out = m;
    });
}

size_t ddnet_history_size(const ddnet_history* h) { return h ? h->records.size() : 0; }

ddnet_status ddnet_history_get(const ddnet_history* h, size_t epoch, ddnet_epoch_record* record) {
    return guarded([&] {
        need(h, "history");
        need(record, "record");
        ddnet::require(epoch < h->records.size(), ddnet::ErrorCode::NotFound, "epoch out of range");
        *record = to_c(h->records[epoch]);
    });
}

size_t ddnet_history_best_epoch(const ddnet_history* h) { return h ? h->best_epoch : 0; }

void ddnet_history_free(ddnet_history* h) { delete h; }

ddnet_status ddnet_evaluate(const ddnet_model* model, const ddnet_dataset* dataset, double* accuracy,
                            int64_t* confusion, size_t confusion_len) {
    return guarded([&] {
        need(model, "model");
        need(dataset, "dataset");
        const auto ev = ddnet::evaluate(model->model, dataset->data);
        const std::size_t c = ev.confusion.size();
        if (confusion != nullptr) {
            if (confusion_len < c * c) {
                throw BufferTooSmall("confusion buffer needs " + std::to_string(c * c) + " entries");
            }
            for (std::size_t i = 0; i < c; ++i) {
                std::copy(ev.confusion[i].begin(), ev.confusion[i].end(), confusion + i * c);
            }
        }
        if (accuracy != nullptr) *accuracy = ev.accuracy;
    });
}

void ddnet_bench_config_default(ddnet_bench_config* config) {
    if (config == nullptr) return;
    const ddnet::BenchConfig b;
    *config = {b.filters, b.batch, b.iterations, b.runs, b.warmup, b.threads, b.seed};
}

ddnet_status ddnet_bench_run(const ddnet_bench_config* config, const ddnet_model* model, ddnet_bench_report* report) {
    return guarded([&] {
        need(config, "config");
        need(report, "report");
        ddnet::require(config->runs <= DDNET_BENCH_MAX_RUNS, ddnet::ErrorCode::InvalidArgument,
                       "at most " + std::to_string(DDNET_BENCH_MAX_RUNS) + " runs");
        ddnet::BenchConfig b;
        b.filters = config->filters;
        b.batch = config->batch;
        b.iterations = config->iterations;
        b.runs = config->runs;
        b.warmup = config->warmup;
        b.threads = config->threads;
        b.seed = config->seed;
        const auto r = ddnet::run_benchmark(b, model ? &model->model : nullptr);
        ddnet_bench_report out{};
        out.batch = r.batch;
        out.sequences = r.sequences;
        out.runs = r.runs;
        out.threads = r.threads;
        out.wall_seconds = r.wall_seconds;
        out.throughput = r.throughput;
        out.throughput_mean = r.throughput_mean;
        out.throughput_stddev = r.throughput_stddev;
        out.feature_seconds = r.feature_seconds;
        out.network_seconds = r.network_seconds;
        std::copy(r.run_throughput.begin(), r.run_throughput.end(), out.run_throughput);
        out.param_count = model ? model->model.param_count() : [&] {
            ddnet::ModelConfig mc;
            mc.filters = b.filters;
            return ddnet::param_count(mc);
        }();
        std::snprintf(out.config_summary, sizeof(out.config_summary), "%s", r.config_summary.c_str());
        *report = out;
    });
}

ddnet_status ddnet_bench_report_json(const ddnet_bench_report* report, char* buf, size_t buf_len, size_t* needed) {
    return guarded([&] {
        need(report, "report");
        ddnet::BenchReport r;
        r.batch = report->batch;
        r.sequences = report->sequences;
        r.runs = report->runs;
        r.threads = report->threads;
        r.wall_seconds = report->wall_seconds;
        r.throughput = report->throughput;
        r.throughput_mean = report->throughput_mean;
        r.throughput_stddev = report->throughput_stddev;
        r.feature_seconds = report->feature_seconds;
        r.network_seconds = report->network_seconds;
        r.run_throughput.assign(report->run_throughput,
                                report->run_throughput + std::min<std::size_t>(report->runs, DDNET_BENCH_MAX_RUNS));
        r.config_summary = report->config_summary;
        const std::string json = ddnet::to_json(r);
        if (needed != nullptr) *needed = json.size() + 1;
        if (buf == nullptr || buf_len < json.size() + 1) {
            throw BufferTooSmall("json buffer needs " + std::to_string(json.size() + 1) + " bytes");
        }
        std::memcpy(buf, json.c_str(), json.size() + 1);
    });
}

}  // extern "C"
