/*
 * ddnet: skeleton-sequence action recognition engine, C interface.
 *
 * All objects are opaque handles created and released through this API.
 * Every fallible call returns a ddnet_status; on failure a human-readable
 * message for the calling thread is available from ddnet_last_error().
 */
#ifndef DDNET_DDNET_H
#define DDNET_DDNET_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DDNET_BUILDING_LIBRARY)
#    define DDNET_API __declspec(dllexport)
#  else
#    define DDNET_API __declspec(dllimport)
#  endif
#else
#  define DDNET_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ddnet_status {
    DDNET_OK = 0,
    DDNET_ERR_INVALID_ARGUMENT = 1,
    DDNET_ERR_INVALID_INPUT = 2,
    DDNET_ERR_SHAPE = 3,
    DDNET_ERR_CONFIG = 4,
    DDNET_ERR_IO = 5,
    DDNET_ERR_PARSE = 6,
    DDNET_ERR_CORRUPT = 7,
    DDNET_ERR_VERSION = 8,
    DDNET_ERR_DIVERGED = 9,
    DDNET_ERR_NOT_FOUND = 10,
    DDNET_ERR_DEGENERATE_BATCH = 11,
    DDNET_ERR_BUFFER_TOO_SMALL = 12,
    DDNET_ERR_INTERNAL = 99
} ddnet_status;

DDNET_API const char* ddnet_version(void);
DDNET_API const char* ddnet_status_string(ddnet_status status);
/* Message for the last failed call on this thread; "" if none. */
DDNET_API const char* ddnet_last_error(void);

/* ---------------------------------------------------------------- data */

typedef struct ddnet_dataset ddnet_dataset;

/* label_mode is 14 or 28. Both outputs are owned by the caller. */
DDNET_API ddnet_status ddnet_dataset_load_shrec(const char* root, int label_mode, ddnet_dataset** train,
                                                ddnet_dataset** test);
DDNET_API ddnet_status ddnet_dataset_load_canonical(const char* path, ddnet_dataset** out);
DDNET_API ddnet_status ddnet_dataset_save_canonical(const ddnet_dataset* dataset, const char* path);
DDNET_API void ddnet_dataset_free(ddnet_dataset* dataset);

DDNET_API size_t ddnet_dataset_size(const ddnet_dataset* dataset);
DDNET_API size_t ddnet_dataset_num_joints(const ddnet_dataset* dataset);
DDNET_API size_t ddnet_dataset_coord_dim(const ddnet_dataset* dataset);
DDNET_API size_t ddnet_dataset_num_classes(const ddnet_dataset* dataset);
/* Returned strings stay valid until the dataset is freed; NULL if out of range. */
DDNET_API const char* ddnet_dataset_class_name(const ddnet_dataset* dataset, size_t class_id);
DDNET_API const char* ddnet_dataset_sample_id(const ddnet_dataset* dataset, size_t index);
DDNET_API int ddnet_dataset_sample_label(const ddnet_dataset* dataset, size_t index);
DDNET_API size_t ddnet_dataset_sample_frames(const ddnet_dataset* dataset, size_t index);
/* Matches a sample id, or else a decimal index. */
DDNET_API ddnet_status ddnet_dataset_find(const ddnet_dataset* dataset, const char* selector, size_t* index);

/* ------------------------------------------------------------ features */

typedef struct ddnet_feature_dims {
    size_t seq_len;    /* K: rows of jcd and slow */
    size_t fast_len;   /* K/2: rows of fast */
    size_t jcd_cols;   /* N(N-1)/2 */
    size_t motion_cols; /* N*d */
} ddnet_feature_dims;

DDNET_API ddnet_status ddnet_feature_dims_for(size_t num_joints, size_t coord_dim, size_t seq_len,
                                              ddnet_feature_dims* dims);

/* Feature bundle of one raw sequence (frames x num_joints x coord_dim,
 * frame-major, joint-major). Buffers must hold rows*cols floats each. */
DDNET_API ddnet_status ddnet_features_compute(const float* coords, size_t frames, size_t num_joints,
                                              size_t coord_dim, size_t seq_len, float* jcd, float* slow,
                                              float* fast);
DDNET_API ddnet_status ddnet_dataset_features(const ddnet_dataset* dataset, size_t index, size_t seq_len,
                                              float* jcd, float* slow, float* fast);

/* --------------------------------------------------------------- model */

enum {
    DDNET_STREAM_JCD = 1,
    DDNET_STREAM_SLOW = 2,
    DDNET_STREAM_FAST = 4,
    DDNET_STREAM_ALL = 7
};

typedef struct ddnet_model_config {
    size_t filters;
    size_t num_joints;
    size_t coord_dim;
    size_t seq_len;
    size_t num_classes;
    float leaky_slope;
    float dropout_rate;
    float bn_epsilon;
    float bn_momentum;
    unsigned streams;
} ddnet_model_config;

typedef struct ddnet_model ddnet_model;

DDNET_API void ddnet_model_config_default(ddnet_model_config* config);
DDNET_API ddnet_status ddnet_param_count(const ddnet_model_config* config, size_t* count);

DDNET_API ddnet_status ddnet_model_create(const ddnet_model_config* config, uint64_t seed, ddnet_model** out);
DDNET_API ddnet_status ddnet_model_load(const char* path, ddnet_model** out);
DDNET_API ddnet_status ddnet_model_save(const ddnet_model* model, const char* path);
DDNET_API void ddnet_model_free(ddnet_model* model);
DDNET_API ddnet_status ddnet_model_get_config(const ddnet_model* model, ddnet_model_config* config);

/* Infer-mode classification of one raw sequence. `probabilities` may be
 * NULL; otherwise it must hold num_classes floats. Safe to call
 * concurrently on one model. */
DDNET_API ddnet_status ddnet_model_predict(const ddnet_model* model, const float* coords, size_t frames,
                                           int* class_id, float* probabilities);
/* Raw logits for a batch of feature bundles laid out back to back. */
DDNET_API ddnet_status ddnet_model_logits(const ddnet_model* model, size_t batch, const float* jcd,
                                          const float* slow, const float* fast, float* logits);

/* ------------------------------------------------------------ training */

typedef struct ddnet_train_config {
    size_t epochs;
    size_t batch_size; /* 0 = full batch */
    double lr_max;
    double lr_min;
    size_t plateau_patience;
    double plateau_factor;
    double augment_ratio;
    uint64_t seed;
} ddnet_train_config;

typedef struct ddnet_epoch_record {
    size_t epoch;
    double train_loss;
    double train_acc;
    double val_acc;
    double lr;
} ddnet_epoch_record;

typedef struct ddnet_history ddnet_history;
typedef void (*ddnet_epoch_callback)(const ddnet_epoch_record* record, void* user_data);

DDNET_API void ddnet_train_config_default(ddnet_train_config* config);

/* `validation` may be NULL (the training set is then used for model
 * selection). `model_config` num_joints/coord_dim/num_classes must match
 * the dataset. Returns the best-validation weights. */
DDNET_API ddnet_status ddnet_train(const ddnet_dataset* train, const ddnet_dataset* validation,
                                   const ddnet_model_config* model_config, const ddnet_train_config* config,
                                   ddnet_epoch_callback callback, void* user_data, ddnet_model** model_out,
                                   ddnet_history** history_out);

DDNET_API size_t ddnet_history_size(const ddnet_history* history);
DDNET_API ddnet_status ddnet_history_get(const ddnet_history* history, size_t epoch, ddnet_epoch_record* record);
DDNET_API size_t ddnet_history_best_epoch(const ddnet_history* history);
DDNET_API void ddnet_history_free(ddnet_history* history);

/* `confusion` may be NULL; otherwise it receives num_classes^2 counts,
 * row = true class, column = predicted class. */
DDNET_API ddnet_status ddnet_evaluate(const ddnet_model* model, const ddnet_dataset* dataset, double* accuracy,
                                      int64_t* confusion, size_t confusion_len);

/* ----------------------------------------------------------- benchmark */

typedef struct ddnet_bench_config {
    size_t filters;
    size_t batch;
    size_t iterations;
    size_t runs;
    size_t warmup;
    size_t threads;
    uint64_t seed;
} ddnet_bench_config;

#define DDNET_BENCH_MAX_RUNS 64

typedef struct ddnet_bench_report {
    size_t batch;
    size_t sequences; /* per run */
    size_t runs;
    size_t threads;
    double wall_seconds;
    double throughput;
    double throughput_mean;
    double throughput_stddev;
    double feature_seconds;
    double network_seconds;
    double run_throughput[DDNET_BENCH_MAX_RUNS];
    size_t param_count;
    char config_summary[256];
} ddnet_bench_report;

DDNET_API void ddnet_bench_config_default(ddnet_bench_config* config);
/* `model` may be NULL for seeded random weights of the configured size. */
DDNET_API ddnet_status ddnet_bench_run(const ddnet_bench_config* config, const ddnet_model* model,
                                       ddnet_bench_report* report);
/* Writes the report as JSON into buf (NUL-terminated); *needed receives the
 * required size including the terminator. */
DDNET_API ddnet_status ddnet_bench_report_json(const ddnet_bench_report* report, char* buf, size_t buf_len,
                                               size_t* needed);

#ifdef __cplusplus
}
#endif

#endif /* DDNET_DDNET_H */
