// ddnet command-line front end. Talks to the engine only through the C API.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddnet/ddnet.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(ddnet_status status, const std::string& context) {
    if (status == DDNET_OK) return;
    throw Failure(context + ": " + ddnet_status_string(status) + ": " + ddnet_last_error());
}

struct DatasetDeleter {
    void operator()(ddnet_dataset* d) const { ddnet_dataset_free(d); }
};
struct ModelDeleter {
    void operator()(ddnet_model* m) const { ddnet_model_free(m); }
};
struct HistoryDeleter {
    void operator()(ddnet_history* h) const { ddnet_history_free(h); }
};
using DatasetPtr = std::unique_ptr<ddnet_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<ddnet_model, ModelDeleter>;
using HistoryPtr = std::unique_ptr<ddnet_history, HistoryDeleter>;

struct Splits {
    DatasetPtr train;
    DatasetPtr test;  // may be empty
};

// shrec14 / shrec28: `data` is the distribution root.
// canonical: `data` is one canonical file; `extra` an optional second one.
// No --dataset: a directory is taken as a SHREC root, anything else as a
// canonical file.
std::string resolve_kind(const std::string& kind, const std::string& data) {
    if (!kind.empty()) return kind;
    return std::filesystem::is_directory(data) ? "shrec14" : "canonical";
}

Splits load_splits(const std::string& kind, const std::string& data, const std::string& extra) {
    Splits s;
    if (kind == "shrec14" || kind == "shrec28") {
        ddnet_dataset* train = nullptr;
        ddnet_dataset* test = nullptr;
        check(ddnet_dataset_load_shrec(data.c_str(), kind == "shrec14" ? 14 : 28, &train, &test),
              "loading SHREC from " + data);
        s.train.reset(train);
        s.test.reset(test);
        return s;
    }
    ddnet_dataset* ds = nullptr;
    check(ddnet_dataset_load_canonical(data.c_str(), &ds), "loading " + data);
    s.train.reset(ds);
    if (!extra.empty()) {
        ddnet_dataset* t = nullptr;
        check(ddnet_dataset_load_canonical(extra.c_str(), &t), "loading " + extra);
        s.test.reset(t);
    }
    return s;
}

// Picks the split a read-only command operates on.
const ddnet_dataset* pick_split(const Splits& s, const std::string& kind, const std::string& split) {
    if (kind == "canonical") return s.train.get();
    return split == "train" ? s.train.get() : s.test.get();
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Failure("cannot write " + path);
    return out;
}

unsigned parse_streams(const std::string& spec) {
    unsigned mask = 0;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "jcd") mask |= DDNET_STREAM_JCD;
        else if (item == "slow") mask |= DDNET_STREAM_SLOW;
        else if (item == "fast") mask |= DDNET_STREAM_FAST;
        else throw CLI::ValidationError("--streams", "unknown stream '" + item + "' (use jcd,slow,fast)");
    }
    return mask;
}

// ------------------------------------------------------------------ train

struct TrainArgs {
    std::string data, dataset, test, out, history;
    std::size_t filters = 64, epochs = 600, batch = 256, seq_len = 32, patience = 20;
    std::uint64_t seed = 0;
    double lr_max = 1e-3, lr_min = 1e-5, augment = 0.9, factor = 0.5;
    float dropout = 0.5f;
    std::string streams = "jcd,slow,fast";
    bool verbose = false;
};

void epoch_printer(const ddnet_epoch_record* r, void*) {
    std::fprintf(stderr, "epoch %zu  loss %.4f  train_acc %.4f  val_acc %.4f  lr %.2e\n", r->epoch, r->train_loss,
                 r->train_acc, r->val_acc, r->lr);
}

int run_train(const TrainArgs& a) {
    const std::string kind = resolve_kind(a.dataset, a.data);
    auto splits = load_splits(kind, a.data, a.test);
    const ddnet_dataset* train = splits.train.get();
    const ddnet_dataset* test = splits.test.get();

    ddnet_model_config mc;
    ddnet_model_config_default(&mc);
    mc.filters = a.filters;
    mc.num_joints = ddnet_dataset_num_joints(train);
    mc.coord_dim = ddnet_dataset_coord_dim(train);
    mc.num_classes = ddnet_dataset_num_classes(train);
    mc.seq_len = a.seq_len;
    mc.dropout_rate = a.dropout;
    mc.streams = parse_streams(a.streams);

    ddnet_train_config tc;
    ddnet_train_config_default(&tc);
    tc.epochs = a.epochs;
    tc.batch_size = a.batch;
    tc.seed = a.seed;
    tc.lr_max = a.lr_max;
    tc.lr_min = a.lr_min;
    tc.augment_ratio = a.augment;
    tc.plateau_patience = a.patience;
    tc.plateau_factor = a.factor;

    ddnet_model* raw_model = nullptr;
    ddnet_history* raw_history = nullptr;
    check(ddnet_train(train, test, &mc, &tc, a.verbose ? epoch_printer : nullptr, nullptr, &raw_model, &raw_history),
          "training");
    ModelPtr model(raw_model);
    HistoryPtr history(raw_history);

    if (!a.out.empty()) check(ddnet_model_save(model.get(), a.out.c_str()), "saving weights to " + a.out);
    if (!a.history.empty()) {
        auto out = open_out(a.history);
        out << "epoch,train_loss,train_acc,val_acc,lr\n";
        char line[256];
        for (std::size_t i = 0; i < ddnet_history_size(history.get()); ++i) {
            ddnet_epoch_record r;
            check(ddnet_history_get(history.get(), i, &r), "reading history");
            std::snprintf(line, sizeof(line), "%zu,%.6f,%.6f,%.6f,%.8g\n", r.epoch, r.train_loss, r.train_acc,
                          r.val_acc, r.lr);
            out << line;
        }
    }
    double acc = 0.0;
    const ddnet_dataset* final_set = test ? test : train;
    check(ddnet_evaluate(model.get(), final_set, &acc, nullptr, 0), "evaluating");
    std::printf("best epoch: %zu\n", ddnet_history_best_epoch(history.get()));
    std::printf("%s accuracy: %.4f\n", test ? "test" : "train", acc);
    return kExitOk;
}

// ------------------------------------------------------------------- eval

struct EvalArgs {
    std::string weights, data, dataset, split = "test", confusion;
};

int run_eval(const EvalArgs& a) {
    ddnet_model* raw = nullptr;
    check(ddnet_model_load(a.weights.c_str(), &raw), "loading weights " + a.weights);
    ModelPtr model(raw);
    const std::string kind = resolve_kind(a.dataset, a.data);
    auto splits = load_splits(kind, a.data, "");
    const ddnet_dataset* ds = pick_split(splits, kind, a.split);
    if (ds == nullptr) throw Failure("dataset has no " + a.split + " split");

    ddnet_model_config mc;
    check(ddnet_model_get_config(model.get(), &mc), "reading model config");
    const std::size_t classes = ddnet_dataset_num_classes(ds);
    if (mc.num_joints != ddnet_dataset_num_joints(ds) || mc.coord_dim != ddnet_dataset_coord_dim(ds) ||
        mc.num_classes != classes) {
        std::ostringstream os;
        os << "weights expect " << mc.num_joints << " joints x " << mc.coord_dim << "D, " << mc.num_classes
           << " classes; dataset has " << ddnet_dataset_num_joints(ds) << " joints x " << ddnet_dataset_coord_dim(ds)
           << "D, " << classes << " classes";
        throw Failure(os.str());
    }

    std::vector<std::int64_t> confusion(classes * classes);
    double acc = 0.0;
    check(ddnet_evaluate(model.get(), ds, &acc, confusion.data(), confusion.size()), "evaluating");
    std::printf("accuracy: %.4f\n", acc);
    if (!a.confusion.empty()) {
        auto out = open_out(a.confusion);
        out << "true\\predicted";
        for (std::size_t j = 0; j < classes; ++j) out << ',' << csv_field(ddnet_dataset_class_name(ds, j));
        out << '\n';
        for (std::size_t i = 0; i < classes; ++i) {
            out << csv_field(ddnet_dataset_class_name(ds, i));
            for (std::size_t j = 0; j < classes; ++j) out << ',' << confusion[i * classes + j];
            out << '\n';
        }
    }
    return kExitOk;
}

// --------------------------------------------------------------- features

struct FeaturesArgs {
    std::string data, dataset, split = "train", sample = "0", out;
    std::size_t seq_len = 32;
};

void write_block(std::ostream& out, const char* name, const std::vector<float>& values, std::size_t rows,
                 std::size_t cols) {
    out << "# " << name << ',' << rows << ',' << cols << '\n';
    char buf[32];
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(values[r * cols + c]));
            out << (c ? "," : "") << buf;
        }
        out << '\n';
    }
}

int run_features(const FeaturesArgs& a) {
    const std::string kind = resolve_kind(a.dataset, a.data);
    auto splits = load_splits(kind, a.data, "");
    const ddnet_dataset* ds = pick_split(splits, kind, a.split);
    if (ds == nullptr) throw Failure("dataset has no " + a.split + " split");
    std::size_t index = 0;
    check(ddnet_dataset_find(ds, a.sample.c_str(), &index), "selecting sample");
    ddnet_feature_dims dims;
    check(ddnet_feature_dims_for(ddnet_dataset_num_joints(ds), ddnet_dataset_coord_dim(ds), a.seq_len, &dims),
          "feature shape");
    std::vector<float> jcd(dims.seq_len * dims.jcd_cols), slow(dims.seq_len * dims.motion_cols),
        fast(dims.fast_len * dims.motion_cols);
    check(ddnet_dataset_features(ds, index, a.seq_len, jcd.data(), slow.data(), fast.data()), "computing features");

    auto emit = [&](std::ostream& out) {
        out << "# sample," << csv_field(ddnet_dataset_sample_id(ds, index)) << ",label,"
            << ddnet_dataset_sample_label(ds, index) << '\n';
        write_block(out, "jcd", jcd, dims.seq_len, dims.jcd_cols);
        write_block(out, "slow", slow, dims.seq_len, dims.motion_cols);
        write_block(out, "fast", fast, dims.fast_len, dims.motion_cols);
    };
    if (a.out.empty() || a.out == "-") {
        emit(std::cout);
    } else {
        auto out = open_out(a.out);
        emit(out);
    }
    return kExitOk;
}

// ------------------------------------------------------------------ bench

struct BenchArgs {
    std::size_t filters = 16, batch = 64, iterations = 10, runs = 5, warmup = 1, threads = 1;
    std::uint64_t seed = 0;
    std::string weights, json;
};

int run_bench(const BenchArgs& a) {
    ddnet_bench_config bc;
    ddnet_bench_config_default(&bc);
    bc.filters = a.filters;
    bc.batch = a.batch;
    bc.iterations = a.iterations;
    bc.runs = a.runs;
    bc.warmup = a.warmup;
    bc.threads = a.threads;
    bc.seed = a.seed;
    ModelPtr model;
    if (!a.weights.empty()) {
        ddnet_model* raw = nullptr;
        check(ddnet_model_load(a.weights.c_str(), &raw), "loading weights " + a.weights);
        model.reset(raw);
    }
    ddnet_bench_report r;
    check(ddnet_bench_run(&bc, model.get(), &r), "benchmark");

    std::printf("config:            %s\n", r.config_summary);
    std::printf("batch:             %zu\n", r.batch);
    std::printf("threads:           %zu\n", r.threads);
    std::printf("runs:              %zu\n", r.runs);
    std::printf("sequences/run:     %zu\n", r.sequences);
    std::printf("wall time/run:     %.6f s\n", r.wall_seconds);
    std::printf("  features:        %.6f s\n", r.feature_seconds);
    std::printf("  network:         %.6f s\n", r.network_seconds);
    std::printf("throughput:        %.1f sequences/s\n", r.throughput);
    std::printf("throughput mean:   %.1f +- %.1f sequences/s\n", r.throughput_mean, r.throughput_stddev);

    if (!a.json.empty()) {
        std::size_t needed = 0;
        ddnet_bench_report_json(&r, nullptr, 0, &needed);
        std::string buf(needed, '\0');
        check(ddnet_bench_report_json(&r, buf.data(), buf.size(), &needed), "formatting report");
        auto out = open_out(a.json);
        out << buf.c_str() << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------- convert

struct ConvertArgs {
    std::string from = "shrec", root, out;
    int labels = 14;
};

int run_convert(const ConvertArgs& a) {
    ddnet_dataset* train = nullptr;
    ddnet_dataset* test = nullptr;
    check(ddnet_dataset_load_shrec(a.root.c_str(), a.labels, &train, &test), "loading SHREC from " + a.root);
    DatasetPtr tr(train), te(test);
    const std::string train_path = a.out + ".train.ddc";
    const std::string test_path = a.out + ".test.ddc";
    check(ddnet_dataset_save_canonical(tr.get(), train_path.c_str()), "writing " + train_path);
    std::printf("wrote %s (%zu samples)\n", train_path.c_str(), ddnet_dataset_size(tr.get()));
    if (ddnet_dataset_size(te.get()) > 0) {
        check(ddnet_dataset_save_canonical(te.get(), test_path.c_str()), "writing " + test_path);
        std::printf("wrote %s (%zu samples)\n", test_path.c_str(), ddnet_dataset_size(te.get()));
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ddnet: skeleton-based action recognition (train, eval, features, bench, convert)"};
    app.require_subcommand(1);
    const std::vector<std::string> kinds = {"shrec14", "shrec28", "canonical"};

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "Train a model and write weights plus per-epoch history");
    train->add_option("--data", ta.data, "Dataset root (shrec) or canonical training file")->required();
    train->add_option("--dataset", ta.dataset, "Dataset kind (default: shrec14 for a directory, canonical for a file)")->check(CLI::IsMember(kinds));
    train->add_option("--test", ta.test, "Canonical test/validation file (canonical datasets only)");
    train->add_option("--filters", ta.filters, "Base channel width")->check(CLI::PositiveNumber);
    train->add_option("--epochs", ta.epochs, "Training epochs")->check(CLI::PositiveNumber);
    train->add_option("--batch", ta.batch, "Batch size (0 = full batch)");
    train->add_option("--seq-len", ta.seq_len, "Frames per resampled sequence (multiple of 8)");
    train->add_option("--seed", ta.seed, "Random seed");
    train->add_option("--lr-max", ta.lr_max, "Initial learning rate");
    train->add_option("--lr-min", ta.lr_min, "Learning-rate floor");
    train->add_option("--patience", ta.patience, "Plateau epochs before the learning rate halves");
    train->add_option("--lr-factor", ta.factor, "Learning-rate reduction factor");
    train->add_option("--augment", ta.augment, "Fraction of frames kept by temporal augmentation");
    train->add_option("--dropout", ta.dropout, "Dropout rate before the classifier");
    train->add_option("--streams", ta.streams, "Enabled input streams, e.g. jcd,slow,fast");
    train->add_option("--out", ta.out, "Weights output path");
    train->add_option("--history", ta.history, "History CSV output path");
    train->add_flag("--verbose", ta.verbose, "Print every epoch to stderr");

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "Evaluate weights on a dataset");
    eval->add_option("--weights", ea.weights, "Weights file")->required();
    eval->add_option("--data", ea.data, "Dataset root (shrec) or canonical file")->required();
    eval->add_option("--dataset", ea.dataset, "Dataset kind (default: shrec14 for a directory, canonical for a file)")->check(CLI::IsMember(kinds));
    eval->add_option("--split", ea.split, "SHREC split to evaluate")->check(CLI::IsMember({"train", "test"}));
    eval->add_option("--confusion", ea.confusion, "Confusion matrix CSV output path");

    FeaturesArgs fa;
    auto* features = app.add_subcommand("features", "Dump the feature bundle of one sample as CSV");
    features->add_option("--data", fa.data, "Dataset root (shrec) or canonical file")->required();
    features->add_option("--dataset", fa.dataset, "Dataset kind (default: shrec14 for a directory, canonical for a file)")->check(CLI::IsMember(kinds));
    features->add_option("--split", fa.split, "SHREC split")->check(CLI::IsMember({"train", "test"}));
    features->add_option("--sample", fa.sample, "Sample id or index");
    features->add_option("--seq-len", fa.seq_len, "Frames per resampled sequence");
    features->add_option("--out", fa.out, "CSV output path ('-' for stdout)");

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Measure end-to-end inference throughput");
    bench->add_option("--filters", ba.filters, "Base channel width")->check(CLI::PositiveNumber);
    bench->add_option("--batch", ba.batch, "Sequences per batch")->check(CLI::PositiveNumber);
    bench->add_option("--iterations", ba.iterations, "Batches per measured run")->check(CLI::PositiveNumber);
    bench->add_option("--runs", ba.runs, "Measured runs")->check(CLI::Range(1, DDNET_BENCH_MAX_RUNS));
    bench->add_option("--warmup", ba.warmup, "Unmeasured warm-up batches");
    bench->add_option("--threads", ba.threads, "Worker threads")->check(CLI::PositiveNumber);
    bench->add_option("--seed", ba.seed, "Random seed");
    bench->add_option("--weights", ba.weights, "Weights file (default: random weights)");
    bench->add_option("--json", ba.json, "Also write the report as JSON");

    ConvertArgs ca;
    auto* convert = app.add_subcommand("convert", "Convert a source dataset to canonical files");
    convert->add_option("--from", ca.from, "Source format")->check(CLI::IsMember({"shrec"}));
    convert->add_option("--root", ca.root, "Source dataset root")->required();
    convert->add_option("--out", ca.out, "Output prefix (writes PREFIX.train.ddc, PREFIX.test.ddc)")->required();
    convert->add_option("--labels", ca.labels, "SHREC label mode")->check(CLI::IsMember({14, 28}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*train) return run_train(ta);
        if (*eval) return run_eval(ea);
        if (*features) return run_features(fa);
        if (*bench) return run_bench(ba);
        if (*convert) return run_convert(ca);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
