#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "ddnet/ddnet.h"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const std::string kFixtures = DDNET_FIXTURES;

struct Datasets {
    ddnet_dataset* train = nullptr;
    ddnet_dataset* test = nullptr;
    Datasets() { REQUIRE(ddnet_dataset_load_shrec((kFixtures + "/shrec_mini").c_str(), 14, &train, &test) == DDNET_OK); }
    ~Datasets() {
        ddnet_dataset_free(train);
        ddnet_dataset_free(test);
    }
};

ddnet_model_config config_for(const ddnet_dataset* ds, size_t filters) {
    ddnet_model_config c;
    ddnet_model_config_default(&c);
    c.filters = filters;
    c.num_joints = ddnet_dataset_num_joints(ds);
    c.coord_dim = ddnet_dataset_coord_dim(ds);
    c.num_classes = ddnet_dataset_num_classes(ds);
    return c;
}

}  // namespace

TEST_CASE("version and status strings") {
    CHECK(std::string(ddnet_version()).size() > 0);
    CHECK(std::string(ddnet_status_string(DDNET_ERR_CORRUPT)).size() > 0);
}

TEST_CASE("dataset accessors") {
    Datasets d;
    CHECK(ddnet_dataset_size(d.train) == 12);
    CHECK(ddnet_dataset_size(d.test) == 6);
    CHECK(ddnet_dataset_num_joints(d.train) == 22);
    CHECK(ddnet_dataset_coord_dim(d.train) == 3);
    CHECK(ddnet_dataset_num_classes(d.train) == 3);
    CHECK(std::string(ddnet_dataset_class_name(d.train, 1)) == "Tap");
    CHECK(std::string(ddnet_dataset_sample_id(d.train, 0)) == "g1_f1_s1_e1");
    CHECK(ddnet_dataset_sample_frames(d.train, 0) == 2);
    CHECK(ddnet_dataset_sample_label(d.train, 11) == 2);
    size_t idx = 99;
    CHECK(ddnet_dataset_find(d.train, "g2_f1_s1_e1", &idx) == DDNET_OK);
    CHECK(idx == 4);
    CHECK(ddnet_dataset_find(d.train, "nope", &idx) == DDNET_ERR_NOT_FOUND);
    CHECK(std::string(ddnet_last_error()).find("nope") != std::string::npos);
    CHECK(ddnet_dataset_class_name(d.train, 50) == nullptr);
}

TEST_CASE("bad arguments are reported, not crashed on") {
    ddnet_dataset* a = nullptr;
    ddnet_dataset* b = nullptr;
    CHECK(ddnet_dataset_load_shrec(nullptr, 14, &a, &b) == DDNET_ERR_INVALID_ARGUMENT);
    CHECK(ddnet_dataset_load_shrec("/no/such/root", 14, &a, &b) == DDNET_ERR_IO);
    CHECK(a == nullptr);
    CHECK(ddnet_dataset_load_canonical("/no/such/file.ddc", &a) == DDNET_ERR_IO);
    ddnet_model* m = nullptr;
    ddnet_model_config c;
    ddnet_model_config_default(&c);
    c.seq_len = 30;
    CHECK(ddnet_model_create(&c, 0, &m) == DDNET_ERR_CONFIG);
    CHECK(m == nullptr);
    ddnet_dataset_free(nullptr);
    ddnet_model_free(nullptr);
}

TEST_CASE("canonical round trip through the C API") {
    Datasets d;
    const auto path = (fs::temp_directory_path() / "ddnet_capi_rt.ddc").string();
    REQUIRE(ddnet_dataset_save_canonical(d.train, path.c_str()) == DDNET_OK);
    ddnet_dataset* back = nullptr;
    REQUIRE(ddnet_dataset_load_canonical(path.c_str(), &back) == DDNET_OK);
    CHECK(ddnet_dataset_size(back) == 12);
    std::vector<float> a(32 * 231), b(32 * 231), s1(32 * 66), s2(32 * 66), f1(16 * 66), f2(16 * 66);
    for (size_t i = 0; i < 12; ++i) {
        REQUIRE(ddnet_dataset_features(d.train, i, 32, a.data(), s1.data(), f1.data()) == DDNET_OK);
        REQUIRE(ddnet_dataset_features(back, i, 32, b.data(), s2.data(), f2.data()) == DDNET_OK);
        CHECK(a == b);
        CHECK(s1 == s2);
        CHECK(f1 == f2);
    }
    ddnet_dataset_free(back);
    fs::remove(path);
}

TEST_CASE("features of a 3-4-5 pair") {
    ddnet_feature_dims dims;
    REQUIRE(ddnet_feature_dims_for(2, 3, 4, &dims) == DDNET_OK);
    CHECK(dims.jcd_cols == 1);
    CHECK(dims.motion_cols == 6);
    CHECK(dims.fast_len == 2);
    const float coords[] = {0, 0, 0, 3, 4, 0, 0, 0, 0, 3, 4, 0};
    std::vector<float> jcd(4), slow(24), fast(12);
    REQUIRE(ddnet_features_compute(coords, 2, 2, 3, 4, jcd.data(), slow.data(), fast.data()) == DDNET_OK);
    for (float v : jcd) CHECK(v == 5.0f);
    for (float v : slow) CHECK(v == 0.0f);
    CHECK(ddnet_features_compute(coords, 2, 2, 3, 5, jcd.data(), slow.data(), fast.data()) ==
          DDNET_ERR_INVALID_ARGUMENT);
}

TEST_CASE("param count through the C API") {
    ddnet_model_config c;
    ddnet_model_config_default(&c);
    size_t n = 0;
    REQUIRE(ddnet_param_count(&c, &n) == DDNET_OK);
    CHECK(n > 1500000);
    CHECK(n < 2100000);
}

TEST_CASE("train, save, load, evaluate and predict") {
    Datasets d;
    auto mc = config_for(d.train, 8);
    ddnet_train_config tc;
    ddnet_train_config_default(&tc);
    tc.epochs = 6;
    tc.batch_size = 0;
    size_t calls = 0;
    ddnet_model* model = nullptr;
    ddnet_history* hist = nullptr;
    auto cb = [](const ddnet_epoch_record*, void* user) { ++*static_cast<size_t*>(user); };
    REQUIRE(ddnet_train(d.train, d.test, &mc, &tc, cb, &calls, &model, &hist) == DDNET_OK);
    CHECK(calls == 6);
    CHECK(ddnet_history_size(hist) == 6);
    ddnet_epoch_record rec;
    CHECK(ddnet_history_get(hist, 0, &rec) == DDNET_OK);
    CHECK(rec.lr == doctest::Approx(1e-3));
    CHECK(ddnet_history_get(hist, 6, &rec) == DDNET_ERR_NOT_FOUND);
    CHECK(ddnet_history_best_epoch(hist) < 6);

    const auto path = (fs::temp_directory_path() / "ddnet_capi_model.ddw").string();
    REQUIRE(ddnet_model_save(model, path.c_str()) == DDNET_OK);
    ddnet_model* loaded = nullptr;
    REQUIRE(ddnet_model_load(path.c_str(), &loaded) == DDNET_OK);
    ddnet_model_config got;
    REQUIRE(ddnet_model_get_config(loaded, &got) == DDNET_OK);
    CHECK(got.filters == 8);
    CHECK(got.num_classes == 3);

    double acc_a = -1, acc_b = -1;
    std::vector<int64_t> confusion(9);
    REQUIRE(ddnet_evaluate(model, d.test, &acc_a, confusion.data(), confusion.size()) == DDNET_OK);
    REQUIRE(ddnet_evaluate(loaded, d.test, &acc_b, nullptr, 0) == DDNET_OK);
    CHECK(acc_a == acc_b);
    int64_t total = 0;
    for (auto v : confusion) total += v;
    CHECK(total == 6);
    CHECK(ddnet_evaluate(model, d.test, &acc_a, confusion.data(), 4) == DDNET_ERR_BUFFER_TOO_SMALL);

    // Concurrent predictions on one shared model.
    std::vector<float> coords(20 * 66);
    for (size_t i = 0; i < coords.size(); ++i) coords[i] = std::sin(0.1f * float(i));
    int expect = -1;
    std::vector<float> probs(3);
    REQUIRE(ddnet_model_predict(loaded, coords.data(), 20, &expect, probs.data()) == DDNET_OK);
    CHECK(probs[0] + probs[1] + probs[2] == doctest::Approx(1.0f));
    std::vector<int> got_ids(4, -1);
    std::vector<std::thread> pool;
    for (int t = 0; t < 4; ++t) {
        pool.emplace_back([&, t] { ddnet_model_predict(loaded, coords.data(), 20, &got_ids[size_t(t)], nullptr); });
    }
    for (auto& th : pool) th.join();
    for (int id : got_ids) CHECK(id == expect);

    // Corrupted file.
    {
        FILE* f = std::fopen(path.c_str(), "r+b");
        std::fseek(f, 200, SEEK_SET);
        std::fputc(0x5a, f);
        std::fclose(f);
    }
    ddnet_model* broken = nullptr;
    CHECK(ddnet_model_load(path.c_str(), &broken) == DDNET_ERR_CORRUPT);
    CHECK(broken == nullptr);

    ddnet_model_free(loaded);
    ddnet_model_free(model);
    ddnet_history_free(hist);
    fs::remove(path);
}

TEST_CASE("train rejects a config that does not fit the data") {
    Datasets d;
    auto mc = config_for(d.train, 4);
    mc.num_joints = 15;
    ddnet_train_config tc;
    ddnet_train_config_default(&tc);
    tc.epochs = 1;
    ddnet_model* model = nullptr;
    ddnet_history* hist = nullptr;
    CHECK(ddnet_train(d.train, nullptr, &mc, &tc, nullptr, nullptr, &model, &hist) != DDNET_OK);
    CHECK(model == nullptr);
}

TEST_CASE("benchmark and its JSON") {
    ddnet_bench_config c;
    ddnet_bench_config_default(&c);
    c.batch = 2;
    c.iterations = 1;
    ddnet_bench_report r;
    REQUIRE(ddnet_bench_run(&c, nullptr, &r) == DDNET_OK);
    CHECK(r.sequences == 2);
    CHECK(r.runs == 5);
    CHECK(r.throughput > 0);
    size_t needed = 0;
    CHECK(ddnet_bench_report_json(&r, nullptr, 0, &needed) == DDNET_ERR_BUFFER_TOO_SMALL);
    CHECK(needed > 10);
    std::vector<char> buf(needed);
    REQUIRE(ddnet_bench_report_json(&r, buf.data(), buf.size(), &needed) == DDNET_OK);
    CHECK(std::strlen(buf.data()) + 1 == needed);
    CHECK(std::string(buf.data()).find("\"throughput\"") != std::string::npos);
}
