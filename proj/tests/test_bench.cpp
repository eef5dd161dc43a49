#include <doctest.h>
#include <htree/bench.hpp>
#include <htree/ingestion.hpp>
#include "oracles.hpp"
#include "toy.hpp"

using namespace htree;

TEST_CASE("byte accounting at WordNet scale")
{
    const auto acc = bench::byte_accounting(100, 117659, 20);
    CHECK(acc.scores == 47063600);
    CHECK(acc.partitioned == 941272000);
    CHECK(acc.labels == 800);
    CHECK(acc.path_labels == 16000);
    // one-decimal MB as printed in the memory table
    CHECK(std::round(double(acc.scores) / (1 << 20) * 10) / 10 == 44.9);
    CHECK(std::round(double(acc.partitioned) / (1 << 20) * 10) / 10 == 897.7);
    CHECK(std::round(double(acc.scores + acc.partitioned + acc.labels + acc.path_labels) / (1 << 20) * 10) / 10 ==
          942.6);
}

TEST_CASE("byte accounting on the toy tree")
{
    CHECK(bench::byte_accounting(5, 9, 3).partitioned == 540);
}

TEST_CASE("baselines agree with the transforms")
{
    std::mt19937_64 rng(4);
    const auto t = oracle::random_forest(300, 7, rng);
    const auto enc = encode(t);
    ScoreBatch<float> s(6, 300);
    std::normal_distribution<float> normal;
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = normal(rng);
    label_vector_type y(6);
    for (auto& v : y) v = std::uniform_int_distribution<label_t>(0, 299)(rng);

    CHECK(bench::baseline_partition(enc, s).data == partition_scores(enc, s).data);
    CHECK(bench::baseline_map_labels(enc, y) == map_labels(enc, y));
}

TEST_CASE("run_bench on the toy tree")
{
    const auto enc = encode(toy::taxonomy());
    bench::BenchOptions options;
    options.reps = 3;
    options.label_repeats = 10;
    const auto report = bench::run_bench(enc, 5, options);
    CHECK(report.bytes.partitioned == 540);
    CHECK(report.bytes.scores == 180);
    CHECK(report.encoding_closed_form == 27 * 5);
    CHECK(report.partition_ns > 0);
    CHECK(report.baseline_map_labels_ns > 0);
    const auto kv = report.key_values();
    CHECK(kv.find("partitioned_bytes=540\n") != std::string::npos);
    CHECK(kv.find("map_labels_ns=") != std::string::npos);
    CHECK(report.table().find("partitioned scores") != std::string::npos);

    options.reps = 2;
    CHECK_THROWS_AS(bench::run_bench(enc, 5, options), ParameterError);
}

TEST_CASE("run_bench refuses oversized working sets")
{
    const auto enc = encode(generate_synthetic({1000, 10, 0, {}}));
    bench::BenchOptions options;
    options.memory_limit = 1 << 20;
    try {
        bench::run_bench(enc, 1000, options);
        FAIL("expected ResourceError");
    }
    catch (const ResourceError& e) {
        CHECK(std::string(e.what()).find("84000000 bytes") != std::string::npos);
    }
}
