#pragma once
#include <htree/core.hpp>
#include <htree/transforms.hpp>
#include <htree/tree.hpp>
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

namespace htree::bench {

/// Bytes of the given and transformed data at the portable element sizes
/// (float32 scores, int64 labels).
struct ByteAccounting {
    std::uint64_t scores = 0;       // |b| * |c| * 4
    std::uint64_t labels = 0;       // |b| * 8
    std::uint64_t partitioned = 0;  // |b| * |l| * |c| * 4
    std::uint64_t path_labels = 0;  // |b| * |l| * 8

    std::uint64_t data_total() const { return scores + labels + partitioned + path_labels; }
};

ByteAccounting byte_accounting(std::uint64_t batch, std::uint64_t classes, std::uint64_t levels);

struct BenchOptions {
    int reps = 5;
    unsigned threads = 1;
    std::uint64_t seed = 0;
    /// map_labels calls per timed repetition; one call is too short to time alone.
    int label_repeats = 1000;
    /// Refuse to run when the working set exceeds this; 0 asks the OS.
    std::uint64_t memory_limit = 0;
    bool run_baseline = true;
};

struct BenchReport {
    index_t classes = 0;
    index_t levels = 0;
    std::uint64_t batch = 0;
    int reps = 0;
    unsigned threads = 1;

    ByteAccounting bytes;
    std::uint64_t encoding_closed_form = 0;  // s_bool = 1, s_int = 4
    std::uint64_t encoding_measured = 0;

    double partition_ns = 0;           // medians
    double map_labels_ns = 0;
    double baseline_partition_ns = -1; // -1 when skipped
    double baseline_map_labels_ns = -1;

    std::string table() const;
    std::string key_values() const;
};

/// Median wall time in nanoseconds of `reps` calls to `fn`, after one discarded warm-up.
template <class F>
double median_ns(int reps, F&& fn)
{
    if (reps < 1) throw ParameterError("need at least one repetition");
    fn();
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const auto stop = std::chrono::steady_clock::now();
        samples.push_back(std::chrono::duration<double, std::nano>(stop - start).count());
    }
    const auto mid = samples.begin() + static_cast<std::ptrdiff_t>(samples.size() / 2);
    std::nth_element(samples.begin(), mid, samples.end());
    return *mid;
}

BenchReport run_bench(const TreeEncoding& enc, std::uint64_t batch, const BenchOptions& options = {});

/// Median time of one partition_scores call on a random batch.
double time_partition_scores(const TreeEncoding& enc, std::uint64_t batch, int reps, std::uint64_t seed = 0,
                             unsigned threads = 1);

/// Median time of one map_labels call on a random label batch.
double time_map_labels(const TreeEncoding& enc, std::uint64_t batch, int reps, std::uint64_t seed = 0,
                       int repeats = 1000);

/// Per-element level test instead of the mask matrix; the traverse-everything approach.
PartitionedScores<float> baseline_partition(const TreeEncoding& enc, const ScoreBatch<float>& scores,
                                            MaskValue mu = MaskValue::neg_inf());

/// Walks parent links per sample instead of gathering rows of the path matrix.
path_label_matrix_type baseline_map_labels(const TreeEncoding& enc, const label_vector_type& labels);

/// Bytes the OS reports as available, or 0 when unknown.
std::uint64_t available_memory();

} // namespace htree::bench
