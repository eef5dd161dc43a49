#include <htree/bench.hpp>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace htree::bench {
namespace {

template <class T>
void keep_alive(const T& value)
{
    asm volatile("" : : "g"(value) : "memory");
}

ScoreBatch<float> random_scores(std::uint64_t batch, index_t classes, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal(0.0f, 1.0f);
    ScoreBatch<float> scores(static_cast<Eigen::Index>(batch), classes);
    for (Eigen::Index i = 0; i < scores.size(); ++i) scores.data()[i] = normal(rng);
    return scores;
}

label_vector_type random_labels(std::uint64_t batch, index_t classes, std::uint64_t seed)
{
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_int_distribution<label_t> pick(0, classes - 1);
    label_vector_type labels(static_cast<Eigen::Index>(batch));
    for (Eigen::Index b = 0; b < labels.size(); ++b) labels(b) = pick(rng);
    return labels;
}

std::string megabytes(std::uint64_t bytes)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << double(bytes) / (1024.0 * 1024.0);
    return os.str();
}

} // namespace

ByteAccounting byte_accounting(std::uint64_t batch, std::uint64_t classes, std::uint64_t levels)
{
    ByteAccounting acc;
    acc.scores = batch * classes * sizeof(float);
    acc.labels = batch * sizeof(label_t);
    acc.partitioned = batch * levels * classes * sizeof(float);
    acc.path_labels = batch * levels * sizeof(label_t);
    return acc;
}

std::uint64_t available_memory()
{
    std::ifstream in("/proc/meminfo");
    std::string key;
    std::uint64_t value = 0;
    std::string unit;
    while (in >> key >> value >> unit) {
        if (key == "MemAvailable:") return value * 1024;
    }
    return 0;
}

PartitionedScores<float> baseline_partition(const TreeEncoding& enc, const ScoreBatch<float>& scores, MaskValue mu)
{
    if (scores.cols() != enc.num_classes()) throw ShapeError("score batch does not match the encoding");
    const Eigen::Index levels = enc.num_levels();
    const float fill = mu.value<float>();
    PartitionedScores<float> out;
    out.batch = scores.rows();
    out.levels = levels;
    out.mask_value = mu;
    out.data.resize(scores.rows() * levels, scores.cols());
    for (Eigen::Index b = 0; b < scores.rows(); ++b) {
        for (Eigen::Index l = 0; l < levels; ++l) {
            for (Eigen::Index c = 0; c < scores.cols(); ++c) {
                const bool here = enc.level_of(ClassId(static_cast<index_t>(c))).value == l;
                out.data(b * levels + l, c) = here ? scores(b, c) : fill;
            }
        }
    }
    return out;
}

path_label_matrix_type baseline_map_labels(const TreeEncoding& enc, const label_vector_type& labels)
{
    path_label_matrix_type out = path_label_matrix_type::Constant(labels.size(), enc.num_levels(), pad_value);
    std::vector<index_t> chain;
    for (Eigen::Index b = 0; b < labels.size(); ++b) {
        if (labels(b) < 0 || labels(b) >= enc.num_classes()) {
            throw LabelError(b, labels(b), "label out of range");
        }
        chain.clear();
        for (std::optional<ClassId> c = ClassId(static_cast<index_t>(labels(b))); c; c = enc.parent(*c)) {
            chain.push_back(c->value);
        }
        for (std::size_t i = 0; i < chain.size(); ++i) out(b, static_cast<Eigen::Index>(i)) = chain[chain.size() - 1 - i];
    }
    return out;
}

double time_partition_scores(const TreeEncoding& enc, std::uint64_t batch, int reps, std::uint64_t seed, unsigned threads)
{
    const auto scores = random_scores(batch, enc.num_classes(), seed);
    float sink = 0;
    const double ns = median_ns(reps, [&] {
        const auto parts = partition_scores(enc, scores, MaskValue::neg_inf(), threads);
        sink += parts.data(0, 0);
    });
    keep_alive(sink);
    return ns;
}

double time_map_labels(const TreeEncoding& enc, std::uint64_t batch, int reps, std::uint64_t seed, int repeats)
{
    if (repeats < 1) throw ParameterError("repeats must be positive");
    const auto labels = random_labels(batch, enc.num_classes(), seed);
    label_t sink = 0;
    const double ns = median_ns(reps, [&] {
        for (int i = 0; i < repeats; ++i) {
            const auto paths = map_labels(enc, labels);
            sink += paths(0, 0);
        }
    });
    keep_alive(sink);
    return ns / repeats;
}

BenchReport run_bench(const TreeEncoding& enc, std::uint64_t batch, const BenchOptions& options)
{
    if (options.reps < 3) throw ParameterError("bench needs at least 3 repetitions");
    if (batch == 0) throw ParameterError("batch size must be positive");

    BenchReport report;
    report.classes = enc.num_classes();
    report.levels = enc.num_levels();
    report.batch = batch;
    report.reps = options.reps;
    report.threads = options.threads;
    report.bytes = byte_accounting(batch, static_cast<std::uint64_t>(enc.num_classes()),
                                   static_cast<std::uint64_t>(enc.num_levels()));
    const auto storage = storage_bytes(enc, sizeof(bool), sizeof(index_t));
    report.encoding_closed_form = storage.closed_form;
    report.encoding_measured = storage.measured;

    // Scores, one partitioned tensor in flight, and the same for the baseline.
    const std::uint64_t required = report.bytes.scores + report.bytes.partitioned * (options.run_baseline ? 2 : 1);
    const std::uint64_t limit = options.memory_limit ? options.memory_limit : available_memory();
    if (limit != 0 && required > limit) {
        throw ResourceError("bench needs " + std::to_string(required) + " bytes (" + megabytes(required) +
                            " MB) for the partitioned tensor but only " + std::to_string(limit) +
                            " bytes are available; reduce --batch");
    }

    report.partition_ns = time_partition_scores(enc, batch, options.reps, options.seed, options.threads);
    report.map_labels_ns = time_map_labels(enc, batch, options.reps, options.seed, options.label_repeats);

    if (options.run_baseline) {
        const auto scores = random_scores(batch, enc.num_classes(), options.seed);
        const auto labels = random_labels(batch, enc.num_classes(), options.seed);
        float sink = 0;
        report.baseline_partition_ns = median_ns(options.reps, [&] {
            sink += baseline_partition(enc, scores).data(0, 0);
        });
        label_t lsink = 0;
        report.baseline_map_labels_ns = median_ns(options.reps, [&] {
            for (int i = 0; i < options.label_repeats; ++i) lsink += baseline_map_labels(enc, labels)(0, 0);
        }) / options.label_repeats;
        keep_alive(sink);
        keep_alive(lsink);
    }
    return report;
}

std::string BenchReport::table() const
{
    std::ostringstream os;
    auto row = [&](const std::string& name, const std::string& shape, const std::string& type, std::uint64_t b) {
        os << std::left << std::setw(24) << name << std::setw(22) << shape << std::setw(10) << type << std::right
           << std::setw(14) << b << std::setw(10) << megabytes(b) << '\n';
    };
    const auto bs = std::to_string(batch);
    const auto ls = std::to_string(levels);
    const auto cs = std::to_string(classes);
    os << "tree: " << classes << " classes, " << levels << " levels; batch " << batch << "; reps " << reps
       << "; threads " << threads << "\n\n";
    os << std::left << std::setw(24) << "object" << std::setw(22) << "shape" << std::setw(10) << "type" << std::right
       << std::setw(14) << "bytes" << std::setw(10) << "MB" << '\n';
    row("scores", bs + " x " + cs, "float32", bytes.scores);
    row("labels", bs, "int64", bytes.labels);
    row("partitioned scores", bs + " x " + ls + " x " + cs, "float32", bytes.partitioned);
    row("path labels", bs + " x " + ls, "int64", bytes.path_labels);
    row("total for data", "-", "-", bytes.data_total());
    row("encoding (closed form)", ls + " x " + cs, "bool+i32", encoding_closed_form);
    row("encoding (measured)", "-", "-", encoding_measured);
    os << '\n' << std::fixed << std::setprecision(1);
    os << std::left << std::setw(24) << "operation" << std::right << std::setw(18) << "median ns" << std::setw(18)
       << "baseline ns" << '\n';
    auto timing = [&](const std::string& name, double ns, double base) {
        os << std::left << std::setw(24) << name << std::right << std::setw(18) << ns << std::setw(18);
        if (base < 0) os << "-";
        else os << base;
        os << '\n';
    };
    timing("partition_scores", partition_ns, baseline_partition_ns);
    timing("map_labels", map_labels_ns, baseline_map_labels_ns);
    return os.str();
}

std::string BenchReport::key_values() const
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(1);
    os << "classes=" << classes << '\n'
       << "levels=" << levels << '\n'
       << "batch=" << batch << '\n'
       << "reps=" << reps << '\n'
       << "threads=" << threads << '\n'
       << "scores_bytes=" << bytes.scores << '\n'
       << "labels_bytes=" << bytes.labels << '\n'
       << "partitioned_bytes=" << bytes.partitioned << '\n'
       << "path_labels_bytes=" << bytes.path_labels << '\n'
       << "data_total_bytes=" << bytes.data_total() << '\n'
       << "encoding_closed_form_bytes=" << encoding_closed_form << '\n'
       << "encoding_measured_bytes=" << encoding_measured << '\n'
       << "partition_scores_ns=" << partition_ns << '\n'
       << "map_labels_ns=" << map_labels_ns << '\n';
    if (baseline_partition_ns >= 0) {
        os << "baseline_partition_ns=" << baseline_partition_ns << '\n'
           << "baseline_map_labels_ns=" << baseline_map_labels_ns << '\n';
    }
    return os.str();
}

} // namespace htree::bench
