#include <htree/htree.hpp>
#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace {

using namespace htree;

void print_matrices(const TreeEncoding& enc, std::ostream& os)
{
    os << "masks (" << enc.num_levels() << " x " << enc.num_classes() << ")\n";
    for (Eigen::Index l = 0; l < enc.masks().rows(); ++l) {
        for (Eigen::Index c = 0; c < enc.masks().cols(); ++c) os << (c ? " " : "") << (enc.masks()(l, c) ? 1 : 0);
        os << '\n';
    }
    os << "paths (" << enc.num_classes() << " x " << enc.num_levels() << ")\n";
    for (Eigen::Index c = 0; c < enc.paths().rows(); ++c) {
        for (Eigen::Index l = 0; l < enc.paths().cols(); ++l) {
            const index_t v = enc.paths()(c, l);
            os << (l ? " " : "") << (v == pad_value ? pad_value : v + 1);
        }
        os << '\n';
    }
}

void print_path_labels(const path_label_matrix_type& paths, std::ostream& os)
{
    for (Eigen::Index b = 0; b < paths.rows(); ++b) {
        for (Eigen::Index l = 0; l < paths.cols(); ++l) {
            const label_t v = paths(b, l);
            os << (l ? " " : "") << (v == pad_value ? label_t(pad_value) : v + 1);
        }
        os << '\n';
    }
}

MaskValue parse_mask(const std::string& name)
{
    return name == "nan" ? MaskValue::not_a_number() : MaskValue::neg_inf();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hierarchical classification transforms over an encoded class tree"};
    app.require_subcommand(1);

    // encode
    auto* encode_cmd = app.add_subcommand("encode", "Encode an edge list or synthetic tree into an HTRE file");
    std::string edges_path, encode_out, policy_name = "first";
    index_t synth_classes = 0, synth_levels = 0;
    std::uint64_t synth_seed = 0;
    bool encode_print = false;
    auto* edges_opt = encode_cmd->add_option("--edges", edges_path, "child<TAB>parent edge list (1-based ids)")
                          ->check(CLI::ExistingFile);
    auto* synth_opt = encode_cmd->add_option("--synthetic-classes", synth_classes, "generate a synthetic tree instead");
    encode_cmd->add_option("--synthetic-levels", synth_levels, "levels of the synthetic tree")->needs(synth_opt);
    encode_cmd->add_option("--seed", synth_seed, "synthetic generator seed");
    edges_opt->excludes(synth_opt);
    encode_cmd->add_option("--policy", policy_name, "multi-parent policy")->check(CLI::IsMember({"first", "reject"}));
    encode_cmd->add_option("-o,--out", encode_out, "output encoding file");
    encode_cmd->add_flag("--print", encode_print, "print both matrices 1-based");

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "Check every invariant of an encoding file");
    std::string validate_in;
    bool validate_print = false;
    validate_cmd->add_option("encoding", validate_in)->required()->check(CLI::ExistingFile);
    validate_cmd->add_flag("--print", validate_print, "print both matrices 1-based");

    // transform-scores
    auto* scores_cmd = app.add_subcommand("transform-scores", "Partition a score batch by level of depth");
    std::string ts_encoding, ts_scores, ts_out, ts_mask = "neginf";
    unsigned ts_threads = 1;
    scores_cmd->add_option("--encoding", ts_encoding)->required()->check(CLI::ExistingFile);
    scores_cmd->add_option("--scores", ts_scores, "HTSB or CSV score batch")->required()->check(CLI::ExistingFile);
    scores_cmd->add_option("--mask-value", ts_mask)->check(CLI::IsMember({"neginf", "nan"}));
    scores_cmd->add_option("-o,--out", ts_out, "write the partitioned tensor (HTPS)");
    scores_cmd->add_option("--threads", ts_threads)->check(CLI::PositiveNumber);

    // transform-labels
    auto* labels_cmd = app.add_subcommand("transform-labels", "Map labels to their ancestral paths");
    std::string tl_encoding, tl_labels, tl_out;
    bool tl_print = false;
    labels_cmd->add_option("--encoding", tl_encoding)->required()->check(CLI::ExistingFile);
    labels_cmd->add_option("--labels", tl_labels, "HTLB or CSV labels (1-based)")->required()->check(CLI::ExistingFile);
    labels_cmd->add_option("-o,--out", tl_out, "write path labels (HTPL)");
    labels_cmd->add_flag("--print", tl_print, "print path rows 1-based, pad as -1");

    // flatten
    auto* flatten_cmd = app.add_subcommand("flatten", "Flatten (b, l) and drop padding rows for training");
    std::string fl_parts, fl_paths, fl_out;
    bool fl_loss = false;
    flatten_cmd->add_option("--partitioned", fl_parts, "HTPS file")->required()->check(CLI::ExistingFile);
    flatten_cmd->add_option("--paths", fl_paths, "HTPL file")->required()->check(CLI::ExistingFile);
    flatten_cmd->add_option("-o,--out", fl_out, "write the flat training set (HTFT)");
    flatten_cmd->add_flag("--loss", fl_loss, "also print the mean cross-entropy");

    // decode
    auto* decode_cmd = app.add_subcommand("decode", "Decode valid paths from a score batch");
    std::string dc_encoding, dc_scores, dc_method = "beam", dc_mask = "neginf";
    std::size_t dc_k = 1;
    bool dc_normalized = false;
    decode_cmd->add_option("--encoding", dc_encoding)->required()->check(CLI::ExistingFile);
    decode_cmd->add_option("--scores", dc_scores)->required()->check(CLI::ExistingFile);
    decode_cmd->add_option("--method", dc_method)->check(CLI::IsMember({"beam", "levenshtein"}));
    decode_cmd->add_option("--k", dc_k, "paths per sample")->check(CLI::PositiveNumber);
    decode_cmd->add_option("--mask-value", dc_mask)->check(CLI::IsMember({"neginf", "nan"}));
    decode_cmd->add_flag("--length-normalized", dc_normalized, "rank beam paths by mean log-probability");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Memory accounting and timings on a synthetic or given tree");
    std::string bn_encoding;
    index_t bn_classes = 117659, bn_levels = 20;
    std::uint64_t bn_batch = 100, bn_seed = 0;
    int bn_reps = 5;
    unsigned bn_threads = 1;
    bool bn_no_baseline = false, bn_kv = false;
    bench_cmd->add_option("--encoding", bn_encoding, "use this tree instead of a synthetic one")->check(CLI::ExistingFile);
    bench_cmd->add_option("--classes", bn_classes);
    bench_cmd->add_option("--levels", bn_levels);
    bench_cmd->add_option("--batch", bn_batch);
    bench_cmd->add_option("--reps", bn_reps)->check(CLI::Range(3, 1000000));
    bench_cmd->add_option("--seed", bn_seed);
    bench_cmd->add_option("--threads", bn_threads)->check(CLI::PositiveNumber);
    bench_cmd->add_flag("--no-baseline", bn_no_baseline, "skip the parent-walk baseline");
    bench_cmd->add_flag("--kv", bn_kv, "print only key=value lines");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (encode_cmd->parsed()) {
            Taxonomy taxonomy;
            if (!edges_path.empty()) {
                std::ifstream in(edges_path, std::ios::binary);
                const auto policy = policy_name == "reject" ? MultiParentPolicy::reject : MultiParentPolicy::first;
                auto parsed = parse_edge_list(in, policy);
                for (const auto& r : parsed.resolutions) {
                    std::cerr << "class " << r.child.one_based() << ": kept "
                              << (r.kept ? std::to_string(r.kept->one_based()) : std::string("root")) << ", dropped "
                              << r.dropped.size() << " other parent(s)\n";
                }
                taxonomy = std::move(parsed.taxonomy);
            }
            else if (synth_classes > 0) {
                taxonomy = generate_synthetic({synth_classes, synth_levels, synth_seed, {}});
            }
            else {
                throw ParameterError("encode needs --edges or --synthetic-classes");
            }
            const auto enc = encode(taxonomy);
            if (!encode_out.empty()) io::save_encoding(encode_out, enc);
            std::cout << "encoded " << enc.num_classes() << " classes in " << enc.num_levels() << " levels\n";
            if (encode_print) print_matrices(enc, std::cout);
        }
        else if (validate_cmd->parsed()) {
            const auto enc = io::load_encoding(validate_in, false);
            if (validate_print) print_matrices(enc, std::cout);
            const auto report = validate(enc);
            if (!report.ok()) {
                std::cout << report.to_string();
                std::cerr << "htree: " << report.violations.size() << " violation(s)\n";
                return 1;
            }
            std::cout << "valid: " << enc.num_classes() << " classes, " << enc.num_levels() << " levels\n";
        }
        else if (scores_cmd->parsed()) {
            const auto enc = io::load_encoding(ts_encoding);
            const auto scores = io::load_scores(ts_scores);
            const auto parts = partition_scores(enc, scores, parse_mask(ts_mask), ts_threads);
            const auto unmasked = (enc.masks() == false).count() * parts.batch;
            std::cout << "partitioned " << parts.batch << " x " << parts.levels << " x " << parts.classes() << ": "
                      << unmasked << " scores kept, " << parts.data.size() - unmasked << " masked\n";
            if (!ts_out.empty()) io::write_file(ts_out, io::serialize_partitioned(parts));
        }
        else if (labels_cmd->parsed()) {
            const auto enc = io::load_encoding(tl_encoding);
            const auto labels = io::load_labels(tl_labels);
            const auto paths = map_labels(enc, labels);
            std::cout << "mapped " << paths.rows() << " labels to paths of " << paths.cols() << " levels\n";
            if (tl_print) print_path_labels(paths, std::cout);
            if (!tl_out.empty()) io::write_file(tl_out, io::serialize_path_labels(paths));
        }
        else if (flatten_cmd->parsed()) {
            const auto parts = io::deserialize_partitioned(io::read_file(fl_parts));
            const auto paths = io::deserialize_path_labels(io::read_file(fl_paths));
            const auto flat = flatten_for_training(parts, paths);
            std::cout << "retained " << flat.size() << " of " << paths.size() << " rows\n";
            if (fl_loss) {
                std::cout << std::fixed << std::setprecision(6) << "mean cross-entropy " << cross_entropy(flat).loss
                          << '\n';
            }
            if (!fl_out.empty()) io::write_file(fl_out, io::serialize_flat(flat));
        }
        else if (decode_cmd->parsed()) {
            const auto enc = io::load_encoding(dc_encoding);
            const auto scores = io::load_scores(dc_scores);
            const auto probs = softmax_levels(partition_scores(enc, scores, parse_mask(dc_mask)));
            DecodedBatch decoded;
            if (dc_method == "beam") {
                decoded = beam_decode(enc, probs, dc_k, dc_normalized ? PathScoring::length_normalized : PathScoring::joint);
            }
            else {
                decoded = levenshtein_decode(enc, naive_decode(probs), dc_k, probs);
            }
            std::cout << std::fixed << std::setprecision(6);
            for (std::size_t b = 0; b < decoded.size(); ++b) {
                for (std::size_t r = 0; r < decoded[b].size(); ++r) {
                    const auto& d = decoded[b][r];
                    std::cout << b + 1 << ' ' << r + 1 << ' ';
                    if (d.distance) std::cout << static_cast<double>(*d.distance);
                    else std::cout << d.log_prob.value_or(0.0);
                    for (const auto& c : d.classes) std::cout << ' ' << c.one_based();
                    std::cout << '\n';
                }
            }
        }
        else if (bench_cmd->parsed()) {
            const auto enc = bn_encoding.empty() ? encode(generate_synthetic({bn_classes, bn_levels, bn_seed, {}}))
                                                 : io::load_encoding(bn_encoding);
            bench::BenchOptions options;
            options.reps = bn_reps;
            options.threads = bn_threads;
            options.seed = bn_seed;
            options.run_baseline = !bn_no_baseline;
            const auto report = bench::run_bench(enc, bn_batch, options);
            if (!bn_kv) std::cout << report.table() << '\n';
            std::cout << report.key_values();
        }
    }
    catch (const std::exception& e) {
        std::cerr << "htree: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
