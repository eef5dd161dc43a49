// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <htree/htree.hpp>
#include "oracles.hpp"
#include "toy.hpp"
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace htree;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start)
{
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body)
{
    Outcome out;
    try {
        out = body();
    }
    catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failures;
    std::cout << (out.pass ? "[PASS] " : "[FAIL] ") << name << " -- " << out.detail << std::endl;
}

template <class Scalar>
ScoreBatch<Scalar> random_batch(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale)
{
    std::normal_distribution<double> normal(0.0, scale);
    ScoreBatch<Scalar> s(rows, cols);
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = static_cast<Scalar>(normal(rng));
    return s;
}

label_vector_type random_labels(Eigen::Index n, index_t classes, std::mt19937_64& rng)
{
    label_vector_type y(n);
    for (auto& v : y) v = std::uniform_int_distribution<label_t>(0, classes - 1)(rng);
    return y;
}

bool close_rel(double got, double want, double rel) { return std::abs(got - want) <= rel * std::abs(want) + 1e-12; }

std::vector<index_t> depths_of(const Taxonomy& t)
{
    std::vector<index_t> d(t.num_classes());
    for (index_t c = 0; c < t.num_classes(); ++c) d[c] = oracle::depth(t, c);
    return d;
}

label_vector_type toy_labels()
{
    label_vector_type y(5);
    for (int b = 0; b < 5; ++b) y(b) = toy::labels[b] - 1;
    return y;
}

} // namespace

int main()
{
    criterion("golden toy tree: masks and paths match the 3x9 / 9x3 matrices", [] {
        const auto start = clock_type::now();
        const auto enc = encode(toy::taxonomy());
        const double secs = seconds_since(start);
        bool ok = enc.num_levels() == 3 && enc.num_classes() == 9;
        for (int l = 0; ok && l < 3; ++l) {
            for (int c = 0; c < 9; ++c) ok = ok && int(enc.masks()(l, c)) == toy::masks[l][c];
        }
        for (int c = 0; ok && c < 9; ++c) {
            for (int l = 0; l < 3; ++l) {
                const index_t v = enc.paths()(c, l);
                ok = ok && (v == pad_value ? -1 : v + 1) == toy::paths[c][l];
            }
        }
        return Outcome{ok && secs < 1.0, "exact equality, " + std::to_string(secs) + " s (< 1 s)"};
    });

    criterion("label mapping: [4,7,2,6,3] -> ancestral path rows", [] {
        const auto paths = map_labels(encode(toy::taxonomy()), toy_labels());
        bool ok = paths.rows() == 5 && paths.cols() == 3;
        for (int b = 0; ok && b < 5; ++b) {
            for (int l = 0; l < 3; ++l) {
                const label_t v = paths(b, l);
                ok = ok && (v == pad_value ? -1 : v + 1) == toy::label_paths[b][l];
            }
        }
        return Outcome{ok, "exact equality"};
    });

    criterion("partition layout: 5x9 batch -> 5x3x9, 9 scores once + 18 mask values per slice", [] {
        const auto enc = encode(toy::taxonomy());
        ScoreBatch<float> s(5, 9);
        for (int b = 0; b < 5; ++b) {
            for (int c = 0; c < 9; ++c) s(b, c) = float(10 * (b + 1) + c + 1);
        }
        const auto parts = partition_scores(enc, s);
        bool ok = parts.batch == 5 && parts.levels == 3 && parts.classes() == 9;
        for (int b = 0; ok && b < 5; ++b) {
            int masked = 0;
            std::vector<int> seen(9, 0);
            for (int l = 0; l < 3; ++l) {
                for (int c = 0; c < 9; ++c) {
                    const float v = parts(b, l, c);
                    if (toy::masks[l][c]) {
                        ok = ok && v == -std::numeric_limits<float>::infinity();
                        ++masked;
                    }
                    else {
                        ok = ok && v == s(b, c);
                        ++seen[c];
                    }
                }
            }
            ok = ok && masked == 18 && std::all_of(seen.begin(), seen.end(), [](int n) { return n == 1; });
        }
        return Outcome{ok, "exact positional check"};
    });

    criterion("flatten/filter: 10 of 15 rows retained, labels [1,4,1,4,7,2,2,6,1,3]", [] {
        const auto enc = encode(toy::taxonomy());
        std::mt19937_64 rng(0);
        const auto flat = flatten_for_training(partition_scores(enc, random_batch<float>(5, 9, rng, 1.0)),
                                               map_labels(enc, toy_labels()));
        bool ok = flat.size() == 10 && flat.size() + flat.dropped == 15;
        for (int k = 0; ok && k < 10; ++k) ok = flat.labels(k) + 1 == toy::flat_labels[k];
        return Outcome{ok, "retained " + std::to_string(flat.size()) + " of 15"};
    });

    criterion("oracle equivalence on 100 random trees (<= 1000 classes, depth <= 8)", [] {
        const auto start = clock_type::now();
        std::mt19937_64 rng(2023);
        const double inf = std::numeric_limits<double>::infinity();
        std::size_t checked = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const auto t = oracle::random_forest(std::uniform_int_distribution<index_t>(1, 1000)(rng), 8, rng);
            const index_t n = t.num_classes();
            const auto depth = depths_of(t);
            const auto enc = encode(t);
            const index_t levels = enc.num_levels();
            const Eigen::Index batch = 6;
            const auto s = random_batch<double>(batch, n, rng, 5.0);
            const auto y = random_labels(batch, n, rng);

            const auto parts = partition_scores(enc, s);
            for (Eigen::Index b = 0; b < batch; ++b) {
                for (index_t l = 0; l < levels; ++l) {
                    for (index_t c = 0; c < n; ++c) {
                        if (parts(b, l, c) != (depth[c] == l ? s(b, c) : -inf)) {
                            return Outcome{false, "partition_scores differs at trial " + std::to_string(trial)};
                        }
                    }
                }
            }

            const auto paths = map_labels(enc, y);
            for (Eigen::Index b = 0; b < batch; ++b) {
                const auto want = oracle::padded_chain(t, static_cast<index_t>(y(b)), levels);
                for (index_t l = 0; l < levels; ++l) {
                    if (paths(b, l) != want[l]) return Outcome{false, "map_labels differs"};
                }
            }

            const auto flat = flatten_for_training(parts, paths);
            Eigen::Index want_rows = 0;
            for (auto v : y) want_rows += depth[v] + 1;
            if (flat.size() != want_rows) return Outcome{false, "flatten_for_training row count differs"};
            {
                Eigen::Index k = 0;
                for (Eigen::Index b = 0; b < batch; ++b) {
                    const auto chain = oracle::ancestor_chain(t, static_cast<index_t>(y(b)));
                    for (std::size_t l = 0; l < chain.size(); ++l, ++k) {
                        if (flat.labels(k) != chain[l] || flat.origin[k] != std::pair<Eigen::Index, Eigen::Index>(b, l)) {
                            return Outcome{false, "flatten_for_training rows differ"};
                        }
                    }
                }
            }

            const auto probs = softmax_levels(parts);
            for (Eigen::Index b = 0; b < batch; ++b) {
                for (index_t l = 0; l < levels; ++l) {
                    std::vector<index_t> members;
                    std::vector<double> dense;
                    for (index_t c = 0; c < n; ++c) {
                        if (depth[c] == l) {
                            members.push_back(c);
                            dense.push_back(s(b, c));
                        }
                        else if (probs(b, l, c) != 0.0) {
                            return Outcome{false, "softmax_levels: masked entry nonzero"};
                        }
                    }
                    const auto want = oracle::dense_softmax(dense);
                    for (std::size_t i = 0; i < members.size(); ++i) {
                        if (!close_rel(probs(b, l, members[i]), want[i], 1e-6)) {
                            return Outcome{false, "softmax_levels differs"};
                        }
                    }
                    ++checked;
                }
            }

            const auto loss = cross_entropy(flat);
            for (Eigen::Index k = 0; k < flat.size(); ++k) {
                const auto [b, l] = flat.origin[k];
                std::vector<double> dense;
                std::size_t at = 0;
                for (index_t c = 0; c < n; ++c) {
                    if (depth[c] != l) continue;
                    if (c == flat.labels(k)) at = dense.size();
                    dense.push_back(s(b, c));
                }
                if (!close_rel(loss.per_row(k), oracle::dense_cross_entropy(dense, at), 1e-6)) {
                    return Outcome{false, "cross_entropy differs"};
                }
            }
        }
        const double secs = seconds_since(start);
        return Outcome{secs < 60.0, std::to_string(checked) + " level rows checked, " + std::to_string(secs) +
                                        " s (< 60 s)"};
    });

    criterion("decoders: valid paths, beam(k=|c|) == exhaustive ranking, levenshtein top-1 == exhaustive scan", [] {
        std::mt19937_64 rng(555);
        int trees = 0;
        for (int trial = 0; trial < 20; ++trial) {
            const index_t n = trial == 0 ? 1000 : std::uniform_int_distribution<index_t>(1, 1000)(rng);
            const auto t = oracle::random_forest(n, 8, rng);
            const auto enc = encode(t);
            const auto probs = softmax_levels(partition_scores(enc, random_batch<double>(2, n, rng, 2.0)));
            const auto beams = beam_decode(enc, probs, static_cast<std::size_t>(n));
            const auto naive = naive_decode(probs);
            const auto lev = levenshtein_decode(enc, naive, 3);
            for (Eigen::Index b = 0; b < 2; ++b) {
                const auto want = oracle::exhaustive_paths(t, [&](index_t l, index_t c) { return probs(b, l, c); });
                if (beams[b].size() != want.size()) return Outcome{false, "beam returned wrong count"};
                for (std::size_t r = 0; r < want.size(); ++r) {
                    std::vector<index_t> got;
                    for (auto c : beams[b][r].classes) got.push_back(c.value);
                    const auto chain = oracle::ancestor_chain(t, got.back());
                    if (got != chain) return Outcome{false, "beam emitted an invalid path"};
                    if (got != want[r].classes) return Outcome{false, "beam ranking differs from enumeration"};
                }
                for (std::size_t k : {1u, 4u}) {
                    const auto narrow = beam_decode(enc, probs, k);
                    for (const auto& d : narrow[b]) {
                        std::vector<index_t> got;
                        for (auto c : d.classes) got.push_back(c.value);
                        if (got != oracle::ancestor_chain(t, got.back())) return Outcome{false, "invalid beam path"};
                    }
                }

                std::vector<index_t> seq(naive.row(b).data(), naive.row(b).data() + naive.cols());
                int best = std::numeric_limits<int>::max();
                std::vector<index_t> best_path;
                for (index_t c = 0; c < n; ++c) {
                    const auto chain = oracle::ancestor_chain(t, c);
                    const int d = oracle::edit_distance(seq, chain);
                    if (d < best || (d == best && chain < best_path)) {
                        best = d;
                        best_path = chain;
                    }
                }
                std::vector<index_t> got;
                for (auto c : lev[b][0].classes) got.push_back(c.value);
                if (*lev[b][0].distance != best || got != best_path) {
                    return Outcome{false, "levenshtein top-1 differs from exhaustive scan"};
                }
            }
            ++trees;
        }
        return Outcome{true, std::to_string(trees) + " trees, exact"};
    });

    criterion("memory table arithmetic at |b|=100, |c|=117659, |l|=20", [] {
        const auto acc = bench::byte_accounting(100, 117659, 20);
        const bool ok = acc.scores == 47063600 && acc.partitioned == 941272000 && acc.labels == 800 &&
                        acc.path_labels == 16000;
        std::ostringstream os;
        os << "scores " << acc.scores << ", partitioned " << acc.partitioned << ", labels " << acc.labels
           << ", path labels " << acc.path_labels;
        return Outcome{ok, os.str()};
    });

    criterion("footprint: 117659-class / 20-level encoding <= 40 MB, encode < 30 s", [] {
        const auto t = generate_synthetic({117659, 20, 0, {}});
        const auto start = clock_type::now();
        const auto enc = encode(t);
        const double secs = seconds_since(start);
        const auto bytes = enc.owned_bytes();
        const std::uint64_t limit = 40ull * 1024 * 1024;
        const bool ok = enc.num_classes() == 117659 && enc.num_levels() == 20 && bytes <= limit && secs < 30.0;
        return Outcome{ok, std::to_string(bytes) + " bytes owned (limit " + std::to_string(limit) + "), encode " +
                               std::to_string(secs) + " s"};
    });

    criterion("scaling: map_labels flat in |c|, partition_scores linear in |b||l||c|", [] {
        const auto small = encode(generate_synthetic({1000, 20, 1, {}}));
        const auto large = encode(generate_synthetic({117659, 20, 1, {}}));
        const double map_small = bench::time_map_labels(small, 100, 15, 7, 2000);
        const double map_large = bench::time_map_labels(large, 100, 15, 7, 2000);
        const double map_ratio = std::max(map_small, map_large) / std::min(map_small, map_large);

        const auto p_small = encode(generate_synthetic({10000, 20, 2, {}}));
        const auto p_large = encode(generate_synthetic({40000, 20, 2, {}}));
        const double part_small = bench::time_partition_scores(p_small, 16, 7, 3);
        const double part_large = bench::time_partition_scores(p_large, 16, 7, 3);
        const double size_ratio = 4.0;
        const double part_ratio = part_large / part_small;

        const bool ok = map_ratio <= 2.0 && part_ratio >= size_ratio / 3.0 && part_ratio <= size_ratio * 3.0;
        std::ostringstream os;
        os << "map_labels " << map_small << " ns vs " << map_large << " ns (ratio " << map_ratio << ", <= 2); "
           << "partition_scores ratio " << part_ratio << " for size ratio " << size_ratio << " (within 3x)";
        return Outcome{ok, os.str()};
    });

    criterion("loss well-posedness: 10^4 random cases finite and equal to dense cross-entropy", [] {
        std::mt19937_64 rng(99);
        std::size_t rows = 0;
        for (int trial = 0; trial < 10000; ++trial) {
            const auto t = oracle::random_forest(std::uniform_int_distribution<index_t>(1, 64)(rng), 8, rng, 0.2);
            const index_t n = t.num_classes();
            const auto depth = depths_of(t);
            const auto enc = encode(t);
            const double scale = std::uniform_real_distribution<double>(0.1, 80.0)(rng);
            const auto s = random_batch<double>(2, n, rng, scale);
            const auto flat = flatten_for_training(partition_scores(enc, s), map_labels(enc, random_labels(2, n, rng)));
            const auto loss = cross_entropy(flat);
            for (Eigen::Index k = 0; k < flat.size(); ++k, ++rows) {
                const auto [b, l] = flat.origin[k];
                std::vector<double> dense;
                std::size_t at = 0;
                for (index_t c = 0; c < n; ++c) {
                    if (depth[c] != l) continue;
                    if (c == flat.labels(k)) at = dense.size();
                    dense.push_back(s(b, c));
                }
                const double want = oracle::dense_cross_entropy(dense, at);
                if (!std::isfinite(loss.per_row(k))) return Outcome{false, "non-finite loss"};
                if (!close_rel(loss.per_row(k), want, 1e-6)) return Outcome{false, "loss differs from dense oracle"};
            }
            if (!std::isfinite(loss.loss)) return Outcome{false, "non-finite mean loss"};
        }
        return Outcome{true, "10000 cases, " + std::to_string(rows) + " rows, 1e-6 relative"};
    });

    std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
