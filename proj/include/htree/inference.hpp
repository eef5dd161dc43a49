#pragma once
#include <htree/core.hpp>
#include <htree/transforms.hpp>
#include <htree/tree.hpp>
#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace htree {

/// Per-level class probabilities, same (|b|*|l|) x |c| layout as PartitionedScores.
template <class Scalar>
struct LevelProbabilities {
    Eigen::Index batch = 0;
    Eigen::Index levels = 0;
    rowmat_type<Scalar> data;

    Eigen::Index classes() const { return data.cols(); }

    Scalar operator()(Eigen::Index b, Eigen::Index l, Eigen::Index c) const
    {
        return data(b * levels + l, c);
    }
};

struct DecodedPath {
    std::vector<ClassId> classes;
    std::optional<double> log_prob;
    std::optional<index_t> distance;
};

using DecodedBatch = std::vector<std::vector<DecodedPath>>;

enum class PathScoring { joint, length_normalized };

/// Softmax over each level row; masked (-inf or NaN) entries get probability 0.
template <class Scalar>
LevelProbabilities<Scalar> softmax_levels(const PartitionedScores<Scalar>& parts)
{
    if (parts.mask_value.mode == MaskValue::Mode::scalar) {
        throw UnsupportedMaskValue("softmax needs -inf or NaN as the mask value");
    }

    LevelProbabilities<Scalar> out;
    out.batch = parts.batch;
    out.levels = parts.levels;
    out.data.resize(parts.data.rows(), parts.data.cols());

    for (Eigen::Index r = 0; r < parts.data.rows(); ++r) {
        const auto row = parts.data.row(r);
        double top = -std::numeric_limits<double>::infinity();
        Eigen::Index open = 0;
        for (Eigen::Index c = 0; c < row.size(); ++c) {
            const double x = static_cast<double>(row(c));
            if (std::isnan(x) || std::isinf(x)) continue;
            top = std::max(top, x);
            ++open;
        }
        if (open == 0) {
            throw CorruptEncoding("level " + std::to_string(r % parts.levels + 1) + " of sample " +
                                  std::to_string(r / parts.levels + 1) + " has no unmasked class");
        }
        double mass = 0.0;
        for (Eigen::Index c = 0; c < row.size(); ++c) {
            const double x = static_cast<double>(row(c));
            if (std::isfinite(x)) mass += std::exp(x - top);
        }
        for (Eigen::Index c = 0; c < row.size(); ++c) {
            const double x = static_cast<double>(row(c));
            out.data(r, c) = std::isfinite(x) ? static_cast<Scalar>(std::exp(x - top) / mass) : Scalar(0);
        }
    }
    return out;
}

/// Per-level argmax, ties toward the smaller class index. May be an invalid path.
template <class Scalar>
rowmat_type<index_t> naive_decode(const LevelProbabilities<Scalar>& probs)
{
    rowmat_type<index_t> out(probs.batch, probs.levels);
    for (Eigen::Index b = 0; b < probs.batch; ++b) {
        for (Eigen::Index l = 0; l < probs.levels; ++l) {
            const auto row = probs.data.row(b * probs.levels + l);
            Eigen::Index best = 0;
            for (Eigen::Index c = 1; c < row.size(); ++c) {
                if (row(c) > row(best)) best = c;
            }
            out(b, l) = static_cast<index_t>(best);
        }
    }
    return out;
}

namespace detail {

struct Candidate {
    index_t node;
    double sum;    // joint log-probability, root first
    double rank;   // sum, or sum / length when normalized
};

inline bool path_less(const TreeEncoding& enc, index_t a, index_t b)
{
    const auto pa = enc.path(ClassId(a));
    const auto pb = enc.path(ClassId(b));
    return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
}

inline void keep_best(const TreeEncoding& enc, std::vector<Candidate>& items, std::size_t k)
{
    auto better = [&](const Candidate& x, const Candidate& y) {
        if (x.rank != y.rank) return x.rank > y.rank;
        return path_less(enc, x.node, y.node);
    };
    if (items.size() > k) {
        std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(k), items.end(), better);
        items.resize(k);
    }
    else {
        std::sort(items.begin(), items.end(), better);
    }
}

inline std::vector<ClassId> to_classes(std::span<const index_t> path)
{
    std::vector<ClassId> out;
    out.reserve(path.size());
    for (index_t c : path) out.emplace_back(c);
    return out;
}

template <class Scalar>
void check_probs_shape(const TreeEncoding& enc, const LevelProbabilities<Scalar>& probs)
{
    if (probs.levels != enc.num_levels() || probs.classes() != enc.num_classes()) {
        throw ShapeError("probabilities are per " + std::to_string(probs.levels) + " levels x " +
                         std::to_string(probs.classes()) + " classes, encoding has " +
                         std::to_string(enc.num_levels()) + " x " + std::to_string(enc.num_classes()));
    }
}

/// Levenshtein distance from `naive` to every path of the tree, sharing DP rows along prefixes.
std::vector<index_t> tree_edit_distances(const TreeEncoding& enc, std::span<const index_t> naive);

} // namespace detail

/**
 * Beam search over valid paths, one level at a time.
 *
 * The beam starts at the roots and expands children of surviving
 * hypotheses; every hypothesis is also a finished path, since any class
 * is a legal endpoint. Results are the k best finished paths by score,
 * ties broken by the lexicographically smaller class sequence.
 */
template <class Scalar>
DecodedBatch beam_decode(const TreeEncoding& enc, const LevelProbabilities<Scalar>& probs,
                         std::size_t k, PathScoring scoring = PathScoring::joint)
{
    if (k == 0) throw ParameterError("beam width must be at least 1");
    detail::check_probs_shape(enc, probs);

    auto make = [&](index_t node, double sum, index_t level) {
        const double rank = scoring == PathScoring::joint ? sum : sum / static_cast<double>(level + 1);
        return detail::Candidate{node, sum, rank};
    };

    DecodedBatch out(static_cast<std::size_t>(probs.batch));
    std::vector<detail::Candidate> beam, next, finished;
    for (Eigen::Index b = 0; b < probs.batch; ++b) {
        beam.clear();
        finished.clear();
        for (index_t r : enc.roots()) {
            beam.push_back(make(r, 0.0 + std::log(static_cast<double>(probs(b, 0, r))), 0));
        }
        detail::keep_best(enc, beam, k);

        for (index_t level = 1; !beam.empty(); ++level) {
            finished.insert(finished.end(), beam.begin(), beam.end());
            next.clear();
            if (level < enc.num_levels()) {
                for (const auto& h : beam) {
                    for (index_t child : enc.children(ClassId(h.node))) {
                        const double p = static_cast<double>(probs(b, level, child));
                        next.push_back(make(child, h.sum + std::log(p), level));
                    }
                }
            }
            detail::keep_best(enc, next, k);
            beam.swap(next);
        }

        detail::keep_best(enc, finished, k);
        auto& ranked = out[static_cast<std::size_t>(b)];
        for (const auto& h : finished) {
            ranked.push_back({detail::to_classes(enc.path(ClassId(h.node))), h.rank, std::nullopt});
        }
    }
    return out;
}

namespace detail {

inline DecodedBatch levenshtein_rank(const TreeEncoding& enc, const rowmat_type<index_t>& naive,
                                     std::size_t k, const std::vector<std::vector<double>>* joint)
{
    if (k == 0) throw ParameterError("k must be at least 1");
    const index_t n = enc.num_classes();
    DecodedBatch out(static_cast<std::size_t>(naive.rows()));
    std::vector<index_t> order(static_cast<std::size_t>(n));

    for (Eigen::Index b = 0; b < naive.rows(); ++b) {
        const std::span<const index_t> seq(naive.data() + b * naive.cols(),
                                           static_cast<std::size_t>(naive.cols()));
        const auto dist = tree_edit_distances(enc, seq);
        const auto* scores = joint ? &(*joint)[static_cast<std::size_t>(b)] : nullptr;

        for (index_t c = 0; c < n; ++c) order[c] = c;
        auto better = [&](index_t x, index_t y) {
            if (dist[x] != dist[y]) return dist[x] < dist[y];
            if (scores && (*scores)[x] != (*scores)[y]) return (*scores)[x] > (*scores)[y];
            return path_less(enc, x, y);
        };
        const auto keep = std::min<std::size_t>(k, order.size());
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), better);

        auto& ranked = out[static_cast<std::size_t>(b)];
        for (std::size_t i = 0; i < keep; ++i) {
            const index_t c = order[i];
            ranked.push_back({to_classes(enc.path(ClassId(c))),
                              scores ? std::optional<double>((*scores)[c]) : std::nullopt, dist[c]});
        }
    }
    return out;
}

} // namespace detail

/// Top-k valid paths by edit distance to each naive sequence, ties by class sequence.
inline DecodedBatch levenshtein_decode(const TreeEncoding& enc, const rowmat_type<index_t>& naive,
                                       std::size_t k)
{
    return detail::levenshtein_rank(enc, naive, k, nullptr);
}

/// As above, with ties broken first by higher joint log-probability under `probs`.
template <class Scalar>
DecodedBatch levenshtein_decode(const TreeEncoding& enc, const rowmat_type<index_t>& naive,
                                std::size_t k, const LevelProbabilities<Scalar>& probs)
{
    detail::check_probs_shape(enc, probs);
    if (probs.batch != naive.rows()) throw ShapeError("naive paths and probabilities differ in batch size");

    std::vector<std::vector<double>> joint(static_cast<std::size_t>(probs.batch));
    for (Eigen::Index b = 0; b < probs.batch; ++b) {
        auto& sums = joint[static_cast<std::size_t>(b)];
        sums.assign(static_cast<std::size_t>(enc.num_classes()), 0.0);
        for (index_t c = 0; c < enc.num_classes(); ++c) {
            double s = 0.0;
            const auto path = enc.path(ClassId(c));
            for (std::size_t l = 0; l < path.size(); ++l) {
                s += std::log(static_cast<double>(probs(b, static_cast<Eigen::Index>(l), path[l])));
            }
            sums[c] = s;
        }
    }
    return detail::levenshtein_rank(enc, naive, k, &joint);
}

} // namespace htree
