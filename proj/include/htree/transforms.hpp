#pragma once
#include <htree/core.hpp>
#include <htree/tree.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <utility>
#include <vector>

namespace htree {

/// Value written into excluded score positions.
struct MaskValue {
    enum class Mode { neg_inf, not_a_number, scalar };

    Mode mode = Mode::neg_inf;
    double payload = 0.0;

    static MaskValue neg_inf() { return {}; }
    static MaskValue not_a_number() { return {Mode::not_a_number, 0.0}; }
    static MaskValue scalar(double v)
    {
        if (!std::isfinite(v)) throw ParameterError("scalar mask value must be finite");
        return {Mode::scalar, v};
    }

    template <class Scalar>
    Scalar value() const
    {
        switch (mode) {
        case Mode::neg_inf: return -std::numeric_limits<Scalar>::infinity();
        case Mode::not_a_number: return std::numeric_limits<Scalar>::quiet_NaN();
        case Mode::scalar: break;
        }
        return static_cast<Scalar>(payload);
    }

    bool operator==(const MaskValue&) const = default;
};

template <class Scalar>
using ScoreBatch = rowmat_type<Scalar>;

/**
 * Depth-partitioned scores, logically |b| x |l| x |c|.
 *
 * Stored as a row-major (|b|*|l|) x |c| matrix whose row b*|l| + l is
 * level l of sample b. This is also the flattened layout used for training.
 */
template <class Scalar>
struct PartitionedScores {
    Eigen::Index batch = 0;
    Eigen::Index levels = 0;
    rowmat_type<Scalar> data;
    MaskValue mask_value;

    Eigen::Index classes() const { return data.cols(); }

    auto slice(Eigen::Index b) { return data.middleRows(b * levels, levels); }
    auto slice(Eigen::Index b) const { return data.middleRows(b * levels, levels); }

    Scalar operator()(Eigen::Index b, Eigen::Index l, Eigen::Index c) const
    {
        return data(b * levels + l, c);
    }
};

/// Scores rows with their labels, padding rows removed.
template <class Scalar>
struct FlatTrainingSet {
    rowmat_type<Scalar> rows;
    label_vector_type labels;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> origin;  // (b, l) of each row
    MaskValue mask_value;
    Eigen::Index dropped = 0;

    Eigen::Index size() const { return rows.rows(); }
};

enum class Reduction { mean, sum };

struct LossResult {
    double loss = 0.0;
    Eigen::VectorXd per_row;
};

namespace detail {

template <class F>
void for_each_chunk(Eigen::Index count, unsigned threads, F&& body)
{
    if (threads <= 1 || count < 2) {
        body(Eigen::Index(0), count);
        return;
    }
    const auto workers = std::min<Eigen::Index>(threads, count);
    const auto step = (count + workers - 1) / workers;
    std::vector<std::jthread> pool;
    for (Eigen::Index begin = 0; begin < count; begin += step) {
        pool.emplace_back([&body, begin, end = std::min(count, begin + step)] { body(begin, end); });
    }
}

} // namespace detail

/**
 * Masked fill of a score batch into one row per (sample, level).
 *
 * Entry (b, l, c) is the mask value where masks(l, c) is set and the
 * unmodified score (b, c) otherwise. Work is split over the batch index
 * when `threads` > 1; the result does not depend on the split.
 */
template <class Derived>
PartitionedScores<typename Derived::Scalar>
partition_scores(const TreeEncoding& enc, const Eigen::MatrixBase<Derived>& scores,
                 MaskValue mu = MaskValue::neg_inf(), unsigned threads = 1)
{
    using Scalar = typename Derived::Scalar;
    if (scores.cols() != enc.num_classes()) {
        throw ShapeError("score batch has " + std::to_string(scores.cols()) +
                         " columns, encoding has " + std::to_string(enc.num_classes()) +
                         " classes");
    }
    if (!scores.allFinite()) {
        for (Eigen::Index b = 0; b < scores.rows(); ++b) {
            for (Eigen::Index c = 0; c < scores.cols(); ++c) {
                if (!std::isfinite(static_cast<double>(scores(b, c)))) {
                    throw ParameterError("score (" + std::to_string(b + 1) + ", " +
                                         std::to_string(c + 1) + ") is not finite");
                }
            }
        }
    }

    const auto& masks = enc.masks();
    const Eigen::Index levels = enc.num_levels();
    const Scalar fill = mu.value<Scalar>();

    PartitionedScores<Scalar> out;
    out.batch = scores.rows();
    out.levels = levels;
    out.mask_value = mu;
    out.data.resize(scores.rows() * levels, scores.cols());

    detail::for_each_chunk(scores.rows(), threads, [&](Eigen::Index begin, Eigen::Index end) {
        for (Eigen::Index b = begin; b < end; ++b) {
            for (Eigen::Index l = 0; l < levels; ++l) {
                out.data.row(b * levels + l).array() = masks.row(l).select(fill, scores.row(b).array());
            }
        }
    });
    return out;
}

/// Gathers row labels(b) of the path matrix for every sample. Labels are 0-based.
template <class Derived>
path_label_matrix_type map_labels(const TreeEncoding& enc, const Eigen::MatrixBase<Derived>& labels)
{
    const Eigen::Index n = labels.size();
    const auto& paths = enc.paths();
    path_label_matrix_type out(n, enc.num_levels());
    for (Eigen::Index b = 0; b < n; ++b) {
        const auto y = static_cast<label_t>(labels(b));
        if (y < 0 || y >= enc.num_classes()) {
            throw LabelError(b, y,
                             "label " + std::to_string(y + 1) + " of sample " +
                                 std::to_string(b + 1) + " is not a class in 1.." +
                                 std::to_string(enc.num_classes()));
        }
        out.row(b) = paths.row(y).template cast<label_t>();
    }
    return out;
}

/// Flattens (b, l) and keeps the rows whose path label is not a pad, b-major.
template <class Scalar>
FlatTrainingSet<Scalar> flatten_for_training(const PartitionedScores<Scalar>& parts,
                                             const path_label_matrix_type& paths)
{
    if (paths.rows() != parts.batch || paths.cols() != parts.levels) {
        throw ShapeError("path labels are " + std::to_string(paths.rows()) + "x" +
                         std::to_string(paths.cols()) + ", partitioned scores are " +
                         std::to_string(parts.batch) + "x" + std::to_string(parts.levels));
    }

    const auto kept = static_cast<Eigen::Index>((paths.array() != label_t(pad_value)).count());
    FlatTrainingSet<Scalar> flat;
    flat.rows.resize(kept, parts.classes());
    flat.labels.resize(kept);
    flat.origin.reserve(static_cast<std::size_t>(kept));
    flat.mask_value = parts.mask_value;
    flat.dropped = paths.size() - kept;

    Eigen::Index k = 0;
    for (Eigen::Index b = 0; b < parts.batch; ++b) {
        for (Eigen::Index l = 0; l < parts.levels; ++l) {
            if (paths(b, l) == pad_value) continue;
            flat.rows.row(k) = parts.data.row(b * parts.levels + l);
            flat.labels(k) = paths(b, l);
            flat.origin.emplace_back(b, l);
            ++k;
        }
    }
    return flat;
}

/**
 * Cross-entropy of every retained row against its label.
 *
 * Requires -inf masking so excluded classes carry no probability mass.
 * The log-sum-exp is shifted by the row maximum and accumulated in double.
 */
template <class Scalar>
LossResult cross_entropy(const FlatTrainingSet<Scalar>& flat, Reduction reduction = Reduction::mean)
{
    if (flat.mask_value.mode != MaskValue::Mode::neg_inf) {
        throw UnsupportedMaskValue("cross-entropy needs -inf as the mask value");
    }

    const Eigen::Index n = flat.rows.rows();
    const Eigen::Index classes = flat.rows.cols();
    LossResult result;
    result.per_row.resize(n);

    for (Eigen::Index k = 0; k < n; ++k) {
        const auto row = flat.rows.row(k);
        const label_t y = flat.labels(k);
        if (y < 0 || y >= classes) {
            throw InconsistentRow("row " + std::to_string(k + 1) + ": label " +
                                  std::to_string(y + 1) + " is not a class");
        }
        if (!std::isfinite(static_cast<double>(row(y)))) {
            throw InconsistentRow("row " + std::to_string(k + 1) + ": label " +
                                  std::to_string(y + 1) + " is masked in its own row");
        }

        double top = -std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < classes; ++c) {
            const double x = static_cast<double>(row(c));
            if (std::isnan(x)) {
                throw InconsistentRow("row " + std::to_string(k + 1) + " contains NaN");
            }
            top = std::max(top, x);
        }
        double mass = 0.0;
        for (Eigen::Index c = 0; c < classes; ++c) mass += std::exp(static_cast<double>(row(c)) - top);
        result.per_row(k) = std::log(mass) - (static_cast<double>(row(y)) - top);
    }

    result.loss = result.per_row.sum();
    if (reduction == Reduction::mean && n > 0) result.loss /= static_cast<double>(n);
    return result;
}

} // namespace htree
