#pragma once
// Brute-force references used only by tests. They work from the Taxonomy
// (parent links) and plain std::vector data, never from the encoded matrices.
#include <htree/core.hpp>
#include <htree/tree.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using htree::ClassId;
using htree::index_t;
using htree::Taxonomy;

/// Random forest with at most `max_depth` levels; ids are shuffled.
inline Taxonomy random_forest(index_t n, index_t max_depth, std::mt19937_64& rng, double root_rate = 0.05)
{
    std::vector<index_t> parent(n, -1), depth(n, 0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (index_t i = 1; i < n; ++i) {
        if (coin(rng) < root_rate) continue;
        for (int attempt = 0; attempt < 16; ++attempt) {
            const index_t p = std::uniform_int_distribution<index_t>(0, i - 1)(rng);
            if (depth[p] + 1 < max_depth) {
                parent[i] = p;
                depth[i] = depth[p] + 1;
                break;
            }
        }
    }
    std::vector<index_t> id(n);
    std::iota(id.begin(), id.end(), 0);
    std::shuffle(id.begin(), id.end(), rng);
    Taxonomy t;
    t.parent.resize(n);
    for (index_t i = 0; i < n; ++i) {
        if (parent[i] >= 0) t.parent[id[i]] = ClassId(id[parent[i]]);
    }
    return t;
}

/// Root-to-c chain by recursion over parent links.
inline std::vector<index_t> ancestor_chain(const Taxonomy& t, index_t c)
{
    if (!t.parent[c]) return {c};
    auto chain = ancestor_chain(t, t.parent[c]->value);
    chain.push_back(c);
    return chain;
}

inline index_t depth(const Taxonomy& t, index_t c)
{
    return t.parent[c] ? depth(t, t.parent[c]->value) + 1 : 0;
}

inline index_t max_levels(const Taxonomy& t)
{
    index_t best = 0;
    for (index_t c = 0; c < t.num_classes(); ++c) best = std::max(best, depth(t, c) + 1);
    return best;
}

/// Padded chain of c, length `levels`.
inline std::vector<long long> padded_chain(const Taxonomy& t, index_t c, index_t levels)
{
    std::vector<long long> row(levels, -1);
    const auto chain = ancestor_chain(t, c);
    for (std::size_t i = 0; i < chain.size(); ++i) row[i] = chain[i];
    return row;
}

/// Cross-entropy of `label` against a dense vector of scores.
inline double dense_cross_entropy(const std::vector<double>& scores, std::size_t label)
{
    double top = *std::max_element(scores.begin(), scores.end());
    double mass = 0;
    for (double s : scores) mass += std::exp(s - top);
    return -(scores[label] - top - std::log(mass));
}

inline std::vector<double> dense_softmax(const std::vector<double>& scores)
{
    double top = *std::max_element(scores.begin(), scores.end());
    std::vector<double> out(scores.size());
    double mass = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) mass += (out[i] = std::exp(scores[i] - top));
    for (double& p : out) p /= mass;
    return out;
}

/// Full-table Levenshtein distance with unit costs.
inline int edit_distance(const std::vector<index_t>& a, const std::vector<index_t>& b)
{
    std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        }
    }
    return d[a.size()][b.size()];
}

struct ScoredPath {
    std::vector<index_t> classes;
    double score;
};

/// Every class's chain scored by summed log-probability, best first, ties lexicographic.
template <class ProbAt>
std::vector<ScoredPath> exhaustive_paths(const Taxonomy& t, ProbAt&& prob_at)
{
    std::vector<ScoredPath> all;
    for (index_t c = 0; c < t.num_classes(); ++c) {
        ScoredPath p{ancestor_chain(t, c), 0.0};
        for (std::size_t l = 0; l < p.classes.size(); ++l) {
            p.score += std::log(static_cast<double>(prob_at(static_cast<index_t>(l), p.classes[l])));
        }
        all.push_back(std::move(p));
    }
    std::sort(all.begin(), all.end(), [](const ScoredPath& x, const ScoredPath& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.classes < y.classes;
    });
    return all;
}

} // namespace oracle
