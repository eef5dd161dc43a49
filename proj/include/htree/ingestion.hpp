#pragma once
#include <htree/core.hpp>
#include <htree/tree.hpp>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace htree {

enum class MultiParentPolicy {
    first,   // keep the first-listed parent
    reject,  // throw MultipleParents
};

/// How a class declared more than once was resolved. nullopt means "root".
struct Resolution {
    ClassId child;
    std::optional<ClassId> kept;
    std::vector<std::optional<ClassId>> dropped;
};

struct ParsedTaxonomy {
    Taxonomy taxonomy;
    std::vector<Resolution> resolutions;
};

/**
 * Reads a "child<TAB>parent" edge list with 1-based ids.
 *
 * A line holding only a child id declares a root; '#' starts a comment.
 * Ids must cover 1..N with no gaps. Duplicate lines are rejected and a
 * parent that is never declared raises DanglingEdge.
 */
ParsedTaxonomy parse_edge_list(std::string_view text, MultiParentPolicy policy = MultiParentPolicy::first);
ParsedTaxonomy parse_edge_list(std::istream& in, MultiParentPolicy policy = MultiParentPolicy::first);

std::string emit_edge_list(const Taxonomy& taxonomy);

struct SyntheticShape {
    /// Parents are drawn from the newest fraction of eligible nodes; 1 is uniform.
    double parent_window = 1.0;
    /// Randomly permute class ids so that ids carry no depth information.
    bool shuffle_ids = true;
};

struct SyntheticTreeSpec {
    index_t num_classes = 0;
    index_t num_levels = 0;
    std::uint64_t seed = 0;
    SyntheticShape shape;
};

/// Single-rooted tree with exactly the requested class and level counts.
Taxonomy generate_synthetic(const SyntheticTreeSpec& spec);

} // namespace htree
