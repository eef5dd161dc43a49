#pragma once
// The nine-class, three-level example tree: 1 and 2 are roots, 3 and 4 sit
// under 1, 5 and 6 under 2, and 7, 8, 9 under 4.
#include <htree/tree.hpp>
#include <array>
#include <string>

namespace toy {

inline htree::Taxonomy taxonomy()
{
    using htree::ClassId;
    htree::Taxonomy t;
    t.parent = {std::nullopt,      std::nullopt,      ClassId::from_one_based(1),
                ClassId::from_one_based(1), ClassId::from_one_based(2), ClassId::from_one_based(2),
                ClassId::from_one_based(4), ClassId::from_one_based(4), ClassId::from_one_based(4)};
    return t;
}

inline const std::string edge_list =
    "# toy tree\n"
    "1\n"
    "2\n"
    "3\t1\n"
    "4\t1\n"
    "5\t2\n"
    "6\t2\n"
    "7\t4\n"
    "8\t4\n"
    "9\t4\n";

// Expected mask matrix, 1 = excluded.
inline constexpr std::array<std::array<int, 9>, 3> masks{{
    {0, 0, 1, 1, 1, 1, 1, 1, 1},
    {1, 1, 0, 0, 0, 0, 1, 1, 1},
    {1, 1, 1, 1, 1, 1, 0, 0, 0},
}};

// Expected path matrix, 1-based with -1 padding.
inline constexpr std::array<std::array<int, 3>, 9> paths{{
    {1, -1, -1},
    {2, -1, -1},
    {1, 3, -1},
    {1, 4, -1},
    {2, 5, -1},
    {2, 6, -1},
    {1, 4, 7},
    {1, 4, 8},
    {1, 4, 9},
}};

// Labels [4, 7, 2, 6, 3] and their ancestral paths.
inline constexpr std::array<int, 5> labels{4, 7, 2, 6, 3};
inline constexpr std::array<std::array<int, 3>, 5> label_paths{{
    {1, 4, -1},
    {1, 4, 7},
    {2, -1, -1},
    {2, 6, -1},
    {1, 3, -1},
}};

inline constexpr std::array<int, 10> flat_labels{1, 4, 1, 4, 7, 2, 2, 6, 1, 3};

} // namespace toy
