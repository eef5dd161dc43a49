#include <htree/inference.hpp>

namespace htree::detail {

std::vector<index_t> tree_edit_distances(const TreeEncoding& enc, std::span<const index_t> naive)
{
    const auto width = naive.size() + 1;
    const auto levels = static_cast<std::size_t>(enc.num_levels());
    std::vector<index_t> dist(static_cast<std::size_t>(enc.num_classes()), 0);

    // rows[d] holds the DP row after consuming the first d entries of the current path.
    std::vector<index_t> rows((levels + 1) * width);
    for (std::size_t j = 0; j < width; ++j) rows[j] = static_cast<index_t>(j);

    std::vector<index_t> stack(enc.roots().rbegin(), enc.roots().rend());
    while (!stack.empty()) {
        const index_t node = stack.back();
        stack.pop_back();
        const auto depth = static_cast<std::size_t>(enc.level_of(ClassId(node)).value);
        const index_t* prev = rows.data() + depth * width;
        index_t* cur = rows.data() + (depth + 1) * width;

        cur[0] = static_cast<index_t>(depth + 1);
        for (std::size_t j = 1; j < width; ++j) {
            const index_t substitute = prev[j - 1] + (naive[j - 1] == node ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitute});
        }
        dist[static_cast<std::size_t>(node)] = cur[width - 1];

        const auto kids = enc.children(ClassId(node));
        stack.insert(stack.end(), kids.rbegin(), kids.rend());
    }
    return dist;
}

} // namespace htree::detail
