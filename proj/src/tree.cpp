#include <htree/tree.hpp>
#include "binary.hpp"
#include <algorithm>
#include <sstream>

namespace htree {
namespace {

std::string one_based(index_t c) { return std::to_string(c + 1); }

// Depth of every class, walking parent links iteratively so deep chains are fine.
std::vector<index_t> compute_depths(const Taxonomy& taxonomy)
{
    const index_t n = taxonomy.num_classes();
    if (n == 0) throw InvalidTaxonomy("taxonomy has no classes");

    for (index_t c = 0; c < n; ++c) {
        const auto& p = taxonomy.parent[c];
        if (p && (p->value < 0 || p->value >= n)) {
            throw InvalidTaxonomy("class " + one_based(c) + " has unknown parent " +
                                  std::to_string(p->value + 1));
        }
    }

    enum : std::uint8_t { unvisited, on_stack, done };
    std::vector<std::uint8_t> state(n, unvisited);
    std::vector<index_t> depth(n, -1);
    std::vector<index_t> stack;

    for (index_t start = 0; start < n; ++start) {
        if (state[start] == done) continue;
        index_t x = start;
        while (state[x] != done) {
            if (state[x] == on_stack) {
                throw CyclicTaxonomy("cycle through class " + one_based(x));
            }
            state[x] = on_stack;
            stack.push_back(x);
            const auto& p = taxonomy.parent[x];
            if (!p) break;
            x = p->value;
        }
        while (!stack.empty()) {
            const index_t y = stack.back();
            stack.pop_back();
            const auto& p = taxonomy.parent[y];
            depth[y] = p ? depth[p->value] + 1 : 0;
            state[y] = done;
        }
    }
    return depth;
}

} // namespace

TreeEncoding TreeEncoding::from_matrices(mask_matrix_type masks, path_matrix_type paths)
{
    TreeEncoding enc;
    enc.masks_ = std::move(masks);
    enc.paths_ = std::move(paths);
    enc.build_index();
    return enc;
}

void TreeEncoding::build_index()
{
    const index_t n = num_classes();
    const index_t levels = num_levels();
    level_of_.resize(n);
    parent_.assign(n, pad_value);
    roots_.clear();

    for (index_t c = 0; c < n; ++c) {
        index_t len = 0;
        while (len < levels && paths_(c, len) != pad_value) ++len;
        level_of_[c] = len - 1;
        if (len >= 2) {
            const index_t p = paths_(c, len - 2);
            if (p >= 0 && p < n && p != c) parent_[c] = p;
        }
        else if (len == 1) {
            roots_.push_back(c);
        }
    }

    child_offsets_.assign(n + 1, 0);
    for (index_t c = 0; c < n; ++c) {
        if (parent_[c] != pad_value) ++child_offsets_[parent_[c] + 1];
    }
    for (index_t c = 0; c < n; ++c) child_offsets_[c + 1] += child_offsets_[c];
    child_index_.assign(child_offsets_[n], 0);
    std::vector<index_t> cursor(child_offsets_.begin(), child_offsets_.end() - 1);
    for (index_t c = 0; c < n; ++c) {
        if (parent_[c] != pad_value) child_index_[cursor[parent_[c]]++] = c;
    }
}

std::optional<ClassId> TreeEncoding::parent(ClassId c) const
{
    const index_t p = parent_[c.value];
    if (p == pad_value) return std::nullopt;
    return ClassId(p);
}

std::span<const index_t> TreeEncoding::children(ClassId c) const
{
    const auto begin = child_offsets_[c.value];
    const auto end = child_offsets_[c.value + 1];
    return {child_index_.data() + begin, static_cast<std::size_t>(end - begin)};
}

std::span<const index_t> TreeEncoding::path(ClassId c) const
{
    const index_t len = std::max<index_t>(level_of_[c.value] + 1, 0);
    return {paths_.data() + static_cast<std::ptrdiff_t>(c.value) * paths_.cols(),
            static_cast<std::size_t>(len)};
}

std::size_t TreeEncoding::owned_bytes() const
{
    auto vec_bytes = [](const std::vector<index_t>& v) { return v.capacity() * sizeof(index_t); };
    return static_cast<std::size_t>(masks_.size()) * sizeof(bool) +
           static_cast<std::size_t>(paths_.size()) * sizeof(index_t) +
           static_cast<std::size_t>(level_of_.size()) * sizeof(index_t) +
           vec_bytes(parent_) + vec_bytes(child_offsets_) + vec_bytes(child_index_) +
           vec_bytes(roots_);
}

bool TreeEncoding::operator==(const TreeEncoding& other) const
{
    return masks_.rows() == other.masks_.rows() && masks_.cols() == other.masks_.cols() &&
           paths_.rows() == other.paths_.rows() && paths_.cols() == other.paths_.cols() &&
           (masks_ == other.masks_).all() && paths_ == other.paths_;
}

void check_taxonomy(const Taxonomy& taxonomy) { compute_depths(taxonomy); }

TreeEncoding encode(const Taxonomy& taxonomy)
{
    const auto depth = compute_depths(taxonomy);
    const index_t n = taxonomy.num_classes();
    const index_t levels = *std::max_element(depth.begin(), depth.end()) + 1;

    // Parents are filled before children by visiting classes in depth order.
    std::vector<index_t> order(n);
    {
        std::vector<index_t> offsets(levels + 1, 0);
        for (index_t d : depth) ++offsets[d + 1];
        for (index_t l = 0; l < levels; ++l) offsets[l + 1] += offsets[l];
        for (index_t c = 0; c < n; ++c) order[offsets[depth[c]]++] = c;
    }

    path_matrix_type paths = path_matrix_type::Constant(n, levels, pad_value);
    for (index_t c : order) {
        const index_t d = depth[c];
        if (d > 0) {
            const index_t p = taxonomy.parent[c]->value;
            paths.row(c).head(d) = paths.row(p).head(d);
        }
        paths(c, d) = c;
    }

    mask_matrix_type masks = mask_matrix_type::Constant(levels, n, true);
    for (index_t c = 0; c < n; ++c) masks(depth[c], c) = false;

    return TreeEncoding::from_matrices(std::move(masks), std::move(paths));
}

std::string ValidationReport::to_string() const
{
    std::ostringstream os;
    for (const auto& v : violations) os << v.message << '\n';
    return os.str();
}

ValidationReport validate(const TreeEncoding& enc)
{
    ValidationReport report;
    auto flag = [&](Violation::Kind kind, index_t c, index_t l, std::string msg) {
        report.violations.push_back({kind, c, l, std::move(msg)});
    };

    const auto& masks = enc.masks();
    const auto& paths = enc.paths();
    const index_t n = enc.num_classes();
    const index_t levels = enc.num_levels();

    if (n == 0 || levels == 0 || masks.rows() != levels || masks.cols() != n) {
        flag(Violation::Kind::shape, pad_value, pad_value,
             "shape: masks " + std::to_string(masks.rows()) + "x" + std::to_string(masks.cols()) +
                 " does not transpose paths " + std::to_string(paths.rows()) + "x" +
                 std::to_string(paths.cols()));
        return report;
    }

    // Per-row structure of the path matrix.
    std::vector<index_t> length(n, 0);
    std::vector<bool> well_formed(n, true);
    for (index_t c = 0; c < n; ++c) {
        index_t len = 0;
        while (len < levels && paths(c, len) != pad_value) ++len;
        length[c] = len;
        if (len == 0) {
            flag(Violation::Kind::empty_path, c, pad_value,
                 "class " + one_based(c) + ": path row is empty");
            well_formed[c] = false;
            continue;
        }
        for (index_t l = len; l < levels; ++l) {
            if (paths(c, l) != pad_value) {
                flag(Violation::Kind::pad_not_suffix, c, l,
                     "class " + one_based(c) + ": entry at level " + one_based(l) +
                         " follows a pad");
                well_formed[c] = false;
                break;
            }
        }
        for (index_t l = 0; l < len; ++l) {
            if (paths(c, l) < 0 || paths(c, l) >= n) {
                flag(Violation::Kind::path_entry_out_of_range, c, l,
                     "class " + one_based(c) + ": path entry at level " + one_based(l) +
                         " is not a class");
                well_formed[c] = false;
                break;
            }
        }
        if (well_formed[c] && paths(c, len - 1) != c) {
            flag(Violation::Kind::path_end_mismatch, c, len - 1,
                 "class " + one_based(c) + ": path ends in class " + one_based(paths(c, len - 1)));
            well_formed[c] = false;
        }
    }

    // Each column of the mask matrix has exactly one unmasked level: the class depth.
    for (index_t c = 0; c < n; ++c) {
        std::vector<index_t> open;
        for (index_t l = 0; l < levels; ++l) {
            if (!masks(l, c)) open.push_back(l);
        }
        if (open.size() != 1) {
            std::string where;
            for (index_t l : open) where += (where.empty() ? "" : ",") + one_based(l);
            flag(Violation::Kind::unmasked_count, c, open.empty() ? pad_value : open.front(),
                 "class " + one_based(c) + ": unmasked at " + std::to_string(open.size()) +
                     " levels" + (where.empty() ? "" : " (" + where + ")"));
        }
        else if (length[c] > 0 && open.front() != length[c] - 1) {
            flag(Violation::Kind::level_mismatch, c, open.front(),
                 "class " + one_based(c) + ": unmasked at level " + one_based(open.front()) +
                     " but its path has length " + std::to_string(length[c]));
        }
    }

    // A class's path extends its parent's path by exactly one entry.
    for (index_t c = 0; c < n; ++c) {
        if (!well_formed[c] || length[c] < 2) continue;
        const index_t p = paths(c, length[c] - 2);
        const bool prefix = well_formed[p] && length[p] == length[c] - 1 &&
                            paths.row(c).head(length[p]) == paths.row(p).head(length[p]);
        if (!prefix) {
            flag(Violation::Kind::prefix_mismatch, c, length[c] - 2,
                 "class " + one_based(c) + ": path is not its parent " + one_based(p) +
                     "'s path extended by one");
        }
    }

    // No level holds two classes from the same ancestral path.
    for (index_t l = 0; l < levels; ++l) {
        bool any_open = false;
        for (index_t c = 0; c < n; ++c) {
            if (masks(l, c)) continue;
            any_open = true;
            if (!well_formed[c]) continue;
            for (index_t k = 0; k + 1 < length[c]; ++k) {
                const index_t a = paths(c, k);
                if (a != c && !masks(l, a)) {
                    flag(Violation::Kind::same_path_in_level, c, l,
                         "level " + one_based(l) + ": class " + one_based(c) +
                             " and its ancestor " + one_based(a) + " are both unmasked");
                }
            }
        }
        if (!any_open) {
            flag(Violation::Kind::empty_level, pad_value, l,
                 "level " + one_based(l) + ": every class is masked");
        }
    }
    return report;
}

std::uint64_t storage_bytes_closed_form(std::uint64_t num_levels, std::uint64_t num_classes,
                                        std::uint64_t s_bool, std::uint64_t s_int)
{
    if (s_bool == 0 || s_int == 0) throw ParameterError("element sizes must be positive");
    return (s_bool + s_int) * num_levels * num_classes;
}

StorageBytes storage_bytes(const TreeEncoding& enc, std::uint64_t s_bool, std::uint64_t s_int)
{
    return {storage_bytes_closed_form(static_cast<std::uint64_t>(enc.num_levels()),
                                      static_cast<std::uint64_t>(enc.num_classes()), s_bool, s_int),
            enc.owned_bytes()};
}

std::vector<std::uint8_t> serialize(const TreeEncoding& enc)
{
    const auto n = static_cast<std::size_t>(enc.num_classes());
    const auto levels = static_cast<std::size_t>(enc.num_levels());
    detail::ByteWriter out;
    out.reserve(14 + 5 * n * levels);
    out.magic("HTRE");
    out.u16(encoding_format_version);
    out.u32(static_cast<std::uint32_t>(n));
    out.u32(static_cast<std::uint32_t>(levels));
    const auto& masks = enc.masks();
    for (Eigen::Index l = 0; l < masks.rows(); ++l) {
        for (Eigen::Index c = 0; c < masks.cols(); ++c) out.u8(masks(l, c) ? 1 : 0);
    }
    const auto& paths = enc.paths();
    for (Eigen::Index c = 0; c < paths.rows(); ++c) {
        for (Eigen::Index l = 0; l < paths.cols(); ++l) {
            const index_t v = paths(c, l);
            out.i32(v == pad_value ? pad_value : v + 1);
        }
    }
    return out.take();
}

TreeEncoding deserialize(std::span<const std::uint8_t> bytes, bool check)
{
    detail::ByteReader in(bytes, "encoding");
    in.expect_magic("HTRE");
    const auto version = in.u16();
    if (version != encoding_format_version) {
        throw FormatError("encoding: unsupported format version " + std::to_string(version));
    }
    const std::uint32_t n = in.u32();
    const std::uint32_t levels = in.u32();
    const std::uint64_t cells = std::uint64_t(n) * levels;
    in.need_elements(cells, 5);

    mask_matrix_type masks(levels, n);
    for (std::uint32_t l = 0; l < levels; ++l) {
        for (std::uint32_t c = 0; c < n; ++c) {
            const auto b = in.u8();
            if (b > 1) throw FormatError("encoding: mask byte is not 0 or 1");
            masks(l, c) = b == 1;
        }
    }
    path_matrix_type paths(n, levels);
    for (std::uint32_t c = 0; c < n; ++c) {
        for (std::uint32_t l = 0; l < levels; ++l) {
            const std::int32_t v = in.i32();
            if (v == pad_value) paths(c, l) = pad_value;
            else if (v >= 1) paths(c, l) = v - 1;
            else throw FormatError("encoding: invalid class id " + std::to_string(v));
        }
    }
    in.expect_end();

    auto enc = TreeEncoding::from_matrices(std::move(masks), std::move(paths));
    if (check) {
        const auto report = validate(enc);
        if (!report.ok()) throw CorruptEncoding("encoding fails validation:\n" + report.to_string());
    }
    return enc;
}

} // namespace htree
