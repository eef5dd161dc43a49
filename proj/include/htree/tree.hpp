#pragma once
#include <htree/core.hpp>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace htree {

/// Input form of a semantic tree: one optional parent per class.
struct Taxonomy {
    std::vector<std::optional<ClassId>> parent;

    index_t num_classes() const { return static_cast<index_t>(parent.size()); }
    bool operator==(const Taxonomy&) const = default;
};

/**
 * Immutable encoded tree.
 *
 * Holds the |l| x |c| mask matrix and the |c| x |l| path matrix, plus
 * per-class depth, parent and a CSR child index derived from the paths.
 * The derived members are rebuilt on construction and are not serialized.
 */
class TreeEncoding {
public:
    TreeEncoding() = default;

    /// Wraps raw matrices without checking them; run validate() on the result.
    static TreeEncoding from_matrices(mask_matrix_type masks, path_matrix_type paths);

    index_t num_classes() const { return static_cast<index_t>(paths_.rows()); }
    index_t num_levels() const { return static_cast<index_t>(paths_.cols()); }

    const mask_matrix_type& masks() const { return masks_; }
    const path_matrix_type& paths() const { return paths_; }
    const colvec_type<index_t>& levels() const { return level_of_; }

    LevelIndex level_of(ClassId c) const { return LevelIndex(level_of_[c.value]); }
    std::optional<ClassId> parent(ClassId c) const;
    std::span<const index_t> children(ClassId c) const;
    std::span<const index_t> roots() const { return roots_; }

    /// Real (non-pad) entries of row c of the path matrix.
    std::span<const index_t> path(ClassId c) const;

    /// Bytes held by every buffer this object owns, derived indices included.
    std::size_t owned_bytes() const;

    bool operator==(const TreeEncoding& other) const;

private:
    void build_index();

    mask_matrix_type masks_;
    path_matrix_type paths_;
    colvec_type<index_t> level_of_;
    std::vector<index_t> parent_;
    std::vector<index_t> child_offsets_;
    std::vector<index_t> child_index_;
    std::vector<index_t> roots_;
};

/// Encodes a forest. Class order is preserved; levels are depths from the roots.
TreeEncoding encode(const Taxonomy& taxonomy);

/// Throws CyclicTaxonomy / InvalidTaxonomy when the parent relation is not a forest.
void check_taxonomy(const Taxonomy& taxonomy);

struct Violation {
    enum class Kind {
        shape,
        empty_path,
        path_entry_out_of_range,
        pad_not_suffix,
        path_end_mismatch,
        unmasked_count,
        level_mismatch,
        prefix_mismatch,
        same_path_in_level,
        empty_level,
    };

    Kind kind;
    index_t class_index = pad_value;  // 0-based, pad_value when not applicable
    index_t level = pad_value;
    std::string message;              // 1-based for display
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

ValidationReport validate(const TreeEncoding& enc);

struct StorageBytes {
    std::uint64_t closed_form = 0;  // (s_bool + s_int) * |l| * |c|
    std::uint64_t measured = 0;     // owned buffers, derived indices included
};

std::uint64_t storage_bytes_closed_form(std::uint64_t num_levels, std::uint64_t num_classes,
                                        std::uint64_t s_bool, std::uint64_t s_int);

StorageBytes storage_bytes(const TreeEncoding& enc, std::uint64_t s_bool, std::uint64_t s_int);

inline constexpr std::uint16_t encoding_format_version = 1;

/// Portable "HTRE" byte stream. Class ids are written 1-based, pads as -1.
std::vector<std::uint8_t> serialize(const TreeEncoding& enc);

/// Throws FormatError on a bad header or truncation, CorruptEncoding when
/// `check` is set and the loaded matrices fail validation.
TreeEncoding deserialize(std::span<const std::uint8_t> bytes, bool check = true);

} // namespace htree
