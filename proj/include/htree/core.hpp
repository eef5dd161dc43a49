#pragma once
#include <Eigen/Core>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace htree {

template <class Scalar_, int Rows_ = Eigen::Dynamic, int Cols_ = Eigen::Dynamic>
using rowmat_type = Eigen::Matrix<Scalar_, Rows_, Cols_, Eigen::RowMajor>;

template <class Scalar_, int Rows_ = Eigen::Dynamic, int Cols_ = Eigen::Dynamic>
using rowarr_type = Eigen::Array<Scalar_, Rows_, Cols_, Eigen::RowMajor>;

template <class Scalar_, int Rows_ = Eigen::Dynamic>
using colvec_type = Eigen::Matrix<Scalar_, Rows_, 1>;

using index_t = std::int32_t;
using label_t = std::int64_t;

/// Sentinel marking the end of an ancestral path. Never a valid class index.
inline constexpr index_t pad_value = -1;

/// Mask matrix, |l| x |c|; true means the class is excluded from that level.
using mask_matrix_type = rowarr_type<bool>;
/// Path matrix, |c| x |l|; row c is the root-to-c path right-padded with pad_value.
using path_matrix_type = rowmat_type<index_t>;
/// Gathered path labels, |b| x |l|, 64-bit like the label batches they come from.
using path_label_matrix_type = rowmat_type<label_t>;
using label_vector_type = colvec_type<label_t>;

/// Internal 0-based class index. Display and file formats use value + 1.
struct ClassId {
    index_t value = 0;

    constexpr ClassId() = default;
    constexpr explicit ClassId(index_t v) : value(v) {}
    constexpr index_t one_based() const { return value + 1; }
    static constexpr ClassId from_one_based(index_t v) { return ClassId(v - 1); }

    friend constexpr auto operator<=>(const ClassId&, const ClassId&) = default;
};

/// Internal 0-based depth level.
struct LevelIndex {
    index_t value = 0;

    constexpr LevelIndex() = default;
    constexpr explicit LevelIndex(index_t v) : value(v) {}

    friend constexpr auto operator<=>(const LevelIndex&, const LevelIndex&) = default;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CyclicTaxonomy : public Error { public: using Error::Error; };
class MultipleParents : public Error { public: using Error::Error; };
class DanglingEdge : public Error { public: using Error::Error; };
class InvalidTaxonomy : public Error { public: using Error::Error; };
class ShapeError : public Error { public: using Error::Error; };
class ParameterError : public Error { public: using Error::Error; };
class UnsupportedMaskValue : public Error { public: using Error::Error; };
class InconsistentRow : public Error { public: using Error::Error; };
class CorruptEncoding : public Error { public: using Error::Error; };
class FormatError : public Error { public: using Error::Error; };
class ResourceError : public Error { public: using Error::Error; };

class LabelError : public Error {
public:
    LabelError(Eigen::Index sample, label_t value, const std::string& what)
        : Error(what), sample_(sample), value_(value) {}

    Eigen::Index sample() const { return sample_; }
    label_t value() const { return value_; }

private:
    Eigen::Index sample_;
    label_t value_;
};

} // namespace htree
