#include <htree/io.hpp>
#include "binary.hpp"
#include <charconv>
#include <fstream>
#include <iterator>

namespace htree::io {
namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view token, std::size_t line)
{
    T value{};
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw FormatError("line " + std::to_string(line) + ": cannot parse \"" + std::string(token) + "\"");
    }
    return value;
}

bool has_magic(std::span<const std::uint8_t> data, std::string_view tag)
{
    return data.size() >= tag.size() && std::equal(tag.begin(), tag.end(), data.begin(),
                                                   [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; });
}

std::uint8_t mask_code(MaskValue::Mode mode)
{
    switch (mode) {
    case MaskValue::Mode::neg_inf: return 0;
    case MaskValue::Mode::not_a_number: return 1;
    case MaskValue::Mode::scalar: break;
    }
    return 2;
}

MaskValue read_mask(detail::ByteReader& in)
{
    const auto code = in.u8();
    const float payload = in.f32();
    switch (code) {
    case 0: return MaskValue::neg_inf();
    case 1: return MaskValue::not_a_number();
    case 2: return MaskValue::scalar(payload);
    default: throw FormatError("unknown mask mode " + std::to_string(code));
    }
}

void write_mask(detail::ByteWriter& out, const MaskValue& mu)
{
    out.u8(mask_code(mu.mode));
    out.f32(mu.mode == MaskValue::Mode::scalar ? static_cast<float>(mu.payload) : 0.0f);
}

std::uint32_t dim(Eigen::Index n, const char* what)
{
    if (n < 0 || static_cast<std::uint64_t>(n) > 0xFFFFFFFFull) {
        throw ShapeError(std::string(what) + " does not fit in a u32 header field");
    }
    return static_cast<std::uint32_t>(n);
}

label_t label_to_disk(label_t v) { return v == pad_value ? label_t(pad_value) : v + 1; }
label_t label_from_disk(label_t v) { return v == pad_value ? label_t(pad_value) : v - 1; }

} // namespace

bytes read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw FormatError("short write to " + path.string());
}

TreeEncoding load_encoding(const std::filesystem::path& path, bool check)
{
    return deserialize(read_file(path), check);
}

void save_encoding(const std::filesystem::path& path, const TreeEncoding& enc)
{
    write_file(path, serialize(enc));
}

bytes serialize_scores(const ScoreBatch<float>& scores)
{
    detail::ByteWriter out;
    out.reserve(12 + 4 * static_cast<std::size_t>(scores.size()));
    out.magic("HTSB");
    out.u32(dim(scores.rows(), "batch size"));
    out.u32(dim(scores.cols(), "class count"));
    for (Eigen::Index i = 0; i < scores.size(); ++i) out.f32(scores.data()[i]);
    return out.take();
}

ScoreBatch<float> deserialize_scores(std::span<const std::uint8_t> data)
{
    detail::ByteReader in(data, "score batch");
    in.expect_magic("HTSB");
    const auto rows = in.u32();
    const auto cols = in.u32();
    in.need_elements(std::uint64_t(rows) * cols, 4);
    ScoreBatch<float> scores(rows, cols);
    for (Eigen::Index i = 0; i < scores.size(); ++i) scores.data()[i] = in.f32();
    in.expect_end();
    return scores;
}

ScoreBatch<float> parse_scores_csv(std::string_view text)
{
    std::vector<float> values;
    Eigen::Index cols = -1;
    Eigen::Index rows = 0;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        const auto line = trim(text.substr(0, eol));
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;

        Eigen::Index count = 0;
        std::string_view rest = line;
        while (true) {
            const auto comma = rest.find(',');
            values.push_back(parse_number<float>(trim(rest.substr(0, comma)), line_no));
            ++count;
            if (values.size() > csv_score_limit) {
                throw FormatError("CSV score input exceeds " + std::to_string(csv_score_limit) +
                                  " values; use the binary HTSB format");
            }
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        if (cols >= 0 && count != cols) {
            throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                              " scores, found " + std::to_string(count));
        }
        cols = count;
        ++rows;
    }
    if (rows == 0) throw FormatError("CSV score input is empty");
    return Eigen::Map<ScoreBatch<float>>(values.data(), rows, cols);
}

bytes serialize_labels(const label_vector_type& labels)
{
    detail::ByteWriter out;
    out.magic("HTLB");
    out.u32(dim(labels.size(), "batch size"));
    for (Eigen::Index b = 0; b < labels.size(); ++b) out.i64(labels(b) + 1);
    return out.take();
}

label_vector_type deserialize_labels(std::span<const std::uint8_t> data)
{
    detail::ByteReader in(data, "label batch");
    in.expect_magic("HTLB");
    const auto n = in.u32();
    in.need_elements(n, 8);
    label_vector_type labels(n);
    for (Eigen::Index b = 0; b < labels.size(); ++b) labels(b) = in.i64() - 1;
    in.expect_end();
    return labels;
}

label_vector_type parse_labels_csv(std::string_view text)
{
    std::vector<label_t> values;
    std::size_t line_no = 1;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const char ch = text[pos];
        if (ch == '\n') { ++line_no; ++pos; continue; }
        if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r') { ++pos; continue; }
        if (ch == '#') {
            while (pos < text.size() && text[pos] != '\n') ++pos;
            continue;
        }
        const auto end = text.find_first_of(", \t\r\n", pos);
        const auto token = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        values.push_back(parse_number<label_t>(token, line_no) - 1);
        pos = end == std::string_view::npos ? text.size() : end;
    }
    return Eigen::Map<label_vector_type>(values.data(), static_cast<Eigen::Index>(values.size()));
}

ScoreBatch<float> load_scores(const std::filesystem::path& path)
{
    const auto data = read_file(path);
    if (has_magic(data, "HTSB")) return deserialize_scores(data);
    return parse_scores_csv({reinterpret_cast<const char*>(data.data()), data.size()});
}

label_vector_type load_labels(const std::filesystem::path& path)
{
    const auto data = read_file(path);
    if (has_magic(data, "HTLB")) return deserialize_labels(data);
    return parse_labels_csv({reinterpret_cast<const char*>(data.data()), data.size()});
}

bytes serialize_partitioned(const PartitionedScores<float>& parts)
{
    detail::ByteWriter out;
    out.reserve(21 + 4 * static_cast<std::size_t>(parts.data.size()));
    out.magic("HTPS");
    out.u32(dim(parts.batch, "batch size"));
    out.u32(dim(parts.levels, "level count"));
    out.u32(dim(parts.classes(), "class count"));
    write_mask(out, parts.mask_value);
    for (Eigen::Index i = 0; i < parts.data.size(); ++i) out.f32(parts.data.data()[i]);
    return out.take();
}

PartitionedScores<float> deserialize_partitioned(std::span<const std::uint8_t> data)
{
    detail::ByteReader in(data, "partitioned scores");
    in.expect_magic("HTPS");
    PartitionedScores<float> parts;
    parts.batch = in.u32();
    parts.levels = in.u32();
    const auto classes = in.u32();
    parts.mask_value = read_mask(in);
    in.need_elements(std::uint64_t(parts.batch) * parts.levels * classes, 4);
    parts.data.resize(parts.batch * parts.levels, classes);
    for (Eigen::Index i = 0; i < parts.data.size(); ++i) parts.data.data()[i] = in.f32();
    in.expect_end();
    return parts;
}

bytes serialize_path_labels(const path_label_matrix_type& paths)
{
    detail::ByteWriter out;
    out.magic("HTPL");
    out.u32(dim(paths.rows(), "batch size"));
    out.u32(dim(paths.cols(), "level count"));
    for (Eigen::Index i = 0; i < paths.size(); ++i) out.i64(label_to_disk(paths.data()[i]));
    return out.take();
}

path_label_matrix_type deserialize_path_labels(std::span<const std::uint8_t> data)
{
    detail::ByteReader in(data, "path labels");
    in.expect_magic("HTPL");
    const auto rows = in.u32();
    const auto cols = in.u32();
    in.need_elements(std::uint64_t(rows) * cols, 8);
    path_label_matrix_type paths(rows, cols);
    for (Eigen::Index i = 0; i < paths.size(); ++i) paths.data()[i] = label_from_disk(in.i64());
    in.expect_end();
    return paths;
}

bytes serialize_flat(const FlatTrainingSet<float>& flat)
{
    detail::ByteWriter out;
    out.magic("HTFT");
    out.u32(dim(flat.rows.rows(), "row count"));
    out.u32(dim(flat.rows.cols(), "class count"));
    write_mask(out, flat.mask_value);
    for (Eigen::Index i = 0; i < flat.rows.size(); ++i) out.f32(flat.rows.data()[i]);
    for (Eigen::Index k = 0; k < flat.labels.size(); ++k) out.i64(label_to_disk(flat.labels(k)));
    for (const auto& [b, l] : flat.origin) {
        out.u32(dim(b + 1, "sample index"));
        out.u32(dim(l + 1, "level index"));
    }
    return out.take();
}

FlatTrainingSet<float> deserialize_flat(std::span<const std::uint8_t> data)
{
    detail::ByteReader in(data, "flat training set");
    in.expect_magic("HTFT");
    const auto n = in.u32();
    const auto classes = in.u32();
    FlatTrainingSet<float> flat;
    flat.mask_value = read_mask(in);
    in.need_elements(std::uint64_t(n) * classes, 4);
    flat.rows.resize(n, classes);
    for (Eigen::Index i = 0; i < flat.rows.size(); ++i) flat.rows.data()[i] = in.f32();
    in.need_elements(n, 16);
    flat.labels.resize(n);
    for (Eigen::Index k = 0; k < flat.labels.size(); ++k) flat.labels(k) = label_from_disk(in.i64());
    flat.origin.reserve(n);
    for (std::uint32_t k = 0; k < n; ++k) {
        const Eigen::Index b = Eigen::Index(in.u32()) - 1;
        const Eigen::Index l = Eigen::Index(in.u32()) - 1;
        flat.origin.emplace_back(b, l);
    }
    in.expect_end();
    return flat;
}

} // namespace htree::io
