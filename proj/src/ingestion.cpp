#include <htree/ingestion.hpp>
#include <charconv>
#include <cmath>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>

namespace htree {
namespace {

struct Declaration {
    index_t child;
    index_t parent;  // pad_value for a root line
    std::size_t line;
};

index_t parse_id(std::string_view token, std::size_t line)
{
    index_t v = 0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc() || ptr != end || v < 1) {
        throw FormatError("line " + std::to_string(line) + ": \"" + std::string(token) +
                          "\" is not a positive class id");
    }
    return v - 1;
}

std::string show(index_t parent) { return parent == pad_value ? "root" : std::to_string(parent + 1); }

// Uniform integer in [0, bound) from a 64-bit engine; bias is below 2^-32 for bounds under 2^32.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) { return rng() % bound; }

} // namespace

ParsedTaxonomy parse_edge_list(std::string_view text, MultiParentPolicy policy)
{
    std::vector<Declaration> decls;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

        std::vector<std::string_view> tokens;
        std::size_t pos = 0;
        while (pos < line.size()) {
            pos = line.find_first_not_of(" \t\r", pos);
            if (pos == std::string_view::npos) break;
            const auto end = std::min(line.find_first_of(" \t\r", pos), line.size());
            tokens.push_back(line.substr(pos, end - pos));
            pos = end;
        }
        if (tokens.empty()) continue;
        if (tokens.size() > 2) {
            throw FormatError("line " + std::to_string(line_no) + ": expected \"child<TAB>parent\" or \"child\"");
        }
        const index_t child = parse_id(tokens[0], line_no);
        const index_t parent = tokens.size() == 2 ? parse_id(tokens[1], line_no) : pad_value;
        decls.push_back({child, parent, line_no});
    }
    if (decls.empty()) throw FormatError("edge list declares no classes");

    index_t max_id = 0;
    for (const auto& d : decls) max_id = std::max(max_id, d.child);
    if (static_cast<std::size_t>(max_id) >= decls.size()) {
        throw FormatError("class ids are not contiguous: " + std::to_string(max_id + 1) + " is the largest id but only " +
                          std::to_string(decls.size()) + " lines declare classes");
    }
    const index_t n = max_id + 1;

    std::vector<std::vector<const Declaration*>> by_child(n);
    for (const auto& d : decls) {
        auto& seen = by_child[d.child];
        for (const auto* prior : seen) {
            if (prior->parent == d.parent) {
                throw FormatError("line " + std::to_string(d.line) + ": duplicate of line " +
                                  std::to_string(prior->line) + " (" + std::to_string(d.child + 1) + " -> " +
                                  show(d.parent) + ")");
            }
        }
        seen.push_back(&d);
    }

    ParsedTaxonomy out;
    out.taxonomy.parent.resize(n);
    for (index_t c = 0; c < n; ++c) {
        const auto& seen = by_child[c];
        if (seen.empty()) {
            throw FormatError("class ids are not contiguous: class " + std::to_string(c + 1) + " is never declared");
        }
        for (const auto* d : seen) {
            if (d->parent != pad_value && (d->parent >= n || by_child[d->parent].empty())) {
                throw DanglingEdge("line " + std::to_string(d->line) + ": parent " + std::to_string(d->parent + 1) +
                                   " of class " + std::to_string(c + 1) + " is never declared");
            }
        }
        if (seen.size() > 1) {
            if (policy == MultiParentPolicy::reject) {
                throw MultipleParents("class " + std::to_string(c + 1) + " is declared on lines " +
                                      std::to_string(seen[0]->line) + " and " + std::to_string(seen[1]->line));
            }
            Resolution res;
            res.child = ClassId(c);
            auto as_opt = [](index_t p) { return p == pad_value ? std::nullopt : std::optional<ClassId>(ClassId(p)); };
            res.kept = as_opt(seen[0]->parent);
            for (std::size_t i = 1; i < seen.size(); ++i) res.dropped.push_back(as_opt(seen[i]->parent));
            out.resolutions.push_back(std::move(res));
        }
        if (seen[0]->parent != pad_value) out.taxonomy.parent[c] = ClassId(seen[0]->parent);
    }

    check_taxonomy(out.taxonomy);
    return out;
}

ParsedTaxonomy parse_edge_list(std::istream& in, MultiParentPolicy policy)
{
    const std::string text(std::istreambuf_iterator<char>(in), {});
    return parse_edge_list(std::string_view(text), policy);
}

std::string emit_edge_list(const Taxonomy& taxonomy)
{
    std::ostringstream os;
    for (index_t c = 0; c < taxonomy.num_classes(); ++c) {
        os << c + 1;
        if (const auto& p = taxonomy.parent[c]) os << '\t' << p->one_based();
        os << '\n';
    }
    return os.str();
}

Taxonomy generate_synthetic(const SyntheticTreeSpec& spec)
{
    if (spec.num_levels < 1) throw ParameterError("a tree needs at least one level");
    if (spec.num_classes < spec.num_levels) {
        throw ParameterError("cannot fill " + std::to_string(spec.num_levels) + " levels with " +
                             std::to_string(spec.num_classes) + " classes");
    }
    const double window = spec.shape.parent_window;
    if (!(window > 0.0 && window <= 1.0)) throw ParameterError("parent_window must be in (0, 1]");

    const index_t n = spec.num_classes;
    const index_t levels = spec.num_levels;
    std::mt19937_64 rng(spec.seed);

    // Creation order: a spine of one class per level, then attachments.
    std::vector<index_t> parent(n, pad_value);
    std::vector<index_t> depth(n, 0);
    std::vector<index_t> eligible;  // nodes that may still take children
    for (index_t i = 0; i < levels; ++i) {
        parent[i] = i == 0 ? pad_value : i - 1;
        depth[i] = i;
        if (i < levels - 1) eligible.push_back(i);
    }
    for (index_t i = levels; i < n; ++i) {
        if (eligible.empty()) continue;  // one level: every class is a root
        const auto size = static_cast<std::uint64_t>(eligible.size());
        const auto span = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(window * double(size))));
        const index_t p = eligible[size - span + bounded(rng, span)];
        parent[i] = p;
        depth[i] = depth[p] + 1;
        if (depth[i] < levels - 1) eligible.push_back(i);
    }

    std::vector<index_t> id(n);
    for (index_t i = 0; i < n; ++i) id[i] = i;
    if (spec.shape.shuffle_ids) {
        for (index_t i = n - 1; i > 0; --i) {
            std::swap(id[i], id[bounded(rng, static_cast<std::uint64_t>(i) + 1)]);
        }
    }

    Taxonomy taxonomy;
    taxonomy.parent.resize(n);
    for (index_t i = 0; i < n; ++i) {
        if (parent[i] != pad_value) taxonomy.parent[id[i]] = ClassId(id[parent[i]]);
    }
    return taxonomy;
}

} // namespace htree
