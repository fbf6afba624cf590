#include "emtree/tree_io.hpp"

#include <algorithm>
#include <fstream>

#include "binary_io.hpp"

namespace emtree {

using detail::get_le;
using detail::put_le;

namespace {

void write_node(const Node& node, std::size_t dim, std::ostream& out) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(node.records.size()));
    for (const auto& r : node.records) {
        if (r.key.dim() != dim) {
            throw DimensionMismatch(dim, r.key.dim());
        }
        for (const auto w : r.key.words()) {
            put_le<std::uint64_t>(out, w);
        }
        if (r.child) {
            write_node(*r.child, dim, out);
        }
    }
}

struct Reader {
    std::istream& in;
    std::size_t dim;
    std::size_t order;
    std::size_t depth;

    Node read_node(std::size_t level) {
        std::uint32_t count = 0;
        if (!get_le(in, count)) {
            throw TruncatedError("tree file: truncated node header at level " + std::to_string(level));
        }
        if (count < 1 || count > order) {
            throw DataError("tree file: node at level " + std::to_string(level) + " has " + std::to_string(count) +
                            " records, expected 1.." + std::to_string(order));
        }
        Node node;
        node.records.reserve(std::min<std::uint32_t>(count, 4096));
        for (std::uint32_t i = 0; i < count; ++i) {
            std::vector<std::uint64_t> words(dim / 64);
            for (auto& w : words) {
                if (!get_le(in, w)) {
                    throw TruncatedError("tree file: truncated key at level " + std::to_string(level));
                }
            }
            Record& r = node.records.emplace_back(BitVector(dim, std::move(words)));
            if (level < depth) {
                r.child = std::make_unique<Node>(read_node(level + 1));
            }
        }
        return node;
    }
};

}  // namespace

void write_tree(const Node& root, std::size_t order, std::ostream& out) {
    if (root.records.empty()) {
        throw EmptyTreeError();
    }
    const std::size_t dim = root.records.front().key.dim();
    out.write(kTreeMagic, sizeof(kTreeMagic));
    put_le<std::uint32_t>(out, kTreeVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(order));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tree_depth(root)));
    write_node(root, dim, out);
    if (!out) {
        throw IoError("tree file: write failed");
    }
}

void write_tree(const Node& root, std::size_t order, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    write_tree(root, order, out);
    out.flush();
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

TreeFile read_tree(std::istream& in) {
    char magic[4];
    if (!detail::get_bytes(in, magic, sizeof(magic))) {
        throw TruncatedError("tree file: truncated header");
    }
    if (!std::equal(magic, magic + 4, kTreeMagic)) {
        throw BadMagicError("tree file: bad magic (expected EMT1)");
    }
    std::uint32_t version = 0;
    if (!get_le(in, version)) {
        throw TruncatedError("tree file: truncated header");
    }
    if (version != kTreeVersion) {
        throw VersionMismatchError("tree file: unsupported version " + std::to_string(version));
    }
    std::uint32_t dim = 0;
    std::uint32_t order = 0;
    std::uint32_t depth = 0;
    if (!get_le(in, dim) || !get_le(in, order) || !get_le(in, depth)) {
        throw TruncatedError("tree file: truncated header");
    }
    if (dim == 0 || dim % 64 != 0 || dim > kMaxDim) {
        throw DataError("tree file: invalid dimension " + std::to_string(dim));
    }
    if (order < 2) {
        throw DataError("tree file: invalid order " + std::to_string(order));
    }
    if (depth < 1 || depth > kMaxTreeDepth) {
        throw DataError("tree file: invalid depth " + std::to_string(depth));
    }
    Reader reader{in, dim, order, depth};
    TreeFile tf;
    tf.dim = dim;
    tf.order = order;
    tf.root = reader.read_node(1);
    if (!detail::at_eof(in)) {
        throw DataError("tree file: trailing bytes after tree");
    }
    return tf;
}

TreeFile read_tree(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for reading: " + path);
    }
    return read_tree(in);
}

}  // namespace emtree
