#pragma once

#include <iosfwd>
#include <string>

#include "emtree/tree.hpp"

namespace emtree {

// EMT1 file format, little-endian:
//   "EMT1" | u32 version=1 | u32 d | u32 order | u32 depth |
//   nodes in depth-first pre-order: u32 record_count, then per record
//   d/64 x u64 key words followed by the child node (absent on the leaf level).
// Leaf contents are not stored.
inline constexpr char kTreeMagic[4] = {'E', 'M', 'T', '1'};
inline constexpr std::uint32_t kTreeVersion = 1;
inline constexpr std::size_t kMaxTreeDepth = 64;

struct TreeFile {
    std::size_t dim = 0;
    std::size_t order = 0;
    Node root;
};

void write_tree(const Node& root, std::size_t order, std::ostream& out);
void write_tree(const Node& root, std::size_t order, const std::string& path);

// Errors: BadMagicError, VersionMismatchError, TruncatedError, DataError for
// structural problems (record count outside 1..order, bad dimension or depth).
TreeFile read_tree(std::istream& in);
TreeFile read_tree(const std::string& path);

}  // namespace emtree
