#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "emtree/error.hpp"

namespace emtree {

// cluster id -> member doc ids (sorted, unique). Cluster ids produced by the
// tree are record-index paths such as "3.0.17".
struct Clustering {
    std::map<std::string, std::vector<std::string>> clusters;

    std::size_t doc_count() const;
    std::size_t cluster_count() const { return clusters.size(); }

    // Sorts members, then throws DataError if a doc appears twice or a cluster is empty.
    void normalize();

    friend bool operator==(const Clustering&, const Clustering&) = default;
};

// Text format: one line per document, "doc_id<TAB>cluster_path". Lines are
// written grouped by cluster id, members in sorted order.
void write_clustering(const Clustering& c, std::ostream& out);
void write_clustering(const Clustering& c, const std::string& path);

// Errors: ParseError (missing tab, empty field), DataError (doc in two clusters).
Clustering read_clustering(std::istream& in);
Clustering read_clustering(const std::string& path);

}  // namespace emtree
