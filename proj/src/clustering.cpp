#include "emtree/clustering.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "emtree/error.hpp"

namespace emtree {

std::size_t Clustering::doc_count() const {
    std::size_t n = 0;
    for (const auto& [id, members] : clusters) {
        n += members.size();
    }
    return n;
}

void Clustering::normalize() {
    std::unordered_set<std::string> seen;
    for (auto& [id, members] : clusters) {
        if (members.empty()) {
            throw DataError("clustering: cluster " + id + " is empty");
        }
        std::sort(members.begin(), members.end());
        for (const auto& doc : members) {
            if (!seen.insert(doc).second) {
                throw DataError("clustering: document " + doc + " appears more than once");
            }
        }
    }
}

namespace {

// Fields that could not be read back unchanged.
bool bad_field(const std::string& s) { return s.empty() || s.find_first_of("\t\r\n") != std::string::npos; }

}  // namespace

void write_clustering(const Clustering& c, std::ostream& out) {
    for (const auto& [id, members] : c.clusters) {
        if (bad_field(id)) {
            throw DataError("clustering: cluster id is empty or contains a tab or line break");
        }
        for (const auto& doc : members) {
            if (bad_field(doc)) {
                throw DataError("clustering: doc_id is empty or contains a tab or line break");
            }
            out << doc << '\t' << id << '\n';
        }
    }
    if (!out) {
        throw IoError("clustering: write failed");
    }
}

void write_clustering(const Clustering& c, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    write_clustering(c, out);
    out.flush();
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

Clustering read_clustering(std::istream& in) {
    Clustering c;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError(line_no, "expected doc_id<TAB>cluster_path");
        }
        if (line.find('\t', tab + 1) != std::string::npos) {
            throw ParseError(line_no, "more than two fields");
        }
        std::string doc = line.substr(0, tab);
        std::string cluster = line.substr(tab + 1);
        if (doc.empty() || cluster.empty()) {
            throw ParseError(line_no, "empty doc_id or cluster_path");
        }
        c.clusters[std::move(cluster)].push_back(std::move(doc));
    }
    c.normalize();
    return c;
}

Clustering read_clustering(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open for reading: " + path);
    }
    return read_clustering(in);
}

}  // namespace emtree
