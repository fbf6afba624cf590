#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "emtree/signature.hpp"

namespace emtree {

using StopwordSet = std::set<std::string, std::less<>>;

// Lowercases ASCII letters and splits on runs of characters that are not ASCII
// alphanumerics. Bytes >= 0x80 are kept inside tokens so UTF-8 words survive.
std::vector<std::string> tokenize(std::string_view text, const StopwordSet& stopwords, bool stem);

// Porter (1980) suffix stripper over lowercase ASCII words.
std::string porter_stem(std::string_view word);

StopwordSet read_stopwords(const std::string& path);

struct TermVector {
    std::string doc_id;
    std::map<std::string, double> weights;
};

// weight(term) = 1 + ln(tf)
TermVector term_weights(const std::vector<std::string>& tokens, std::string doc_id);

struct CodeEntry {
    std::uint32_t index;
    std::int8_t sign;  // +1 or -1

    friend bool operator==(const CodeEntry&, const CodeEntry&) = default;
};

// Sparse ternary code of a term: code_sparsity distinct indices in [0, dim),
// alternating +1/-1 in draw order. Derived from a counter-based generator keyed
// by hash64(term) ^ global_seed.
std::vector<CodeEntry> term_code(std::string_view term, const SignatureSpec& spec);

// Sums weight * code over terms and thresholds at zero (ties -> 0 bit).
Signature project_and_quantize(const TermVector& tv, const SignatureSpec& spec);

struct IndexOptions {
    StopwordSet stopwords;
    bool stem = false;
};

Signature sign_document(std::string doc_id, std::string_view text, const SignatureSpec& spec,
                        const IndexOptions& options);

}  // namespace emtree
