#include "emtree/text.hpp"

#include <cmath>
#include <fstream>

#include "emtree/random.hpp"

namespace emtree {

namespace {

bool is_token_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

char ascii_lower(unsigned char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const StopwordSet& stopwords, bool stem) {
    std::vector<std::string> tokens;
    std::string current;
    const auto flush = [&] {
        if (current.empty()) {
            return;
        }
        if (!stopwords.contains(current)) {
            std::string term = stem ? porter_stem(current) : std::move(current);
            if (!term.empty()) {
                tokens.push_back(std::move(term));
            }
        }
        current.clear();
    };
    for (const char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_token_byte(c)) {
            current.push_back(ascii_lower(c));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

StopwordSet read_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open stopword file: " + path);
    }
    StopwordSet words;
    std::string line;
    while (std::getline(in, line)) {
        for (auto& t : tokenize(line, {}, false)) {
            words.insert(std::move(t));
        }
    }
    return words;
}

TermVector term_weights(const std::vector<std::string>& tokens, std::string doc_id) {
    std::map<std::string, std::size_t> tf;
    for (const auto& t : tokens) {
        ++tf[t];
    }
    TermVector tv;
    tv.doc_id = std::move(doc_id);
    for (const auto& [term, count] : tf) {
        tv.weights.emplace(term, 1.0 + std::log(static_cast<double>(count)));
    }
    return tv;
}

std::vector<CodeEntry> term_code(std::string_view term, const SignatureSpec& spec) {
    const std::uint64_t key = hash64(term) ^ spec.global_seed;
    std::uint64_t counter = 0;
    const auto next = [&] { return splitmix64(key + 0x9e3779b97f4a7c15ULL * counter++); };

    std::vector<CodeEntry> code;
    code.reserve(spec.code_sparsity);
    while (code.size() < spec.code_sparsity) {
        const auto index = static_cast<std::uint32_t>(uniform_below(next, spec.dim));
        bool seen = false;
        for (const auto& e : code) {
            if (e.index == index) {
                seen = true;
                break;
            }
        }
        if (!seen) {
            code.push_back({index, static_cast<std::int8_t>(code.size() % 2 == 0 ? 1 : -1)});
        }
    }
    return code;
}

Signature project_and_quantize(const TermVector& tv, const SignatureSpec& spec) {
    std::vector<double> projection(spec.dim, 0.0);
    for (const auto& [term, weight] : tv.weights) {
        for (const auto& e : term_code(term, spec)) {
            projection[e.index] += weight * e.sign;
        }
    }
    Signature s{tv.doc_id, BitVector(spec.dim)};
    for (std::size_t j = 0; j < spec.dim; ++j) {
        if (projection[j] > 0.0) {
            s.bits.set(j);
        }
    }
    return s;
}

Signature sign_document(std::string doc_id, std::string_view text, const SignatureSpec& spec,
                        const IndexOptions& options) {
    return project_and_quantize(term_weights(tokenize(text, options.stopwords, options.stem), std::move(doc_id)),
                                spec);
}

}  // namespace emtree
