#include "emtree/signature.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "binary_io.hpp"

namespace emtree {

using detail::get_le;
using detail::put_le;

BitVector::BitVector(std::size_t dim, std::vector<std::uint64_t> words) : dim_(dim), words_(std::move(words)) {
    if (words_.size() != (dim + 63) / 64) {
        throw std::invalid_argument("BitVector: word count does not match dimension");
    }
    if (!trailing_bits_clear()) {
        throw std::invalid_argument("BitVector: bits set past the dimension");
    }
}

BitVector BitVector::complement() const {
    BitVector out(dim_);
    for (std::size_t i = 0; i < words_.size(); ++i) {
        out.words_[i] = ~words_[i];
    }
    if (const std::size_t tail = dim_ & 63; tail != 0 && !out.words_.empty()) {
        out.words_.back() &= (std::uint64_t{1} << tail) - 1;
    }
    return out;
}

std::size_t BitVector::popcount() const noexcept {
    std::size_t total = 0;
    for (const auto w : words_) {
        total += static_cast<std::size_t>(std::popcount(w));
    }
    return total;
}

bool BitVector::trailing_bits_clear() const noexcept {
    const std::size_t tail = dim_ & 63;
    if (tail == 0 || words_.empty()) {
        return true;
    }
    return (words_.back() >> tail) == 0;
}

void SignatureSpec::validate() const {
    if (dim == 0 || dim % 64 != 0 || dim > kMaxDim) {
        throw std::invalid_argument("signature dimension must be a positive multiple of 64, got " +
                                    std::to_string(dim));
    }
    if (code_sparsity == 0 || code_sparsity % 2 != 0 || code_sparsity > dim) {
        throw std::invalid_argument("code sparsity must be a positive even number <= dimension, got " +
                                    std::to_string(code_sparsity));
    }
}

void SignatureCollection::add(Signature s) {
    if (s.dim() != spec.dim) {
        throw DimensionMismatch(spec.dim, s.dim());
    }
    if (!ids_.insert(s.doc_id).second) {
        throw DuplicateDocIdError(s.doc_id);
    }
    signatures.push_back(std::move(s));
}

namespace {

void write_header(std::ostream& out, std::size_t dim, std::uint64_t count) {
    out.write(kSignatureMagic, sizeof(kSignatureMagic));
    put_le<std::uint32_t>(out, kSignatureVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
    put_le<std::uint64_t>(out, count);
}

void write_record(std::ostream& out, const Signature& s) {
    if (s.doc_id.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw DataError("doc_id longer than 65535 bytes: " + s.doc_id.substr(0, 64) + "...");
    }
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.doc_id.size()));
    out.write(s.doc_id.data(), static_cast<std::streamsize>(s.doc_id.size()));
    for (const auto w : s.bits.words()) {
        put_le<std::uint64_t>(out, w);
    }
}

struct Header {
    std::size_t dim = 0;
    std::uint64_t count = 0;
};

Header read_header(std::istream& in) {
    char magic[4];
    if (!detail::get_bytes(in, magic, sizeof(magic))) {
        throw TruncatedError("signature file: truncated header");
    }
    if (!std::equal(magic, magic + 4, kSignatureMagic)) {
        throw BadMagicError("signature file: bad magic (expected SGT1)");
    }
    std::uint32_t version = 0;
    std::uint32_t dim = 0;
    Header h;
    if (!get_le(in, version)) {
        throw TruncatedError("signature file: truncated header");
    }
    if (version != kSignatureVersion) {
        throw VersionMismatchError("signature file: unsupported version " + std::to_string(version));
    }
    if (!get_le(in, dim) || !get_le(in, h.count)) {
        throw TruncatedError("signature file: truncated header");
    }
    if (dim == 0 || dim % 64 != 0 || dim > kMaxDim) {
        throw DataError("signature file: invalid dimension " + std::to_string(dim));
    }
    h.dim = dim;
    return h;
}

constexpr std::streamoff kHeaderBytes = 4 + 4 + 4 + 8;

// Reads one record; `index` only feeds error messages.
Signature read_record(std::istream& in, std::size_t dim, std::uint64_t index, std::vector<unsigned char>& scratch) {
    const auto fail = [&](const char* what) {
        std::ostringstream msg;
        msg << "signature file: truncated record " << index << " (" << what << ")";
        if (const auto pos = in.tellg(); pos >= 0) {
            msg << " near byte " << pos;
        }
        return TruncatedError(msg.str());
    };
    std::uint16_t id_len = 0;
    if (!get_le(in, id_len)) {
        in.clear();
        throw fail("id length");
    }
    Signature s;
    s.doc_id.resize(id_len);
    if (!detail::get_bytes(in, s.doc_id.data(), id_len)) {
        in.clear();
        throw fail("doc_id");
    }
    const std::size_t words = dim / 64;
    scratch.resize(words * 8);
    if (!detail::get_bytes(in, reinterpret_cast<char*>(scratch.data()), scratch.size())) {
        in.clear();
        throw fail("signature words");
    }
    std::vector<std::uint64_t> packed(words);
    for (std::size_t w = 0; w < words; ++w) {
        std::uint64_t v = 0;
        for (std::size_t b = 0; b < 8; ++b) {
            v |= static_cast<std::uint64_t>(scratch[w * 8 + b]) << (8 * b);
        }
        packed[w] = v;
    }
    s.bits = BitVector(dim, std::move(packed));
    return s;
}

}  // namespace

void write_signatures(const SignatureCollection& collection, std::ostream& sink) {
    write_header(sink, collection.dim(), collection.size());
    for (const auto& s : collection.signatures) {
        if (s.dim() != collection.dim()) {
            throw DimensionMismatch(collection.dim(), s.dim());
        }
        write_record(sink, s);
    }
    if (!sink) {
        throw IoError("signature file: write failed");
    }
}

void write_signatures(const SignatureCollection& collection, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    write_signatures(collection, out);
    out.flush();
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

SignatureCollection read_signatures(std::istream& source) {
    const Header h = read_header(source);
    SignatureCollection collection;
    collection.spec.dim = h.dim;
    collection.spec.code_sparsity = std::min<std::size_t>(collection.spec.code_sparsity, h.dim);
    // Header count is untrusted; cap the up-front reservation.
    collection.signatures.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(h.count, 1u << 20)));
    std::vector<unsigned char> scratch;
    for (std::uint64_t i = 0; i < h.count; ++i) {
        collection.add(read_record(source, h.dim, i, scratch));
    }
    if (!detail::at_eof(source)) {
        throw DataError("signature file: trailing bytes after " + std::to_string(h.count) + " records");
    }
    return collection;
}

SignatureCollection read_signatures(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for reading: " + path);
    }
    return read_signatures(in);
}

SignatureWriter::SignatureWriter(const std::string& path, std::size_t dim)
    : out_(path, std::ios::binary | std::ios::trunc), dim_(dim) {
    if (!out_) {
        throw IoError("cannot open for writing: " + path);
    }
    write_header(out_, dim_, 0);
}

SignatureWriter::~SignatureWriter() {
    if (!finished_) {
        try {
            finish();
        } catch (...) {
        }
    }
}

void SignatureWriter::write(const Signature& s) {
    if (s.dim() != dim_) {
        throw DimensionMismatch(dim_, s.dim());
    }
    write_record(out_, s);
    ++count_;
}

void SignatureWriter::finish() {
    finished_ = true;
    out_.seekp(kHeaderBytes - 8);
    put_le<std::uint64_t>(out_, count_);
    out_.flush();
    if (!out_) {
        throw IoError("signature file: write failed");
    }
    out_.close();
}

std::size_t MemorySignatureSource::next_batch(std::vector<Signature>& out, std::size_t max) {
    out.clear();
    const std::size_t end = std::min(collection_->size(), position_ + max);
    for (; position_ < end; ++position_) {
        out.push_back(collection_->signatures[position_]);
    }
    return out.size();
}

FileSignatureSource::FileSignatureSource(std::string path) : path_(std::move(path)), in_(path_, std::ios::binary) {
    if (!in_) {
        throw IoError("cannot open for reading: " + path_);
    }
    const Header h = read_header(in_);
    dim_ = h.dim;
    count_ = h.count;
    data_offset_ = kHeaderBytes;
}

void FileSignatureSource::rewind() {
    in_.clear();
    in_.seekg(data_offset_);
    position_ = 0;
}

std::size_t FileSignatureSource::next_batch(std::vector<Signature>& out, std::size_t max) {
    out.clear();
    std::vector<unsigned char> scratch;
    while (out.size() < max && position_ < count_) {
        try {
            out.push_back(read_record(in_, dim_, position_, scratch));
        } catch (const TruncatedError& e) {
            throw TruncatedError(path_ + ": " + e.what());
        }
        ++position_;
    }
    return out.size();
}

}  // namespace emtree
