#pragma once

#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "emtree/bitvector.hpp"

namespace emtree {

// Widest signature the file readers accept: 2 MiB of words per record.
inline constexpr std::size_t kMaxDim = std::size_t{1} << 24;

struct SignatureSpec {
    std::size_t dim = 4096;
    std::size_t code_sparsity = 8;
    std::uint64_t global_seed = 0;

    // Throws std::invalid_argument when dim is not a positive multiple of 64 up to kMaxDim or
    // code_sparsity is not a positive even number <= dim.
    void validate() const;
};

struct Signature {
    std::string doc_id;
    BitVector bits;

    std::size_t dim() const noexcept { return bits.dim(); }
    friend bool operator==(const Signature&, const Signature&) = default;
};

inline std::size_t hamming(const Signature& a, const Signature& b) { return hamming(a.bits, b.bits); }

struct SignatureCollection {
    SignatureSpec spec;
    std::vector<Signature> signatures;

    std::size_t size() const noexcept { return signatures.size(); }
    std::size_t dim() const noexcept { return spec.dim; }

    // Appends after checking width; duplicate ids throw DuplicateDocIdError.
    void add(Signature s);

    friend bool operator==(const SignatureCollection& a, const SignatureCollection& b) {
        return a.spec.dim == b.spec.dim && a.signatures == b.signatures;
    }

private:
    std::unordered_set<std::string> ids_;
};

// ---------------------------------------------------------------------------
// SGT1 file format, little-endian:
//   "SGT1" | u32 version=1 | u32 d | u64 n |
//   n x ( u16 id_len | id bytes | d/64 x u64 words )
// The file carries only d; sparsity and seed are not recorded.

inline constexpr char kSignatureMagic[4] = {'S', 'G', 'T', '1'};
inline constexpr std::uint32_t kSignatureVersion = 1;

void write_signatures(const SignatureCollection& collection, std::ostream& sink);
void write_signatures(const SignatureCollection& collection, const std::string& path);

// Errors: BadMagicError, VersionMismatchError, TruncatedError, DuplicateDocIdError.
SignatureCollection read_signatures(std::istream& source);
SignatureCollection read_signatures(const std::string& path);

// Incremental writer for producers that do not hold the whole collection.
// The record count in the header is patched on finish().
class SignatureWriter {
public:
    SignatureWriter(const std::string& path, std::size_t dim);
    ~SignatureWriter();
    SignatureWriter(const SignatureWriter&) = delete;
    SignatureWriter& operator=(const SignatureWriter&) = delete;

    void write(const Signature& s);
    void finish();
    std::uint64_t count() const noexcept { return count_; }

private:
    std::ofstream out_;
    std::size_t dim_;
    std::uint64_t count_ = 0;
    bool finished_ = false;
};

// A sequential, re-readable stream of signatures. next_batch() fills `out`
// with up to `max` records and returns how many were read; 0 means end.
class SignatureSource {
public:
    virtual ~SignatureSource() = default;
    virtual std::size_t dim() const = 0;
    virtual std::uint64_t size() const = 0;
    virtual void rewind() = 0;
    virtual std::size_t next_batch(std::vector<Signature>& out, std::size_t max) = 0;
};

class MemorySignatureSource final : public SignatureSource {
public:
    explicit MemorySignatureSource(const SignatureCollection& collection) : collection_(&collection) {}

    std::size_t dim() const override { return collection_->dim(); }
    std::uint64_t size() const override { return collection_->size(); }
    void rewind() override { position_ = 0; }
    std::size_t next_batch(std::vector<Signature>& out, std::size_t max) override;

private:
    const SignatureCollection* collection_;
    std::size_t position_ = 0;
};

// Streams an SGT1 file record by record. Read failures are reported with the
// record index and byte offset. Duplicate ids are not detected here.
class FileSignatureSource final : public SignatureSource {
public:
    explicit FileSignatureSource(std::string path);

    std::size_t dim() const override { return dim_; }
    std::uint64_t size() const override { return count_; }
    void rewind() override;
    std::size_t next_batch(std::vector<Signature>& out, std::size_t max) override;

private:
    std::string path_;
    std::ifstream in_;
    std::size_t dim_ = 0;
    std::uint64_t count_ = 0;
    std::uint64_t position_ = 0;
    std::streamoff data_offset_ = 0;
};

}  // namespace emtree
