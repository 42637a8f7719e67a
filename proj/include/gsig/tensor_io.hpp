#pragma once

#include "gsig/numkernel.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsig {

/// Filesystem or format problems.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint16_t kTensorFormatVersion = 1;

/// In-memory tensor: row-major values with an arbitrary shape.
struct Tensor {
    std::vector<std::uint64_t> dims;
    std::vector<float> values;

    std::uint64_t count() const;
};

/// "GSIG", u16 version, u16 rank, rank x u64 dims, then float32 data, all
/// little endian.
std::string encode_tensor(const Tensor& t);
Tensor decode_tensor(const std::string& bytes);

/// Matrix <-> rank-2 tensor, row-major.
Tensor to_tensor(const Matrix& m);
Matrix to_matrix(const Tensor& t);

/// Stack of equally shaped matrices as a rank-3 tensor.
Tensor stack_tensor(const std::vector<Matrix>& ms);
std::vector<Matrix> unstack_tensor(const Tensor& t);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Stages several files and renames them only after all were written, so a
/// failure leaves none of them behind.
class AtomicBatch {
public:
    void add(std::filesystem::path path, std::string content);
    void commit();

private:
    std::vector<std::pair<std::filesystem::path, std::string>> files_;
};

} // namespace gsig
