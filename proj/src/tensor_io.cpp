#include "gsig/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace gsig {

static_assert(std::endian::native == std::endian::little, "tensor container assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'G', 'S', 'I', 'G'};

template <typename T>
void put(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw IoError("tensor file truncated");
    T value;
    std::memcpy(&value, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
}

} // namespace

std::uint64_t Tensor::count() const {
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

std::string encode_tensor(const Tensor& t) {
    if (t.dims.size() > 0xffff) throw ValidationError("tensor rank too large");
    if (t.count() != t.values.size()) throw ValidationError("tensor dims do not match value count");
    std::string out(kMagic, 4);
    put<std::uint16_t>(out, kTensorFormatVersion);
    put<std::uint16_t>(out, static_cast<std::uint16_t>(t.dims.size()));
    for (auto d : t.dims) put<std::uint64_t>(out, d);
    out.append(reinterpret_cast<const char*>(t.values.data()), t.values.size() * sizeof(float));
    return out;
}

Tensor decode_tensor(const std::string& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw IoError("not a GSIG tensor file");
    std::size_t pos = 4;
    const auto version = take<std::uint16_t>(bytes, pos);
    if (version != kTensorFormatVersion) throw IoError("unsupported tensor format version " + std::to_string(version));
    const auto rank = take<std::uint16_t>(bytes, pos);
    Tensor t;
    for (std::uint16_t i = 0; i < rank; ++i) t.dims.push_back(take<std::uint64_t>(bytes, pos));
    const std::uint64_t n = t.count();
    if (bytes.size() - pos != n * sizeof(float)) throw IoError("tensor payload size does not match its dims");
    t.values.resize(n);
    std::memcpy(t.values.data(), bytes.data() + pos, n * sizeof(float));
    return t;
}

Tensor to_tensor(const Matrix& m) {
    Tensor t;
    t.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
    t.values.reserve(static_cast<std::size_t>(m.size()));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) t.values.push_back(static_cast<float>(m(i, j)));
    return t;
}

Matrix to_matrix(const Tensor& t) {
    if (t.dims.size() != 2) throw IoError("expected a rank-2 tensor, got rank " + std::to_string(t.dims.size()));
    Matrix m(static_cast<Index>(t.dims[0]), static_cast<Index>(t.dims[1]));
    std::size_t pos = 0;
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) m(i, j) = t.values[pos++];
    return m;
}

Tensor stack_tensor(const std::vector<Matrix>& ms) {
    Tensor t;
    const Index rows = ms.empty() ? 0 : ms.front().rows();
    const Index cols = ms.empty() ? 0 : ms.front().cols();
    t.dims = {ms.size(), static_cast<std::uint64_t>(rows), static_cast<std::uint64_t>(cols)};
    for (const auto& m : ms) {
        if (m.rows() != rows || m.cols() != cols) throw ValidationError("stack_tensor: shapes differ");
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) t.values.push_back(static_cast<float>(m(i, j)));
    }
    return t;
}

std::vector<Matrix> unstack_tensor(const Tensor& t) {
    if (t.dims.size() != 3) throw IoError("expected a rank-3 tensor, got rank " + std::to_string(t.dims.size()));
    std::vector<Matrix> out;
    std::size_t pos = 0;
    for (std::uint64_t s = 0; s < t.dims[0]; ++s) {
        Matrix m(static_cast<Index>(t.dims[1]), static_cast<Index>(t.dims[2]));
        for (Index i = 0; i < m.rows(); ++i)
            for (Index j = 0; j < m.cols(); ++j) m(i, j) = t.values[pos++];
        out.push_back(std::move(m));
    }
    return out;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) { write_file_atomic(path, encode_tensor(t)); }

Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

namespace {

std::filesystem::path temp_sibling(const std::filesystem::path& path) {
    return path.parent_path() / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
}

void write_raw(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw IoError("failed writing " + path.string());
}

} // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    AtomicBatch batch;
    batch.add(path, content);
    batch.commit();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void AtomicBatch::add(std::filesystem::path path, std::string content) {
    files_.emplace_back(std::move(path), std::move(content));
}

void AtomicBatch::commit() {
    std::vector<std::filesystem::path> staged;
    try {
        for (const auto& [path, content] : files_) {
            if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
            const auto tmp = temp_sibling(path);
            staged.push_back(tmp);
            write_raw(tmp, content);
        }
        for (std::size_t i = 0; i < files_.size(); ++i) std::filesystem::rename(staged[i], files_[i].first);
    } catch (const std::filesystem::filesystem_error& e) {
        std::error_code ec;
        for (const auto& tmp : staged) std::filesystem::remove(tmp, ec);
        throw IoError(e.what());
    } catch (...) {
        std::error_code ec;
        for (const auto& tmp : staged) std::filesystem::remove(tmp, ec);
        throw;
    }
    files_.clear();
}

} // namespace gsig
