#include "gsig/numkernel.hpp"

#include <numbers>

namespace gsig {

namespace {

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t Rng::next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw ValidationError("Rng::below: empty range");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = next();
        if (r >= threshold) return r % n;
    }
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t sm = stream ^ 0xD1B54A32D192ED03ULL;
    const std::uint64_t mixed = splitmix64(sm);
    std::uint64_t s2 = seed ^ mixed;
    return Rng(splitmix64(s2));
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw ValidationError("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                              std::to_string(b.rows()) + ")");
    return a * b;
}

// Entries are drawn in row-major order so the stream layout does not depend
// on Eigen's storage order.
Matrix sample_gaussian(Rng& rng, Index rows, Index cols, double mean, double variance) {
    if (!(variance >= 0)) throw ValidationError("sample_gaussian: negative variance");
    const double sd = std::sqrt(variance);
    Matrix out(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) out(i, j) = mean + sd * rng.normal();
    return out;
}

Matrix sample_uniform(Rng& rng, Index rows, Index cols, double lo, double hi) {
    if (lo > hi) throw ValidationError("sample_uniform: lo > hi");
    Matrix out(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) {
            double x = lo + (hi - lo) * rng.uniform01();
            // rounding can land exactly on hi for wide ranges
            if (x >= hi && hi > lo) x = std::nextafter(hi, lo);
            out(i, j) = x;
        }
    return out;
}

std::vector<Index> random_permutation(Rng& rng, Index n) {
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index(0));
    for (Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(perm[i], perm[j]);
    }
    return perm;
}

} // namespace gsig
