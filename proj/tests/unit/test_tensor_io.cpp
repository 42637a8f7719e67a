#include "gsig/tensor_io.hpp"

#include <doctest.h>

#include <filesystem>

using namespace gsig;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("gsig_unit_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("container header layout") {
    Tensor t;
    t.dims = {2, 3};
    t.values = {1, 2, 3, 4, 5, 6};
    const std::string bytes = encode_tensor(t);
    CHECK(bytes.size() == 4 + 2 + 2 + 2 * 8 + 6 * 4);
    CHECK(bytes.substr(0, 4) == "GSIG");
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);
    CHECK(static_cast<unsigned char>(bytes[5]) == 0);
    CHECK(static_cast<unsigned char>(bytes[6]) == 2);
    CHECK(static_cast<unsigned char>(bytes[8]) == 2);
    CHECK(static_cast<unsigned char>(bytes[16]) == 3);
    // 1.0f little endian is 00 00 80 3f.
    CHECK(static_cast<unsigned char>(bytes[24 + 3]) == 0x3f);
    CHECK(static_cast<unsigned char>(bytes[24 + 2]) == 0x80);
}

TEST_CASE("encode and decode round trip") {
    Tensor t;
    t.dims = {2, 1, 3};
    t.values = {0.5f, -1.f, 3.25f, 1e-8f, 7.f, std::numeric_limits<float>::infinity()};
    const Tensor back = decode_tensor(encode_tensor(t));
    CHECK(back.dims == t.dims);
    CHECK(back.values == t.values);
    CHECK(back.count() == 6);
}

TEST_CASE("malformed containers are rejected") {
    Tensor t;
    t.dims = {2};
    t.values = {1, 2};
    std::string bytes = encode_tensor(t);
    CHECK_THROWS_AS(decode_tensor(bytes.substr(0, bytes.size() - 1)), IoError);
    CHECK_THROWS_AS(decode_tensor(bytes + "x"), IoError);
    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_tensor(bad), IoError);
    bad = bytes;
    bad[4] = 9;
    CHECK_THROWS_AS(decode_tensor(bad), IoError);
    CHECK_THROWS_AS(decode_tensor("GS"), IoError);
}

TEST_CASE("matrices are stored row-major") {
    Matrix m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    const Tensor t = to_tensor(m);
    CHECK(t.values == std::vector<float>{1, 2, 3, 4, 5, 6});
    CHECK(to_matrix(t) == m);
    const std::vector<Matrix> ms{m, 2 * m};
    const Tensor s = stack_tensor(ms);
    CHECK(s.dims == std::vector<std::uint64_t>{2, 2, 3});
    const auto back = unstack_tensor(s);
    CHECK(back[1] == 2 * m);
    CHECK_THROWS_AS(stack_tensor({m, Matrix(3, 2)}), ValidationError);
}

TEST_CASE("files round trip and missing files raise io errors") {
    const fs::path dir = scratch_dir("files");
    Tensor t;
    t.dims = {1};
    t.values = {4};
    write_tensor(dir / "a.gsig", t);
    CHECK(read_tensor(dir / "a.gsig").values == t.values);
    CHECK_THROWS_AS(read_tensor(dir / "missing.gsig"), IoError);
    write_file_atomic(dir / "sub" / "b.txt", "hello");
    CHECK(read_file(dir / "sub" / "b.txt") == "hello");
    for (const auto& e : fs::recursive_directory_iterator(dir))
        CHECK(e.path().filename().string().find(".tmp") == std::string::npos);
}

TEST_CASE("atomic batch writes all or nothing") {
    const fs::path dir = scratch_dir("batch");
    write_file_atomic(dir / "blocker", "file, not a directory");
    AtomicBatch bad;
    bad.add(dir / "first.txt", "1");
    bad.add(dir / "blocker" / "second.txt", "2");
    CHECK_THROWS(bad.commit());
    CHECK_FALSE(fs::exists(dir / "first.txt"));
    CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 1);

    AtomicBatch good;
    good.add(dir / "x" / "first.txt", "1");
    good.add(dir / "x" / "second.txt", "2");
    good.commit();
    CHECK(read_file(dir / "x" / "second.txt") == "2");
}
