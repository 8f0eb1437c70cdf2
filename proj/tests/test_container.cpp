// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <random>

#include "pulse/container.hpp"
#include "pulse/sha256.hpp"
#include "pulse/synthetic.hpp"

using pulse::Bytes;
using pulse::Checkpoint;
using pulse::TensorRecord;

namespace {

Checkpoint random_checkpoint(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> n_tensors(1, 4);
    std::uniform_int_distribution<int> extent(1, 40);
    std::uniform_int_distribution<int> rank(1, 3);
    std::uniform_int_distribution<std::uint32_t> bits(0, 0xFFFF);
    std::uniform_int_distribution<std::uint64_t> step(0, 1'000'000);

    Checkpoint c;
    c.step = step(rng);
    const int count = n_tensors(rng);
    for (int i = 0; i < count; ++i) {
        TensorRecord t;
        t.name = "t" + std::to_string(i);
        const int r = rank(rng);
        for (int j = 0; j < r; ++j) t.shape.push_back(extent(rng));
        t.data.resize(t.numel());
        for (auto& v : t.data) v.bits = static_cast<std::uint16_t>(bits(rng));
        c.tensors.push_back(std::move(t));
    }
    return c;
}

bool checkpoints_identical(const Checkpoint& a, const Checkpoint& b) {
    if (a.step != b.step || a.tensors.size() != b.tensors.size()) return false;
    for (std::size_t i = 0; i < a.tensors.size(); ++i) {
        const auto& x = a.tensors[i];
        const auto& y = b.tensors[i];
        if (x.name != y.name || x.shape != y.shape || x.data.size() != y.data.size()) return false;
        for (std::size_t j = 0; j < x.data.size(); ++j)
            if (x.data[j] != y.data[j]) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("container roundtrip preserves a small checkpoint bitwise") {
    Checkpoint c;
    c.step = 12;
    c.tensors.push_back(
        {"w", {2, 2}, {pulse::Bf16{1}, pulse::Bf16{2}, pulse::Bf16{3}, pulse::Bf16{4}}});
    const Bytes bytes = pulse::write_checkpoint_bytes(c);
    const Checkpoint back = pulse::read_checkpoint_bytes(bytes);
    CHECK(checkpoints_identical(c, back));
}

TEST_CASE("container writer is canonical and payloads are 64-byte aligned") {
    std::mt19937_64 rng(11);
    const Checkpoint c = random_checkpoint(rng);
    const Bytes a = pulse::write_checkpoint_bytes(c);
    const Bytes b = pulse::write_checkpoint_bytes(c);
    CHECK(a == b);

    // header length field at offset 8, little-endian
    std::uint64_t header_len = 0;
    for (int i = 0; i < 8; ++i) header_len |= static_cast<std::uint64_t>(a[8 + i]) << (8 * i);
    const std::uint64_t payload_base = (16 + header_len + 63) & ~std::uint64_t{63};
    CHECK(payload_base % 64 == 0);
    CHECK(payload_base <= a.size());
}

TEST_CASE("container roundtrip preserves tensor order metadata") {
    Checkpoint c;
    c.step = 5;
    c.tensors.push_back({"zeta", {1}, {pulse::Bf16{9}}});
    c.tensors.push_back({"alpha", {1}, {pulse::Bf16{7}}});
    const Checkpoint back = pulse::read_checkpoint_bytes(pulse::write_checkpoint_bytes(c));
    REQUIRE(back.tensors.size() == 2);
    CHECK(back.tensors[0].name == "zeta");
    CHECK(back.tensors[1].name == "alpha");
}

TEST_CASE("100 random checkpoints roundtrip with equal weight hashes") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 100; ++i) {
        const Checkpoint c = random_checkpoint(rng);
        const Checkpoint back = pulse::read_checkpoint_bytes(pulse::write_checkpoint_bytes(c));
        REQUIRE(checkpoints_identical(c, back));
        CHECK(pulse::hash_weights(c) == pulse::hash_weights(back));
    }
}

TEST_CASE("container errors are distinct per failure mode") {
    Checkpoint c;
    c.step = 1;
    c.tensors.push_back({"w", {2}, {pulse::Bf16{1}, pulse::Bf16{2}}});
    Bytes good = pulse::write_checkpoint_bytes(c);

    SECTION("bad magic") {
        Bytes bad = good;
        bad[0] = 'X';
        CHECK_THROWS_AS(pulse::read_checkpoint_bytes(bad), pulse::BadMagicError);
    }
    SECTION("version mismatch") {
        Bytes bad = good;
        bad[4] = 99;
        CHECK_THROWS_AS(pulse::read_checkpoint_bytes(bad), pulse::VersionError);
    }
    SECTION("truncated payload") {
        Bytes bad(good.begin(), good.end() - 1);
        CHECK_THROWS_AS(pulse::read_checkpoint_bytes(bad), pulse::TruncationError);
    }
    SECTION("truncated header") {
        Bytes bad(good.begin(), good.begin() + 10);
        CHECK_THROWS_AS(pulse::read_checkpoint_bytes(bad), pulse::TruncationError);
    }
    SECTION("shape/length mismatch") {
        // Corrupt the declared shape in the JSON header: "shape":[2] -> [3]
        std::string text(good.begin(), good.end());
        const auto pos = text.find("\"shape\":[2]");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 11, "\"shape\":[3]");
        Bytes bad(text.begin(), text.end());
        CHECK_THROWS_AS(pulse::read_checkpoint_bytes(bad), pulse::FormatError);
    }
    SECTION("trailing bytes rejected") {
        Bytes bad = good;
        bad.push_back(0);
        CHECK_THROWS_AS(pulse::read_checkpoint_bytes(bad), pulse::FormatError);
    }
}

TEST_CASE("file-level read/write roundtrip") {
    const auto dir = std::filesystem::temp_directory_path() / "pulse_container_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "ckpt.pulc";

    std::mt19937_64 rng(3);
    const Checkpoint c = random_checkpoint(rng);
    pulse::write_checkpoint(c, path);
    const Checkpoint back = pulse::read_checkpoint(path);
    CHECK(checkpoints_identical(c, back));
    std::filesystem::remove_all(dir);
}

TEST_CASE("empty-tensor-list checkpoint roundtrips") {
    Checkpoint c;
    c.step = 42;
    const Checkpoint back = pulse::read_checkpoint_bytes(pulse::write_checkpoint_bytes(c));
    CHECK(back.step == 42);
    CHECK(back.tensors.empty());
}
