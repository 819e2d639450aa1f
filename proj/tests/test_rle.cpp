#include <doctest.h>

#include "cidp/patchgen/firmware.hpp"
#include "cidp/patchgen/rle.hpp"
#include "support/gen.hpp"

using namespace cidp;
using namespace cidp::patchgen;
namespace ct = cidp::testing;

TEST_CASE("100 zero bytes encode as one repeat block") {
  Bytes zeros(100, 0);
  CHECK(compress(zeros) == Bytes{0xE3, 0x00});
  CHECK(decompress(Bytes{0xE3, 0x00}) == zeros);
}

TEST_CASE("empty input encodes to empty output") {
  CHECK(compress({}).empty());
  CHECK(decompress({}).empty());
}

TEST_CASE("long runs split at 128") {
  Bytes run(300, 0x55);
  auto enc = compress(run);
  CHECK(enc == Bytes{0xFF, 0x55, 0xFF, 0x55, 0xAB, 0x55});
  CHECK(decompress(enc) == run);
}

TEST_CASE("256 random bytes without 3-runs stay within the bound") {
  ct::Prng rng(5);
  Bytes raw;
  while (raw.size() < 256) {
    auto b = static_cast<std::uint8_t>(rng());
    if (raw.size() >= 2 && raw[raw.size() - 1] == b && raw[raw.size() - 2] == b) continue;
    raw.push_back(b);
  }
  auto enc = compress(raw);
  CHECK(enc.size() <= 258);
  CHECK(decompress(enc) == raw);
}

TEST_CASE("truncated streams are rejected") {
  auto code_of = [](const Bytes& b) {
    try {
      decompress(b);
    } catch (const PatchError& e) {
      return e.code();
    }
    return PatchErrc::io_error;
  };
  CHECK(code_of({0x05, 1, 2}) == PatchErrc::truncated_stream);
  CHECK(code_of({0x90}) == PatchErrc::truncated_stream);
}

TEST_CASE("compress/decompress round trip with an independent decoder") {
  ct::Prng rng(11);
  for (int i = 0; i < 1000; ++i) {
    std::size_t n = rng() % 700;
    Bytes raw = ct::random_bytes(rng, n);
    if (i % 3 == 0)
      for (auto& b : raw)
        if (rng() % 2) b = 0;
    auto enc = compress(raw);
    REQUIRE(decompress(enc) == raw);
    REQUIRE(ct::reference_decode(enc) == raw);
    CHECK(enc.size() <= raw.size() + (raw.size() + 127) / 128);
  }
}
