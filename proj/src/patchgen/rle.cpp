#include "cidp/patchgen/rle.hpp"

#include <algorithm>

#include "cidp/patchgen/firmware.hpp"

namespace cidp::patchgen {

namespace {

constexpr std::size_t kMaxLiteral = 128;
constexpr std::size_t kMaxRepeat = 128;
// A repeat block costs two bytes, so shorter runs stay literal.
constexpr std::size_t kMinRepeat = 3;

void flush_literals(Bytes& out, ByteView raw, std::size_t from,
                    std::size_t to) {
  while (from < to) {
    std::size_t n = std::min(kMaxLiteral, to - from);
    out.push_back(static_cast<std::uint8_t>(n - 1));
    out.insert(out.end(), raw.begin() + static_cast<std::ptrdiff_t>(from),
               raw.begin() + static_cast<std::ptrdiff_t>(from + n));
    from += n;
  }
}

}  // namespace

Bytes compress(ByteView raw) {
  Bytes out;
  out.reserve(raw.size() + raw.size() / kMaxLiteral + 1);
  std::size_t i = 0;
  std::size_t lit_start = 0;
  while (i < raw.size()) {
    std::size_t run = 1;
    while (i + run < raw.size() && raw[i + run] == raw[i]) ++run;
    if (run < kMinRepeat) {
      i += run;
      continue;
    }
    flush_literals(out, raw, lit_start, i);
    while (run >= kMinRepeat) {
      std::size_t take = std::min(run, kMaxRepeat);
      out.push_back(static_cast<std::uint8_t>(127 + take));
      out.push_back(raw[i]);
      i += take;
      run -= take;
    }
    lit_start = i;
    i += run;
  }
  flush_literals(out, raw, lit_start, raw.size());
  return out;
}

Bytes decompress(ByteView encoded) {
  Bytes out;
  std::size_t i = 0;
  while (i < encoded.size()) {
    std::uint8_t c = encoded[i++];
    if (c <= 127) {
      std::size_t n = std::size_t{c} + 1;
      if (encoded.size() - i < n)
        throw PatchError(PatchErrc::truncated_stream,
                         "TruncatedStream: literal block past end of input");
      out.insert(out.end(), encoded.begin() + static_cast<std::ptrdiff_t>(i),
                 encoded.begin() + static_cast<std::ptrdiff_t>(i + n));
      i += n;
    } else {
      if (i >= encoded.size())
        throw PatchError(PatchErrc::truncated_stream,
                         "TruncatedStream: repeat block without value byte");
      out.insert(out.end(), std::size_t{c} - 127u, encoded[i++]);
    }
  }
  return out;
}

}  // namespace cidp::patchgen
