#pragma once

#include "cidp/bytes.hpp"

namespace cidp::patchgen {

// Byte-oriented run-length codec. Each block is one control byte c and its
// payload: c <= 127 copies the next c+1 literal bytes, c >= 128 repeats the
// next byte c-127 times. Worst-case growth is ceil(n/128) bytes.
Bytes compress(ByteView raw);

// Throws PatchError(truncated_stream) when a block runs past the input.
Bytes decompress(ByteView encoded);

}  // namespace cidp::patchgen
