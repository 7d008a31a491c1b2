#ifndef QKDRAND_FETCH_HPP
#define QKDRAND_FETCH_HPP

#include <cstddef>
#include <string>

#include "qkdrand/bitseq.hpp"

namespace qkdrand {

struct FetchOptions {
    std::size_t timeout_ms = 5000;
    int max_attempts = 3;
    std::size_t backoff_ms = 100; ///< doubles after each failed attempt
};

/// GETs `endpoint` (query `length=<bytes>&type=uint8` appended) and expects
/// a JSON body whose "data" member is an array of 8-bit integers. Bytes are
/// unpacked MSB-first into exactly nbits bits. n = 0 returns an empty
/// sequence without touching the network. Throws NetworkError,
/// MalformedResponse or Timeout; never fabricates bits.
BitSeq fetch_remote_bits(const std::string& endpoint, std::size_t nbits,
                         const FetchOptions& options = {});

} // namespace qkdrand

#endif
