#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace scenelab {

// Minimal SHA-256 (FIPS 180-4), enough for manifest and checkpoint checksums.
class Sha256 {
public:
    Sha256();
    void update(const void* data, std::size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }
    // finalizes and returns the digest as 64 lowercase hex chars
    std::string hex_digest();

private:
    void process_block(const std::uint8_t* block);

    std::uint32_t h_[8];
    std::uint8_t buffer_[64];
    std::size_t buffer_len_ = 0;
    std::uint64_t total_bits_ = 0;
};

std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::string& path); // throws IoError if unreadable

} // namespace scenelab
