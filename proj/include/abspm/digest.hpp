#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace abspm {

/// 64-bit FNV-1a; used for artifact content digests and cache keys, not
/// for anything security related.
class Fnv1a64 {
public:
    void update(std::string_view bytes);
    std::uint64_t value() const { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string digest_hex(std::string_view bytes);
std::string file_digest(const std::filesystem::path& path);

}  // namespace abspm
