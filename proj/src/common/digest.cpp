#include "abspm/digest.hpp"

#include <fmt/format.h>

#include "abspm/io.hpp"

namespace abspm {

void Fnv1a64::update(std::string_view bytes) {
    for (unsigned char c : bytes) {
        state_ ^= c;
        state_ *= 0x100000001b3ULL;
    }
}

std::string Fnv1a64::hex() const {
    return fmt::format("{:016x}", state_);
}

std::string digest_hex(std::string_view bytes) {
    Fnv1a64 h;
    h.update(bytes);
    return h.hex();
}

std::string file_digest(const std::filesystem::path& path) {
    return digest_hex(read_file(path));
}

}  // namespace abspm
