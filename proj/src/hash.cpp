#include "vine/hash.hpp"

#include <cstdio>
#include <stdexcept>

#include "vine/errors.hpp"

namespace vine {

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t parse_hash_hex(const std::string& s) {
  if (s.size() != 16 || s.find_first_not_of("0123456789abcdef") != std::string::npos)
    throw DomainError("state_hash", "expected 16 lowercase hex digits");
  return std::stoull(s, nullptr, 16);
}

}  // namespace vine
