#include "portsim/common.hpp"

#include <cstdio>

namespace portsim {

std::string_view to_string(Group g) { return g == Group::Niche ? "niche" : "generic"; }

Group parse_group(std::string_view s) {
  if (s == "niche") return Group::Niche;
  if (s == "generic") return Group::Generic;
  throw Error("unknown group label '" + std::string(s) + "'");
}

std::string_view recommender_name(RecommenderId id) {
  switch (id) {
    case kGenericRecommender: return "generic";
    case kNicheRecommender: return "niche";
    default: return "unknown";
  }
}

RecommenderId parse_recommender(std::string_view s) {
  if (s == "generic") return kGenericRecommender;
  if (s == "niche") return kNicheRecommender;
  throw Error("unknown recommender '" + std::string(s) + "'");
}

ParseError::ParseError(const std::string& file, std::size_t line, const std::string& what)
    : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

void Digest::update(std::string_view bytes) noexcept {
  for (unsigned char c : bytes) {
    state_ ^= c;
    state_ *= 0x100000001b3ULL;
  }
}

void Digest::update_u64(std::uint64_t v) noexcept {
  for (int i = 0; i < 8; ++i) {
    state_ ^= (v >> (8 * i)) & 0xffU;
    state_ *= 0x100000001b3ULL;
  }
}

std::string Digest::hex() const { return to_hex(state_); }

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace portsim
