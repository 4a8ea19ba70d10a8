#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace portsim {

using ConsumerIndex = std::uint32_t;
using ItemIndex = std::uint32_t;
using ProviderIndex = std::uint32_t;
using RecommenderId = std::uint32_t;

/// The generic recommender R^G is always id 0; the niche recommender R^N is id 1.
inline constexpr RecommenderId kGenericRecommender = 0;
inline constexpr RecommenderId kNicheRecommender = 1;

enum class Group : std::uint8_t { Generic, Niche };

std::string_view to_string(Group g);
Group parse_group(std::string_view s);
std::string_view recommender_name(RecommenderId id);
RecommenderId parse_recommender(std::string_view s);

// Error hierarchy. Recoverable input problems derive from Error; broken
// caller contracts throw ContractViolation.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class EmptySlateError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// 64-bit FNV-1a, used for trace, dataset and manifest digests.
class Digest {
 public:
  void update(std::string_view bytes) noexcept;
  void update_u64(std::uint64_t v) noexcept;
  std::uint64_t value() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t v);

}  // namespace portsim
