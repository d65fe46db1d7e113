#pragma once

#include <compare>
#include <functional>
#include <ostream>
#include <string>
#include <utility>

namespace mevattr {

/// Opaque string identifier; Tag keeps token, pool and transaction ids apart.
template <typename Tag>
class StrongId {
 public:
  StrongId() = default;
  StrongId(std::string value) : value_(std::move(value)) {}
  StrongId(const char* value) : value_(value) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const StrongId&, const StrongId&) = default;
  friend bool operator==(const StrongId&, const StrongId&) = default;

  friend std::ostream& operator<<(std::ostream& os, const StrongId& id) { return os << id.value_; }

 private:
  std::string value_;
};

using TokenId = StrongId<struct TokenTag>;
using PoolId = StrongId<struct PoolTag>;
using TxHash = StrongId<struct TxHashTag>;

}  // namespace mevattr

template <typename Tag>
struct std::hash<mevattr::StrongId<Tag>> {
  std::size_t operator()(const mevattr::StrongId<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
