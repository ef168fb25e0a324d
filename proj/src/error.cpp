#include "finex/error.hpp"

namespace finex {

std::string excerpt(const std::string& payload, std::size_t n) {
  if (payload.size() <= n) return payload;
  return payload.substr(0, n) + "...";
}

}  // namespace finex
