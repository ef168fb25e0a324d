#pragma once

// Hand-built amounts from Indonesian statements. The statement header sets
// the multiplier ("IDR'000", "ribuan rupiah", "juta rupiah"); `want` is the
// full amount in rupiah, worked out by hand.

#include <cstdint>
#include <string>
#include <vector>

#include "finex/document.hpp"

namespace finex::testkit {

struct AmountFixture {
  std::string raw;
  std::string header;
  ScaledDecimal want;
};

inline const std::vector<AmountFixture>& idr_amount_fixtures() {
  static const std::vector<AmountFixture> fixtures = {
      {"4,500", "Dalam IDR'000", ScaledDecimal(4500000)},
      {"12.5", "dalam juta rupiah", ScaledDecimal(12500000)},
      {"1.234.567", "(dalam ribuan Rupiah)", ScaledDecimal(1234567000)},
      {"(2.500)", "Disajikan dalam ribuan rupiah", ScaledDecimal(-2500000)},
      {"3,75", "dalam juta Rupiah", ScaledDecimal(3750000)},
      {"987", "IDR'000", ScaledDecimal(987000)},
      {"Rp 15.000", "Dinyatakan dalam jutaan Rupiah", ScaledDecimal(15000000000)},
      {"1,204.6", "IDR'000,000", ScaledDecimal(1204600000)},
      {"45.678", "ribuan rupiah", ScaledDecimal(45678000)},
      {"0,5", "juta rupiah", ScaledDecimal(500000)},
      {"-7.050,25", "Rupiah ribuan", ScaledDecimal(-7050250)},
      {"250", "Rupiah penuh", ScaledDecimal(250)},
  };
  return fixtures;
}

}  // namespace finex::testkit
