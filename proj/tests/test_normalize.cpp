#include <gtest/gtest.h>

#include "finex/error.hpp"
#include "finex/eval.hpp"
#include "finex/normalize.hpp"
#include "finex/synthetic.hpp"
#include "normalization_fixtures.hpp"

using namespace finex;

namespace {

ScaledDecimal money(std::string_view raw, std::int64_t scale, std::optional<std::string> cur = std::nullopt) {
  return std::get<ScaledDecimal>(normalize_value(raw, scale, cur, ValueKind::money).value);
}

}  // namespace

TEST(Currency, Aliases) {
  EXPECT_EQ(canonical_currency("Rp"), "IDR");
  EXPECT_EQ(canonical_currency("rupiah"), "IDR");
  EXPECT_EQ(canonical_currency("S$"), "SGD");
  EXPECT_EQ(canonical_currency("RMB"), "CNY");
  EXPECT_EQ(canonical_currency("人民币"), "CNY");
  EXPECT_EQ(canonical_currency(" usd "), "USD");
  EXPECT_FALSE(canonical_currency("dollars").has_value());
  EXPECT_EQ(find_currency("Total (dalam jutaan Rupiah)"), "IDR");
  EXPECT_EQ(find_currency("amounts in S$'000"), "SGD");
  EXPECT_FALSE(find_currency("group revenue").has_value());
  // Aliases match whole words only.
  EXPECT_FALSE(find_currency("armed forces").has_value());
}

TEST(UnitScale, Headers) {
  EXPECT_EQ(detect_unit_scale("IDR'000"), 1000);
  EXPECT_EQ(detect_unit_scale("IDR'000,000"), 1000000);
  EXPECT_EQ(detect_unit_scale("dalam ribuan rupiah"), 1000);
  EXPECT_EQ(detect_unit_scale("dalam juta rupiah"), 1000000);
  EXPECT_EQ(detect_unit_scale("in millions of S$"), 1000000);
  EXPECT_EQ(detect_unit_scale("S$ thousands"), 1000);
  EXPECT_EQ(detect_unit_scale("人民币千元"), 1000);
  EXPECT_EQ(detect_unit_scale("单位：人民币百万元"), 1000000);
  EXPECT_FALSE(detect_unit_scale("Rupiah").has_value());
  EXPECT_FALSE(detect_unit_scale("12,000").has_value());
  // Earliest mention wins.
  EXPECT_EQ(detect_unit_scale("in thousands, except per-share data in millions"), 1000);
}

TEST(ParseAmount, Separators) {
  EXPECT_EQ(parse_amount("4,500"), ScaledDecimal(4500));
  EXPECT_EQ(parse_amount("1,234,567.89"), ScaledDecimal(123456789, -2));
  EXPECT_EQ(parse_amount("12.5"), ScaledDecimal(125, -1));
  EXPECT_EQ(parse_amount("1.234.567,5", "IDR"), ScaledDecimal(12345675, -1));
  EXPECT_EQ(parse_amount("12 345"), ScaledDecimal(12345));
  EXPECT_EQ(parse_amount("S$ 3,000"), ScaledDecimal(3000));
  // A lone dot before three digits is grouping only for rupiah.
  EXPECT_EQ(parse_amount("4.500"), ScaledDecimal(45, -1));
  EXPECT_EQ(parse_amount("4.500", "IDR"), ScaledDecimal(4500));
}

TEST(ParseAmount, ParenthesesAndSignsAreNegative) {
  EXPECT_EQ(parse_amount("(4,500)"), ScaledDecimal(-4500));
  EXPECT_EQ(parse_amount("(Rp 2.500)", "IDR"), ScaledDecimal(-2500));
  EXPECT_EQ(parse_amount("-12.5"), ScaledDecimal(-125, -1));
  EXPECT_EQ(parse_amount("\xE2\x88\x92" "7"), ScaledDecimal(-7));
}

TEST(ParseAmount, Malformed) {
  EXPECT_THROW(parse_amount("n/a"), NormalizationError);
  EXPECT_THROW(parse_amount("12,34,567"), NormalizationError);
  EXPECT_THROW(parse_amount("1.234,5.6"), NormalizationError);
  EXPECT_THROW(parse_amount("12x34"), NormalizationError);
}

TEST(Normalize, ThousandRupiah) {
  const auto n = normalize_value("4,500", 1000, std::string("IDR"), ValueKind::money);
  EXPECT_EQ(std::get<ScaledDecimal>(n.value), ScaledDecimal(4500000));
  EXPECT_EQ(n.currency, "IDR");
}

TEST(Normalize, MillionRupiahFromTheHeader) {
  const auto scale = detect_unit_scale("Laporan laba rugi (dalam juta rupiah)");
  ASSERT_EQ(scale, 1000000);
  EXPECT_EQ(money("12.5", *scale, "IDR"), ScaledDecimal(12500000));
}

TEST(Normalize, ScaleWordInsideTheValue) {
  EXPECT_EQ(money("Rp 12,5 juta", 1), ScaledDecimal(12500000));
  EXPECT_EQ(money("S$3.2 million", 1), ScaledDecimal(3200000));
  // An explicit scale wins over words in the text.
  EXPECT_EQ(money("4,500 thousand", 1000), ScaledDecimal(4500000));
}

TEST(Normalize, Year) {
  EXPECT_EQ(std::get<std::int64_t>(normalize_value("2023", 1, std::nullopt, ValueKind::integer).value), 2023);
  EXPECT_EQ(std::get<std::int64_t>(normalize_value("FY 2022/23", 1, std::nullopt, ValueKind::integer).value),
            2022);
  EXPECT_THROW(normalize_value("1850", 1, std::nullopt, ValueKind::integer), NormalizationError);
  EXPECT_THROW(normalize_value("23", 1, std::nullopt, ValueKind::integer), NormalizationError);
}

TEST(Normalize, CurrencyCode) {
  const auto n = normalize_value("Rupiah", 1, std::nullopt, ValueKind::currency_code);
  EXPECT_EQ(std::get<CurrencyCode>(n.value).code, "IDR");
  EXPECT_THROW(normalize_value("doubloons", 1, std::nullopt, ValueKind::currency_code), NormalizationError);
}

TEST(Normalize, BadScaleOrEmptyText) {
  EXPECT_THROW(normalize_value("5", 250, std::nullopt, ValueKind::money), NormalizationError);
  EXPECT_THROW(normalize_value("  ", 1, std::nullopt, ValueKind::money), NormalizationError);
}

TEST(Normalize, HintBeatsCurrencyInText) {
  const auto n = normalize_value("S$ 100", 1, std::string("Rp"), ValueKind::money);
  EXPECT_EQ(n.currency, "IDR");
}

TEST(Normalize, HandBuiltRupiahTable) {
  for (const auto& f : testkit::idr_amount_fixtures()) {
    const auto scale = detect_unit_scale(f.header).value_or(1);
    EXPECT_EQ(money(f.raw, scale, "IDR"), f.want) << f.raw << " / " << f.header;
  }
}

TEST(Normalize, IdempotentThroughCanonicalText) {
  synthetic::Rng rng(8);
  for (int trial = 0; trial < 2000; ++trial) {
    const ScaledDecimal v(rng.uniform(-99999999999, 99999999999), -static_cast<int>(rng.uniform(0, 6)));
    for (const char* cur : {"IDR", "SGD"}) {
      const auto text = canonical_text(v);
      const auto once = normalize_value(text, 1, std::string(cur), ValueKind::money);
      ASSERT_EQ(std::get<ScaledDecimal>(once.value), v) << text << " " << cur;
      const auto twice = normalize_value(canonical_text(once.value), 1, std::string(cur), ValueKind::money);
      ASSERT_EQ(twice.value, once.value);
    }
  }
  for (std::int64_t y : {1900, 2023, 2100}) {
    const auto n = normalize_value(canonical_text(NormalizedValue{y}), 1, std::nullopt, ValueKind::integer);
    EXPECT_EQ(std::get<std::int64_t>(n.value), y);
  }
}

TEST(Normalize, ScaleDroppedPredictionIsAMismatch) {
  FieldValue pred{"revenue", "4,500", ScaledDecimal(4500), 1, "IDR", {}, 0.9};
  const ExpectedValue gold{ScaledDecimal(4500000), "IDR"};
  EXPECT_FALSE(field_match(pred, gold, "revenue").match);
  pred.value = money("4,500", 1000, "IDR");
  EXPECT_TRUE(field_match(pred, gold, "revenue").match);
}
