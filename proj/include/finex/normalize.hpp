#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "finex/document.hpp"

namespace finex {

/// ISO-4217 code for a currency name, symbol or code ("rupiah", "Rp",
/// "S$", "RMB", "人民币", "usd", ...), or nullopt.
std::optional<std::string> canonical_currency(std::string_view alias);

/// First currency alias mentioned anywhere in `text`.
std::optional<std::string> find_currency(std::string_view text);

/// Unit multiplier announced by a statement header such as "IDR'000",
/// "'000,000", "ribuan rupiah", "juta rupiah", "in millions" or "千元".
/// The earliest mention in the text wins.
std::optional<std::int64_t> detect_unit_scale(std::string_view text);

/// Parses a printed amount: strips currency marks, spaces and digit-group
/// separators, treats "(...)" as negative. A lone '.' followed by exactly
/// three digits is a thousands separator only for IDR amounts.
ScaledDecimal parse_amount(std::string_view raw, const std::optional<std::string>& currency = {});

struct Normalized {
  NormalizedValue value;
  std::optional<std::string> currency;
};

/// Normalizes extracted text for a field kind. Money amounts are multiplied
/// by unit_scale (or by a scale word inside raw_text when unit_scale is 1).
/// Throws NormalizationError when the text cannot be read as that kind.
Normalized normalize_value(std::string_view raw_text, std::int64_t unit_scale,
                           const std::optional<std::string>& currency_hint, ValueKind kind);

/// Text that normalize_value maps back to `value` (scale 1, same currency).
std::string canonical_text(const NormalizedValue& value);

}  // namespace finex
