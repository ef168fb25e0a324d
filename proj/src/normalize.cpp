#include "finex/normalize.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "finex/error.hpp"
#include "finex/utf8.hpp"

namespace finex {

namespace {

struct Alias {
  std::string_view text;  // lowercase
  std::string_view code;
};

constexpr std::array kCurrencyAliases = {
    Alias{"idr", "IDR"},     Alias{"rp", "IDR"},      Alias{"rupiah", "IDR"},
    Alias{"sgd", "SGD"},     Alias{"s$", "SGD"},      Alias{"sg$", "SGD"},
    Alias{"cny", "CNY"},     Alias{"rmb", "CNY"},     Alias{"人民币", "CNY"},
    Alias{"yuan", "CNY"},    Alias{"usd", "USD"},     Alias{"us$", "USD"},
    Alias{"hkd", "HKD"},     Alias{"hk$", "HKD"},     Alias{"myr", "MYR"},
    Alias{"rm", "MYR"},      Alias{"ringgit", "MYR"}, Alias{"eur", "EUR"},
    Alias{"€", "EUR"},       Alias{"gbp", "GBP"},     Alias{"£", "GBP"},
    Alias{"jpy", "JPY"},     Alias{"aud", "AUD"},     Alias{"thb", "THB"},
    Alias{"php", "PHP"},     Alias{"vnd", "VND"},     Alias{"inr", "INR"},
    Alias{"krw", "KRW"},     Alias{"twd", "TWD"},
};

struct ScaleWord {
  std::string_view text;  // lowercase
  std::int64_t scale;
};

// Longer spellings first so "'000,000" beats "'000" at the same position.
constexpr std::array kScaleWords = {
    ScaleWord{"'000,000", 1000000}, ScaleWord{"\xE2\x80\x99" "000,000", 1000000},
    ScaleWord{"'000", 1000},        ScaleWord{"\xE2\x80\x99" "000", 1000},
    ScaleWord{"jutaan", 1000000},   ScaleWord{"juta", 1000000},
    ScaleWord{"millions", 1000000}, ScaleWord{"million", 1000000},
    ScaleWord{"百万", 1000000},     ScaleWord{"百萬", 1000000},
    ScaleWord{"ribuan", 1000},      ScaleWord{"ribu", 1000},
    ScaleWord{"thousands", 1000},   ScaleWord{"thousand", 1000},
    ScaleWord{"千元", 1000},
};

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// A word-like alias must not be glued to other letters.
bool bounded_match(const std::string& hay, std::size_t pos, std::string_view needle) {
  if (hay.compare(pos, needle.size(), needle) != 0) return false;
  if (!ascii_alpha(needle.front()) || !ascii_alpha(needle.back())) return true;
  if (pos > 0 && ascii_alpha(hay[pos - 1])) return false;
  const std::size_t end = pos + needle.size();
  return end >= hay.size() || !ascii_alpha(hay[end]);
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::optional<std::string> canonical_currency(std::string_view alias) {
  std::string a = ascii_lower(trim(alias));
  while (!a.empty() && a.back() == '.') a.pop_back();
  for (const auto& entry : kCurrencyAliases) {
    if (a == entry.text) return std::string(entry.code);
  }
  return std::nullopt;
}

std::optional<std::string> find_currency(std::string_view text) {
  const std::string hay = ascii_lower(text);
  for (std::size_t pos = 0; pos < hay.size(); ++pos) {
    const Alias* best = nullptr;
    for (const auto& entry : kCurrencyAliases) {
      if (bounded_match(hay, pos, entry.text) && (!best || entry.text.size() > best->text.size())) {
        best = &entry;
      }
    }
    if (best) return std::string(best->code);
  }
  return std::nullopt;
}

std::optional<std::int64_t> detect_unit_scale(std::string_view text) {
  const std::string hay = ascii_lower(text);
  for (std::size_t pos = 0; pos < hay.size(); ++pos) {
    for (const auto& w : kScaleWords) {
      if (bounded_match(hay, pos, w.text)) {
        // "'000" glued to more digits is an amount, not a header
        const std::size_t end = pos + w.text.size();
        if (w.text.back() == '0' && end < hay.size() && is_digit(hay[end])) continue;
        return w.scale;
      }
    }
  }
  return std::nullopt;
}

ScaledDecimal parse_amount(std::string_view raw, const std::optional<std::string>& currency) {
  const std::string text(raw);
  const auto first = text.find_first_of("0123456789");
  if (first == std::string::npos) throw NormalizationError("no digits in amount '" + text + "'");
  const auto last = text.find_last_of("0123456789");

  bool negative = false;
  const std::string_view before = std::string_view(text).substr(0, first);
  const std::string_view after = std::string_view(text).substr(last + 1);
  if (before.find('(') != std::string_view::npos && after.find(')') != std::string_view::npos) {
    negative = true;
  }
  if (before.find('-') != std::string_view::npos ||
      before.find("\xE2\x88\x92") != std::string_view::npos) {
    negative = true;
  }

  // Inside the numeric span keep digits and separators; spaces and
  // apostrophes only group digits.
  std::string core;
  for (char32_t cp : utf8::decode(std::string_view(text).substr(first, last - first + 1))) {
    if ((cp >= '0' && cp <= '9') || cp == ',' || cp == '.') {
      core += static_cast<char>(cp);
    } else if (cp == ' ' || cp == 0xA0 || cp == 0x2009 || cp == 0x202F || cp == '\'' ||
               cp == 0x2019) {
      continue;
    } else {
      throw NormalizationError("unexpected character inside amount '" + text + "'");
    }
  }

  const auto n_comma = std::count(core.begin(), core.end(), ',');
  const auto n_dot = std::count(core.begin(), core.end(), '.');
  char decimal = 0;
  char group = 0;
  if (n_comma > 0 && n_dot > 0) {
    decimal = core.find_last_of(",.") == core.rfind(',') ? ',' : '.';
    group = decimal == ',' ? '.' : ',';
    if (std::count(core.begin(), core.end(), decimal) != 1) {
      throw NormalizationError("ambiguous separators in amount '" + text + "'");
    }
  } else if (n_comma > 0 || n_dot > 0) {
    const char sep = n_comma > 0 ? ',' : '.';
    const std::size_t count = static_cast<std::size_t>(n_comma + n_dot);
    const std::size_t tail = core.size() - core.rfind(sep) - 1;
    bool thousands = count > 1;
    if (count == 1 && tail == 3) thousands = sep == ',' || currency == std::optional<std::string>("IDR");
    if (thousands) {
      group = sep;
    } else {
      decimal = sep;
    }
  }

  std::string int_part = core;
  std::string frac_part;
  if (decimal) {
    const auto d = core.find(decimal);
    int_part = core.substr(0, d);
    frac_part = core.substr(d + 1);
    if (frac_part.empty()) throw NormalizationError("dangling decimal mark in '" + text + "'");
  }
  std::string digits;
  if (group) {
    std::size_t start = 0;
    bool first_group = true;
    while (true) {
      const auto g = int_part.find(group, start);
      const std::string chunk = int_part.substr(start, g == std::string::npos ? g : g - start);
      const bool ok = first_group ? (!chunk.empty() && chunk.size() <= 3) : chunk.size() == 3;
      if (!ok) throw NormalizationError("malformed digit grouping in '" + text + "'");
      digits += chunk;
      first_group = false;
      if (g == std::string::npos) break;
      start = g + 1;
    }
  } else {
    digits = int_part;
  }
  if (digits.empty()) digits = "0";
  const std::string plain = (negative ? "-" : "") + digits + (frac_part.empty() ? "" : "." + frac_part);
  return ScaledDecimal::parse_plain(plain);
}

Normalized normalize_value(std::string_view raw_text, std::int64_t unit_scale,
                           const std::optional<std::string>& currency_hint, ValueKind kind) {
  const std::string_view raw = trim(raw_text);
  if (raw.empty()) throw NormalizationError("empty value");
  {
    std::int64_t s = unit_scale;
    while (s > 1 && s % 10 == 0) s /= 10;
    if (s != 1) throw NormalizationError("unit scale " + std::to_string(unit_scale) +
                                         " is not a power of ten");
  }

  std::optional<std::string> currency;
  if (currency_hint && !trim(*currency_hint).empty()) {
    currency = canonical_currency(*currency_hint);
    if (!currency) currency = find_currency(*currency_hint);
  }
  if (!currency) currency = find_currency(raw);

  Normalized out;
  switch (kind) {
    case ValueKind::money: {
      std::int64_t scale = unit_scale;
      if (scale == 1) scale = detect_unit_scale(raw).value_or(1);
      out.value = parse_amount(raw, currency).scaled(scale);
      out.currency = currency;
      break;
    }
    case ValueKind::integer: {
      const std::string s(raw);
      for (std::size_t i = 0; i < s.size();) {
        if (!is_digit(s[i])) {
          ++i;
          continue;
        }
        std::size_t j = i;
        while (j < s.size() && is_digit(s[j])) ++j;
        if (j - i == 4) {
          const int year = std::stoi(s.substr(i, 4));
          if (year < 1900 || year > 2100) {
            throw NormalizationError("year " + std::to_string(year) + " outside [1900, 2100]");
          }
          out.value = static_cast<std::int64_t>(year);
          return out;
        }
        i = j;
      }
      throw NormalizationError("no 4-digit year in '" + s + "'");
    }
    case ValueKind::currency_code: {
      auto code = canonical_currency(raw);
      if (!code) code = find_currency(raw);
      if (!code) throw NormalizationError("unknown currency '" + std::string(raw) + "'");
      out.value = CurrencyCode{*code};
      out.currency = code;
      break;
    }
    case ValueKind::text:
      out.value = std::string(raw);
      break;
  }
  return out;
}

std::string canonical_text(const NormalizedValue& value) {
  if (const auto* d = std::get_if<ScaledDecimal>(&value)) {
    std::string s = d->to_plain_string();
    // a lone '.' before exactly three digits would read as IDR grouping
    if (d->exponent() == -3) s += '0';
    return s;
  }
  return describe(value);
}

}  // namespace finex
