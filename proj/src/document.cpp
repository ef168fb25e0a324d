#include "finex/document.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "finex/error.hpp"

namespace finex {

void validate_document(const Document& doc) {
  if (doc.pages.empty()) throw EmptyDocumentError("document '" + doc.doc_id + "' has no pages");
  for (std::size_t i = 0; i < doc.pages.size(); ++i) {
    if (doc.pages[i].page_no != static_cast<int>(i) + 1) {
      throw InputError("document '" + doc.doc_id + "' page numbers are not contiguous from 1");
    }
    if (doc.pages[i].image.empty()) {
      throw InputError("document '" + doc.doc_id + "' page " + std::to_string(i + 1) +
                       " has no pixels");
    }
  }
}

std::string to_string(FieldCategory c) {
  return c == FieldCategory::tabular ? "tabular" : "narrative";
}

std::string to_string(ValueKind k) {
  switch (k) {
    case ValueKind::integer: return "integer";
    case ValueKind::money: return "money";
    case ValueKind::currency_code: return "currency_code";
    case ValueKind::text: return "text";
  }
  return "text";
}

FieldCategory parse_category(const std::string& s) {
  if (s == "tabular") return FieldCategory::tabular;
  if (s == "narrative") return FieldCategory::narrative;
  throw ConfigError("unknown field category: " + s);
}

ValueKind parse_value_kind(const std::string& s) {
  if (s == "integer") return ValueKind::integer;
  if (s == "money") return ValueKind::money;
  if (s == "currency_code") return ValueKind::currency_code;
  if (s == "text") return ValueKind::text;
  throw ConfigError("unknown value kind: " + s);
}

const std::vector<std::string>& FieldSpec::keywords_for(const std::string& language) const {
  static const std::vector<std::string> kEmpty;
  if (auto it = keywords.find(language); it != keywords.end() && !it->second.empty()) {
    return it->second;
  }
  if (auto it = keywords.find("en"); it != keywords.end()) return it->second;
  return kEmpty;
}

const std::vector<std::string>& known_field_names() {
  static const std::vector<std::string> names = {"year",     "revenue",  "profit",
                                                 "dividends", "currency", "background_summary"};
  return names;
}

const std::vector<std::string>& scalar_field_names() {
  static const std::vector<std::string> names = {"year", "revenue", "profit", "dividends",
                                                 "currency"};
  return names;
}

void validate_field_spec(const FieldSpec& spec) {
  const auto& names = known_field_names();
  if (std::find(names.begin(), names.end(), spec.name) == names.end()) {
    throw ConfigError("unknown field name: " + spec.name);
  }
  const bool has_keywords = std::any_of(spec.keywords.begin(), spec.keywords.end(),
                                        [](const auto& kv) { return !kv.second.empty(); });
  if (!has_keywords) throw ConfigError("field '" + spec.name + "' has no keywords");
  if ((spec.category == FieldCategory::narrative) != (spec.name == "background_summary")) {
    throw ConfigError("field '" + spec.name + "': only background_summary is narrative");
  }
}

FieldSpec default_field_shape(const std::string& name) {
  FieldSpec s;
  s.name = name;
  if (name == "year") {
    s.value_kind = ValueKind::integer;
  } else if (name == "revenue" || name == "profit" || name == "dividends") {
    s.value_kind = ValueKind::money;
  } else if (name == "currency") {
    s.value_kind = ValueKind::currency_code;
  } else if (name == "background_summary") {
    s.value_kind = ValueKind::text;
    s.category = FieldCategory::narrative;
  } else {
    throw ConfigError("unknown field name: " + name);
  }
  return s;
}

ScaledDecimal::ScaledDecimal(std::int64_t mantissa, int exponent)
    : mantissa_(mantissa), exponent_(exponent) {
  while (exponent_ > 0) {
    if (std::abs(mantissa_) > std::numeric_limits<std::int64_t>::max() / 10) {
      throw NormalizationError("decimal overflow");
    }
    mantissa_ *= 10;
    --exponent_;
  }
  while (exponent_ < 0 && mantissa_ % 10 == 0) {
    mantissa_ /= 10;
    ++exponent_;
  }
  if (mantissa_ == 0) exponent_ = 0;
}

double ScaledDecimal::to_double() const {
  return static_cast<double>(mantissa_) * std::pow(10.0, exponent_);
}

ScaledDecimal ScaledDecimal::scaled(std::int64_t factor) const {
  if (factor <= 0) throw NormalizationError("scale factor must be positive");
  std::int64_t m = mantissa_;
  int e = exponent_;
  while (factor % 10 == 0) {
    factor /= 10;
    ++e;
  }
  if (factor != 1) {
    if (std::abs(m) > std::numeric_limits<std::int64_t>::max() / factor) {
      throw NormalizationError("decimal overflow");
    }
    m *= factor;
  }
  return ScaledDecimal(m, e);
}

std::string ScaledDecimal::to_plain_string() const {
  const bool neg = mantissa_ < 0;
  std::string digits = std::to_string(neg ? -static_cast<unsigned long long>(mantissa_)
                                          : static_cast<unsigned long long>(mantissa_));
  if (exponent_ < 0) {
    const auto frac = static_cast<std::size_t>(-exponent_);
    if (digits.size() <= frac) digits.insert(0, frac - digits.size() + 1, '0');
    digits.insert(digits.size() - frac, ".");
  }
  return neg ? "-" + digits : digits;
}

ScaledDecimal ScaledDecimal::parse_plain(const std::string& s) {
  std::string digits;
  int exponent = 0;
  bool seen_dot = false;
  bool neg = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (i == 0 && c == '-') {
      neg = true;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      if (seen_dot) --exponent;
    } else {
      throw NormalizationError("not a plain decimal: " + s);
    }
  }
  if (digits.empty() || digits.size() > 18) throw NormalizationError("not a plain decimal: " + s);
  std::int64_t m = 0;
  std::from_chars(digits.data(), digits.data() + digits.size(), m);
  return ScaledDecimal(neg ? -m : m, exponent);
}

std::string describe(const NormalizedValue& v) {
  struct Visitor {
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(const ScaledDecimal& d) const { return d.to_plain_string(); }
    std::string operator()(const CurrencyCode& c) const { return c.code; }
    std::string operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, v);
}

const std::vector<std::int64_t>& default_unit_scales() {
  static const std::vector<std::int64_t> scales = {1, 1000, 1000000};
  return scales;
}

}  // namespace finex
