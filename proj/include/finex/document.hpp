#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "finex/geometry.hpp"
#include "finex/image.hpp"

namespace finex {

struct PageImage {
  int page_no = 1;
  Image image;
  std::optional<int> dpi;
};

/// A scanned document. Immutable once ingested; share it by const reference
/// or shared_ptr<const Document> across workers.
struct Document {
  std::string doc_id;
  std::vector<PageImage> pages;
  std::optional<std::string> language_hint;
  std::string source_path;

  int page_count() const { return static_cast<int>(pages.size()); }
  bool has_page(int page_no) const { return page_no >= 1 && page_no <= page_count(); }
};

/// Throws InputError unless pages are non-empty and numbered 1..n.
void validate_document(const Document& doc);

enum class FieldCategory { tabular, narrative };
enum class ValueKind { integer, money, currency_code, text };

std::string to_string(FieldCategory c);
std::string to_string(ValueKind k);
FieldCategory parse_category(const std::string& s);
ValueKind parse_value_kind(const std::string& s);

struct FieldSpec {
  std::string name;
  FieldCategory category = FieldCategory::tabular;
  /// language tag -> keywords
  std::map<std::string, std::vector<std::string>> keywords;
  ValueKind value_kind = ValueKind::text;

  /// Keywords for `language`, falling back to English.
  const std::vector<std::string>& keywords_for(const std::string& language) const;
};

/// Names accepted for FieldSpec::name.
const std::vector<std::string>& known_field_names();
/// The five scalar fields scored against ground truth.
const std::vector<std::string>& scalar_field_names();

/// Throws ConfigError on an invalid spec.
void validate_field_spec(const FieldSpec& spec);

/// Value kind and category implied by a field name.
FieldSpec default_field_shape(const std::string& name);

/// Exact decimal: mantissa * 10^exponent, exponent <= 0, trailing fractional
/// zeros stripped.
class ScaledDecimal {
 public:
  ScaledDecimal() = default;
  ScaledDecimal(std::int64_t mantissa, int exponent = 0);

  std::int64_t mantissa() const noexcept { return mantissa_; }
  int exponent() const noexcept { return exponent_; }
  double to_double() const;
  /// Multiplies by a power-of-ten scale (1, 1000, ...). Throws
  /// NormalizationError on overflow.
  ScaledDecimal scaled(std::int64_t factor) const;
  /// Plain digits with '.' as decimal mark, e.g. "4500000" or "12.5".
  std::string to_plain_string() const;
  /// Parses to_plain_string() output.
  static ScaledDecimal parse_plain(const std::string& s);

  friend bool operator==(const ScaledDecimal&, const ScaledDecimal&) = default;

 private:
  std::int64_t mantissa_ = 0;
  int exponent_ = 0;
};

struct CurrencyCode {
  std::string code;
  friend bool operator==(const CurrencyCode&, const CurrencyCode&) = default;
};

/// integer (years), money amount, ISO-4217 code, or free text.
using NormalizedValue = std::variant<std::int64_t, ScaledDecimal, CurrencyCode, std::string>;

std::string describe(const NormalizedValue& v);

struct QuotedToken {
  int index = 0;
  std::string text;
  double confidence = 0.0;
  Quad box{};
};

struct Provenance {
  int page_no = 0;
  std::vector<int> token_indices;
  /// snapshot of the referenced tokens for human review
  std::vector<QuotedToken> tokens;
};

struct FieldValue {
  std::string field;
  std::string raw_text;
  NormalizedValue value;
  std::int64_t unit_scale = 1;
  std::optional<std::string> currency;
  std::vector<Provenance> provenance;
  std::optional<double> model_confidence;
};

/// Allowed FieldValue::unit_scale values.
const std::vector<std::int64_t>& default_unit_scales();

}  // namespace finex
