#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "asyncdoc/ids.hpp"

namespace asyncdoc::spans {

enum class SpanKind { proper, improper };

/// A tokenized unit of prover text. `id` is frontend-assigned (negative);
/// zero means not yet assigned.
struct CommandSpan {
  CommandId id;
  std::string text;
  SpanKind kind = SpanKind::proper;

  bool operator==(const CommandSpan&) const = default;
};

struct TextEdit {
  enum class Kind { insert, remove };

  Kind kind = Kind::insert;
  std::size_t offset = 0;
  std::string text;        // inserted text
  std::size_t length = 0;  // removed length

  static TextEdit insert(std::size_t offset, std::string text) {
    return {Kind::insert, offset, std::move(text), 0};
  }
  static TextEdit remove(std::size_t offset, std::size_t length) {
    return {Kind::remove, offset, {}, length};
  }

  std::size_t inserted_length() const { return kind == Kind::insert ? text.size() : 0; }
  std::size_t removed_length() const { return kind == Kind::remove ? length : 0; }

  bool operator==(const TextEdit&) const = default;
};

/// Throws Error(out_of_bounds) if the edit does not fit the text.
void check_bounds(std::string_view text, const TextEdit& edit);
void apply_edit(std::string& text, const TextEdit& edit);

/// Registration point for prover-specific span parsers.
///
/// parse_spans must partition its input: the concatenated span texts equal
/// the input. A span boundary must be a resynchronisation point: parsing the
/// text after a boundary on its own gives the same spans as the full parse.
class LanguageParser {
public:
  virtual ~LanguageParser() = default;

  virtual std::vector<CommandSpan> parse_spans(std::string_view text) const = 0;

  /// True if inserting or removing `fragment` can change lexical state far
  /// away from the edit (comment or string delimiters, terminators).
  virtual bool lexically_sensitive(std::string_view fragment) const = 0;
};

/// Period-terminated phrases.
///
/// A '.' terminates a span iff it is outside comments and strings, is not
/// next to another '.', and is followed by whitespace or end of input. The
/// span then absorbs the whitespace that follows. Comments `(* .. *)` nest;
/// strings use `"` with `""` as the escaped quote. Text after the last
/// terminator forms one improper span.
class PeriodParser final : public LanguageParser {
public:
  std::vector<CommandSpan> parse_spans(std::string_view text) const override;
  bool lexically_sensitive(std::string_view fragment) const override;
};

/// Half-open byte range.
struct Region {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Region&) const = default;
};

/// The region of `old_text` that has to be re-tokenized after `edit`.
///
/// Starts at the span containing the edit (the span before it when the edit
/// sits exactly on a span start). Ends at end of text when the edit touches
/// lexically sensitive text, otherwise at the first old span boundary past the
/// edit that the new tokenization reproduces.
Region affected_region(const LanguageParser& parser, std::string_view old_text, const TextEdit& edit);

struct Reparse {
  std::vector<CommandSpan> spans;
  Region region;  // in old text coordinates
};

/// Applies `edit` and re-tokenizes only the affected region. Spans outside
/// the region, and spans inside it whose text and position are unchanged,
/// keep their ids; the rest get id 0.
Reparse reparse(const LanguageParser& parser, std::string_view old_text,
                const std::vector<CommandSpan>& old_spans, const TextEdit& edit);

/// Start offset of every span, plus the total length as a final entry.
std::vector<std::size_t> boundaries(const std::vector<CommandSpan>& spans);

} // namespace asyncdoc::spans
