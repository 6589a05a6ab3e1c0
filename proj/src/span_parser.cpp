#include "asyncdoc/span_parser.hpp"

#include <algorithm>

#include "asyncdoc/error.hpp"

namespace asyncdoc::spans {

namespace {

// Lexical table of the period-terminated language.
constexpr std::string_view comment_open = "(*";
constexpr std::string_view comment_close = "*)";
constexpr char quote = '"';
constexpr char terminator = '.';

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool at(std::string_view text, std::size_t i, std::string_view token) {
  return text.substr(i, token.size()) == token;
}

std::size_t skip_comment(std::string_view text, std::size_t i) {
  int depth = 0;
  while (i < text.size()) {
    if (at(text, i, comment_open)) {
      ++depth;
      i += comment_open.size();
    } else if (at(text, i, comment_close)) {
      --depth;
      i += comment_close.size();
      if (depth == 0) return i;
    } else {
      ++i;
    }
  }
  return i;
}

std::size_t skip_string(std::string_view text, std::size_t i) {
  ++i;
  while (i < text.size()) {
    if (text[i] == quote) {
      if (i + 1 < text.size() && text[i + 1] == quote) {
        i += 2;
        continue;
      }
      return i + 1;
    }
    ++i;
  }
  return i;
}

bool terminates(std::string_view text, std::size_t i) {
  const bool after_period = i > 0 && text[i - 1] == terminator;
  const bool at_end = i + 1 == text.size();
  return !after_period && (at_end || is_space(text[i + 1]));
}

bool forms_delimiter(char a, char b) {
  const char pair[2] = {a, b};
  const std::string_view s(pair, 2);
  return s == comment_open || s == comment_close;
}

std::size_t span_index_at(const std::vector<std::size_t>& starts, std::size_t offset) {
  // starts has one entry per span plus the total length at the back.
  auto it = std::upper_bound(starts.begin(), starts.end() - 1, offset);
  return static_cast<std::size_t>(std::distance(starts.begin(), it)) - 1;
}

} // namespace

void check_bounds(std::string_view text, const TextEdit& edit) {
  if (edit.offset > text.size() ||
      (edit.kind == TextEdit::Kind::remove && edit.length > text.size() - edit.offset)) {
    throw Error(ErrorCode::out_of_bounds, "edit at " + std::to_string(edit.offset) + " (length " +
                                              std::to_string(edit.removed_length()) + ") outside text of " +
                                              std::to_string(text.size()) + " bytes");
  }
}

void apply_edit(std::string& text, const TextEdit& edit) {
  check_bounds(text, edit);
  if (edit.kind == TextEdit::Kind::insert) {
    text.insert(edit.offset, edit.text);
  } else {
    text.erase(edit.offset, edit.length);
  }
}

std::vector<CommandSpan> PeriodParser::parse_spans(std::string_view text) const {
  std::vector<CommandSpan> out;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (at(text, i, comment_open)) {
      i = skip_comment(text, i);
    } else if (text[i] == quote) {
      i = skip_string(text, i);
    } else if (text[i] == terminator && terminates(text, i)) {
      ++i;
      while (i < text.size() && is_space(text[i])) ++i;
      out.push_back({CommandId(), std::string(text.substr(start, i - start)), SpanKind::proper});
      start = i;
    } else {
      ++i;
    }
  }
  if (start < text.size()) {
    out.push_back({CommandId(), std::string(text.substr(start)), SpanKind::improper});
  }
  return out;
}

bool PeriodParser::lexically_sensitive(std::string_view fragment) const {
  return fragment.find(comment_open) != std::string_view::npos ||
         fragment.find(comment_close) != std::string_view::npos ||
         fragment.find(quote) != std::string_view::npos ||
         fragment.find(terminator) != std::string_view::npos;
}

std::vector<std::size_t> boundaries(const std::vector<CommandSpan>& spans) {
  std::vector<std::size_t> out;
  out.reserve(spans.size() + 1);
  std::size_t pos = 0;
  for (const auto& s : spans) {
    out.push_back(pos);
    pos += s.text.size();
  }
  out.push_back(pos);
  return out;
}

Region affected_region(const LanguageParser& parser, std::string_view old_text, const TextEdit& edit) {
  check_bounds(old_text, edit);
  const auto old_spans = parser.parse_spans(old_text);
  const auto starts = boundaries(old_spans);
  const std::size_t n = old_text.size();

  std::size_t anchor = 0;
  if (!old_spans.empty()) {
    std::size_t k = edit.offset >= n ? old_spans.size() - 1 : span_index_at(starts, edit.offset);
    if (k > 0 && starts[k] == edit.offset) --k;
    anchor = starts[k];
  }

  const std::size_t old_edit_end = edit.offset + edit.removed_length();
  const std::string_view changed =
      edit.kind == TextEdit::Kind::insert ? std::string_view(edit.text) : old_text.substr(edit.offset, edit.length);
  bool sensitive = parser.lexically_sensitive(changed);
  if (!sensitive && !changed.empty()) {
    const char before = edit.offset > 0 ? old_text[edit.offset - 1] : '\0';
    const char after = old_edit_end < n ? old_text[old_edit_end] : '\0';
    sensitive = forms_delimiter(before, changed.front()) || forms_delimiter(changed.back(), after) ||
                (edit.kind == TextEdit::Kind::remove && forms_delimiter(before, after));
  }
  if (sensitive) return {anchor, n};

  std::string new_text(old_text);
  apply_edit(new_text, edit);
  const std::size_t new_edit_end = edit.offset + edit.inserted_length();
  const auto delta = static_cast<std::ptrdiff_t>(edit.inserted_length()) -
                     static_cast<std::ptrdiff_t>(edit.removed_length());

  std::size_t pos = anchor;
  for (const auto& span : parser.parse_spans(std::string_view(new_text).substr(anchor))) {
    pos += span.text.size();
    if (pos < new_edit_end || pos <= anchor) continue;
    const auto old_pos = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(pos) - delta);
    if (old_pos >= old_edit_end && std::binary_search(starts.begin(), starts.end(), old_pos)) {
      return {anchor, old_pos};
    }
  }
  return {anchor, n};
}

Reparse reparse(const LanguageParser& parser, std::string_view old_text,
                const std::vector<CommandSpan>& old_spans, const TextEdit& edit) {
  const Region region = affected_region(parser, old_text, edit);
  std::string new_text(old_text);
  apply_edit(new_text, edit);
  const auto delta = static_cast<std::ptrdiff_t>(edit.inserted_length()) -
                     static_cast<std::ptrdiff_t>(edit.removed_length());
  const auto new_end = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(region.end) + delta);

  auto fresh = parser.parse_spans(std::string_view(new_text).substr(region.start, new_end - region.start));

  Reparse out;
  out.region = region;
  const auto starts = boundaries(old_spans);
  std::size_t first_in = 0;
  while (first_in < old_spans.size() && starts[first_in + 1] <= region.start) ++first_in;
  std::size_t first_after = first_in;
  while (first_after < old_spans.size() && starts[first_after] < region.end) ++first_after;

  // Old spans inside the region that reappear unchanged at the same place
  // keep their ids: match from the front by offset, then from the back.
  std::size_t front = 0;
  while (front < fresh.size() && first_in + front < first_after &&
         fresh[front].text == old_spans[first_in + front].text &&
         fresh[front].kind == old_spans[first_in + front].kind) {
    fresh[front].id = old_spans[first_in + front].id;
    ++front;
  }
  std::size_t back = 0;
  while (back < fresh.size() - front && first_in + front + back < first_after &&
         fresh[fresh.size() - 1 - back].text == old_spans[first_after - 1 - back].text &&
         fresh[fresh.size() - 1 - back].kind == old_spans[first_after - 1 - back].kind) {
    fresh[fresh.size() - 1 - back].id = old_spans[first_after - 1 - back].id;
    ++back;
  }

  out.spans.assign(old_spans.begin(), old_spans.begin() + static_cast<std::ptrdiff_t>(first_in));
  out.spans.insert(out.spans.end(), fresh.begin(), fresh.end());
  out.spans.insert(out.spans.end(), old_spans.begin() + static_cast<std::ptrdiff_t>(first_after), old_spans.end());
  return out;
}

} // namespace asyncdoc::spans
