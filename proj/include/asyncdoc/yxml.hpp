#pragma once

/// XML trees and the YXML transfer syntax.
///
/// YXML replaces angle-bracket markup by two reserved control bytes:
///
///     Element(n, attrs, body)  ->  X Y n (Y k=v)* X  body  X Y X
///     Text(s)                  ->  s
///
/// with X = 0x05 and Y = 0x06. Names, keys, values and text must not contain
/// either byte; they are rejected, never escaped.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace asyncdoc::yxml {

inline constexpr char X = '\x05';
inline constexpr char Y = '\x06';

using Attribute = std::pair<std::string, std::string>;
using Attributes = std::vector<Attribute>;

class Tree;
using Body = std::vector<Tree>;

class Tree {
public:
  static Tree element(std::string name, Attributes attributes = {}, Body body = {});
  static Tree text(std::string content);

  bool is_element() const { return element_; }
  bool is_text() const { return !element_; }

  /// Element name; empty for text nodes.
  const std::string& name() const { return name_; }
  /// Text content; empty for elements.
  const std::string& content() const { return content_; }
  const Attributes& attributes() const { return attributes_; }
  const Body& body() const { return body_; }
  Body& body() { return body_; }

  std::optional<std::string_view> attribute(std::string_view key) const;

  bool operator==(const Tree& other) const;

private:
  bool element_ = false;
  std::string name_;
  std::string content_;
  Attributes attributes_;
  Body body_;
};

/// Throws Error(reserved_byte_in_content) if any name, key, value or text
/// contains X or Y, or if a name/key is empty or a key contains '='.
std::string encode(const Body& trees);
std::string encode(const Tree& tree);

/// Inverse of encode. Sibling text runs come back as single Text nodes.
/// Throws Error(unbalanced_markers | malformed_attribute | malformed_marker).
Body decode(std::string_view bytes);

/// Merges adjacent text siblings and drops empty text nodes, recursively.
/// decode(encode(t)) == normalize(t) for every valid t.
Body normalize(const Body& trees);

/// Concatenation of all text in the trees, depth first.
std::string content_of(const Body& trees);

/// XML rendering for humans and trace logs. With `pretty`, nested elements go
/// on their own indented lines; text is emitted verbatim (entity-escaped).
std::string to_xml(const Body& trees, bool pretty = false);
std::string to_xml(const Tree& tree, bool pretty = false);

} // namespace asyncdoc::yxml
