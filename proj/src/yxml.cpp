#include "asyncdoc/yxml.hpp"

#include <algorithm>
#include <set>

#include "asyncdoc/error.hpp"

namespace asyncdoc::yxml {

namespace {

bool has_reserved(std::string_view s) {
  return s.find(X) != std::string_view::npos || s.find(Y) != std::string_view::npos;
}

void check_clean(std::string_view s, const char* what) {
  if (has_reserved(s)) {
    throw Error(ErrorCode::reserved_byte_in_content, std::string(what) + " contains a reserved byte");
  }
}

void validate(const Tree& tree) {
  if (tree.is_text()) {
    check_clean(tree.content(), "text");
    return;
  }
  if (tree.name().empty()) {
    throw Error(ErrorCode::reserved_byte_in_content, "empty element name");
  }
  check_clean(tree.name(), "element name");
  std::set<std::string_view> keys;
  for (const auto& [key, value] : tree.attributes()) {
    if (key.empty() || key.find('=') != std::string::npos) {
      throw Error(ErrorCode::reserved_byte_in_content, "invalid attribute key '" + key + "'");
    }
    check_clean(key, "attribute key");
    check_clean(value, "attribute value");
    if (!keys.insert(key).second) {
      throw Error(ErrorCode::reserved_byte_in_content, "duplicate attribute key '" + key + "'");
    }
  }
  for (const auto& child : tree.body()) validate(child);
}

void encode_into(std::string& out, const Tree& tree) {
  if (tree.is_text()) {
    out += tree.content();
    return;
  }
  out += X;
  out += Y;
  out += tree.name();
  for (const auto& [key, value] : tree.attributes()) {
    out += Y;
    out += key;
    out += '=';
    out += value;
  }
  out += X;
  for (const auto& child : tree.body()) encode_into(out, child);
  out += X;
  out += Y;
  out += X;
}

void append_text(Body& body, std::string_view text) {
  if (text.empty()) return;
  if (!body.empty() && body.back().is_text()) {
    body.back() = Tree::text(body.back().content() + std::string(text));
  } else {
    body.push_back(Tree::text(std::string(text)));
  }
}

std::string escape(std::string_view s, bool attribute) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"':
      if (attribute) {
        out += "&quot;";
        break;
      }
      [[fallthrough]];
    default: out += c;
    }
  }
  return out;
}

bool only_text(const Body& body) {
  return std::all_of(body.begin(), body.end(), [](const Tree& t) { return t.is_text(); });
}

void render(std::string& out, const Tree& tree, bool pretty, int depth) {
  if (tree.is_text()) {
    out += escape(tree.content(), false);
    return;
  }
  const std::string indent = pretty ? std::string(2 * depth, ' ') : std::string();
  out += '<';
  out += escape(tree.name(), true);
  for (const auto& [key, value] : tree.attributes()) {
    out += ' ';
    out += key;
    out += "=\"";
    out += escape(value, true);
    out += '"';
  }
  if (tree.body().empty()) {
    out += "/>";
    return;
  }
  out += '>';
  if (pretty && !only_text(tree.body())) {
    for (const auto& child : tree.body()) {
      out += '\n';
      out += std::string(2 * (depth + 1), ' ');
      render(out, child, pretty, depth + 1);
    }
    out += '\n';
    out += indent;
  } else {
    for (const auto& child : tree.body()) render(out, child, pretty, depth + 1);
  }
  out += "</";
  out += escape(tree.name(), true);
  out += '>';
}

} // namespace

Tree Tree::element(std::string name, Attributes attributes, Body body) {
  Tree t;
  t.element_ = true;
  t.name_ = std::move(name);
  t.attributes_ = std::move(attributes);
  t.body_ = std::move(body);
  return t;
}

Tree Tree::text(std::string content) {
  Tree t;
  t.content_ = std::move(content);
  return t;
}

std::optional<std::string_view> Tree::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes_) {
    if (k == key) return std::string_view(v);
  }
  return std::nullopt;
}

bool Tree::operator==(const Tree& other) const {
  return element_ == other.element_ && name_ == other.name_ && content_ == other.content_ &&
         attributes_ == other.attributes_ && body_ == other.body_;
}

std::string encode(const Body& trees) {
  for (const auto& t : trees) validate(t);
  std::string out;
  for (const auto& t : trees) encode_into(out, t);
  return out;
}

std::string encode(const Tree& tree) { return encode(Body{tree}); }

Body decode(std::string_view bytes) {
  struct Open {
    std::string name;
    Attributes attributes;
    Body body;
  };
  Body root;
  std::vector<Open> stack;
  auto current = [&]() -> Body& { return stack.empty() ? root : stack.back().body; };

  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == Y) {
      throw Error(ErrorCode::malformed_marker, "stray Y byte at " + std::to_string(pos));
    }
    if (c != X) {
      std::size_t end = bytes.find(X, pos);
      if (end == std::string_view::npos) end = bytes.size();
      const auto run = bytes.substr(pos, end - pos);
      if (run.find(Y) != std::string_view::npos) {
        throw Error(ErrorCode::malformed_marker, "stray Y byte in text at " + std::to_string(pos));
      }
      append_text(current(), run);
      pos = end;
      continue;
    }
    if (pos + 1 >= bytes.size() || bytes[pos + 1] != Y) {
      throw Error(ErrorCode::malformed_marker, "X not followed by Y at " + std::to_string(pos));
    }
    pos += 2;
    if (pos < bytes.size() && bytes[pos] == X) {
      if (stack.empty()) {
        throw Error(ErrorCode::unbalanced_markers, "end marker without open element");
      }
      Open done = std::move(stack.back());
      stack.pop_back();
      current().push_back(Tree::element(std::move(done.name), std::move(done.attributes), std::move(done.body)));
      ++pos;
      continue;
    }
    const std::size_t close = bytes.find(X, pos);
    if (close == std::string_view::npos) {
      throw Error(ErrorCode::malformed_marker, "unterminated start marker");
    }
    const auto marker = bytes.substr(pos, close - pos);
    pos = close + 1;

    Open open;
    std::size_t field_start = 0;
    bool first = true;
    std::set<std::string> keys;
    while (true) {
      std::size_t field_end = marker.find(Y, field_start);
      const auto field = marker.substr(field_start, field_end == std::string_view::npos
                                                         ? std::string_view::npos
                                                         : field_end - field_start);
      if (first) {
        if (field.empty()) throw Error(ErrorCode::malformed_marker, "empty element name");
        open.name = std::string(field);
        first = false;
      } else {
        const auto eq = field.find('=');
        if (eq == std::string_view::npos || eq == 0) {
          throw Error(ErrorCode::malformed_attribute, "attribute without key=value: '" + std::string(field) + "'");
        }
        std::string key(field.substr(0, eq));
        if (!keys.insert(key).second) {
          throw Error(ErrorCode::malformed_attribute, "duplicate attribute key '" + key + "'");
        }
        open.attributes.emplace_back(std::move(key), std::string(field.substr(eq + 1)));
      }
      if (field_end == std::string_view::npos) break;
      field_start = field_end + 1;
    }
    stack.push_back(std::move(open));
  }
  if (!stack.empty()) {
    throw Error(ErrorCode::unbalanced_markers, "unclosed element '" + stack.back().name + "'");
  }
  return root;
}

Body normalize(const Body& trees) {
  Body out;
  for (const auto& t : trees) {
    if (t.is_text()) {
      append_text(out, t.content());
    } else {
      out.push_back(Tree::element(t.name(), t.attributes(), normalize(t.body())));
    }
  }
  return out;
}

std::string content_of(const Body& trees) {
  std::string out;
  for (const auto& t : trees) {
    out += t.is_text() ? t.content() : content_of(t.body());
  }
  return out;
}

std::string to_xml(const Body& trees, bool pretty) {
  std::string out;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    if (pretty && i > 0 && !(trees[i].is_text() && trees[i - 1].is_text())) out += '\n';
    render(out, trees[i], pretty, 0);
  }
  return out;
}

std::string to_xml(const Tree& tree, bool pretty) { return to_xml(Body{tree}, pretty); }

} // namespace asyncdoc::yxml
