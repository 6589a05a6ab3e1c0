#include "asyncdoc/xml_codec.hpp"

#include <charconv>

namespace asyncdoc::xml_codec {

namespace {

std::int64_t parse_int(std::string_view s) {
  std::int64_t value = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::unknown_shape, "not an integer: '" + std::string(s) + "'");
  }
  return value;
}

} // namespace

Body encode_int(std::int64_t value) { return Body{Tree::text(std::to_string(value))}; }

Body encode_string(const std::string& value) {
  if (value.empty()) return {};
  return Body{Tree::text(value)};
}

Tree item(Body body) { return Tree::element(separator, {}, std::move(body)); }

Body encode_pair(Body first, Body second) {
  return Body{item(std::move(first)), item(std::move(second))};
}

Body encode_variant(int tag, Body body) {
  return Body{Tree::element(std::to_string(tag), {}, std::move(body))};
}

std::int64_t decode_int(const Body& body) {
  if (body.size() != 1 || !body.front().is_text()) {
    throw Error(ErrorCode::unknown_shape, "integer must be a single text node");
  }
  return parse_int(body.front().content());
}

std::string decode_string(const Body& body) {
  if (body.empty()) return {};
  if (body.size() != 1 || !body.front().is_text()) {
    throw Error(ErrorCode::unknown_shape, "string must be a single text node");
  }
  return body.front().content();
}

std::vector<Body> decode_items(const Body& body) {
  std::vector<Body> out;
  out.reserve(body.size());
  for (const auto& t : body) {
    if (!t.is_element() || t.name() != separator || !t.attributes().empty()) {
      throw Error(ErrorCode::unknown_shape, "expected <:> item, got " + yxml::to_xml(t));
    }
    out.push_back(t.body());
  }
  return out;
}

std::pair<Body, Body> decode_pair(const Body& body) {
  auto items = decode_items(body);
  if (items.size() != 2) {
    throw Error(ErrorCode::unknown_shape, "pair needs 2 items, got " + std::to_string(items.size()));
  }
  return {std::move(items[0]), std::move(items[1])};
}

Variant decode_variant(const Body& body) {
  if (body.size() != 1 || !body.front().is_element()) {
    throw Error(ErrorCode::unknown_shape, "variant must be a single element");
  }
  const auto& t = body.front();
  const auto tag = parse_int(t.name());
  return {static_cast<int>(tag), t.body()};
}

} // namespace asyncdoc::xml_codec
