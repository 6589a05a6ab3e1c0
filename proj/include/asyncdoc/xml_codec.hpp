#pragma once

/// Typed values as XML bodies, in the style of the prover protocol:
///
///   int / string   text body (the empty string is the empty body)
///   list           one `<:>` element per item, wrapping the item's body
///   pair           `<:>a</:><:>b</:>`
///   option         empty body for None, a one-item list for Some
///   variant        `<TAG>body</TAG>` with a decimal tag as element name
///
/// The encoding carries no type information, so decoding is schema-driven:
/// every decoder takes the body plus functions for the component types.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "asyncdoc/error.hpp"
#include "asyncdoc/yxml.hpp"

namespace asyncdoc::xml_codec {

using yxml::Body;
using yxml::Tree;

inline constexpr const char* separator = ":";

Body encode_int(std::int64_t value);
Body encode_string(const std::string& value);
Body encode_pair(Body first, Body second);
Tree item(Body body);

template <class T, class F>
Body encode_list(const std::vector<T>& items, F&& encode_item) {
  Body out;
  out.reserve(items.size());
  for (const auto& x : items) out.push_back(item(encode_item(x)));
  return out;
}

template <class T, class F>
Body encode_option(const std::optional<T>& value, F&& encode_value) {
  if (!value) return {};
  return Body{item(encode_value(*value))};
}

Body encode_variant(int tag, Body body);

std::int64_t decode_int(const Body& body);
std::string decode_string(const Body& body);
std::pair<Body, Body> decode_pair(const Body& body);

/// Bodies of the `<:>` children; throws unknown_shape on anything else.
std::vector<Body> decode_items(const Body& body);

template <class F>
auto decode_list(const Body& body, F&& decode_item) {
  using T = std::invoke_result_t<F, const Body&>;
  std::vector<T> out;
  for (const auto& b : decode_items(body)) out.push_back(decode_item(b));
  return out;
}

template <class F>
auto decode_option(const Body& body, F&& decode_value) {
  using T = std::invoke_result_t<F, const Body&>;
  auto items = decode_items(body);
  if (items.empty()) return std::optional<T>{};
  if (items.size() != 1) throw Error(ErrorCode::unknown_shape, "option with more than one value");
  return std::optional<T>{decode_value(items.front())};
}

struct Variant {
  int tag;
  Body body;
};

Variant decode_variant(const Body& body);

} // namespace asyncdoc::xml_codec
