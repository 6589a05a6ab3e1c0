#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace asyncdoc {

enum class ErrorCode {
  reserved_byte_in_content,
  unbalanced_markers,
  malformed_attribute,
  malformed_marker,
  channel_closed,
  malformed_frame,
  unknown_shape,
  out_of_bounds,
  duplicate_definition,
  undefined_command,
  dangling_reference,
  delete_at_end,
  invalid_edit,
  unknown_version,
  unknown_anchor,
  script_parse,
  transport,
  address_in_use,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace asyncdoc
