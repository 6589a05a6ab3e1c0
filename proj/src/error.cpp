#include "asyncdoc/error.hpp"

namespace asyncdoc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::reserved_byte_in_content: return "ReservedByteInContent";
  case ErrorCode::unbalanced_markers: return "UnbalancedMarkers";
  case ErrorCode::malformed_attribute: return "MalformedAttribute";
  case ErrorCode::malformed_marker: return "MalformedMarker";
  case ErrorCode::channel_closed: return "ChannelClosed";
  case ErrorCode::malformed_frame: return "MalformedFrame";
  case ErrorCode::unknown_shape: return "UnknownShape";
  case ErrorCode::out_of_bounds: return "OutOfBounds";
  case ErrorCode::duplicate_definition: return "DuplicateDefinition";
  case ErrorCode::undefined_command: return "UndefinedCommand";
  case ErrorCode::dangling_reference: return "DanglingReference";
  case ErrorCode::delete_at_end: return "DeleteAtEnd";
  case ErrorCode::invalid_edit: return "InvalidEdit";
  case ErrorCode::unknown_version: return "UnknownVersion";
  case ErrorCode::unknown_anchor: return "UnknownAnchor";
  case ErrorCode::script_parse: return "ScriptParse";
  case ErrorCode::transport: return "Transport";
  case ErrorCode::address_in_use: return "AddressInUse";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

} // namespace asyncdoc
