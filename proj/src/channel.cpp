#include "asyncdoc/channel.hpp"

#include <algorithm>

#include <boost/asio.hpp>

#include "asyncdoc/error.hpp"

namespace asyncdoc::wire {

namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

constexpr std::size_t max_header_digits = 12;
constexpr std::size_t max_chunk_size = std::size_t{1} << 31;

} // namespace

// Pipe

std::size_t Pipe::read_some(char* data, std::size_t size) {
  std::unique_lock lock(mutex_);
  readable_.wait(lock, [&] { return closed_ || !bytes_.empty(); });
  const std::size_t n = std::min(size, bytes_.size());
  std::copy_n(bytes_.begin(), n, data);
  bytes_.erase(bytes_.begin(), bytes_.begin() + static_cast<std::ptrdiff_t>(n));
  return n;
}

void Pipe::write_all(std::string_view bytes) {
  {
    std::lock_guard lock(mutex_);
    if (closed_) throw Error(ErrorCode::channel_closed, "write to closed pipe");
    bytes_.insert(bytes_.end(), bytes.begin(), bytes.end());
  }
  readable_.notify_all();
}

void Pipe::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  readable_.notify_all();
}

// TCP

struct TcpStream::Impl {
  asio::io_context io;
  tcp::socket socket{io};
};

TcpStream::TcpStream() : impl_(std::make_unique<Impl>()) {}
TcpStream::~TcpStream() = default;

std::size_t TcpStream::read_some(char* data, std::size_t size) {
  boost::system::error_code ec;
  const std::size_t n = impl_->socket.read_some(asio::buffer(data, size), ec);
  if (ec == asio::error::eof || ec == asio::error::connection_reset ||
      ec == asio::error::bad_descriptor || ec == asio::error::operation_aborted) {
    return 0;
  }
  if (ec) throw Error(ErrorCode::transport, ec.message());
  return n;
}

void TcpStream::write_all(std::string_view bytes) {
  boost::system::error_code ec;
  asio::write(impl_->socket, asio::buffer(bytes.data(), bytes.size()), ec);
  if (ec == asio::error::broken_pipe || ec == asio::error::connection_reset ||
      ec == asio::error::bad_descriptor) {
    throw Error(ErrorCode::channel_closed, ec.message());
  }
  if (ec) throw Error(ErrorCode::transport, ec.message());
}

void TcpStream::close() {
  boost::system::error_code ec;
  impl_->socket.shutdown(tcp::socket::shutdown_both, ec);
}

struct TcpListener::Impl {
  asio::io_context io;
  tcp::acceptor acceptor{io};
};

TcpListener::TcpListener(const std::string& host, std::uint16_t port)
    : impl_(std::make_unique<Impl>()) {
  boost::system::error_code ec;
  const auto address = asio::ip::make_address(host, ec);
  if (ec) throw Error(ErrorCode::transport, "bad listen address '" + host + "'");
  const tcp::endpoint endpoint(address, port);
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
  impl_->acceptor.bind(endpoint, ec);
  if (ec == asio::error::address_in_use) {
    throw Error(ErrorCode::address_in_use, "port " + std::to_string(port) + " is in use");
  }
  if (ec) throw Error(ErrorCode::transport, ec.message());
  impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw Error(ErrorCode::transport, ec.message());
}

TcpListener::~TcpListener() = default;

std::uint16_t TcpListener::port() const { return impl_->acceptor.local_endpoint().port(); }

std::shared_ptr<TcpStream> TcpListener::accept() {
  auto stream = std::make_shared<TcpStream>();
  boost::system::error_code ec;
  tcp::socket socket(stream->impl_->io);
  impl_->acceptor.accept(socket, ec);
  if (ec) throw Error(ErrorCode::transport, ec.message());
  socket.set_option(tcp::no_delay(true), ec);
  stream->impl_->socket = std::move(socket);
  return stream;
}

void TcpListener::close() {
  boost::system::error_code ec;
  // shutdown(2) on a listening socket wakes a thread blocked in accept().
  ::shutdown(impl_->acceptor.native_handle(), SHUT_RDWR);
  impl_->acceptor.close(ec);
}

std::shared_ptr<TcpStream> tcp_connect(const std::string& host, std::uint16_t port) {
  auto stream = std::make_shared<TcpStream>();
  boost::system::error_code ec;
  tcp::resolver resolver(stream->impl_->io);
  const auto endpoints = resolver.resolve(host, std::to_string(port), ec);
  if (ec) throw Error(ErrorCode::transport, "cannot resolve " + host + ": " + ec.message());
  asio::connect(stream->impl_->socket, endpoints, ec);
  if (ec) {
    throw Error(ErrorCode::transport,
                "cannot connect to " + host + ":" + std::to_string(port) + ": " + ec.message());
  }
  stream->impl_->socket.set_option(tcp::no_delay(true), ec);
  return stream;
}

// Channel

Channel::Channel(std::shared_ptr<ByteStream> input, std::shared_ptr<ByteStream> output)
    : input_(std::move(input)), output_(std::move(output)) {}

std::string frame(std::string_view payload) {
  std::string out = std::to_string(payload.size());
  out += '\n';
  out += payload;
  return out;
}

void Channel::write_chunk(std::string_view payload) {
  if (observer_) observer_(Direction::outbound, payload);
  output_->write_all(frame(payload));
}

bool Channel::fill() {
  if (cursor_ == buffer_.size()) {
    buffer_.clear();
    cursor_ = 0;
  }
  char block[64 * 1024];
  const std::size_t n = input_->read_some(block, sizeof block);
  if (n == 0) return false;
  buffer_.append(block, n);
  return true;
}

std::string Channel::read_chunk() {
  std::size_t length = 0;
  std::size_t digits = 0;
  while (true) {
    if (cursor_ == buffer_.size() && !fill()) {
      if (digits == 0) throw Error(ErrorCode::channel_closed, "end of stream");
      throw Error(ErrorCode::malformed_frame, "end of stream inside frame header");
    }
    const char c = buffer_[cursor_++];
    if (c == '\n') break;
    if (c < '0' || c > '9') {
      throw Error(ErrorCode::malformed_frame, std::string("non-digit byte in frame header: ") +
                                                   std::to_string(static_cast<unsigned char>(c)));
    }
    if (++digits > max_header_digits) throw Error(ErrorCode::malformed_frame, "frame header too long");
    length = length * 10 + static_cast<std::size_t>(c - '0');
  }
  if (digits == 0) throw Error(ErrorCode::malformed_frame, "empty frame header");
  if (length > max_chunk_size) throw Error(ErrorCode::malformed_frame, "frame too large");

  std::string payload;
  payload.reserve(length);
  while (payload.size() < length) {
    if (cursor_ == buffer_.size() && !fill()) {
      throw Error(ErrorCode::malformed_frame, "end of stream inside frame payload");
    }
    const std::size_t take = std::min(length - payload.size(), buffer_.size() - cursor_);
    payload.append(buffer_, cursor_, take);
    cursor_ += take;
  }
  if (observer_) observer_(Direction::inbound, payload);
  return payload;
}

void Channel::close() {
  output_->close();
  if (input_ != output_) input_->close();
}

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_channel_pair() {
  auto a_to_b = std::make_shared<Pipe>();
  auto b_to_a = std::make_shared<Pipe>();
  return {std::make_unique<Channel>(b_to_a, a_to_b), std::make_unique<Channel>(a_to_b, b_to_a)};
}

std::unique_ptr<Channel> make_tcp_channel(std::shared_ptr<TcpStream> stream) {
  return std::make_unique<Channel>(stream, stream);
}

} // namespace asyncdoc::wire
