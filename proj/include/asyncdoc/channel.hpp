#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>

namespace asyncdoc::wire {

/// Blocking byte stream. read_some returns 0 only at end of stream.
class ByteStream {
public:
  virtual ~ByteStream() = default;

  virtual std::size_t read_some(char* data, std::size_t size) = 0;
  virtual void write_all(std::string_view bytes) = 0;
  virtual void close() = 0;
};

/// In-process FIFO. Writes after close throw ChannelClosed; reads drain the
/// remaining bytes and then report end of stream.
class Pipe final : public ByteStream {
public:
  std::size_t read_some(char* data, std::size_t size) override;
  void write_all(std::string_view bytes) override;
  void close() override;

private:
  std::mutex mutex_;
  std::condition_variable readable_;
  std::deque<char> bytes_;
  bool closed_ = false;
};

class TcpStream final : public ByteStream {
public:
  TcpStream();
  ~TcpStream() override;

  std::size_t read_some(char* data, std::size_t size) override;
  void write_all(std::string_view bytes) override;
  void close() override;

private:
  friend class TcpListener;
  friend std::shared_ptr<TcpStream> tcp_connect(const std::string& host, std::uint16_t port);

  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class TcpListener {
public:
  /// Port 0 picks an ephemeral port. Throws Error(address_in_use).
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();

  std::uint16_t port() const;
  /// Blocks for the next connection; throws Error(transport) once closed.
  std::shared_ptr<TcpStream> accept();
  void close();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Throws Error(transport) when the peer cannot be reached.
std::shared_ptr<TcpStream> tcp_connect(const std::string& host, std::uint16_t port);

enum class Direction { inbound, outbound };

/// Length-prefixed chunks: ASCII decimal byte length, '\n', payload.
///
/// One reader and one writer per direction; callers serialize their own
/// writes. An optional observer sees every chunk (outbound before it is
/// written, inbound after it is read) for protocol tracing.
class Channel {
public:
  using Observer = std::function<void(Direction, std::string_view)>;

  Channel(std::shared_ptr<ByteStream> input, std::shared_ptr<ByteStream> output);

  void write_chunk(std::string_view payload);
  /// Throws ChannelClosed at a clean end of stream, MalformedFrame on a bad
  /// header or a stream that ends mid-frame.
  std::string read_chunk();
  void close();

  void set_observer(Observer observer) { observer_ = std::move(observer); }

private:
  bool fill();

  std::shared_ptr<ByteStream> input_;
  std::shared_ptr<ByteStream> output_;
  std::string buffer_;
  std::size_t cursor_ = 0;
  Observer observer_;
};

std::string frame(std::string_view payload);

/// Two channels wired back to back through in-process pipes.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_channel_pair();

std::unique_ptr<Channel> make_tcp_channel(std::shared_ptr<TcpStream> stream);

} // namespace asyncdoc::wire
