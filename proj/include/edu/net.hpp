#pragma once

#include <atomic>
#include <functional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace edu::net {

/// Connects to host:port over TCP. Throws Errc::remote_unreachable.
int connect_tcp(const std::string& host, int port);
void close_fd(int fd);
/// Writes `line` plus '\n'. Throws Errc::remote_unreachable on failure.
void write_line(int fd, std::string_view line);
/// Reads one '\n'-terminated line, buffering the remainder in `buffer`.
/// Returns false on orderly EOF before any byte of the line.
bool read_line(int fd, std::string& buffer, std::string& line);

/// Minimal line-oriented TCP server: every received line is answered with
/// handler(line). Each connection is served on its own thread.
class LineServer {
 public:
  using Handler = std::function<std::string(std::string_view)>;

  /// Binds 127.0.0.1:port (port 0 picks a free port).
  LineServer(Handler handler, int port = 0);
  ~LineServer();
  LineServer(const LineServer&) = delete;
  LineServer& operator=(const LineServer&) = delete;

  int port() const { return port_; }
  void stop();

 private:
  void accept_loop();

  Handler handler_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> running_{true};
  std::thread acceptor_;
  std::vector<std::thread> sessions_;
  std::vector<int> session_fds_;
};

}  // namespace edu::net
