#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <list>
#include <thread>

#include "trackforge/wire.hpp"

namespace trackforge {
namespace {

bool send_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

void serve_connection(int fd, EnvConfig config, std::shared_ptr<const std::vector<WorldPtr>> pool,
                      const std::atomic<bool>* stop) {
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  WireSession session(std::move(config), std::move(pool));
  std::string buffer;
  char chunk[65536];
  while (!session.closed()) {
    if (stop && stop->load()) break;
    pollfd p{fd, POLLIN, 0};
    const int ready = ::poll(&p, 1, 200);
    if (ready < 0 && errno != EINTR) break;
    if (ready <= 0) continue;
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n == 0) break;
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    bool ok = true;
    for (std::size_t nl; ok && (nl = buffer.find('\n', start)) != std::string::npos; start = nl + 1) {
      std::string line = buffer.substr(start, nl - start);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      ok = send_all(fd, session.handle(line) + "\n");
      if (session.closed()) break;
    }
    buffer.erase(0, start);
    if (!ok) break;
  }
  ::close(fd);
}

}  // namespace

void run_server(const EnvConfig& config, std::shared_ptr<const std::vector<WorldPtr>> pool,
                const ServerOptions& opt) {
  // Constructing one session up front surfaces configuration errors before
  // the socket is opened.
  { WireSession probe(config, pool); }

  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw Error(ErrorCode::kIo, std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(opt.port));
  if (::inet_pton(AF_INET, opt.host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw Error(ErrorCode::kInvalidArgument, "serve: bad host address " + opt.host);
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(fd, 16) != 0) {
    const std::string why = std::strerror(errno);
    ::close(fd);
    throw Error(ErrorCode::kIo, "serve: cannot bind port " + std::to_string(opt.port) + ": " + why);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  if (opt.on_listening) opt.on_listening(ntohs(addr.sin_port));

  std::list<std::thread> workers;
  while (!(opt.stop && opt.stop->load())) {
    pollfd p{fd, POLLIN, 0};
    const int ready = ::poll(&p, 1, 200);
    if (ready < 0 && errno != EINTR) break;
    if (ready <= 0) continue;
    const int client = ::accept(fd, nullptr, nullptr);
    if (client < 0) continue;
    workers.emplace_back(serve_connection, client, config, pool, opt.stop);
  }
  ::close(fd);
  for (auto& t : workers) t.join();
}

WireClient::WireClient(const std::string& host, int port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw Error(ErrorCode::kIo, std::string("socket: ") + std::strerror(errno));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1 ||
      ::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    const std::string why = std::strerror(errno);
    ::close(fd_);
    fd_ = -1;
    throw Error(ErrorCode::kIo, "connect " + host + ":" + std::to_string(port) + ": " + why);
  }
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

WireClient::~WireClient() {
  if (fd_ >= 0) ::close(fd_);
}

std::string WireClient::request(const std::string& line) {
  if (!send_all(fd_, line + "\n")) throw Error(ErrorCode::kIo, "wire: send failed");
  char chunk[65536];
  while (true) {
    const auto nl = pending_.find('\n');
    if (nl != std::string::npos) {
      std::string out = pending_.substr(0, nl);
      pending_.erase(0, nl + 1);
      return out;
    }
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorCode::kIo, "wire: connection closed");
    pending_.append(chunk, static_cast<std::size_t>(n));
  }
}

}  // namespace trackforge
