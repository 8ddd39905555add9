#include "smcgate/socket_network.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>

namespace smcgate {

namespace {

int make_listener(int* port_out) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw Error(ErrorCode::ConfigError, "socket() failed");
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;  // ephemeral
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(fd, 32) != 0) {
    ::close(fd);
    throw Error(ErrorCode::ConfigError, "bind/listen failed");
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  *port_out = ntohs(addr.sin_port);
  return fd;
}

}  // namespace

SocketNetwork::SocketNetwork() : epoch_(std::chrono::steady_clock::now()) {}

SocketNetwork::~SocketNetwork() { stop(); }

void SocketNetwork::register_node(NetworkNode* node) {
  const NodeId& id = node->node_id();
  if (nodes_.count(id)) {
    throw Error(ErrorCode::ConfigError, "duplicate node id: " + id);
  }
  nodes_[id] = node;
  registration_order_.push_back(id);
}

void SocketNetwork::start() {
  epoch_ = std::chrono::steady_clock::now();
  running_ = true;
  for (const NodeId& id : registration_order_) {
    int port = 0;
    int fd = make_listener(&port);
    listen_fds_[id] = fd;
    listen_ports_[id] = port;
  }
  for (const NodeId& id : registration_order_) {
    core_threads_.emplace_back(&SocketNetwork::listener_loop, this, id,
                               listen_fds_[id]);
  }
  core_threads_.emplace_back(&SocketNetwork::dispatch_loop, this);
  {
    // Keep the dispatcher out while nodes initialize.
    std::lock_guard<std::mutex> lock(dispatch_mutex_);
    for (const NodeId& id : registration_order_) {
      nodes_.at(id)->on_start(*this);
    }
  }
}

TimeMs SocketNetwork::now() const {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - epoch_)
      .count();
}

std::string SocketNetwork::endpoint_of(const NodeId& node) const {
  auto it = listen_ports_.find(node);
  if (it == listen_ports_.end()) return "tcp://127.0.0.1:0";
  return "tcp://127.0.0.1:" + std::to_string(it->second);
}

void SocketNetwork::listener_loop(NodeId node, int listen_fd) {
  while (running_) {
    int conn = ::accept(listen_fd, nullptr, nullptr);
    if (conn < 0) return;  // listener closed
    std::lock_guard<std::mutex> lock(reader_mutex_);
    reader_threads_.emplace_back(&SocketNetwork::reader_loop, this, node, conn);
  }
}

void SocketNetwork::reader_loop(NodeId node, int conn_fd) {
  std::string buffer;
  char chunk[4096];
  while (running_) {
    ssize_t n = ::read(conn_fd, chunk, sizeof(chunk));
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t pos;
    while ((pos = buffer.find('\n')) != std::string::npos) {
      std::string frame = buffer.substr(0, pos);
      buffer.erase(0, pos + 1);
      if (frame.empty()) continue;
      {
        std::lock_guard<std::mutex> lock(queue_mutex_);
        incoming_.push_back({node, std::move(frame)});
      }
      queue_cv_.notify_one();
    }
  }
  ::close(conn_fd);
}

int SocketNetwork::connect_to_locked(const NodeId& to) {
  auto existing = out_fds_.find(to);
  if (existing != out_fds_.end()) return existing->second;
  auto port_it = listen_ports_.find(to);
  if (port_it == listen_ports_.end()) return -1;
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) return -1;
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<uint16_t>(port_it->second));
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    return -1;
  }
  out_fds_[to] = fd;
  return fd;
}

void SocketNetwork::send(const NodeId& from, const NodeId& to,
                         std::string frame) {
  if (!frame.empty() && frame.back() == '\n') frame.pop_back();
  if (!nodes_.count(to)) throw Error(ErrorCode::UnknownNode, to);

  bool delivered = false;
  {
    std::lock_guard<std::mutex> lock(out_mutex_);
    int fd = connect_to_locked(to);
    if (fd >= 0) {
      std::string wire = frame + "\n";
      std::size_t off = 0;
      delivered = true;
      while (off < wire.size()) {
        ssize_t n = ::write(fd, wire.data() + off, wire.size() - off);
        if (n <= 0) {
          delivered = false;
          ::close(fd);
          out_fds_.erase(to);
          break;
        }
        off += static_cast<std::size_t>(n);
      }
    }
  }
  std::lock_guard<std::mutex> lock(transcript_mutex_);
  transcript_.record({now(), from, to, frame, delivered});
}

void SocketNetwork::broadcast(const NodeId& from, std::string frame) {
  if (!frame.empty() && frame.back() == '\n') frame.pop_back();
  for (const NodeId& id : registration_order_) {
    if (id == from) continue;
    send(from, id, frame);
  }
}

std::uint64_t SocketNetwork::set_timer(const NodeId& node, TimeMs delay_ms) {
  if (!nodes_.count(node)) throw Error(ErrorCode::UnknownNode, node);
  std::uint64_t token = next_token_++;
  {
    std::lock_guard<std::mutex> lock(queue_mutex_);
    timers_.push_back(
        {std::chrono::steady_clock::now() +
             std::chrono::milliseconds(std::max<TimeMs>(0, delay_ms)),
         token, node});
  }
  queue_cv_.notify_one();
  return token;
}

void SocketNetwork::dispatch_loop() {
  while (running_) {
    Incoming incoming;
    bool have_frame = false;
    std::uint64_t timer_token = 0;
    NodeId timer_node;
    bool have_timer = false;
    {
      std::unique_lock<std::mutex> lock(queue_mutex_);
      auto next_due =
          std::chrono::steady_clock::now() + std::chrono::milliseconds(50);
      auto by_due = [](const PendingTimer& a, const PendingTimer& b) {
        return a.due < b.due;
      };
      auto earliest = std::min_element(timers_.begin(), timers_.end(), by_due);
      if (earliest != timers_.end() && earliest->due < next_due) {
        next_due = earliest->due;
      }
      queue_cv_.wait_until(lock, next_due,
                           [&] { return !running_ || !incoming_.empty(); });
      if (!running_) return;
      auto now_tp = std::chrono::steady_clock::now();
      earliest = std::min_element(timers_.begin(), timers_.end(), by_due);
      if (earliest != timers_.end() && earliest->due <= now_tp) {
        timer_token = earliest->token;
        timer_node = earliest->node;
        timers_.erase(earliest);
        have_timer = true;
      } else if (!incoming_.empty()) {
        incoming = std::move(incoming_.front());
        incoming_.pop_front();
        have_frame = true;
      }
    }
    if (!have_timer && !have_frame) continue;
    std::lock_guard<std::mutex> dispatch_lock(dispatch_mutex_);
    if (have_timer) {
      auto it = nodes_.find(timer_node);
      if (it != nodes_.end()) it->second->on_timer(*this, timer_token);
    } else {
      std::string from = "?";
      try {
        from = decode_message(incoming.frame).sender;
      } catch (const Error&) {
      }
      auto it = nodes_.find(incoming.to);
      if (it != nodes_.end()) {
        it->second->on_frame(*this, from, incoming.frame);
      }
    }
  }
}

bool SocketNetwork::run_until(std::function<bool()> predicate,
                              TimeMs max_wall_ms) {
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(max_wall_ms);
  while (std::chrono::steady_clock::now() < deadline) {
    {
      std::lock_guard<std::mutex> lock(dispatch_mutex_);
      if (predicate()) return true;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  std::lock_guard<std::mutex> lock(dispatch_mutex_);
  return predicate();
}

void SocketNetwork::stop() {
  if (!running_.exchange(false)) return;
  queue_cv_.notify_all();
  {
    std::lock_guard<std::mutex> lock(out_mutex_);
    for (auto& [id, fd] : out_fds_) ::close(fd);
    out_fds_.clear();
  }
  for (auto& [id, fd] : listen_fds_) {
    ::shutdown(fd, SHUT_RDWR);
    ::close(fd);
  }
  for (auto& t : core_threads_) {
    if (t.joinable()) t.join();
  }
  core_threads_.clear();
  listen_fds_.clear();
  {
    std::lock_guard<std::mutex> lock(reader_mutex_);
    for (auto& t : reader_threads_) {
      if (t.joinable()) t.join();
    }
    reader_threads_.clear();
  }
}

}  // namespace smcgate
