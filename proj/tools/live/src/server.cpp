#include "slipstep/live/server.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "slipstep/errors.hpp"

namespace slipstep::live {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Payload = std::shared_ptr<const std::string>;

namespace {

constexpr std::size_t kMaxOutbox = 512;

struct Inbound {
  enum class Kind { kConnect, kMessage, kDisconnect } kind;
  int client;
  std::string text;
};

}  // namespace

struct Server::Impl {
  class Connection;

  Impl(Session s, ServerOptions o) : session(std::move(s)), options(std::move(o)), acceptor(ioc), signals(ioc) {}

  Session session;
  ServerOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor;
  net::signal_set signals;
  std::atomic<bool> stopping{false};
  std::atomic<long> tick_count{0};
  int next_client = 1;

  // io thread only
  std::map<int, std::shared_ptr<Connection>> clients;

  // io -> sim
  std::mutex in_mutex;
  std::condition_variable in_cv;
  std::deque<Inbound> inbound;

  void push_inbound(Inbound in) {
    {
      std::lock_guard lock(in_mutex);
      inbound.push_back(std::move(in));
    }
    in_cv.notify_one();
  }

  // sim -> io
  void send_to(int client, Payload p);
  void broadcast(Payload p);

  void accept();
  void sim_loop();
  void shutdown();
};

class Server::Impl::Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, int id, Impl& hub) : ws_(std::move(socket)), id_(id), hub_(hub) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(beast::bind_front_handler(&Connection::on_accept, shared_from_this()));
  }

  void send(Payload p) {
    if (closed_) return;
    if (outbox_.size() >= kMaxOutbox) outbox_.pop_back();  // drop the newest queued frame, keep order
    outbox_.push_back(std::move(p));
    if (outbox_.size() == 1) write();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    hub_.clients[id_] = shared_from_this();
    hub_.push_inbound({Inbound::Kind::kConnect, id_, {}});
    read();
  }

  void read() { ws_.async_read(buffer_, beast::bind_front_handler(&Connection::on_read, shared_from_this())); }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return drop();
    hub_.push_inbound({Inbound::Kind::kMessage, id_, beast::buffers_to_string(buffer_.data())});
    buffer_.consume(buffer_.size());
    read();
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(*outbox_.front()), beast::bind_front_handler(&Connection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) return drop();
    outbox_.pop_front();
    if (!outbox_.empty()) write();
  }

  void drop() {
    if (hub_.clients.erase(id_) > 0) hub_.push_inbound({Inbound::Kind::kDisconnect, id_, {}});
    closed_ = true;
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<Payload> outbox_;
  int id_;
  Impl& hub_;
  bool closed_ = false;
};

void Server::Impl::send_to(int client, Payload p) {
  net::post(ioc, [this, client, p = std::move(p)] {
    if (const auto it = clients.find(client); it != clients.end()) it->second->send(p);
  });
}

void Server::Impl::broadcast(Payload p) {
  net::post(ioc, [this, p = std::move(p)] {
    for (auto& [_, c] : clients) c->send(p);
  });
}

void Server::Impl::accept() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (stopping) return;
    if (!ec) std::make_shared<Connection>(std::move(socket), next_client++, *this)->start();
    accept();
  });
}

void Server::Impl::sim_loop() {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto period = options.tick_rate_hz > 0.0
                          ? std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / options.tick_rate_hz))
                          : clock::duration::zero();
  auto deadline = start;
  int connected = 0;
  while (!stopping) {
    std::deque<Inbound> batch;
    {
      std::unique_lock lock(in_mutex);
      if (period > clock::duration::zero()) {
        in_cv.wait_until(lock, deadline, [&] { return stopping.load(); });
      }
      batch.swap(inbound);
    }
    if (stopping) break;
    for (auto& in : batch) {
      switch (in.kind) {
        case Inbound::Kind::kConnect:
          ++connected;
          send_to(in.client, std::make_shared<const std::string>(session.hello().dump()));
          break;
        case Inbound::Kind::kDisconnect:
          --connected;
          break;
        case Inbound::Kind::kMessage:
          for (const auto& reply : session.receive(in.text, in.client)) {
            send_to(in.client, std::make_shared<const std::string>(reply.dump()));
          }
          break;
      }
    }
    const auto t0 = clock::now();
    auto frame = session.advance(0.0);
    const double us = std::chrono::duration<double, std::micro>(clock::now() - t0).count();
    tick_count = session.tick();
    if (frame) {
      (*frame)["tick_us"] = us;
      (*frame)["overload"] = us > session.options().overload_us;
      (*frame)["clients"] = connected;
      (*frame)["wall_drift_s"] = std::chrono::duration<double>(clock::now() - start).count() - session.engine().time();
      broadcast(std::make_shared<const std::string>(frame->dump()));
    }
    deadline += period;
    if (period == clock::duration::zero() && session.finished()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
}

void Server::Impl::shutdown() {
  beast::error_code ec;
  acceptor.close(ec);
  for (auto& [_, c] : clients) c->close();
  clients.clear();
}

Server::Server(Session session, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(session), std::move(options))) {
  try {
    const tcp::endpoint ep(net::ip::make_address(impl_->options.bind_address), impl_->options.port);
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(net::socket_base::reuse_address(true));
    impl_->acceptor.bind(ep);
    impl_->acceptor.listen();
  } catch (const boost::system::system_error& e) {
    throw IoError("serve: cannot listen on " + impl_->options.bind_address + ":" +
                  std::to_string(impl_->options.port) + ": " + e.code().message());
  }
}

Server::~Server() { stop(); }

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

long Server::ticks() const { return impl_->tick_count; }

void Server::stop() {
  if (impl_->stopping.exchange(true)) return;
  impl_->in_cv.notify_all();
  net::post(impl_->ioc, [this] {
    impl_->shutdown();
    impl_->ioc.stop();
  });
}

void Server::run() {
  if (impl_->options.handle_signals) {
    impl_->signals.add(SIGINT);
    impl_->signals.add(SIGTERM);
    impl_->signals.async_wait([this](beast::error_code, int) { stop(); });
  }
  impl_->accept();
  std::thread io([this] { impl_->ioc.run(); });
  impl_->sim_loop();
  io.join();
  if (!impl_->options.tape_path.empty()) {
    std::ofstream f(impl_->options.tape_path);
    f << scenario::to_json(impl_->session.tape_scenario()).dump(2) << '\n';
    if (!f) throw WriteError("serve: cannot write tape " + impl_->options.tape_path.string());
  }
}

}  // namespace slipstep::live
