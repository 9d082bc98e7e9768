#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace webdep::testing {

struct StubTlsSite {
  std::vector<std::string> san;  // DNS SAN entries; "*." allowed
  std::string issuer_org;        // issuer O; empty leaves it out
  bool ocsp = false;             // staple a (tryLater) OCSP response
  std::string page;              // HTML served for GET over TLS
};

// TLS listener on 127.0.0.1 choosing a runtime-generated certificate by SNI.
// Unknown SNI names get a fatal alert, so those hosts look HTTP-only.
class StubTlsServer {
 public:
  explicit StubTlsServer(std::map<std::string, StubTlsSite> sites);
  ~StubTlsServer();
  StubTlsServer(const StubTlsServer&) = delete;
  StubTlsServer& operator=(const StubTlsServer&) = delete;

  std::uint16_t port() const { return port_; }
  std::size_t handshakes() const { return handshakes_.load(); }

  struct Impl;

 private:
  void serve();
  void handle(int fd);

  std::unique_ptr<Impl> impl_;
  int fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stop_{false};
  std::atomic<std::size_t> handshakes_{0};
  std::thread thread_;
  std::mutex workers_mu_;
  std::vector<std::thread> workers_;
};

// Plain HTTP server on 127.0.0.1 answering GET / by Host header.
class StubHttpServer {
 public:
  explicit StubHttpServer(std::map<std::string, std::string> pages);
  ~StubHttpServer();
  StubHttpServer(const StubHttpServer&) = delete;
  StubHttpServer& operator=(const StubHttpServer&) = delete;

  std::uint16_t port() const { return port_; }

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
  std::thread thread_;
};

}  // namespace webdep::testing
