#include "stub_tls.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/ocsp.h>
#include <openssl/ssl.h>
#include <openssl/x509v3.h>

#include <csignal>
#include <cstring>
#include <stdexcept>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace webdep::testing {

struct StubTlsServer::Impl {
  std::map<std::string, StubTlsSite> sites;
  EVP_PKEY* key = nullptr;
  SSL_CTX* listener = nullptr;
  std::map<std::string, SSL_CTX*> contexts;

  ~Impl() {
    for (auto& [name, ctx] : contexts) SSL_CTX_free(ctx);
    if (listener) SSL_CTX_free(listener);
    if (key) EVP_PKEY_free(key);
  }
};

namespace {

X509* make_certificate(const std::string& sni, const StubTlsSite& site, EVP_PKEY* key) {
  X509* cert = X509_new();
  X509_set_version(cert, 2);
  ASN1_INTEGER_set(X509_get_serialNumber(cert), 1);
  X509_gmtime_adj(X509_getm_notBefore(cert), -86400);
  X509_gmtime_adj(X509_getm_notAfter(cert), 86400L * 365);
  X509_set_pubkey(cert, key);

  X509_NAME* subject = X509_get_subject_name(cert);
  X509_NAME_add_entry_by_txt(subject, "CN", MBSTRING_UTF8,
                             reinterpret_cast<const unsigned char*>(sni.c_str()), -1, -1, 0);
  X509_NAME* issuer = X509_NAME_new();
  if (!site.issuer_org.empty()) {
    X509_NAME_add_entry_by_txt(issuer, "O", MBSTRING_UTF8,
                               reinterpret_cast<const unsigned char*>(site.issuer_org.c_str()),
                               -1, -1, 0);
  }
  const std::string issuer_cn = "Stub Issuing CA";
  X509_NAME_add_entry_by_txt(issuer, "CN", MBSTRING_UTF8,
                             reinterpret_cast<const unsigned char*>(issuer_cn.c_str()), -1, -1, 0);
  X509_set_issuer_name(cert, issuer);
  X509_NAME_free(issuer);

  if (!site.san.empty()) {
    std::string value;
    for (const auto& name : site.san) {
      if (!value.empty()) value += ',';
      value += "DNS:" + name;
    }
    X509V3_CTX v3;
    X509V3_set_ctx_nodb(&v3);
    X509V3_set_ctx(&v3, cert, cert, nullptr, nullptr, 0);
    X509_EXTENSION* ext = X509V3_EXT_conf_nid(nullptr, &v3, NID_subject_alt_name, value.c_str());
    if (!ext) throw std::runtime_error("stub tls: bad SAN " + value);
    X509_add_ext(cert, ext, -1);
    X509_EXTENSION_free(ext);
  }
  X509_sign(cert, key, EVP_sha256());
  return cert;
}

int status_callback(SSL* ssl, void* arg) {
  auto* impl = static_cast<StubTlsServer::Impl*>(arg);
  const char* sni = SSL_get_servername(ssl, TLSEXT_NAMETYPE_host_name);
  if (!sni) return SSL_TLSEXT_ERR_NOACK;
  auto it = impl->sites.find(sni);
  if (it == impl->sites.end() || !it->second.ocsp) return SSL_TLSEXT_ERR_NOACK;
  OCSP_RESPONSE* response = OCSP_response_create(OCSP_RESPONSE_STATUS_TRYLATER, nullptr);
  unsigned char* der = nullptr;
  const int len = i2d_OCSP_RESPONSE(response, &der);
  OCSP_RESPONSE_free(response);
  if (len <= 0) return SSL_TLSEXT_ERR_NOACK;
  // SSL takes ownership; it must come from OPENSSL_malloc.
  auto* owned = static_cast<unsigned char*>(OPENSSL_malloc(static_cast<std::size_t>(len)));
  std::memcpy(owned, der, static_cast<std::size_t>(len));
  OPENSSL_free(der);
  SSL_set_tlsext_status_ocsp_resp(ssl, owned, len);
  return SSL_TLSEXT_ERR_OK;
}

int servername_callback(SSL* ssl, int* alert, void* arg) {
  auto* impl = static_cast<StubTlsServer::Impl*>(arg);
  const char* sni = SSL_get_servername(ssl, TLSEXT_NAMETYPE_host_name);
  if (!sni) {
    *alert = SSL_AD_UNRECOGNIZED_NAME;
    return SSL_TLSEXT_ERR_ALERT_FATAL;
  }
  auto it = impl->contexts.find(sni);
  if (it == impl->contexts.end()) {
    *alert = SSL_AD_UNRECOGNIZED_NAME;
    return SSL_TLSEXT_ERR_ALERT_FATAL;
  }
  SSL_set_SSL_CTX(ssl, it->second);
  return SSL_TLSEXT_ERR_OK;
}

SSL_CTX* server_context(StubTlsServer::Impl* impl) {
  SSL_CTX* ctx = SSL_CTX_new(TLS_server_method());
  SSL_CTX_set_tlsext_status_cb(ctx, status_callback);
  SSL_CTX_set_tlsext_status_arg(ctx, impl);
  return ctx;
}

}  // namespace

StubTlsServer::StubTlsServer(std::map<std::string, StubTlsSite> sites)
    : impl_(std::make_unique<Impl>()) {
  // Clients hang up right after the handshake; a late write must not kill the process.
  std::signal(SIGPIPE, SIG_IGN);
  impl_->sites = std::move(sites);
  impl_->key = EVP_EC_gen("P-256");
  if (!impl_->key) throw std::runtime_error("stub tls: key generation failed");
  for (const auto& [sni, site] : impl_->sites) {
    SSL_CTX* ctx = server_context(impl_.get());
    X509* cert = make_certificate(sni, site, impl_->key);
    SSL_CTX_use_certificate(ctx, cert);
    SSL_CTX_use_PrivateKey(ctx, impl_->key);
    X509_free(cert);
    impl_->contexts.emplace(sni, ctx);
  }
  impl_->listener = server_context(impl_.get());
  SSL_CTX_set_tlsext_servername_callback(impl_->listener, servername_callback);
  SSL_CTX_set_tlsext_servername_arg(impl_->listener, impl_.get());

  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(fd_, 64) != 0) {
    throw std::runtime_error("stub tls: cannot listen");
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  thread_ = std::thread([this] { serve(); });
}

StubTlsServer::~StubTlsServer() {
  stop_ = true;
  if (thread_.joinable()) thread_.join();
  {
    std::lock_guard lock(workers_mu_);
    for (auto& t : workers_) t.join();
  }
  if (fd_ >= 0) ::close(fd_);
}

void StubTlsServer::serve() {
  while (!stop_.load()) {
    pollfd pfd{fd_, POLLIN, 0};
    if (::poll(&pfd, 1, 50) <= 0) continue;
    const int conn = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (conn < 0) continue;
    std::lock_guard lock(workers_mu_);
    workers_.emplace_back([this, conn] { handle(conn); });
  }
}

void StubTlsServer::handle(int fd) {
  timeval tv{2, 0};
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
  SSL* ssl = SSL_new(impl_->listener);
  SSL_set_fd(ssl, fd);
  if (SSL_accept(ssl) == 1) {
    handshakes_++;
    const char* sni = SSL_get_servername(ssl, TLSEXT_NAMETYPE_host_name);
    std::string request;
    char buf[2048];
    while (request.find("\r\n\r\n") == std::string::npos && request.size() < 65536) {
      const int n = SSL_read(ssl, buf, sizeof(buf));
      if (n <= 0) break;
      request.append(buf, static_cast<std::size_t>(n));
    }
    if (request.find("\r\n\r\n") != std::string::npos && sni) {
      const std::string& page = impl_->sites.at(sni).page;
      const std::string status = page.empty() ? "404 Not Found" : "200 OK";
      const std::string response = "HTTP/1.1 " + status +
                                   "\r\nContent-Type: text/html\r\nContent-Length: " +
                                   std::to_string(page.size()) + "\r\nConnection: close\r\n\r\n" +
                                   page;
      SSL_write(ssl, response.data(), static_cast<int>(response.size()));
    }
    SSL_shutdown(ssl);
  }
  SSL_free(ssl);
  ::close(fd);
}

struct StubHttpServer::Impl {
  httplib::Server server;
  std::map<std::string, std::string> pages;
};

StubHttpServer::StubHttpServer(std::map<std::string, std::string> pages)
    : impl_(std::make_unique<Impl>()) {
  impl_->pages = std::move(pages);
  impl_->server.Get("/", [this](const httplib::Request& req, httplib::Response& res) {
    std::string host = req.get_header_value("Host");
    if (auto colon = host.find(':'); colon != std::string::npos) host.resize(colon);
    auto it = impl_->pages.find(host);
    if (it == impl_->pages.end()) {
      res.status = 404;
      return;
    }
    res.set_content(it->second, "text/html");
  });
  const int port = impl_->server.bind_to_any_port("127.0.0.1");
  if (port <= 0) throw std::runtime_error("stub http: cannot bind");
  port_ = static_cast<std::uint16_t>(port);
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

StubHttpServer::~StubHttpServer() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace webdep::testing
