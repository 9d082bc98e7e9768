#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <openssl/err.h>
#include <openssl/ssl.h>
#include <openssl/x509v3.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <memory>
#include <set>
#include <utility>

#include "webdep/dns_name.hpp"
#include "webdep/probe.hpp"

namespace webdep {
namespace {

struct SslCtxFree {
  void operator()(SSL_CTX* p) const { SSL_CTX_free(p); }
};
struct SslFree {
  void operator()(SSL* p) const { SSL_free(p); }
};
struct X509Free {
  void operator()(X509* p) const { X509_free(p); }
};
struct GeneralNamesFree {
  void operator()(GENERAL_NAMES* p) const { GENERAL_NAMES_free(p); }
};

class Fd {
 public:
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  int get() const { return fd_; }
  int release() { return std::exchange(fd_, -1); }

 private:
  int fd_;
};

std::string openssl_error() {
  unsigned long code = ERR_get_error();
  if (code == 0) return "handshake failed";
  char buf[256];
  ERR_error_string_n(code, buf, sizeof(buf));
  ERR_clear_error();
  return buf;
}

// Connected blocking socket with send/receive timeouts, or -1.
int connect_with_timeout(const std::string& address, std::uint16_t port,
                         std::chrono::milliseconds timeout, std::string* failure) {
  addrinfo hints{};
  hints.ai_flags = AI_NUMERICHOST | AI_NUMERICSERV;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(address.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
    *failure = "bad address " + address;
    return -1;
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
  int fd = ::socket(res->ai_family, SOCK_STREAM | SOCK_CLOEXEC | SOCK_NONBLOCK, 0);
  if (fd < 0) {
    *failure = std::string("socket: ") + std::strerror(errno);
    return -1;
  }
  Fd owner(fd);
  if (::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
    if (errno != EINPROGRESS) {
      *failure = std::string("connect: ") + std::strerror(errno);
      return -1;
    }
    pollfd pfd{fd, POLLOUT, 0};
    if (::poll(&pfd, 1, static_cast<int>(timeout.count())) <= 0) {
      *failure = "connect timeout";
      return -1;
    }
    int err = 0;
    socklen_t len = sizeof(err);
    ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) {
      *failure = std::string("connect: ") + std::strerror(err);
      return -1;
    }
  }
  const int flags = ::fcntl(fd, F_GETFL, 0);
  ::fcntl(fd, F_SETFL, flags & ~O_NONBLOCK);
  timeval tv{};
  tv.tv_sec = static_cast<long>(timeout.count() / 1000);
  tv.tv_usec = static_cast<long>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
  return owner.release();
}

std::vector<std::string> san_dns_names(X509* cert) {
  std::set<std::string> names;
  std::unique_ptr<GENERAL_NAMES, GeneralNamesFree> sans(static_cast<GENERAL_NAMES*>(
      X509_get_ext_d2i(cert, NID_subject_alt_name, nullptr, nullptr)));
  if (!sans) return {};
  for (int i = 0; i < sk_GENERAL_NAME_num(sans.get()); ++i) {
    const GENERAL_NAME* gn = sk_GENERAL_NAME_value(sans.get(), i);
    if (gn->type != GEN_DNS) continue;
    const ASN1_STRING* s = gn->d.dNSName;
    std::string_view value(reinterpret_cast<const char*>(ASN1_STRING_get0_data(s)),
                           static_cast<std::size_t>(ASN1_STRING_length(s)));
    if (is_valid_dns_pattern(value)) names.insert(normalize_dns_pattern(value));
  }
  return {names.begin(), names.end()};
}

std::optional<std::string> issuer_organization(X509* cert) {
  X509_NAME* issuer = X509_get_issuer_name(cert);
  const int idx = X509_NAME_get_index_by_NID(issuer, NID_organizationName, -1);
  if (idx < 0) return std::nullopt;
  ASN1_STRING* data = X509_NAME_ENTRY_get_data(X509_NAME_get_entry(issuer, idx));
  unsigned char* utf8 = nullptr;
  const int len = ASN1_STRING_to_UTF8(&utf8, data);
  if (len < 0) return std::nullopt;
  std::string out(reinterpret_cast<char*>(utf8), static_cast<std::size_t>(len));
  OPENSSL_free(utf8);
  return out;
}

std::optional<TlsFacts> handshake_once(std::string_view domain, const std::string& address,
                                       const TlsProbeConfig& config,
                                       const CaDirectory& ca_directory, std::string* failure) {
  std::unique_ptr<SSL_CTX, SslCtxFree> ctx(SSL_CTX_new(TLS_client_method()));
  if (!ctx) {
    *failure = openssl_error();
    return std::nullopt;
  }
  // Inspection only: trust is not validated.
  SSL_CTX_set_verify(ctx.get(), SSL_VERIFY_NONE, nullptr);

  Fd sock(connect_with_timeout(address, config.port, config.timeout, failure));
  if (sock.get() < 0) return std::nullopt;

  std::unique_ptr<SSL, SslFree> ssl(SSL_new(ctx.get()));
  const std::string sni(domain);
  SSL_set_fd(ssl.get(), sock.get());
  SSL_set_tlsext_host_name(ssl.get(), sni.c_str());
  SSL_set_tlsext_status_type(ssl.get(), TLSEXT_STATUSTYPE_ocsp);
  if (SSL_connect(ssl.get()) != 1) {
    *failure = "TLS handshake with " + address + ":" + std::to_string(config.port) +
               " failed: " + openssl_error();
    return std::nullopt;
  }
  std::unique_ptr<X509, X509Free> cert(SSL_get_peer_certificate(ssl.get()));
  if (!cert) {
    *failure = "no server certificate";
    SSL_shutdown(ssl.get());
    return std::nullopt;
  }

  TlsFacts facts;
  facts.https_supported = true;
  facts.san_list = san_dns_names(cert.get());
  facts.ca_name = issuer_organization(cert.get());
  if (facts.ca_name) facts.ca_url = ca_directory.ca_url(*facts.ca_name);
  const unsigned char* ocsp = nullptr;
  const long ocsp_len = SSL_get_tlsext_status_ocsp_resp(ssl.get(), &ocsp);
  facts.ocsp_stapled = ocsp != nullptr && ocsp_len > 0;
  SSL_shutdown(ssl.get());
  return facts;
}

}  // namespace

TlsFacts probe_tls_at(std::string_view domain, const std::string& address,
                      const TlsProbeConfig& config, const CaDirectory& ca_directory,
                      std::string* failure) {
  std::string reason;
  for (int attempt = 0; attempt <= config.retries; ++attempt) {
    if (auto facts = handshake_once(domain, address, config, ca_directory, &reason)) {
      return *facts;
    }
  }
  if (failure) *failure = reason;
  return TlsFacts{};
}

TlsFacts probe_tls(std::string_view domain, const DnsResolver& resolver,
                   const TlsProbeConfig& config, const CaDirectory& ca_directory,
                   std::string* failure) {
  auto address = resolve_address(domain, resolver);
  if (!address) {
    if (failure) *failure = "no address for " + std::string(domain);
    return TlsFacts{};
  }
  return probe_tls_at(domain, *address, config, ca_directory, failure);
}

}  // namespace webdep
