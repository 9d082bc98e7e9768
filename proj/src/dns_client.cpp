#include "webdep/dns_client.hpp"

#include <arpa/inet.h>
#include <arpa/nameser.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <resolv.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "webdep/dns_name.hpp"
#include "webdep/error.hpp"

namespace webdep {
namespace {

using Clock = std::chrono::steady_clock;

class Socket {
 public:
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  int get() const { return fd_; }

 private:
  int fd_;
};

struct SockAddr {
  sockaddr_storage storage{};
  socklen_t length = 0;
};

SockAddr to_sockaddr(const ResolverEndpoint& endpoint) {
  addrinfo hints{};
  hints.ai_flags = AI_NUMERICHOST | AI_NUMERICSERV;
  hints.ai_family = AF_UNSPEC;
  addrinfo* result = nullptr;
  const std::string port = std::to_string(endpoint.port);
  if (::getaddrinfo(endpoint.address.c_str(), port.c_str(), &hints, &result) != 0 || !result) {
    throw Error(ErrorCode::kConfigError, "bad resolver address '" + endpoint.address + "'");
  }
  SockAddr out;
  std::memcpy(&out.storage, result->ai_addr, result->ai_addrlen);
  out.length = static_cast<socklen_t>(result->ai_addrlen);
  ::freeaddrinfo(result);
  return out;
}

std::uint16_t next_query_id() {
  thread_local std::mt19937 rng{std::random_device{}()};
  return static_cast<std::uint16_t>(rng());
}

int remaining_ms(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return left.count() > 0 ? static_cast<int>(left.count()) : 0;
}

bool wait_for(int fd, short events, Clock::time_point deadline) {
  pollfd pfd{fd, events, 0};
  while (true) {
    int rc = ::poll(&pfd, 1, remaining_ms(deadline));
    if (rc > 0) return true;
    if (rc == 0) return false;
    if (errno != EINTR) return false;
  }
}

struct Exchange {
  std::vector<std::uint8_t> response;
  std::string failure;  // empty on success
};

Exchange exchange_udp(const SockAddr& addr, const std::vector<std::uint8_t>& query,
                      std::chrono::milliseconds timeout) {
  Socket sock(::socket(addr.storage.ss_family, SOCK_DGRAM | SOCK_CLOEXEC, 0));
  if (sock.get() < 0) return {{}, std::string("socket: ") + std::strerror(errno)};
  if (::connect(sock.get(), reinterpret_cast<const sockaddr*>(&addr.storage), addr.length) != 0) {
    return {{}, std::string("connect: ") + std::strerror(errno)};
  }
  if (::send(sock.get(), query.data(), query.size(), 0) < 0) {
    return {{}, std::string("send: ") + std::strerror(errno)};
  }
  const auto deadline = Clock::now() + timeout;
  std::vector<std::uint8_t> buf(65535);
  while (true) {
    if (!wait_for(sock.get(), POLLIN, deadline)) return {{}, "timeout"};
    ssize_t n = ::recv(sock.get(), buf.data(), buf.size(), 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      return {{}, errno == ECONNREFUSED ? "connection refused" : std::strerror(errno)};
    }
    // Ignore datagrams that do not answer our id.
    if (n >= 2 && buf[0] == query[0] && buf[1] == query[1]) {
      buf.resize(static_cast<std::size_t>(n));
      return {std::move(buf), {}};
    }
  }
}

bool write_all(int fd, const std::uint8_t* data, std::size_t size, Clock::time_point deadline) {
  while (size > 0) {
    if (!wait_for(fd, POLLOUT, deadline)) return false;
    ssize_t n = ::send(fd, data, size, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

bool read_all(int fd, std::uint8_t* data, std::size_t size, Clock::time_point deadline) {
  while (size > 0) {
    if (!wait_for(fd, POLLIN, deadline)) return false;
    ssize_t n = ::recv(fd, data, size, 0);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      return false;
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

Exchange exchange_tcp(const SockAddr& addr, const std::vector<std::uint8_t>& query,
                      std::chrono::milliseconds timeout) {
  Socket sock(::socket(addr.storage.ss_family, SOCK_STREAM | SOCK_CLOEXEC | SOCK_NONBLOCK, 0));
  if (sock.get() < 0) return {{}, std::string("socket: ") + std::strerror(errno)};
  const auto deadline = Clock::now() + timeout;
  if (::connect(sock.get(), reinterpret_cast<const sockaddr*>(&addr.storage), addr.length) != 0 &&
      errno != EINPROGRESS) {
    return {{}, std::string("tcp connect: ") + std::strerror(errno)};
  }
  std::vector<std::uint8_t> framed;
  framed.push_back(static_cast<std::uint8_t>(query.size() >> 8));
  framed.push_back(static_cast<std::uint8_t>(query.size() & 0xff));
  framed.insert(framed.end(), query.begin(), query.end());
  if (!write_all(sock.get(), framed.data(), framed.size(), deadline)) return {{}, "tcp timeout"};
  std::uint8_t len[2];
  if (!read_all(sock.get(), len, 2, deadline)) return {{}, "tcp timeout"};
  std::vector<std::uint8_t> response((std::size_t{len[0]} << 8) | len[1]);
  if (!read_all(sock.get(), response.data(), response.size(), deadline)) {
    return {{}, "tcp timeout"};
  }
  return {std::move(response), {}};
}

std::string uncompress_name(const ns_msg& msg, const unsigned char* ptr) {
  char name[NS_MAXDNAME];
  if (::ns_name_uncompress(ns_msg_base(msg), ns_msg_end(msg), ptr, name, sizeof(name)) < 0) {
    throw Error(ErrorCode::kResolutionFailed, "malformed response: bad name");
  }
  return fold_dns_name(name);
}

std::vector<ResourceRecord> parse_section(ns_msg& msg, ns_sect section) {
  std::vector<ResourceRecord> records;
  const int count = ns_msg_count(msg, section);
  for (int i = 0; i < count; ++i) {
    ns_rr rr;
    if (::ns_parserr(&msg, section, i, &rr) != 0) {
      throw Error(ErrorCode::kResolutionFailed, "malformed response: bad record");
    }
    ResourceRecord rec;
    rec.name = fold_dns_name(ns_rr_name(rr));
    rec.ttl = ns_rr_ttl(rr);
    const int type = ns_rr_type(rr);
    const unsigned char* rdata = ns_rr_rdata(rr);
    switch (type) {
      case ns_t_ns:
      case ns_t_cname:
      case ns_t_soa:  // MNAME is the first field of SOA rdata
        rec.type = static_cast<RecordType>(type);
        rec.data = uncompress_name(msg, rdata);
        break;
      case ns_t_a:
      case ns_t_aaaa: {
        const int family = type == ns_t_a ? AF_INET : AF_INET6;
        const std::size_t want = type == ns_t_a ? 4 : 16;
        if (ns_rr_rdlen(rr) != want) continue;
        char text[INET6_ADDRSTRLEN];
        ::inet_ntop(family, rdata, text, sizeof(text));
        rec.type = static_cast<RecordType>(type);
        rec.data = text;
        break;
      }
      default:
        continue;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

std::string_view rcode_name(Rcode rcode) {
  switch (rcode) {
    case Rcode::kNoError: return "NOERROR";
    case Rcode::kFormErr: return "FORMERR";
    case Rcode::kServFail: return "SERVFAIL";
    case Rcode::kNxDomain: return "NXDOMAIN";
    case Rcode::kNotImp: return "NOTIMP";
    case Rcode::kRefused: return "REFUSED";
  }
  return "RCODE?";
}

ResolverEndpoint ResolverEndpoint::parse(std::string_view text) {
  ResolverEndpoint ep;
  std::string_view host = text;
  std::string_view port;
  if (text.starts_with('[')) {
    const auto close = text.find(']');
    if (close == std::string_view::npos) {
      throw Error(ErrorCode::kConfigError, "bad resolver '" + std::string(text) + "'");
    }
    host = text.substr(1, close - 1);
    if (close + 1 < text.size() && text[close + 1] == ':') port = text.substr(close + 2);
  } else if (std::count(text.begin(), text.end(), ':') == 1) {
    const auto colon = text.find(':');
    host = text.substr(0, colon);
    port = text.substr(colon + 1);
  }
  ep.address = std::string(host);
  if (!port.empty()) {
    int value = 0;
    try {
      value = std::stoi(std::string(port));
    } catch (const std::exception&) {
      value = -1;
    }
    if (value <= 0 || value > 65535) {
      throw Error(ErrorCode::kConfigError, "bad resolver port in '" + std::string(text) + "'");
    }
    ep.port = static_cast<std::uint16_t>(value);
  }
  to_sockaddr(ep);  // validates
  return ep;
}

ResolverEndpoint ResolverEndpoint::system_default() {
  std::ifstream in("/etc/resolv.conf");
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string keyword, address;
    if (ss >> keyword >> address && keyword == "nameserver") {
      ResolverEndpoint ep;
      ep.address = address;
      return ep;
    }
  }
  return ResolverEndpoint{};
}

std::string ResolverEndpoint::to_string() const {
  if (address.find(':') != std::string::npos) {
    return "[" + address + "]:" + std::to_string(port);
  }
  return address + ":" + std::to_string(port);
}

std::optional<DnsResponse> DnsCache::get(const std::string& name, RecordType type) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find({name, static_cast<std::uint16_t>(type)});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void DnsCache::put(const std::string& name, RecordType type, const DnsResponse& response) {
  std::lock_guard lock(mu_);
  entries_[{name, static_cast<std::uint16_t>(type)}] = response;
}

std::vector<std::uint8_t> encode_query(std::string_view name, RecordType type,
                                       std::uint16_t id) {
  std::vector<std::uint8_t> buf(NS_PACKETSZ);
  const std::string qname(name);
  const int len = ::res_mkquery(ns_o_query, qname.c_str(), ns_c_in, static_cast<int>(type),
                                nullptr, 0, nullptr, buf.data(), static_cast<int>(buf.size()));
  if (len < 0) {
    throw Error(ErrorCode::kMalformedHostname, "cannot encode query for '" + qname + "'");
  }
  buf.resize(static_cast<std::size_t>(len));
  buf[0] = static_cast<std::uint8_t>(id >> 8);
  buf[1] = static_cast<std::uint8_t>(id & 0xff);
  buf[2] |= 0x01;  // RD
  return buf;
}

DnsResponse decode_response(const std::uint8_t* data, std::size_t size) {
  ns_msg msg;
  if (::ns_initparse(data, static_cast<int>(size), &msg) != 0) {
    throw Error(ErrorCode::kResolutionFailed, "malformed response");
  }
  DnsResponse response;
  response.rcode = static_cast<Rcode>(ns_msg_getflag(msg, ns_f_rcode));
  response.answers = parse_section(msg, ns_s_an);
  response.authority = parse_section(msg, ns_s_ns);
  return response;
}

DnsResolver::DnsResolver(ResolverConfig config) : config_(std::move(config)) {}

DnsResponse DnsResolver::query_once(const std::string& name, RecordType type) const {
  const SockAddr addr = to_sockaddr(config_.endpoint);
  const std::uint16_t id = next_query_id();
  const auto query = encode_query(name, type, id);
  Exchange ex = exchange_udp(addr, query, config_.retry.attempt_timeout);
  if (ex.failure.empty() && ex.response.size() > 2 && (ex.response[2] & 0x02)) {
    ex = exchange_tcp(addr, query, config_.retry.attempt_timeout);  // TC set
  }
  if (!ex.failure.empty()) throw Error(ErrorCode::kResolutionFailed, ex.failure);
  return decode_response(ex.response.data(), ex.response.size());
}

DnsResponse DnsResolver::query(std::string_view raw_name, RecordType type) const {
  const std::string name = normalize_dns_name(raw_name);
  if (config_.cache) {
    if (auto hit = config_.cache->get(name, type)) return *hit;
  }
  std::string last_failure;
  auto backoff = config_.retry.initial_backoff;
  for (int attempt = 0; attempt <= config_.retry.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    if (config_.rate_limiter) config_.rate_limiter->acquire("dns:" + config_.endpoint.to_string());
    try {
      DnsResponse response = query_once(name, type);
      if (response.rcode == Rcode::kNoError || response.rcode == Rcode::kNxDomain) {
        if (config_.cache) config_.cache->put(name, type, response);
        return response;
      }
      last_failure = std::string(rcode_name(response.rcode));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kResolutionFailed) throw;
      last_failure = e.what();
    }
  }
  throw Error(ErrorCode::kResolutionFailed,
              name + ": " + last_failure + " after " +
                  std::to_string(config_.retry.retries + 1) + " attempts");
}

}  // namespace webdep
