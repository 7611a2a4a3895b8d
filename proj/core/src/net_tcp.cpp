#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cstring>
#include <thread>

#include "mpc/net.hpp"

namespace mpc::net {

namespace {

void split_endpoint(const std::string& ep, std::string& host, std::string& port) {
    auto colon = ep.rfind(':');
    if (colon == std::string::npos)
        throw NetError("bad endpoint '" + ep + "', expected host:port");
    host = ep.substr(0, colon);
    port = ep.substr(colon + 1);
}

bool write_all(int fd, const void* data, size_t len) {
    const char* p = static_cast<const char*>(data);
    while (len) {
        ssize_t n = ::send(fd, p, len, MSG_NOSIGNAL);
        if (n <= 0) {
            if (n < 0 && (errno == EINTR)) continue;
            return false;
        }
        p += n;
        len -= size_t(n);
    }
    return true;
}

bool read_all(int fd, void* data, size_t len) {
    char* p = static_cast<char*>(data);
    while (len) {
        ssize_t n = ::recv(fd, p, len, 0);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) continue;
            return false;
        }
        p += n;
        len -= size_t(n);
    }
    return true;
}

class TcpSession : public Session {
public:
    TcpSession(int party, int n) : Session(party, n), fds_(n, -1) {}

    ~TcpSession() override {
        stopping_ = true;
        for (int fd : fds_)
            if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
        for (auto& t : readers_)
            if (t.joinable()) t.join();
        for (int fd : fds_)
            if (fd >= 0) ::close(fd);
    }

    void attach(int peer, int fd) {
        fds_[peer] = fd;
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    }

    void start_readers() {
        for (int p = 0; p < n_; ++p) {
            if (p == party_) continue;
            readers_.emplace_back([this, p] { reader_loop(p); });
        }
    }

protected:
    void send_frame(int peer, const Frame& f) override {
        auto bytes = encode_frame(f);
        std::lock_guard lk(send_mu_[peer % send_mu_.size()]);
        if (!write_all(fds_[peer], bytes.data(), bytes.size()))
            throw PeerTimeout("PeerTimeout: send to peer " + std::to_string(peer) + " failed");
    }

private:
    void reader_loop(int peer) {
        int fd = fds_[peer];
        for (;;) {
            uint8_t hdr[kFrameHeaderSize];
            if (!read_all(fd, hdr, sizeof hdr)) return;
            Frame f;
            try {
                f = decode_header(hdr);
            } catch (const MalformedShareMessage&) {
                return;
            }
            f.payload.resize(f.lanes);
            if (f.lanes) {
                std::vector<uint8_t> body(size_t(f.lanes) * 4);
                if (!read_all(fd, body.data(), body.size())) return;
                for (uint32_t j = 0; j < f.lanes; ++j) {
                    uint32_t v = 0;
                    for (int i = 0; i < 4; ++i) v |= uint32_t(body[j * 4 + i]) << (8 * i);
                    f.payload[j] = v;
                }
            }
            if (stopping_) return;
            deliver(peer, std::move(f));
        }
    }

    std::vector<int> fds_;
    std::array<std::mutex, 16> send_mu_;
    std::vector<std::thread> readers_;
    std::atomic<bool> stopping_{false};
};

int dial(const std::string& host, const std::string& port, std::chrono::milliseconds timeout,
         int peer) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    auto deadline = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < deadline) {
        addrinfo* res = nullptr;
        if (getaddrinfo(host.c_str(), port.c_str(), &hints, &res) == 0) {
            for (addrinfo* ai = res; ai; ai = ai->ai_next) {
                int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
                if (fd < 0) continue;
                if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
                    freeaddrinfo(res);
                    return fd;
                }
                ::close(fd);
            }
            freeaddrinfo(res);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    throw ConnectTimeout("ConnectTimeout: peer " + std::to_string(peer) + " at " + host + ":" +
                         port);
}

} // namespace

std::shared_ptr<Session> connect_mesh(const MeshConfig& cfg) {
    const int n = int(cfg.endpoints.size());
    const int me = cfg.party;
    if (me < 0 || me >= n) throw NetError("party index out of range");
    auto sess = std::make_shared<TcpSession>(me, n);
    sess->io_timeout = cfg.io_timeout;
    if (n == 1) return sess;

    int listen_fd = -1;
    if (me < n - 1) {
        std::string host, port;
        split_endpoint(cfg.endpoints[me], host, port);
        listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listen_fd < 0) throw NetError("socket() failed");
        int one = 1;
        ::setsockopt(listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_ANY);
        addr.sin_port = htons(uint16_t(std::stoi(port)));
        if (::bind(listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
            ::close(listen_fd);
            throw NetError("bind failed on port " + port);
        }
        ::listen(listen_fd, n);
    }

    try {
        // dial lower indices, announcing our own index
        for (int p = 0; p < me; ++p) {
            std::string host, port;
            split_endpoint(cfg.endpoints[p], host, port);
            int fd = dial(host, port, cfg.connect_timeout, p);
            uint32_t idx = uint32_t(me);
            uint8_t buf[4];
            for (int i = 0; i < 4; ++i) buf[i] = uint8_t(idx >> (8 * i));
            if (!write_all(fd, buf, 4)) {
                ::close(fd);
                throw ConnectTimeout("ConnectTimeout: handshake with peer " + std::to_string(p));
            }
            sess->attach(p, fd);
        }
        // accept higher indices
        std::vector<bool> have(n, false);
        int expected = n - 1 - me;
        auto deadline = std::chrono::steady_clock::now() + cfg.connect_timeout;
        for (int got = 0; got < expected;) {
            pollfd pfd{listen_fd, POLLIN, 0};
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0 || ::poll(&pfd, 1, int(left.count())) <= 0)
                throw ConnectTimeout("ConnectTimeout: waiting for " +
                                     std::to_string(expected - got) + " peer(s)");
            int fd = ::accept(listen_fd, nullptr, nullptr);
            if (fd < 0) continue;
            uint8_t buf[4];
            if (!read_all(fd, buf, 4)) {
                ::close(fd);
                continue;
            }
            uint32_t idx = 0;
            for (int i = 0; i < 4; ++i) idx |= uint32_t(buf[i]) << (8 * i);
            if (idx >= uint32_t(n) || int(idx) <= me) {
                ::close(fd);
                throw IndexCollision("IndexCollision: peer announced invalid index " +
                                     std::to_string(idx));
            }
            if (have[idx]) {
                ::close(fd);
                throw IndexCollision("IndexCollision: two peers claim index " +
                                     std::to_string(idx));
            }
            have[idx] = true;
            sess->attach(int(idx), fd);
            ++got;
        }
    } catch (...) {
        if (listen_fd >= 0) ::close(listen_fd);
        throw;
    }
    if (listen_fd >= 0) ::close(listen_fd);
    sess->start_readers();
    return sess;
}

} // namespace mpc::net
