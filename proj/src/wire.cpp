#include "cgvd/wire.hpp"

#include "cgvd/codec.hpp"
#include "cgvd/error.hpp"
#include "cgvd/io.hpp"
#include "cgvd/rle.hpp"

#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>

namespace cgvd {

namespace wire {

namespace {

nlohmann::json parse_line(std::string_view line) {
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ProtocolError, std::string("response is not JSON: ") + e.what());
    }
}

void check_envelope(const nlohmann::json& j, const std::string& id) {
    if (!j.is_object()) {
        throw Error(ErrorCode::ProtocolError, "response is not an object");
    }
    if (j.value("v", 0) != kWireVersion) {
        throw Error(ErrorCode::ProtocolError, "unsupported protocol version");
    }
    if (!j.contains("id") || !j.at("id").is_string() || j.at("id").get<std::string>() != id) {
        throw Error(ErrorCode::ProtocolError, "response id does not match request '" + id + "'");
    }
    if (j.contains("error")) {
        throw Error(ErrorCode::BackendUnavailable,
                    "backend error: " + j.at("error").dump());
    }
}

Image image_from_b64(const nlohmann::json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_string()) {
        throw Error(ErrorCode::ProtocolError, std::string("missing ") + field);
    }
    return decode_png(base64_decode(j.at(field).get<std::string>()));
}

} // namespace

nlohmann::json segment_request(const std::string& id, const Image& image, const std::string& query) {
    return {{"v", kWireVersion},
            {"op", "segment"},
            {"id", id},
            {"image_png_b64", base64_encode(encode_png(image))},
            {"concept", query}};
}

nlohmann::json inpaint_request(const std::string& id, const Image& image, const BinaryMask& mask) {
    return {{"v", kWireVersion},
            {"op", "inpaint"},
            {"id", id},
            {"image_png_b64", base64_encode(encode_png(image))},
            {"mask_rle", mask_to_json(mask)}};
}

std::vector<Instance> parse_segment_response(std::string_view line, const std::string& id,
                                             Extent extent, const std::string& query) {
    const auto j = parse_line(line);
    check_envelope(j, id);
    if (!j.contains("instances") || !j.at("instances").is_array()) {
        throw Error(ErrorCode::ProtocolError, "missing instances array");
    }
    std::vector<Instance> out;
    for (const auto& item : j.at("instances")) {
        if (!item.is_object() || !item.contains("rle") || !item.contains("confidence") ||
            !item.at("confidence").is_number()) {
            throw Error(ErrorCode::ProtocolError, "malformed instance");
        }
        BinaryMask mask = mask_from_json(item.at("rle"));
        if (mask.extent() != extent) {
            throw Error(ErrorCode::ProtocolError, "instance mask " + to_string(mask.extent()) +
                                                      " does not match image " + to_string(extent));
        }
        const double conf = item.at("confidence").get<double>();
        if (!(conf >= 0.0 && conf <= 1.0)) {
            throw Error(ErrorCode::ProtocolError, "confidence outside [0,1]");
        }
        out.push_back({std::move(mask), conf, query});
    }
    return out;
}

Image parse_inpaint_response(std::string_view line, const std::string& id, Extent extent) {
    const auto j = parse_line(line);
    check_envelope(j, id);
    Image image = image_from_b64(j, "image_png_b64");
    if (image.extent() != extent) {
        throw Error(ErrorCode::ProtocolError, "inpainted image " + to_string(image.extent()) +
                                                  " does not match request " + to_string(extent));
    }
    return image;
}

nlohmann::json segment_response(const std::string& id, const std::vector<Instance>& instances) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& inst : instances) {
        list.push_back({{"rle", mask_to_json(inst.mask)}, {"confidence", inst.confidence}});
    }
    return {{"v", kWireVersion}, {"id", id}, {"instances", list}};
}

nlohmann::json inpaint_response(const std::string& id, const Image& image) {
    return {{"v", kWireVersion}, {"id", id}, {"image_png_b64", base64_encode(encode_png(image))}};
}

nlohmann::json error_response(const std::string& id, const std::string& message) {
    return {{"v", kWireVersion}, {"id", id}, {"error", message}};
}

} // namespace wire

// ---------------------------------------------------------------------------
// Transports
// ---------------------------------------------------------------------------

namespace {

void ignore_sigpipe() {
    static std::once_flag once;
    std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

class FdLineIo {
  public:
    FdLineIo(int read_fd, int write_fd, std::chrono::milliseconds timeout)
        : read_fd_(read_fd), write_fd_(write_fd), timeout_(timeout) {}

    void write_line(std::string_view line, const std::string& who) {
        std::string buf(line);
        buf += '\n';
        std::size_t off = 0;
        while (off < buf.size()) {
            const ssize_t n = ::write(write_fd_, buf.data() + off, buf.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw Error(ErrorCode::BackendUnavailable,
                            who + ": write failed: " + std::strerror(errno));
            }
            off += std::size_t(n);
        }
    }

    std::string read_line(const std::string& who) {
        const auto deadline = std::chrono::steady_clock::now() + timeout_;
        for (;;) {
            const auto nl = pending_.find('\n');
            if (nl != std::string::npos) {
                std::string line = pending_.substr(0, nl);
                pending_.erase(0, nl + 1);
                return line;
            }
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) {
                throw Error(ErrorCode::Timeout, who + ": no response within " +
                                                    std::to_string(timeout_.count()) + " ms");
            }
            pollfd pfd{read_fd_, POLLIN, 0};
            const int r = ::poll(&pfd, 1, int(left.count()));
            if (r < 0) {
                if (errno == EINTR) continue;
                throw Error(ErrorCode::BackendUnavailable, who + ": poll failed");
            }
            if (r == 0) {
                continue;
            }
            char chunk[65536];
            const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw Error(ErrorCode::BackendUnavailable, who + ": read failed");
            }
            if (n == 0) {
                throw Error(ErrorCode::BackendUnavailable, who + ": connection closed");
            }
            pending_.append(chunk, std::size_t(n));
        }
    }

  private:
    int read_fd_;
    int write_fd_;
    std::chrono::milliseconds timeout_;
    std::string pending_;
};

class SubprocessTransport final : public LineTransport {
  public:
    SubprocessTransport(std::string command, std::chrono::milliseconds timeout)
        : command_(std::move(command)) {
        ignore_sigpipe();
        int to_child[2], from_child[2];
        if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
            throw Error(ErrorCode::BackendUnavailable, "pipe: " + std::string(std::strerror(errno)));
        }
        pid_ = ::fork();
        if (pid_ < 0) {
            throw Error(ErrorCode::BackendUnavailable, "fork: " + std::string(std::strerror(errno)));
        }
        if (pid_ == 0) {
            // own process group, so teardown reaches whatever the shell spawned
            ::setpgid(0, 0);
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            ::close(to_child[0]);
            ::close(to_child[1]);
            ::close(from_child[0]);
            ::close(from_child[1]);
            ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        ::setpgid(pid_, pid_);
        ::close(to_child[0]);
        ::close(from_child[1]);
        write_fd_ = to_child[1];
        read_fd_ = from_child[0];
        io_ = std::make_unique<FdLineIo>(read_fd_, write_fd_, timeout);
    }

    ~SubprocessTransport() override {
        ::close(write_fd_);
        ::close(read_fd_);
        int status = 0;
        for (int i = 0; i < 50; ++i) {
            if (::waitpid(pid_, &status, WNOHANG) != 0) {
                return;
            }
            ::usleep(10000);
        }
        ::kill(-pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
    }

    std::string round_trip(std::string_view line) override {
        io_->write_line(line, describe());
        return io_->read_line(describe());
    }

    std::string describe() const override { return "exec:" + command_; }

  private:
    std::string command_;
    pid_t pid_ = -1;
    int read_fd_ = -1;
    int write_fd_ = -1;
    std::unique_ptr<FdLineIo> io_;
};

class TcpTransport final : public LineTransport {
  public:
    TcpTransport(const std::string& host, const std::string& port, std::chrono::milliseconds timeout)
        : where_("tcp:" + host + ":" + port) {
        ignore_sigpipe();
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0) {
            throw Error(ErrorCode::BackendUnavailable, where_ + ": cannot resolve");
        }
        for (addrinfo* ai = res; ai; ai = ai->ai_next) {
            fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
            if (fd_ < 0) continue;
            if (::connect(fd_, ai->ai_addr, ai->ai_addrlen) == 0) break;
            ::close(fd_);
            fd_ = -1;
        }
        ::freeaddrinfo(res);
        if (fd_ < 0) {
            throw Error(ErrorCode::BackendUnavailable, where_ + ": connection refused");
        }
        io_ = std::make_unique<FdLineIo>(fd_, fd_, timeout);
    }

    ~TcpTransport() override {
        if (fd_ >= 0) ::close(fd_);
    }

    std::string round_trip(std::string_view line) override {
        io_->write_line(line, where_);
        return io_->read_line(where_);
    }

    std::string describe() const override { return where_; }

  private:
    std::string where_;
    int fd_ = -1;
    std::unique_ptr<FdLineIo> io_;
};

} // namespace

std::unique_ptr<LineTransport> open_transport(const std::string& endpoint,
                                              std::chrono::milliseconds timeout) {
    if (endpoint.rfind("exec:", 0) == 0) {
        return std::make_unique<SubprocessTransport>(endpoint.substr(5), timeout);
    }
    if (endpoint.rfind("tcp:", 0) == 0) {
        const auto rest = endpoint.substr(4);
        const auto colon = rest.rfind(':');
        if (colon == std::string::npos) {
            throw Error(ErrorCode::InvalidConfig, "tcp endpoint needs host:port");
        }
        return std::make_unique<TcpTransport>(rest.substr(0, colon), rest.substr(colon + 1), timeout);
    }
    throw Error(ErrorCode::InvalidConfig, "unknown endpoint scheme: " + endpoint);
}

WireClient::WireClient(std::unique_ptr<LineTransport> transport, std::string id_prefix)
    : transport_(std::move(transport)), prefix_(std::move(id_prefix)) {}

Exchange WireClient::call(const std::function<nlohmann::json(const std::string& id)>& make) {
    std::lock_guard lock(mutex_);
    std::ostringstream id;
    id << prefix_ << '-' << std::setw(6) << std::setfill('0') << next_id_++;
    Exchange ex;
    ex.request = make(id.str()).dump();
    ex.response = transport_->round_trip(ex.request);
    return ex;
}

std::string WireClient::describe() const { return transport_->describe(); }

namespace {

std::string request_id(const std::string& request_line) {
    return nlohmann::json::parse(request_line).at("id").get<std::string>();
}

} // namespace

WireSegmenter::WireSegmenter(std::shared_ptr<WireClient> client) : client_(std::move(client)) {}

std::vector<Instance> WireSegmenter::segment(const Image& image, const std::string& query) {
    const auto ex = client_->call([&](const std::string& id) { return wire::segment_request(id, image, query); });
    return wire::parse_segment_response(ex.response, request_id(ex.request), image.extent(), query);
}

WireInpainter::WireInpainter(std::shared_ptr<WireClient> client) : client_(std::move(client)) {}

Image WireInpainter::fill(const Image& image, const BinaryMask& mask) {
    const auto ex = client_->call([&](const std::string& id) { return wire::inpaint_request(id, image, mask); });
    return wire::parse_inpaint_response(ex.response, request_id(ex.request), image.extent());
}

// ---------------------------------------------------------------------------
// Server
// ---------------------------------------------------------------------------

WireServer::WireServer(Segmenter* segmenter, Inpainter* inpainter)
    : segmenter_(segmenter), inpainter_(inpainter) {}

std::string WireServer::handle(std::string_view line) {
    nlohmann::json req;
    try {
        req = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
        return wire::error_response("", "malformed request").dump();
    }
    std::string id;
    if (req.is_object() && req.contains("id") && req.at("id").is_string()) {
        id = req.at("id").get<std::string>();
    }
    try {
        if (!req.is_object() || req.value("v", 0) != kWireVersion) {
            return wire::error_response(id, "unsupported protocol version").dump();
        }
        const std::string op = req.value("op", "");
        if (op == "segment" && segmenter_) {
            const Image image = decode_png(base64_decode(req.at("image_png_b64").get<std::string>()));
            const std::string query = req.at("concept").get<std::string>();
            auto instances = validate_instances(segmenter_->segment(image, query), image.extent(),
                                                segmenter_->name());
            return wire::segment_response(id, instances).dump();
        }
        if (op == "inpaint" && inpainter_) {
            const Image image = decode_png(base64_decode(req.at("image_png_b64").get<std::string>()));
            const BinaryMask mask = mask_from_json(req.at("mask_rle"));
            return wire::inpaint_response(id, inpaint(*inpainter_, image, mask)).dump();
        }
        return wire::error_response(id, "unsupported op").dump();
    } catch (const std::exception& e) {
        return wire::error_response(id, e.what()).dump();
    }
}

void WireServer::serve(std::istream& in, std::ostream& out) {
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) {
            continue;
        }
        out << handle(line) << '\n' << std::flush;
    }
}

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

nlohmann::json FixtureEntry::to_json() const {
    nlohmann::json j{{"concept", query}, {"image_sha256", image_sha256}, {"id", id},
                     {"request", request}};
    if (error.empty()) {
        j["response"] = response;
    } else {
        j["error"] = error;
    }
    return j;
}

FixtureEntry FixtureEntry::from_json(const nlohmann::json& j) {
    FixtureEntry e;
    e.query = j.at("concept").get<std::string>();
    e.image_sha256 = j.at("image_sha256").get<std::string>();
    e.id = j.at("id").get<std::string>();
    e.request = j.at("request").get<std::string>();
    e.response = j.value("response", "");
    e.error = j.value("error", "");
    return e;
}

std::vector<FixtureEntry> record_fixture(WireClient& client, const Image& image,
                                         const std::vector<std::string>& concepts) {
    std::vector<FixtureEntry> out;
    const std::string digest = image_digest(image);
    for (const auto& query : concepts) {
        FixtureEntry e;
        e.query = query;
        e.image_sha256 = digest;
        try {
            const auto ex = client.call([&](const std::string& id) {
                e.id = id;
                return wire::segment_request(id, image, query);
            });
            e.request = ex.request;
            e.response = ex.response;
        } catch (const Error& err) {
            e.error = err.what();
            if (e.request.empty()) {
                e.request = wire::segment_request(e.id, image, query).dump();
            }
        }
        out.push_back(std::move(e));
    }
    return out;
}

void write_fixture(const std::filesystem::path& path, const std::vector<FixtureEntry>& entries) {
    std::string text;
    for (const auto& e : entries) {
        text += e.to_json().dump();
        text += '\n';
    }
    write_text_atomic(path, text);
}

std::vector<FixtureEntry> read_fixture(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open fixture " + path.string());
    }
    std::vector<FixtureEntry> out;
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        try {
            out.push_back(FixtureEntry::from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ProtocolError, path.string() + ": " + e.what());
        }
    }
    return out;
}

FixtureSegmenter::FixtureSegmenter(std::vector<FixtureEntry> entries) : entries_(std::move(entries)) {}

FixtureSegmenter FixtureSegmenter::load(const std::filesystem::path& path) {
    return FixtureSegmenter(read_fixture(path));
}

const FixtureEntry& FixtureSegmenter::find(const Image& image, const std::string& query) const {
    const std::string digest = image_digest(image);
    for (const auto& e : entries_) {
        if (e.query == query && e.image_sha256 == digest) {
            return e;
        }
    }
    throw Error(ErrorCode::BackendUnavailable, "fixture has no recording for '" + query + "'");
}

const std::string& FixtureSegmenter::raw_response(const Image& image, const std::string& query) const {
    const auto& e = find(image, query);
    if (!e.error.empty()) {
        throw Error(ErrorCode::BackendUnavailable, "recorded failure: " + e.error);
    }
    return e.response;
}

std::vector<Instance> FixtureSegmenter::segment(const Image& image, const std::string& query) {
    const auto& e = find(image, query);
    if (!e.error.empty()) {
        throw Error(ErrorCode::BackendUnavailable, "recorded failure: " + e.error);
    }
    return wire::parse_segment_response(e.response, e.id, image.extent(), query);
}

} // namespace cgvd
