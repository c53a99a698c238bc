#pragma once

// Newline-delimited JSON protocol (v1) for external segmentation and
// inpainting servers, plus fixture record/replay.
//
//   {"v":1,"op":"segment","id":..,"image_png_b64":..,"concept":..}
//     -> {"v":1,"id":..,"instances":[{"rle":{..},"confidence":..}]}
//   {"v":1,"op":"inpaint","id":..,"image_png_b64":..,"mask_rle":{..}}
//     -> {"v":1,"id":..,"image_png_b64":..}
//   any failure -> {"v":1,"id":..,"error":".."}

#include "cgvd/image.hpp"
#include "cgvd/inpaint.hpp"
#include "cgvd/mask.hpp"
#include "cgvd/segmentation.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace cgvd {

inline constexpr int kWireVersion = 1;

namespace wire {

nlohmann::json segment_request(const std::string& id, const Image& image, const std::string& query);
nlohmann::json inpaint_request(const std::string& id, const Image& image, const BinaryMask& mask);

// Both throw ProtocolError on malformed or mismatched responses and
// BackendUnavailable when the server answered with an error line.
std::vector<Instance> parse_segment_response(std::string_view line, const std::string& id,
                                             Extent extent, const std::string& query);
Image parse_inpaint_response(std::string_view line, const std::string& id, Extent extent);

nlohmann::json segment_response(const std::string& id, const std::vector<Instance>& instances);
nlohmann::json inpaint_response(const std::string& id, const Image& image);
nlohmann::json error_response(const std::string& id, const std::string& message);

} // namespace wire

class LineTransport {
  public:
    virtual ~LineTransport() = default;
    // Sends one line, returns the next line received (without '\n').
    virtual std::string round_trip(std::string_view line) = 0;
    virtual std::string describe() const = 0;
};

// "exec:<shell command>" runs a subprocess speaking over stdio;
// "tcp:<host>:<port>" connects a stream socket.
std::unique_ptr<LineTransport> open_transport(const std::string& endpoint,
                                              std::chrono::milliseconds timeout);

struct Exchange {
    std::string request;
    std::string response;
};

/// Serializes requests on one connection and assigns deterministic ids.
class WireClient {
  public:
    WireClient(std::unique_ptr<LineTransport> transport, std::string id_prefix = "req");

    // Returns the raw response line for a request built by `make(id)`.
    Exchange call(const std::function<nlohmann::json(const std::string& id)>& make);
    std::string describe() const;

  private:
    std::unique_ptr<LineTransport> transport_;
    std::string prefix_;
    std::mutex mutex_;
    std::uint64_t next_id_ = 1;
};

class WireSegmenter final : public Segmenter {
  public:
    explicit WireSegmenter(std::shared_ptr<WireClient> client);
    std::string name() const override { return "wire"; }
    std::vector<Instance> segment(const Image& image, const std::string& query) override;

  private:
    std::shared_ptr<WireClient> client_;
};

class WireInpainter final : public Inpainter {
  public:
    explicit WireInpainter(std::shared_ptr<WireClient> client);
    std::string name() const override { return "wire"; }
    Image fill(const Image& image, const BinaryMask& mask) override;

  private:
    std::shared_ptr<WireClient> client_;
};

/// Answers protocol lines from in-process backends. Every request line gets
/// exactly one response line carrying the request id.
class WireServer {
  public:
    WireServer(Segmenter* segmenter, Inpainter* inpainter);
    std::string handle(std::string_view line);
    // Until EOF on `in`.
    void serve(std::istream& in, std::ostream& out);

  private:
    Segmenter* segmenter_;
    Inpainter* inpainter_;
};

// One JSON line per recorded segmentation exchange.
struct FixtureEntry {
    std::string query;
    std::string image_sha256;
    std::string id;
    std::string request;
    std::string response;  // empty when `error` is set
    std::string error;     // transport failure during recording

    nlohmann::json to_json() const;
    static FixtureEntry from_json(const nlohmann::json& j);
};

// Sends one segment request per concept and captures the raw lines. Backend
// and transport errors are recorded, not thrown.
std::vector<FixtureEntry> record_fixture(WireClient& client, const Image& image,
                                         const std::vector<std::string>& concepts);
void write_fixture(const std::filesystem::path& path, const std::vector<FixtureEntry>& entries);
std::vector<FixtureEntry> read_fixture(const std::filesystem::path& path);

class FixtureSegmenter final : public Segmenter {
  public:
    explicit FixtureSegmenter(std::vector<FixtureEntry> entries);
    static FixtureSegmenter load(const std::filesystem::path& path);

    std::string name() const override { return "fixture"; }
    std::vector<Instance> segment(const Image& image, const std::string& query) override;
    // The recorded response line, byte for byte.
    const std::string& raw_response(const Image& image, const std::string& query) const;

  private:
    const FixtureEntry& find(const Image& image, const std::string& query) const;
    std::vector<FixtureEntry> entries_;
};

} // namespace cgvd
