#include "qkdrand/fetch.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "qkdrand/errors.hpp"

namespace qkdrand {

namespace {

struct ParsedUrl {
    std::string host_port; // scheme://host[:port]
    std::string path;      // /path?query
};

ParsedUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw NetworkError("endpoint URL needs a scheme: " + url);
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http")
        throw NetworkError("only http:// endpoints are supported, got " + scheme);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

BitSeq fetch_remote_bits(const std::string& endpoint, std::size_t nbits,
                         const FetchOptions& options) {
    if (nbits == 0) return {};

    const std::size_t nbytes = (nbits + 7) / 8;
    const auto url = split_url(endpoint);
    std::string path = url.path;
    path += (path.find('?') == std::string::npos) ? '?' : '&';
    path += "length=" + std::to_string(nbytes) + "&type=uint8";

    httplib::Client client(url.host_port);
    client.set_connection_timeout(0, static_cast<time_t>(options.timeout_ms) * 1000);
    client.set_read_timeout(0, static_cast<time_t>(options.timeout_ms) * 1000);

    std::string last_error;
    std::size_t backoff = options.backoff_ms;
    for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
        auto res = client.Get(path);
        if (!res) {
            if (httplib::to_string(res.error()).find("timeout") != std::string::npos ||
                res.error() == httplib::Error::ConnectionTimeout ||
                res.error() == httplib::Error::Read)
                last_error = "timeout: " + httplib::to_string(res.error());
            else
                last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP status " + std::to_string(res->status);
            continue;
        }

        nlohmann::json body = nlohmann::json::parse(res->body, nullptr, false);
        if (body.is_discarded() || !body.contains("data") ||
            !body["data"].is_array())
            throw MalformedResponse("response body is not JSON with a data array");
        const auto& data = body["data"];
        if (data.size() < nbytes)
            throw MalformedResponse("data array holds " +
                                    std::to_string(data.size()) +
                                    " bytes, need " + std::to_string(nbytes));
        std::vector<std::uint8_t> bytes(nbytes);
        for (std::size_t i = 0; i < nbytes; ++i) {
            if (!data[i].is_number_integer())
                throw MalformedResponse("data entry is not an integer");
            const auto v = data[i].get<long long>();
            if (v < 0 || v > 255)
                throw MalformedResponse("data entry out of byte range");
            bytes[i] = static_cast<std::uint8_t>(v);
        }
        return BitSeq::from_bytes_msb(bytes, nbits);
    }
    if (last_error.rfind("timeout", 0) == 0)
        throw Timeout("fetch failed after " + std::to_string(options.max_attempts) +
                      " attempts: " + last_error);
    throw NetworkError("fetch failed after " + std::to_string(options.max_attempts) +
                       " attempts: " + last_error);
}

} // namespace qkdrand
