#include <httplib.h>

#include "askeval/gateway.hpp"

namespace askeval {
namespace {

struct UrlParts {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

UrlParts split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

TransportResponse HttpTransport::post(const std::string& url, const std::string& body,
                                      const std::map<std::string, std::string>& headers) {
    const UrlParts parts = split_url(url);
#ifndef ASKEVAL_WITH_OPENSSL
    if (parts.origin.rfind("https://", 0) == 0) {
        throw ConfigError("https endpoints need a build with OpenSSL support");
    }
#endif
    httplib::Client client(parts.origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);

    httplib::Headers h;
    std::string content_type = "application/json";
    for (const auto& [k, v] : headers) {
        if (k == "Content-Type") {
            content_type = v;
        } else {
            h.emplace(k, v);
        }
    }
    auto result = client.Post(parts.path, h, body, content_type);
    if (!result) {
        throw TransportError("transport failure: " + httplib::to_string(result.error()));
    }
    TransportResponse out;
    out.status = result->status;
    out.body = result->body;
    for (const auto& [k, v] : result->headers) out.headers[k] = v;
    return out;
}

}  // namespace askeval
