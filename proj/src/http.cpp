#include "enrichkit/http.hpp"

#include <thread>

#include <httplib.h>

#include "enrichkit/errors.hpp"

namespace enrichkit {

namespace {

// Splits "https://host[:port]/path?query" into origin and path+query.
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw network_error("malformed url '" + url + "': missing scheme");
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

live_http_client::live_http_client(std::chrono::milliseconds timeout) : timeout_(timeout) {}

http_response live_http_client::get(const std::string& url, const std::map<std::string, std::string>& headers) {
    const auto [origin, path] = split_url(url);
    httplib::Client client(origin);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout_));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout_));
    client.set_follow_location(true);
    httplib::Headers request_headers;
    for (const auto& [name, value] : headers) request_headers.emplace(name, value);
    auto result = client.Get(path, request_headers);
    if (!result) {
        throw network_error("request to '" + url + "' failed: " + httplib::to_string(result.error()));
    }
    return {result->status, result->body};
}

http_response no_network_http_client::get(const std::string& url, const std::map<std::string, std::string>&) {
    attempts_.fetch_add(1);
    throw network_error("network access is disabled, refused to request '" + url + "'");
}

http_response recording_http_client::get(const std::string& url,
                                         const std::map<std::string, std::string>& headers) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        urls_.push_back(url);
    }
    return inner_.get(url, headers);
}

std::vector<std::string> recording_http_client::urls() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return urls_;
}

request_throttle::request_throttle(std::chrono::milliseconds min_interval, int max_in_flight)
    : min_interval_(min_interval), max_in_flight_(max_in_flight < 1 ? 1 : max_in_flight) {}

void request_throttle::acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    for (;;) {
        cv_.wait(lock, [&] { return in_flight_ < max_in_flight_; });
        const auto now = std::chrono::steady_clock::now();
        if (!started_ || now - last_start_ >= min_interval_) {
            last_start_ = now;
            started_ = true;
            ++in_flight_;
            return;
        }
        const auto wake_at = last_start_ + min_interval_;
        cv_.wait_until(lock, wake_at);
    }
}

void request_throttle::release() {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        --in_flight_;
    }
    cv_.notify_all();
}

request_throttle::ticket::ticket(request_throttle& throttle) : throttle_(throttle) {
    throttle_.acquire();
}

request_throttle::ticket::~ticket() {
    throttle_.release();
}

} // namespace enrichkit
