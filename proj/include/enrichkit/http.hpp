#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace enrichkit {

struct http_response {
    int status = 0;
    std::string body;
};

/// Minimal transport seam. Connectors only ever talk HTTP through this
/// interface, which is what makes offline runs provably network-free:
/// inject a no_network_http_client and any socket attempt surfaces as a
/// hard failure.
class http_client {
public:
    virtual ~http_client() = default;
    virtual http_response get(const std::string& url,
                              const std::map<std::string, std::string>& headers = {}) = 0;
};

/// Real client over cpp-httplib. Throws network_error on transport
/// failure; non-2xx statuses are returned to the caller for handling.
class live_http_client final : public http_client {
public:
    explicit live_http_client(std::chrono::milliseconds timeout = std::chrono::milliseconds{10000});
    http_response get(const std::string& url, const std::map<std::string, std::string>& headers) override;

private:
    std::chrono::milliseconds timeout_;
};

/// Instrumented client that fails loudly on any request and counts the
/// attempts. Offline-guarantee tests inject this to prove nothing ever
/// reaches the network.
class no_network_http_client final : public http_client {
public:
    http_response get(const std::string& url, const std::map<std::string, std::string>& headers) override;
    int attempts() const { return attempts_.load(); }

private:
    std::atomic<int> attempts_{0};
};

/// Decorator that records request URLs while delegating to another client.
class recording_http_client final : public http_client {
public:
    explicit recording_http_client(http_client& inner) : inner_(inner) {}
    http_response get(const std::string& url, const std::map<std::string, std::string>& headers) override;
    std::vector<std::string> urls() const;

private:
    http_client& inner_;
    mutable std::mutex mutex_;
    std::vector<std::string> urls_;
};

/// Polite-client gate: enforces a minimum interval between request starts
/// and bounds the number of in-flight requests. One throttle per source.
class request_throttle {
public:
    request_throttle(std::chrono::milliseconds min_interval, int max_in_flight);

    class ticket {
    public:
        explicit ticket(request_throttle& throttle);
        ~ticket();
        ticket(const ticket&) = delete;
        ticket& operator=(const ticket&) = delete;

    private:
        request_throttle& throttle_;
    };

private:
    void acquire();
    void release();

    std::chrono::milliseconds min_interval_;
    int max_in_flight_;
    int in_flight_ = 0;
    std::chrono::steady_clock::time_point last_start_;
    bool started_ = false;
    std::mutex mutex_;
    std::condition_variable cv_;
};

} // namespace enrichkit
