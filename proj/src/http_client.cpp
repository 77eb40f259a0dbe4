#include <chrono>
#include <cstdlib>
#include <thread>

#include "demoscope/error.hpp"
#include "demoscope/model_client.hpp"
#include "httplib.h"

namespace demoscope {

namespace {

class SemaphoreGuard {
public:
    explicit SemaphoreGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
    ~SemaphoreGuard() { s_.release(); }
    SemaphoreGuard(const SemaphoreGuard&) = delete;
    SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

private:
    std::counting_semaphore<>& s_;
};

}  // namespace

HttpModelClient::HttpModelClient(EndpointSettings settings, int concurrency_limit)
    : settings_(std::move(settings)),
      chat_url_(split_endpoint_url(settings_.base_url)),
      embed_url_(split_endpoint_url(settings_.embeddings_base_url.empty() ? settings_.base_url
                                                                          : settings_.embeddings_base_url)),
      in_flight_(std::max(1, concurrency_limit)) {
    if (!settings_.api_key_env.empty()) {
        const char* key = std::getenv(settings_.api_key_env.c_str());
        if (!key) throw Error(ErrorCode::ConfigInvalid, "environment variable " + settings_.api_key_env + " is not set");
        api_key_ = key;
    }
}

std::string HttpModelClient::post_json(const EndpointUrl& url, const std::string& path, const std::string& body) const {
    SemaphoreGuard guard(in_flight_);
    const auto timeout = std::chrono::duration<double>(settings_.timeout_seconds);
    const std::string full_path = url.path_prefix + path;

    std::string last_error;
    for (int attempt = 0; attempt <= settings_.transport_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(settings_.backoff_initial_ms) * (1 << (attempt - 1)));
        }
        httplib::Client cli(url.scheme_host_port);
        cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        cli.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

        auto res = cli.Post(full_path, headers, body, "application/json");
        if (!res) {
            last_error = url.scheme_host_port + full_path + ": " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            throw Error(ErrorCode::Endpoint,
                        "HTTP " + std::to_string(res->status) + " from " + full_path + ": " + res->body.substr(0, 200),
                        res->status);
        }
        return res->body;
    }
    throw Error(ErrorCode::Transport, last_error + " (after " + std::to_string(settings_.transport_retries + 1) +
                                          " tries)");
}

ChatResponse HttpModelClient::complete(const ChatRequest& request) const {
    const std::string body = chat_request_body(request).dump();
    const auto start = std::chrono::steady_clock::now();
    ChatResponse response = decode_chat_response(post_json(chat_url_, settings_.chat_path, body));
    response.latency_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    return response;
}

std::vector<EmbeddingVector> HttpModelClient::embed(std::span<const std::string> texts) const {
    if (texts.empty()) return {};
    const std::string body = embedding_request_body(texts, settings_.embedding_model).dump();
    return decode_embedding_response(post_json(embed_url_, settings_.embeddings_path, body), texts.size());
}

}  // namespace demoscope
