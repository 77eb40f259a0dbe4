#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <semaphore>
#include <span>
#include <string>
#include <vector>

#include "demoscope/config.hpp"
#include "demoscope/core.hpp"
#include "json.hpp"

namespace demoscope {

struct ImagePayload {
    std::vector<std::uint8_t> bytes;
    std::string media_type;
};

ImagePayload load_image(const std::filesystem::path& path);
std::string media_type_for(const std::filesystem::path& path);

struct ChatMessage {
    std::string role;
    std::string text;
};

/// Identifies a request within a run. Never sent over the wire; the scripted
/// mock keys its fixtures on it.
struct RequestTag {
    std::string sample_id;
    StepId step;
    int attempt = 1;

    /// "sample_id/step/attempt"
    std::string key() const;
};

struct ChatRequest {
    /// Exactly one image per request; shared so retries do not copy it.
    std::shared_ptr<const ImagePayload> image;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 512;
    std::string model_name;
    RequestTag tag;
};

struct Usage {
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
};

struct ChatResponse {
    std::string text;
    Usage usage;
    long long latency_ms = 0;
};

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    /// Thread-safe. Throws Error with Transport, Endpoint, Decode or MockMiss.
    virtual ChatResponse complete(const ChatRequest& request) const = 0;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    /// One vector per input, order preserved, equal dimensions. Empty input gives empty output.
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const = 0;
};

// Wire format (chat-completions style JSON), exposed for tests.
nlohmann::json chat_request_body(const ChatRequest& request);
ChatResponse decode_chat_response(std::string_view body);
nlohmann::json embedding_request_body(std::span<const std::string> texts, const std::string& model);
std::vector<EmbeddingVector> decode_embedding_response(std::string_view body, std::size_t expected_count);
/// Throws DimensionMismatch on ragged vectors and Decode on non-finite entries.
void check_embeddings(const std::vector<EmbeddingVector>& vectors);

struct EndpointUrl {
    std::string scheme_host_port;  // "http://host:port"
    std::string path_prefix;       // "" or "/prefix"
};

EndpointUrl split_endpoint_url(const std::string& url);

/// Client for a chat-completions endpoint and an embeddings endpoint.
class HttpModelClient final : public ChatClient, public Embedder {
public:
    /// Reads the API key from the environment variable named in settings, if any.
    HttpModelClient(EndpointSettings settings, int concurrency_limit);

    ChatResponse complete(const ChatRequest& request) const override;
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;

private:
    std::string post_json(const EndpointUrl& url, const std::string& path, const std::string& body) const;

    EndpointSettings settings_;
    std::string api_key_;
    EndpointUrl chat_url_;
    EndpointUrl embed_url_;
    mutable std::counting_semaphore<> in_flight_;
};

/// Deterministic fixture-driven stand-in for both endpoints.
///
/// Fixture file: a JSON object mapping
///   "sample_id/step/attempt" -> reply text, or {"error": "transport" | "decode"}
///                               or {"error": "endpoint", "status": 500}
///   "embed/<text>"           -> array of numbers
class ScriptedMock final : public ChatClient, public Embedder {
public:
    explicit ScriptedMock(nlohmann::json fixtures);
    static ScriptedMock load(const std::filesystem::path& path);

    ChatResponse complete(const ChatRequest& request) const override;
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;

    std::size_t complete_calls() const { return complete_calls_.load(); }
    std::size_t embed_calls() const { return embed_calls_.load(); }

private:
    nlohmann::json fixtures_;
    mutable std::atomic<std::size_t> complete_calls_{0};
    mutable std::atomic<std::size_t> embed_calls_{0};
};

}  // namespace demoscope
