#include "demoscope/model_client.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include "demoscope/digest.hpp"
#include "demoscope/error.hpp"
#include "demoscope/text.hpp"

namespace demoscope {

using nlohmann::json;

std::string media_type_for(const std::filesystem::path& path) {
    const std::string ext = text::to_lower(path.extension().string());
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".png") return "image/png";
    if (ext == ".webp") return "image/webp";
    if (ext == ".bmp") return "image/bmp";
    return "application/octet-stream";
}

ImagePayload load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingImage, path.string());
    ImagePayload image;
    image.bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    image.media_type = media_type_for(path);
    return image;
}

std::string RequestTag::key() const { return sample_id + "/" + to_string(step) + "/" + std::to_string(attempt); }

json chat_request_body(const ChatRequest& request) {
    if (!request.image) throw Error(ErrorCode::InvalidArgument, "chat request without an image");
    if (request.messages.empty()) throw Error(ErrorCode::InvalidArgument, "chat request without messages");

    json messages = json::array();
    bool image_attached = false;
    for (const auto& m : request.messages) {
        if (m.role == "user" && !image_attached) {
            const std::string url =
                "data:" + request.image->media_type + ";base64," + base64_encode(request.image->bytes);
            messages.push_back({{"role", m.role},
                                {"content", json::array({{{"type", "text"}, {"text", m.text}},
                                                         {{"type", "image_url"}, {"image_url", {{"url", url}}}}})}});
            image_attached = true;
        } else {
            messages.push_back({{"role", m.role}, {"content", m.text}});
        }
    }
    if (!image_attached) throw Error(ErrorCode::InvalidArgument, "chat request has no user message for the image");
    return {{"model", request.model_name},
            {"messages", std::move(messages)},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens}};
}

ChatResponse decode_chat_response(std::string_view body) {
    ChatResponse response;
    try {
        const json doc = json::parse(body);
        const auto& message = doc.at("choices").at(0).at("message");
        const auto& content = message.at("content");
        if (content.is_string()) {
            response.text = content.get<std::string>();
        } else if (content.is_array()) {
            for (const auto& part : content) {
                if (part.contains("text")) response.text += part.at("text").get<std::string>();
            }
        } else if (!content.is_null()) {
            throw Error(ErrorCode::Decode, "unexpected content type in chat response");
        }
        if (doc.contains("usage") && doc.at("usage").is_object()) {
            const auto& u = doc.at("usage");
            response.usage.prompt_tokens = u.value("prompt_tokens", 0LL);
            response.usage.completion_tokens = u.value("completion_tokens", 0LL);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Decode, std::string("malformed chat response: ") + e.what());
    }
    response.text = std::string(text::trim_right(response.text));
    return response;
}

json embedding_request_body(std::span<const std::string> texts, const std::string& model) {
    return {{"model", model}, {"input", json(std::vector<std::string>(texts.begin(), texts.end()))}};
}

void check_embeddings(const std::vector<EmbeddingVector>& vectors) {
    if (vectors.empty()) return;
    for (const auto& v : vectors) {
        if (v.size() != vectors.front().size()) {
            throw Error(ErrorCode::DimensionMismatch, "embedding dimensions " + std::to_string(vectors.front().size()) +
                                                          " and " + std::to_string(v.size()));
        }
        for (double x : v.values) {
            if (!std::isfinite(x)) throw Error(ErrorCode::Decode, "non-finite embedding entry");
        }
    }
}

std::vector<EmbeddingVector> decode_embedding_response(std::string_view body, std::size_t expected_count) {
    std::vector<EmbeddingVector> out(expected_count);
    std::vector<bool> filled(expected_count, false);
    try {
        const json doc = json::parse(body);
        const auto& data = doc.at("data");
        if (data.size() != expected_count) {
            throw Error(ErrorCode::Decode, "expected " + std::to_string(expected_count) + " embeddings, got " +
                                               std::to_string(data.size()));
        }
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto& item = data.at(i);
            const std::size_t slot = item.value("index", i);
            if (slot >= expected_count || filled[slot]) throw Error(ErrorCode::Decode, "bad embedding index");
            filled[slot] = true;
            out[slot].values = item.at("embedding").get<std::vector<double>>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Decode, std::string("malformed embedding response: ") + e.what());
    }
    check_embeddings(out);
    return out;
}

EndpointUrl split_endpoint_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorCode::ConfigInvalid, "endpoint url needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    EndpointUrl out;
    out.scheme_host_port = url.substr(0, path_start);
    if (path_start != std::string::npos) {
        out.path_prefix = std::string(text::trim_right(url.substr(path_start)));
        while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
    }
    return out;
}

}  // namespace demoscope
