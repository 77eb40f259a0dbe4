#include <fstream>

#include "demoscope/error.hpp"
#include "demoscope/model_client.hpp"

namespace demoscope {

using nlohmann::json;

ScriptedMock::ScriptedMock(json fixtures) : fixtures_(std::move(fixtures)) {
    if (!fixtures_.is_object()) throw Error(ErrorCode::Decode, "mock fixtures must be a JSON object");
}

ScriptedMock ScriptedMock::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open mock fixtures " + path.string());
    try {
        return ScriptedMock(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Decode, path.string() + ": " + e.what());
    }
}

ChatResponse ScriptedMock::complete(const ChatRequest& request) const {
    ++complete_calls_;
    if (!request.image) throw Error(ErrorCode::InvalidArgument, "chat request without an image");
    if (request.messages.empty()) throw Error(ErrorCode::InvalidArgument, "chat request without messages");

    const std::string key = request.tag.key();
    auto it = fixtures_.find(key);
    if (it == fixtures_.end()) throw Error(ErrorCode::MockMiss, "no fixture for " + key);
    if (it->is_string()) {
        ChatResponse response;
        response.text = it->get<std::string>();
        return response;
    }
    if (it->is_object() && it->contains("error")) {
        const std::string kind = it->at("error").get<std::string>();
        if (kind == "transport") throw Error(ErrorCode::Transport, "scripted transport failure for " + key);
        if (kind == "endpoint") {
            const int status = it->value("status", 500);
            throw Error(ErrorCode::Endpoint, "scripted HTTP " + std::to_string(status) + " for " + key, status);
        }
        if (kind == "decode") throw Error(ErrorCode::Decode, "scripted decode failure for " + key);
    }
    throw Error(ErrorCode::Decode, "fixture " + key + " is neither a string nor an error object");
}

std::vector<EmbeddingVector> ScriptedMock::embed(std::span<const std::string> texts) const {
    ++embed_calls_;
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        const std::string key = "embed/" + t;
        auto it = fixtures_.find(key);
        if (it == fixtures_.end()) throw Error(ErrorCode::MockMiss, "no fixture for " + key);
        try {
            out.push_back({it->get<std::vector<double>>()});
        } catch (const json::exception&) {
            throw Error(ErrorCode::Decode, "fixture " + key + " is not a numeric array");
        }
    }
    if (!out.empty()) check_embeddings(out);
    return out;
}

}  // namespace demoscope
