#include "biberdist/chat_client.hpp"

#include <mutex>

#include "biberdist/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace biberdist {

std::string chat_request_json(const ChatRequest& request) {
    nlohmann::ordered_json j;
    j["model"] = request.model;
    auto messages = nlohmann::ordered_json::array();
    for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    j["messages"] = std::move(messages);
    j["temperature"] = request.temperature;
    j["top_p"] = request.top_p;
    j["max_tokens"] = request.max_tokens;
    if (request.continue_final_message) {
        j["continue_final_message"] = true;
        j["add_generation_prompt"] = false;
    }
    return j.dump();
}

std::string chat_response_text(const std::string& body) {
    try {
        const auto j = nlohmann::json::parse(body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        return content.is_null() ? std::string{} : content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed chat-completions response: ") + e.what());
    }
}

struct HttpChatClient::Impl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // path prefix without trailing slash
    std::string api_key;
    int timeout_seconds;
};

HttpChatClient::HttpChatClient(std::string base_url, std::string api_key, int timeout_seconds)
    : impl_(std::make_unique<Impl>()) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must start with http:// or https://: " + base_url);
    const auto path_start = base_url.find('/', scheme_end + 3);
    impl_->origin = base_url.substr(0, path_start);
    impl_->path = path_start == std::string::npos ? "" : base_url.substr(path_start);
    while (!impl_->path.empty() && impl_->path.back() == '/') impl_->path.pop_back();
    impl_->api_key = std::move(api_key);
    impl_->timeout_seconds = timeout_seconds;
}

HttpChatClient::~HttpChatClient() = default;

ChatResult HttpChatClient::complete(const ChatRequest& request) {
    httplib::Client client(impl_->origin);
    client.set_connection_timeout(30);
    client.set_read_timeout(impl_->timeout_seconds);
    httplib::Headers headers;
    if (!impl_->api_key.empty()) headers.emplace("Authorization", "Bearer " + impl_->api_key);
    const auto res = client.Post(impl_->path + "/chat/completions", headers, chat_request_json(request),
                                 "application/json");
    ChatResult out;
    if (!res) {
        out.status = ChatResult::Status::Transient;
        out.text = "connection failed: " + httplib::to_string(res.error());
        return out;
    }
    out.http_status = res->status;
    if (res->status == 200) {
        try {
            out.text = chat_response_text(res->body);
        } catch (const Error& e) {
            out.status = ChatResult::Status::Permanent;
            out.text = e.what();
        }
        return out;
    }
    out.status = (res->status == 429 || res->status >= 500) ? ChatResult::Status::Transient
                                                             : ChatResult::Status::Permanent;
    out.text = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500);
    return out;
}

}  // namespace biberdist
