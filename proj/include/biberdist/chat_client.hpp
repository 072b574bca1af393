#pragma once

#include <memory>
#include <string>
#include <vector>

namespace biberdist {

struct Message {
    std::string role;  // system, user or assistant
    std::string content;

    friend bool operator==(const Message&, const Message&) = default;
};

struct ChatRequest {
    std::string model;
    std::vector<Message> messages;
    double temperature = 1.0;
    double top_p = 1.0;
    std::size_t max_tokens = 1024;
    /// Ask the server to continue a trailing assistant message instead of
    /// opening a new turn.
    bool continue_final_message = false;
};

struct ChatResult {
    enum class Status { Ok, Transient, Permanent };
    Status status = Status::Ok;
    int http_status = 0;  // 0 when no response arrived
    std::string text;     // completion text when Ok, error detail otherwise
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual ChatResult complete(const ChatRequest& request) = 0;
};

/// Request body in the chat-completions wire format.
std::string chat_request_json(const ChatRequest& request);

/// Parses choices[0].message.content from a chat-completions response body.
std::string chat_response_text(const std::string& body);

/// Client for chat-completions servers. `base_url` is e.g. "http://host:8000/v1";
/// requests go to <base_url>/chat/completions with a bearer token when the key
/// is non-empty. 429, 5xx and connection failures are transient.
class HttpChatClient : public ChatClient {
public:
    HttpChatClient(std::string base_url, std::string api_key, int timeout_seconds = 600);
    ~HttpChatClient() override;

    ChatResult complete(const ChatRequest& request) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace biberdist
