#include "recguard/chat.hpp"

#include <stdexcept>

namespace recguard {

const char* role_name(Role role) noexcept {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

std::optional<Role> role_from_name(const std::string& name) {
  if (name == "system") return Role::System;
  if (name == "user") return Role::User;
  if (name == "assistant") return Role::Assistant;
  return std::nullopt;
}

void ChatRequest::validate() const {
  if (messages.empty()) throw std::invalid_argument("chat request has no messages");
  if (temperature < 0.0 || temperature > 2.0) {
    throw std::invalid_argument("temperature outside [0,2]");
  }
  if (max_tokens < 1) throw std::invalid_argument("max_tokens < 1");
}

const std::string* ChatRequest::final_user_message() const {
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == Role::User) return &it->content;
  }
  return nullptr;
}

const char* finish_reason_name(FinishReason reason) noexcept {
  switch (reason) {
    case FinishReason::Stop: return "stop";
    case FinishReason::Length: return "length";
    case FinishReason::Filtered: return "filtered";
  }
  return "stop";
}

}  // namespace recguard
