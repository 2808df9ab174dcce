#pragma once

#include <optional>
#include <string>
#include <vector>

namespace recguard {

enum class Role { System, User, Assistant };

const char* role_name(Role role) noexcept;
std::optional<Role> role_from_name(const std::string& name);

struct ChatMessage {
  Role role = Role::User;
  std::string content;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 1.0;
  int max_tokens = 1024;
  std::optional<long> seed;

  /// Throws std::invalid_argument when the request invariants do not hold
  /// (empty message list, temperature outside [0,2], max_tokens < 1).
  void validate() const;

  /// Content of the last user-role message, empty when there is none.
  const std::string* final_user_message() const;
};

enum class FinishReason { Stop, Length, Filtered };

const char* finish_reason_name(FinishReason reason) noexcept;

struct ChatCompletion {
  std::string text;
  std::string model_id;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  FinishReason finish_reason = FinishReason::Stop;
};

/// Backend-neutral chat completion interface. Implementations declare
/// whether a single instance may be used from several threads at once.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual ChatCompletion complete(const ChatRequest& request) = 0;
  virtual std::string id() const = 0;
  virtual bool concurrent_safe() const { return true; }
};

}  // namespace recguard
