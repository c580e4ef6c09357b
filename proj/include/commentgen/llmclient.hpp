#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "commentgen/corpus.hpp"
#include "commentgen/error.hpp"
#include "commentgen/promptgen.hpp"

namespace commentgen {

class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, int status, std::string body)
      : Error(what), status_(status), body_(std::move(body)) {}
  int status() const { return status_; }
  const std::string& body() const { return body_; }

 private:
  int status_;
  std::string body_;
};

/// The prompt does not fit the model's context window.
class ContextOverflow : public Error {
 public:
  using Error::Error;
};

/// The model reply holds neither an annotated code block nor a bare comment.
class ExtractionError : public Error {
 public:
  ExtractionError(const std::string& what, std::string raw) : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

struct ModelSpec {
  std::string name;          // registry key
  std::string display_name;  // table label
  std::size_t context_window = 0;
  std::string endpoint;      // base URL; "/v1/chat/completions" is appended when no path is given
  std::string auth_env;      // variable holding the key; empty for keyless endpoints
  std::string model_id;      // wire model name
  std::string request_shape = "chat-completions-v1";
  std::string provider = "http";  // "http" or "mock"
};

/// `models.json`: {"models": [{name, display_name, context_window, endpoint,
/// auth_env, model_id, request_shape, provider}, ...]}
class ModelRegistry {
 public:
  static ModelRegistry load(const std::filesystem::path& path);
  static ModelRegistry from_json(const nlohmann::json& j);
  /// Only the mock model; for tests and dry runs.
  static ModelRegistry builtin_mock();

  const ModelSpec& get(std::string_view name) const;
  bool contains(std::string_view name) const;
  const std::vector<ModelSpec>& models() const { return models_; }

 private:
  std::vector<ModelSpec> models_;
};

struct GenerationParams {
  double temperature = 0.0;
  std::size_t max_output_tokens = 1024;
};

enum class RequestKind { Annotate, Judge, Classify };

struct ChatRequest {
  RequestKind kind = RequestKind::Annotate;
  std::string system;
  std::string user;
  const PromptBundle* bundle = nullptr;  // set for Annotate
};

struct ProviderResponse {
  int status = 200;  // HTTP-like; 0 means a transport failure
  std::string text;  // assistant message for status 200
  std::string body;  // raw body otherwise
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual ProviderResponse send(const ModelSpec& model, const ChatRequest& request,
                                const GenerationParams& params) = 0;
};

/// OpenAI-compatible chat completions over HTTP(S).
class HttpProvider final : public Provider {
 public:
  explicit HttpProvider(std::chrono::seconds timeout = std::chrono::seconds(120)) : timeout_(timeout) {}
  ProviderResponse send(const ModelSpec& model, const ChatRequest& request, const GenerationParams& params) override;

 private:
  std::chrono::seconds timeout_;
};

/// Deterministic stand-in. Annotate requests get the target code back with a
/// leading doc comment built from the unit name, parameters and available
/// context; the code is untouched. Judge requests get a score derived from
/// a digest of the prompt. Classify requests get "none".
class MockProvider final : public Provider {
 public:
  using Refuse = std::function<bool(const ChatRequest&)>;
  using Responder = std::function<std::optional<std::string>(const ChatRequest&)>;

  MockProvider() = default;
  explicit MockProvider(Refuse refuse, Responder responder = {})
      : refuse_(std::move(refuse)), responder_(std::move(responder)) {}
  ProviderResponse send(const ModelSpec& model, const ChatRequest& request, const GenerationParams& params) override;

  static std::string annotate(const PromptBundle& bundle);

 private:
  Refuse refuse_;
  Responder responder_;
};

/// Replays scripted responses in order, repeating the last one.
class StaticProvider final : public Provider {
 public:
  explicit StaticProvider(std::vector<ProviderResponse> responses) : responses_(std::move(responses)) {}
  ProviderResponse send(const ModelSpec& model, const ChatRequest& request, const GenerationParams& params) override;
  std::size_t calls() const { return calls_; }

 private:
  std::vector<ProviderResponse> responses_;
  std::size_t calls_ = 0;
  std::mutex mu_;
};

struct Extracted {
  std::string comment;
  std::optional<std::string> annotated_file;
  bool empty = false;
};

/// Accepts a fenced code block that contains the unit (comment taken from
/// above its signature, block kept as the annotated file) or a bare comment.
/// Throws ExtractionError otherwise.
Extracted extract_comment(std::string_view raw, const CodeUnit& unit);

struct GeneratedComment {
  std::string unit_id;
  std::string model;
  Setup setup = Setup::Code;
  std::size_t pass_index = 0;
  std::string text;
  bool empty = false;  // the model returned the unit without a comment
  std::optional<std::string> annotated_file;
  std::string original_code;  // code block the model was given
  double latency_ms = 0.0;
  bool cached = false;
};

nlohmann::json to_json(const GeneratedComment& g);
GeneratedComment generated_from_json(const nlohmann::json& j);
std::vector<GeneratedComment> load_generated(const std::filesystem::path& path);
void save_generated(const std::vector<GeneratedComment>& records, const std::filesystem::path& path);

struct ClientOptions {
  std::optional<std::filesystem::path> cache_dir;
  std::size_t max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::size_t max_in_flight = 4;
};

struct ChatResult {
  std::string text;
  bool cached = false;
  double latency_ms = 0.0;
};

class LlmClient {
 public:
  /// `providers` maps ModelSpec::provider ("http", "mock") to an implementation.
  LlmClient(std::map<std::string, std::shared_ptr<Provider>> providers, ClientOptions options = {});

  /// Mock provider registered under "mock" and HttpProvider under "http".
  static LlmClient with_defaults(ClientOptions options = {});

  ChatResult chat(const ModelSpec& model, const ChatRequest& request, const GenerationParams& params);
  GeneratedComment complete(const PromptBundle& bundle, const ModelSpec& model, const GenerationParams& params);

  /// Cache key for a request; exposed for tests.
  static std::string cache_key(const ModelSpec& model, const ChatRequest& request, const GenerationParams& params);

 private:
  std::shared_ptr<std::mutex> key_lock(const std::string& key);

  std::map<std::string, std::shared_ptr<Provider>> providers_;
  ClientOptions options_;
  std::unique_ptr<std::counting_semaphore<256>> in_flight_;
  std::mutex locks_mu_;
  std::map<std::string, std::shared_ptr<std::mutex>> key_locks_;
};

}  // namespace commentgen
