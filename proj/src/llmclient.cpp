#include "commentgen/llmclient.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <thread>

#include "httplib.h"

#include "commentgen/digest.hpp"
#include "commentgen/lexer.hpp"
#include "commentgen/text.hpp"
#include "http_util.hpp"

namespace commentgen {
namespace fs = std::filesystem;
using nlohmann::json;

ModelRegistry ModelRegistry::load(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

ModelRegistry ModelRegistry::from_json(const json& j) {
  ModelRegistry reg;
  try {
    for (const auto& m : j.at("models")) {
      ModelSpec spec;
      spec.name = m.at("name").get<std::string>();
      spec.display_name = m.value("display_name", spec.name);
      spec.context_window = m.at("context_window").get<std::size_t>();
      spec.endpoint = m.value("endpoint", std::string{});
      spec.auth_env = m.value("auth_env", std::string{});
      spec.model_id = m.value("model_id", spec.name);
      spec.request_shape = m.value("request_shape", std::string("chat-completions-v1"));
      spec.provider = m.value("provider", std::string("http"));
      if (spec.context_window == 0) throw ConfigError("model " + spec.name + ": context_window must be positive");
      if (spec.request_shape != "chat-completions-v1")
        throw ConfigError("model " + spec.name + ": unsupported request_shape " + spec.request_shape);
      if (spec.provider == "http" && spec.endpoint.empty())
        throw ConfigError("model " + spec.name + ": endpoint is required");
      if (m.contains("api_key") || m.contains("key"))
        throw ConfigError("model " + spec.name + ": keys belong in the environment; name the variable in auth_env");
      if (reg.contains(spec.name)) throw ConfigError("duplicate model " + spec.name);
      reg.models_.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model registry: ") + e.what());
  }
  return reg;
}

ModelRegistry ModelRegistry::builtin_mock() {
  ModelRegistry reg;
  ModelSpec spec;
  spec.name = "mock";
  spec.display_name = "Mock";
  spec.context_window = 128000;
  spec.model_id = "mock";
  spec.provider = "mock";
  reg.models_.push_back(spec);
  return reg;
}

const ModelSpec& ModelRegistry::get(std::string_view name) const {
  for (const auto& m : models_)
    if (m.name == name) return m;
  std::string known;
  for (const auto& m : models_) known += (known.empty() ? "" : ", ") + m.name;
  throw ConfigError("unknown model '" + std::string(name) + "' (registry has: " + known + ")");
}

bool ModelRegistry::contains(std::string_view name) const {
  return std::any_of(models_.begin(), models_.end(), [&](const ModelSpec& m) { return m.name == name; });
}

ProviderResponse HttpProvider::send(const ModelSpec& model, const ChatRequest& request,
                                    const GenerationParams& params) {
  auto url = detail::split_url(model.endpoint);
  if (url.path == "/") url.path = "/v1/chat/completions";
  httplib::Client client(url.origin);
  client.set_read_timeout(timeout_);
  client.set_connection_timeout(std::chrono::seconds(30));
  httplib::Headers headers;
  if (!model.auth_env.empty()) {
    const char* key = std::getenv(model.auth_env.c_str());
    if (key) headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  json messages = json::array();
  if (!request.system.empty()) messages.push_back({{"role", "system"}, {"content", request.system}});
  messages.push_back({{"role", "user"}, {"content", request.user}});
  json body = {{"model", model.model_id},
               {"messages", messages},
               {"temperature", params.temperature},
               {"max_tokens", params.max_output_tokens}};
  auto res = client.Post(url.path, headers, body.dump(), "application/json");
  if (!res) return {0, "", httplib::to_string(res.error())};
  if (res->status != 200) return {res->status, "", res->body};
  try {
    json reply = json::parse(res->body);
    return {200, reply.at("choices").at(0).at("message").at("content").get<std::string>(), ""};
  } catch (const json::exception& e) {
    return {502, "", std::string("unreadable completion: ") + e.what()};
  }
}

namespace {

std::vector<std::string> parameter_names(std::string_view signature) {
  std::vector<std::string> names;
  std::size_t open = signature.find('(');
  std::size_t close = signature.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close <= open) return names;
  std::string_view params = signature.substr(open + 1, close - open - 1);
  int depth = 0;
  std::size_t start = 0;
  auto take = [&](std::string_view p) {
    auto eq = p.find('=');
    if (eq != std::string_view::npos) p = p.substr(0, eq);
    p = trim(p);
    std::size_t end = p.size();
    while (end > 0 && (p[end - 1] == ']' || p[end - 1] == '[' || std::isdigit(static_cast<unsigned char>(p[end - 1]))))
      --end;
    std::size_t b = end;
    while (b > 0 && is_ident_char(p[b - 1])) --b;
    std::string name(p.substr(b, end - b));
    if (!name.empty() && name != "void" && b > 0 && !std::isdigit(static_cast<unsigned char>(name[0])))
      names.push_back(name);
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    char c = params[i];
    if (c == '(' || c == '<' || c == '[') ++depth;
    else if (c == ')' || c == '>' || c == ']') --depth;
    else if (c == ',' && depth == 0) {
      take(params.substr(start, i - start));
      start = i + 1;
    }
  }
  take(params.substr(start));
  return names;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

struct Fence {
  std::string lang;
  std::string body;
};

std::vector<Fence> fenced_blocks(std::string_view raw) {
  std::vector<Fence> blocks;
  std::optional<Fence> open;
  for (std::string_view line : split_lines(raw)) {
    std::string_view t = trim(line);
    if (t.substr(0, 3) == "```") {
      if (open) {
        blocks.push_back(std::move(*open));
        open.reset();
      } else {
        open = Fence{std::string(trim(t.substr(3))), ""};
      }
      continue;
    }
    if (open) {
      open->body += line;
      open->body += '\n';
    }
  }
  return blocks;
}

std::string short_name(std::string_view name) {
  auto p = name.rfind("::");
  return std::string(p == std::string_view::npos ? name : name.substr(p + 2));
}

// Comment text when `text` holds only comments and whitespace.
std::optional<std::string> bare_comment(std::string_view text) {
  std::vector<Segment> segs;
  try {
    segs = lex_segments(text);
  } catch (const ParseError&) {
    return std::nullopt;
  }
  std::string out;
  bool any = false;
  for (const auto& s : segs) {
    std::string_view piece = text.substr(s.begin, s.end - s.begin);
    if (s.kind == SegmentKind::Code) {
      if (!trim(piece).empty()) return std::nullopt;
      continue;
    }
    if (s.kind != SegmentKind::LineComment && s.kind != SegmentKind::BlockComment) return std::nullopt;
    std::string t = comment_text(piece);
    if (!t.empty()) {
      if (!out.empty()) out += '\n';
      out += t;
    }
    any = true;
  }
  if (!any) return std::nullopt;
  return out;
}

}  // namespace

std::string MockProvider::annotate(const PromptBundle& bundle) {
  const CodeUnit& unit = bundle.target;
  auto params = parameter_names(unit.signature);
  std::string lines = short_name(unit.name) + ": ";
  lines += params.empty() ? "takes no arguments" : "takes " + join(params, ", ");
  std::string ret = unit.signature.substr(0, unit.signature.find(short_name(unit.name)));
  ret = std::string(trim(ret));
  for (std::string_view drop : {"static ", "inline ", "extern ", "virtual ", "constexpr "})
    for (auto p = ret.find(drop); p != std::string::npos; p = ret.find(drop)) ret.erase(p, drop.size());
  ret = std::string(trim(ret));
  if (!ret.empty() && ret != "void") lines += " and returns " + ret;
  lines += ".";
  for (const auto& b : bundle.context_blocks) {
    if (b.kind == BlockKind::Ast && bundle.available.ast && !bundle.available.ast->callees.empty()) {
      lines += "\n * Calls " + join(bundle.available.ast->callees, ", ") + ".";
      break;
    }
  }
  for (const auto& b : bundle.context_blocks) {
    if (b.kind == BlockKind::DocChunk) {
      lines += "\n * See " + b.source + ".";
      break;
    }
  }
  const std::string& code = bundle.code_block().text;
  std::string fence = unit.language == Language::CPP ? "cpp" : "c";
  return "```" + fence + "\n/**\n * " + lines + "\n */\n" + code + (code.empty() || code.back() != '\n' ? "\n" : "") +
         "```\n";
}

ProviderResponse MockProvider::send(const ModelSpec&, const ChatRequest& request, const GenerationParams&) {
  if (responder_)
    if (auto r = responder_(request)) return {200, *r, ""};
  if (refuse_ && refuse_(request)) return {200, "I'm sorry, but I can't help with that request.", ""};
  switch (request.kind) {
    case RequestKind::Annotate:
      if (!request.bundle) return {400, "", "mock annotate request without a bundle"};
      return {200, annotate(*request.bundle), ""};
    case RequestKind::Judge: {
      std::string digest = sha256_hex(request.user);
      unsigned long v = std::stoul(digest.substr(0, 8), nullptr, 16);
      return {200, "Score: " + std::to_string(40 + v % 56), ""};
    }
    case RequestKind::Classify: return {200, "none", ""};
  }
  return {400, "", "unknown request kind"};
}

ProviderResponse StaticProvider::send(const ModelSpec&, const ChatRequest&, const GenerationParams&) {
  std::lock_guard lock(mu_);
  if (responses_.empty()) return {500, "", "no scripted response"};
  std::size_t i = std::min(calls_, responses_.size() - 1);
  ++calls_;
  return responses_[i];
}

Extracted extract_comment(std::string_view raw, const CodeUnit& unit) {
  if (trim(raw).empty()) throw ExtractionError("empty model output", std::string(raw));
  const std::string want = short_name(unit.name);
  auto blocks = fenced_blocks(raw);
  for (const auto& block : blocks) {
    SourceFile file{unit.repo_id, unit.path, unit.language, block.body, block.body.size()};
    std::vector<CodeUnit> found;
    try {
      found = extract_pairs(file);
    } catch (const ParseError&) {
      continue;
    }
    for (const auto& u : found) {
      if (u.name != unit.name && short_name(u.name) != want) continue;
      Extracted e;
      e.annotated_file = block.body;
      if (u.leading_comment && !trim(u.leading_comment->text).empty()) e.comment = u.leading_comment->text;
      else e.empty = true;
      return e;
    }
  }
  for (const auto& block : blocks)
    if (auto c = bare_comment(block.body)) return {*c, std::nullopt, trim(*c).empty()};
  if (blocks.empty())
    if (auto c = bare_comment(raw)) return {*c, std::nullopt, trim(*c).empty()};
  throw ExtractionError("model output holds neither code containing " + unit.name + " nor a bare comment",
                        std::string(raw));
}

json to_json(const GeneratedComment& g) {
  json j = {{"unit_id", g.unit_id},
            {"model", g.model},
            {"setup", to_string(g.setup)},
            {"pass_index", g.pass_index},
            {"text", g.text},
            {"empty", g.empty},
            {"annotated_file", g.annotated_file ? json(*g.annotated_file) : json(nullptr)},
            {"original_code", g.original_code},
            {"latency_ms", g.latency_ms},
            {"cached", g.cached}};
  return j;
}

GeneratedComment generated_from_json(const json& j) {
  GeneratedComment g;
  try {
    g.unit_id = j.at("unit_id").get<std::string>();
    g.model = j.at("model").get<std::string>();
    g.setup = setup_from_string(j.value("setup", std::string("code")));
    g.pass_index = j.value("pass_index", std::size_t{0});
    g.text = j.at("text").get<std::string>();
    g.empty = j.value("empty", false);
    if (j.contains("annotated_file") && !j.at("annotated_file").is_null())
      g.annotated_file = j.at("annotated_file").get<std::string>();
    g.original_code = j.value("original_code", std::string{});
    g.latency_ms = j.value("latency_ms", 0.0);
    g.cached = j.value("cached", false);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed generated comment: ") + e.what(), 0);
  }
  if (g.text.empty() && !g.empty) throw ParseError("generated comment " + g.unit_id + " has no text and no empty flag", 0);
  return g;
}

std::vector<GeneratedComment> load_generated(const fs::path& path) {
  std::vector<GeneratedComment> out;
  std::string data = read_file(path);
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(data)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(generated_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(), 0);
    }
  }
  return out;
}

void save_generated(const std::vector<GeneratedComment>& records, const fs::path& path) {
  std::string buf;
  for (const auto& g : records) buf += to_json(g).dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
  write_file(path, buf);
}

LlmClient::LlmClient(std::map<std::string, std::shared_ptr<Provider>> providers, ClientOptions options)
    : providers_(std::move(providers)), options_(std::move(options)) {
  std::ptrdiff_t limit = static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(options_.max_in_flight, 1, 256));
  in_flight_ = std::make_unique<std::counting_semaphore<256>>(limit);
}

LlmClient LlmClient::with_defaults(ClientOptions options) {
  return LlmClient({{"mock", std::make_shared<MockProvider>()}, {"http", std::make_shared<HttpProvider>()}},
                   std::move(options));
}

std::string LlmClient::cache_key(const ModelSpec& model, const ChatRequest& request, const GenerationParams& params) {
  json j = {{"model", model.name},       {"model_id", model.model_id},
            {"endpoint", model.endpoint}, {"kind", static_cast<int>(request.kind)},
            {"system", request.system},   {"user", request.user},
            {"temperature", params.temperature}, {"max_output_tokens", params.max_output_tokens}};
  return sha256_hex(j.dump());
}

std::shared_ptr<std::mutex> LlmClient::key_lock(const std::string& key) {
  std::lock_guard lock(locks_mu_);
  auto& slot = key_locks_[key];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

ChatResult LlmClient::chat(const ModelSpec& model, const ChatRequest& request, const GenerationParams& params) {
  auto provider = providers_.find(model.provider);
  if (provider == providers_.end()) throw ConfigError("no provider registered for '" + model.provider + "'");
  if (!model.auth_env.empty()) {
    const char* key = std::getenv(model.auth_env.c_str());
    if (!key || !*key) throw ConfigError("model " + model.name + " needs the environment variable " + model.auth_env);
  }
  std::size_t needed = estimate_tokens(request.system.size() + request.user.size()) + params.max_output_tokens;
  if (needed > model.context_window)
    throw ContextOverflow("prompt needs about " + std::to_string(needed) + " tokens with output; " + model.name +
                          " has a window of " + std::to_string(model.context_window));

  const std::string key = cache_key(model, request, params);
  auto lock = key_lock(key);
  std::lock_guard guard(*lock);
  std::optional<fs::path> cache_file;
  if (options_.cache_dir) {
    cache_file = *options_.cache_dir / (key + ".json");
    std::error_code ec;
    if (fs::exists(*cache_file, ec)) {
      try {
        json j = json::parse(read_file(*cache_file));
        return {j.at("text").get<std::string>(), true, 0.0};
      } catch (const json::exception&) {
        // unreadable entries are refetched and overwritten
      }
    }
  }

  auto started = std::chrono::steady_clock::now();
  ProviderResponse res;
  {
    in_flight_->acquire();
    struct Release {
      std::counting_semaphore<256>& s;
      ~Release() { s.release(); }
    } release{*in_flight_};
    auto backoff = options_.initial_backoff;
    for (std::size_t attempt = 0;; ++attempt) {
      res = provider->second->send(model, request, params);
      bool transient = res.status == 0 || res.status == 429 || res.status >= 500;
      if (!transient || attempt >= options_.max_retries) break;
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  if (res.status != 200) {
    if (res.body.find("context_length_exceeded") != std::string::npos ||
        res.body.find("maximum context length") != std::string::npos)
      throw ContextOverflow(model.name + " rejected the prompt as too long: " + res.body);
    if (res.status == 0)
      throw ProviderError(model.name + ": transport failure after " + std::to_string(options_.max_retries) +
                              " retries: " + res.body,
                          0, res.body);
    throw ProviderError(model.name + " answered HTTP " + std::to_string(res.status), res.status, res.body);
  }
  double latency = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  if (cache_file) {
    json entry = {{"model", model.name}, {"text", res.text}};
    write_file(*cache_file, entry.dump());
  }
  return {res.text, false, latency};
}

GeneratedComment LlmClient::complete(const PromptBundle& bundle, const ModelSpec& model,
                                     const GenerationParams& params) {
  std::string prompt = render_prompt(bundle);
  ChatRequest req;
  req.kind = RequestKind::Annotate;
  req.system = bundle.persona;
  req.user = prompt.substr(std::min(prompt.size(), bundle.persona.size() + 2));
  req.bundle = &bundle;
  ChatResult reply = chat(model, req, params);
  Extracted e = extract_comment(reply.text, bundle.target);
  GeneratedComment g;
  g.unit_id = bundle.target.id;
  g.model = model.name;
  g.setup = bundle.setup;
  g.pass_index = bundle.pass_index;
  g.text = e.comment;
  g.empty = e.empty;
  g.annotated_file = e.annotated_file;
  g.original_code = bundle.code_block().text;
  g.latency_ms = reply.latency_ms;
  g.cached = reply.cached;
  return g;
}

}  // namespace commentgen
