#include "ecosim/backend.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "ecosim/rng.hpp"

namespace ecosim {

using nlohmann::json;

std::string prompt_hash(const std::string& prompt) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(prompt)));
  return buf;
}

// ---------------------------------------------------------------------------
// ScriptedBackend
// ---------------------------------------------------------------------------

ScriptedBackend::ScriptedBackend(std::map<std::string, std::string> responses)
    : responses_(std::move(responses)) {}

ScriptedBackend ScriptedBackend::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open fixture file: " + path);
  json j = json::parse(in);
  if (!j.is_object()) throw std::runtime_error("fixture must be a JSON object: " + path);
  std::map<std::string, std::string> map;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_string()) {
      throw std::runtime_error("fixture values must be strings: " + path);
    }
    map[it.key()] = it.value().get<std::string>();
  }
  return ScriptedBackend(std::move(map));
}

BackendReply ScriptedBackend::respond(const std::string& prompt) {
  const std::string key = prompt_hash(prompt);
  auto it = responses_.find(key);
  if (it == responses_.end()) it = responses_.find("*");
  if (it == responses_.end()) {
    return {false, "", "fixture miss for prompt hash " + key};
  }
  return {true, it->second, ""};
}

// ---------------------------------------------------------------------------
// HttpBackend
// ---------------------------------------------------------------------------

HttpBackend::HttpBackend(LlmConfig cfg) : cfg_(std::move(cfg)) {
  if (const char* base = std::getenv("ECOSIM_BASE_URL")) cfg_.base_url = base;
  std::string url = cfg_.base_url;
  const std::string http = "http://";
  if (url.rfind(http, 0) == 0) url = url.substr(http.size());
  const auto slash = url.find('/');
  if (slash != std::string::npos) url = url.substr(0, slash);
  const auto colon = url.find(':');
  if (colon != std::string::npos) {
    host_ = url.substr(0, colon);
    port_ = std::atoi(url.c_str() + colon + 1);
  } else {
    host_ = url;
    port_ = 80;
  }
  if (const char* key = std::getenv("ECOSIM_API_KEY")) api_key_ = key;
}

BackendReply HttpBackend::respond(const std::string& prompt) {
  json body;
  body["model"] = cfg_.model;
  body["temperature"] = cfg_.temperature;
  body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(200 * attempt));
    }
    httplib::Client client(host_, port_);
    client.set_connection_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
    client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = client.Post("/v1/chat/completions", headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "http status " + std::to_string(res->status);
      continue;
    }
    try {
      json reply = json::parse(res->body);
      return {true, reply.at("choices").at(0).at("message").at("content").get<std::string>(), ""};
    } catch (const std::exception& e) {
      last_error = std::string("malformed response: ") + e.what();
    }
  }
  return {false, "", last_error};
}

// ---------------------------------------------------------------------------
// RecordingBackend
// ---------------------------------------------------------------------------

BackendReply RecordingBackend::respond(const std::string& prompt) {
  BackendReply reply = inner_.respond(prompt);
  std::lock_guard<std::mutex> lock(mutex_);
  if (reply.ok) {
    recorded_[prompt_hash(prompt)] = reply.text;
  } else {
    ++failures_;
  }
  return reply;
}

std::map<std::string, std::string> RecordingBackend::fixture() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return recorded_;
}

std::size_t RecordingBackend::failures() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return failures_;
}

void RecordingBackend::write_fixture(const std::string& path) const {
  json j = json::object();
  for (const auto& [k, v] : fixture()) j[k] = v;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write fixture file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace ecosim
