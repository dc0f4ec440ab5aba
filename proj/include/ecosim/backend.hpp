#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <string>

#include "ecosim/config.hpp"

namespace ecosim {

struct BackendReply {
  bool ok = false;
  std::string text;
  std::string error;  // transport / timeout / fixture-miss description
};

// Frozen-model provider contract. respond() is total: it returns text or a
// typed error, never throws for transport conditions.
class LlmBackend {
public:
  virtual ~LlmBackend() = default;
  virtual BackendReply respond(const std::string& prompt) = 0;
  virtual std::string name() const = 0;
  // Whether per-tick calls for distinct agents may run on worker threads.
  virtual bool concurrent_safe() const { return false; }
  // Remote transports benefit from per-tick fan-out; local ones do not.
  virtual bool is_remote() const { return false; }
};

// 16-hex-digit FNV-1a digest used to key canned responses.
std::string prompt_hash(const std::string& prompt);

// Replays canned responses from a JSON map {prompt-hash: response}. The "*"
// key, when present, answers any prompt whose hash has no entry.
class ScriptedBackend : public LlmBackend {
public:
  explicit ScriptedBackend(std::map<std::string, std::string> responses);
  ScriptedBackend(std::initializer_list<std::pair<const std::string, std::string>> responses)
      : responses_(responses) {}
  static ScriptedBackend from_file(const std::string& path);  // throws on bad file

  BackendReply respond(const std::string& prompt) override;
  std::string name() const override { return "scripted"; }
  bool concurrent_safe() const override { return true; }

private:
  std::map<std::string, std::string> responses_;
};

// Single-turn chat-completions-compatible HTTP client. The API key is read
// from the ECOSIM_API_KEY environment variable.
class HttpBackend : public LlmBackend {
public:
  explicit HttpBackend(LlmConfig cfg);

  BackendReply respond(const std::string& prompt) override;
  std::string name() const override { return "http:" + cfg_.model; }
  bool concurrent_safe() const override { return true; }
  bool is_remote() const override { return true; }

private:
  LlmConfig cfg_;
  std::string host_;
  int port_ = 80;
  std::string api_key_;
};

// Wraps another backend and records (prompt-hash -> response) pairs so a live
// run can be replayed in scripted mode. Failed calls are not recorded, so a
// partial fixture is still written after transport errors.
class RecordingBackend : public LlmBackend {
public:
  explicit RecordingBackend(LlmBackend& inner) : inner_(inner) {}

  BackendReply respond(const std::string& prompt) override;
  std::string name() const override { return "recording(" + inner_.name() + ")"; }
  bool concurrent_safe() const override { return inner_.concurrent_safe(); }
  bool is_remote() const override { return inner_.is_remote(); }

  std::map<std::string, std::string> fixture() const;
  void write_fixture(const std::string& path) const;
  std::size_t failures() const;

private:
  LlmBackend& inner_;
  mutable std::mutex mutex_;
  std::map<std::string, std::string> recorded_;
  std::size_t failures_ = 0;
};

// Test/utility backend backed by a callable.
class CallbackBackend : public LlmBackend {
public:
  using Fn = std::function<BackendReply(const std::string&)>;
  explicit CallbackBackend(Fn fn, std::string name = "callback")
      : fn_(std::move(fn)), name_(std::move(name)) {}

  BackendReply respond(const std::string& prompt) override { return fn_(prompt); }
  std::string name() const override { return name_; }
  bool concurrent_safe() const override { return false; }

private:
  Fn fn_;
  std::string name_;
};

}  // namespace ecosim
