#pragma once
// JSON/JSONL persistence for dialogues, tasks, and provider exchanges.
// Serialization is deterministic (stable key order, shortest float form)
// so equal values always produce equal bytes.

#include <json.hpp>

#include <string>
#include <vector>

#include "pf/core.hpp"
#include "pf/provider.hpp"

namespace pf {

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& message, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_ = 0;
};

// nlohmann ADL hooks.
void to_json(nlohmann::json& j, const PersuasionTask& t);
void from_json(const nlohmann::json& j, PersuasionTask& t);
void to_json(nlohmann::json& j, const MonitorIssue& m);
void from_json(const nlohmann::json& j, MonitorIssue& m);
void to_json(nlohmann::json& j, const SpeakerId& s);
void from_json(const nlohmann::json& j, SpeakerId& s);
void to_json(nlohmann::json& j, const Utterance& u);
void from_json(const nlohmann::json& j, Utterance& u);
void to_json(nlohmann::json& j, const Round& r);
void from_json(const nlohmann::json& j, Round& r);
void to_json(nlohmann::json& j, const AgentModel& m);
void from_json(const nlohmann::json& j, AgentModel& m);
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);
void to_json(nlohmann::json& j, const Dialogue& d);
void from_json(const nlohmann::json& j, Dialogue& d);
void to_json(nlohmann::json& j, const ChatMessage& m);
void from_json(const nlohmann::json& j, ChatMessage& m);
void to_json(nlohmann::json& j, const ChatRequest& r);
void from_json(const nlohmann::json& j, ChatRequest& r);
void to_json(nlohmann::json& j, const ChatResponse& r);
void from_json(const nlohmann::json& j, ChatResponse& r);
void to_json(nlohmann::json& j, const ChatExchange& e);
void from_json(const nlohmann::json& j, ChatExchange& e);

// One dialogue per line; parse(serialize(d)) == d.
std::string serialize_dialogue(const Dialogue& d);
Dialogue parse_dialogue(const std::string& line);  // throws ParseError

// JSONL dialogue files (UTF-8, LF).
std::vector<Dialogue> load_dialogue_file(const std::string& path);
void save_dialogue_file(const std::string& path, const std::vector<Dialogue>& dialogues);

// JSONL task files; task_ids must be unique.
std::vector<PersuasionTask> load_task_file(const std::string& path);
void save_task_file(const std::string& path, const std::vector<PersuasionTask>& tasks);

}  // namespace pf
