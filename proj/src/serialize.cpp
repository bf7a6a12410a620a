#include "pf/serialize.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace pf {

using nlohmann::json;

namespace {

std::string role_name(Role r) { return r == Role::Persuader ? "persuader" : "persuadee"; }

Role role_from_name(const std::string& n) {
    if (n == "persuader") return Role::Persuader;
    if (n == "persuadee") return Role::Persuadee;
    throw ParseError("unknown speaker role: " + n);
}

template <typename T, typename Parse>
T parse_enum(const json& j, const char* what, Parse parse) {
    const auto name = j.get<std::string>();
    auto v = parse(name);
    if (!v) throw ParseError(std::string("unknown ") + what + ": " + name);
    return *v;
}

}  // namespace

void to_json(json& j, const PersuasionTask& t) {
    j = json{{"task_id", t.task_id},
             {"behavior", t.behavior},
             {"norm_class", norm_class_name(t.norm_class)},
             {"persuader_goal", t.persuader_goal},
             {"persuadee_goal", t.persuadee_goal}};
}

void from_json(const json& j, PersuasionTask& t) {
    j.at("task_id").get_to(t.task_id);
    j.at("behavior").get_to(t.behavior);
    t.norm_class = parse_enum<NormClass>(j.at("norm_class"), "norm_class", parse_norm_class);
    j.at("persuader_goal").get_to(t.persuader_goal);
    j.at("persuadee_goal").get_to(t.persuadee_goal);
}

void to_json(json& j, const MonitorIssue& m) {
    j = json{{"kind", monitor_issue_kind_name(m.kind)}, {"diagnosis", m.diagnosis}};
}

void from_json(const json& j, MonitorIssue& m) {
    m.kind = parse_enum<MonitorIssueKind>(j.at("kind"), "monitor issue kind",
                                          parse_monitor_issue_kind);
    j.at("diagnosis").get_to(m.diagnosis);
}

void to_json(json& j, const SpeakerId& s) {
    j = json{{"role", role_name(s.role)}, {"index", s.index}};
}

void from_json(const json& j, SpeakerId& s) {
    s.role = role_from_name(j.at("role").get<std::string>());
    j.at("index").get_to(s.index);
}

void to_json(json& j, const Utterance& u) {
    j = json{{"speaker", u.speaker},
             {"raw_text", u.raw_text},
             {"refined_text", u.refined_text},
             {"final_text", u.final_text},
             {"revision_count", u.revision_count},
             {"monitor_flags", u.monitor_flags}};
}

void from_json(const json& j, Utterance& u) {
    j.at("speaker").get_to(u.speaker);
    j.at("raw_text").get_to(u.raw_text);
    j.at("refined_text").get_to(u.refined_text);
    j.at("final_text").get_to(u.final_text);
    j.at("revision_count").get_to(u.revision_count);
    j.at("monitor_flags").get_to(u.monitor_flags);
}

void to_json(json& j, const Round& r) {
    json scores = json::object();
    for (const auto& [speaker, score] : r.scores) scores[speaker_label(speaker)] = score;
    j = json{{"utterances", r.utterances}, {"scores", scores}};
}

void from_json(const json& j, Round& r) {
    j.at("utterances").get_to(r.utterances);
    r.scores.clear();
    for (const auto& [label, score] : j.at("scores").items()) {
        auto speaker = parse_speaker_label(label);
        if (!speaker) throw ParseError("unknown speaker label in scores: " + label);
        r.scores[*speaker] = score.get<double>();
    }
}

void to_json(json& j, const AgentModel& m) {
    j = json{{"model_id", m.model_id}, {"temperature", m.temperature}};
}

void from_json(const json& j, AgentModel& m) {
    j.at("model_id").get_to(m.model_id);
    j.at("temperature").get_to(m.temperature);
}

void to_json(json& j, const RunConfig& c) {
    json directives = json::object();
    for (const auto& [speaker, d] : c.strategy_directive) {
        directives[speaker_label(speaker)] = strategy_directive_name(d);
    }
    j = json{{"models",
              json{{"generator", c.generator},
                   {"monitor", c.monitor},
                   {"refiner", c.refiner},
                   {"annotator", c.annotator},
                   {"regulator", c.regulator},
                   {"postprocessor", c.postprocessor}}},
             {"max_rounds", c.max_rounds},
             {"revision_cap", c.revision_cap},
             {"n_persuaders", c.n_persuaders},
             {"strategy_directive", directives},
             {"seed", c.seed}};
}

void from_json(const json& j, RunConfig& c) {
    const json& m = j.at("models");
    m.at("generator").get_to(c.generator);
    m.at("monitor").get_to(c.monitor);
    m.at("refiner").get_to(c.refiner);
    m.at("annotator").get_to(c.annotator);
    m.at("regulator").get_to(c.regulator);
    m.at("postprocessor").get_to(c.postprocessor);
    j.at("max_rounds").get_to(c.max_rounds);
    j.at("revision_cap").get_to(c.revision_cap);
    j.at("n_persuaders").get_to(c.n_persuaders);
    c.strategy_directive.clear();
    for (const auto& [label, d] : j.at("strategy_directive").items()) {
        auto speaker = parse_speaker_label(label);
        if (!speaker) throw ParseError("unknown speaker label in strategy_directive: " + label);
        c.strategy_directive[*speaker] = parse_enum<StrategyDirective>(
            d, "strategy directive", parse_strategy_directive);
    }
    j.at("seed").get_to(c.seed);
}

void to_json(json& j, const Dialogue& d) {
    json directives = json::object();
    for (const auto& [speaker, text] : d.strategy_directive) {
        directives[speaker_label(speaker)] = text;
    }
    j = json{{"task", d.task},
             {"rounds", d.rounds},
             {"termination", termination_name(d.termination)},
             {"strategy_directive", directives},
             {"config_snapshot", d.config_snapshot},
             {"seed", d.seed}};
}

void from_json(const json& j, Dialogue& d) {
    j.at("task").get_to(d.task);
    j.at("rounds").get_to(d.rounds);
    d.termination =
        parse_enum<Termination>(j.at("termination"), "termination", parse_termination);
    d.strategy_directive.clear();
    for (const auto& [label, text] : j.at("strategy_directive").items()) {
        auto speaker = parse_speaker_label(label);
        if (!speaker) throw ParseError("unknown speaker label in strategy_directive: " + label);
        d.strategy_directive[*speaker] = text.get<std::string>();
    }
    j.at("config_snapshot").get_to(d.config_snapshot);
    j.at("seed").get_to(d.seed);
}

void to_json(json& j, const ChatMessage& m) {
    j = json{{"role", message_role_name(m.role)}, {"content", m.content}};
}

void from_json(const json& j, ChatMessage& m) {
    m.role = parse_enum<MessageRole>(j.at("role"), "message role", parse_message_role);
    j.at("content").get_to(m.content);
}

void to_json(json& j, const ChatRequest& r) {
    j = json{{"model_id", r.model_id}, {"temperature", r.temperature}, {"messages", r.messages}};
}

void from_json(const json& j, ChatRequest& r) {
    j.at("model_id").get_to(r.model_id);
    j.at("temperature").get_to(r.temperature);
    j.at("messages").get_to(r.messages);
}

void to_json(json& j, const ChatResponse& r) {
    j = json{{"content", r.content}, {"finish_reason", finish_reason_name(r.finish_reason)}};
}

void from_json(const json& j, ChatResponse& r) {
    j.at("content").get_to(r.content);
    r.finish_reason =
        parse_enum<FinishReason>(j.at("finish_reason"), "finish reason", parse_finish_reason);
}

void to_json(json& j, const ChatExchange& e) {
    j = json{{"request", e.request}, {"response", e.response}};
}

void from_json(const json& j, ChatExchange& e) {
    j.at("request").get_to(e.request);
    j.at("response").get_to(e.response);
}

std::string serialize_dialogue(const Dialogue& d) {
    return json(d).dump();
}

Dialogue parse_dialogue(const std::string& line) {
    try {
        return json::parse(line).get<Dialogue>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid dialogue JSON: ") + e.what());
    }
}

namespace {

template <typename T>
std::vector<T> load_jsonl(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + std::string(what) + " file: " + path);
    std::vector<T> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line).get<T>());
        } catch (const std::exception& e) {
            throw ParseError(std::string(what) + ": " + e.what(), lineno);
        }
    }
    return out;
}

template <typename T>
void save_jsonl(const std::string& path, const std::vector<T>& items, const char* what) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + std::string(what) + " file: " + path);
    for (const T& item : items) {
        out << json(item).dump() << '\n';
        out.flush();
    }
}

}  // namespace

std::vector<Dialogue> load_dialogue_file(const std::string& path) {
    return load_jsonl<Dialogue>(path, "dialogue");
}

void save_dialogue_file(const std::string& path, const std::vector<Dialogue>& dialogues) {
    save_jsonl(path, dialogues, "dialogue");
}

std::vector<PersuasionTask> load_task_file(const std::string& path) {
    auto tasks = load_jsonl<PersuasionTask>(path, "task");
    std::set<std::string> ids;
    for (const auto& t : tasks) {
        if (!ids.insert(t.task_id).second) {
            throw ParseError("duplicate task_id: " + t.task_id);
        }
    }
    return tasks;
}

void save_task_file(const std::string& path, const std::vector<PersuasionTask>& tasks) {
    save_jsonl(path, tasks, "task");
}

}  // namespace pf
