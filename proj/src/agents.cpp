#include "pf/agents.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace pf {
namespace {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Case-insensitive "starts with keyword followed by ':'"; returns the rest.
std::optional<std::string> keyword_rest(const std::string& text, const std::string& keyword) {
    const std::string lower = to_lower(text);
    if (lower.rfind(keyword + ":", 0) != 0) return std::nullopt;
    return trim(text.substr(keyword.size() + 1));
}

bool parse_decimal(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size();
}

constexpr const char* kMonitorReminder =
    "Format reminder: reply with exactly one line, either \"PASS\" or "
    "\"FLAG: <ends_unexpectedly|repeats_previous|off_topic> | <diagnosis>\".";
constexpr const char* kScoreReminder =
    "Format reminder: reply with exactly one line per speaker, "
    "\"<SPEAKER>: <decimal between 0 and 1>\".";
constexpr const char* kRegulatorPhase1Reminder =
    "Format reminder: reply with exactly one line, either \"OK\" or "
    "\"REVISE: <feedback>\".";
constexpr const char* kRegulatorPhase2Reminder =
    "Format reminder: reply with exactly one line, either \"CONTINUE\" or "
    "\"TERMINATE: <agreement|stagnation>\".";

}  // namespace

double parse_score(const std::string& line) {
    std::string value_part = line;
    if (auto colon = line.find(':'); colon != std::string::npos) {
        value_part = line.substr(colon + 1);
    }
    double value = 0.0;
    if (!parse_decimal(value_part, value)) {
        throw AgentOutputError(AgentOutputError::Kind::UnparseableScore,
                               "not a score line: " + trim(line));
    }
    if (!(value >= 0.0 && value <= 1.0)) {
        throw AgentOutputError(AgentOutputError::Kind::ScoreOutOfRange,
                               "score out of [0,1]: " + trim(value_part));
    }
    return value;
}

MonitorVerdict parse_monitor_verdict(const std::string& text) {
    const std::string t = trim(text);
    if (to_lower(t) == "pass") return MonitorVerdict{MonitorVerdict::Outcome::Pass, {}};
    if (auto rest = keyword_rest(t, "flag")) {
        std::string kind_part = *rest;
        std::string diagnosis;
        if (auto pipe = rest->find('|'); pipe != std::string::npos) {
            kind_part = trim(rest->substr(0, pipe));
            diagnosis = trim(rest->substr(pipe + 1));
        }
        if (auto kind = parse_monitor_issue_kind(kind_part)) {
            return MonitorVerdict{MonitorVerdict::Outcome::Flagged,
                                  {MonitorIssue{*kind, diagnosis}}};
        }
        throw AgentOutputError(AgentOutputError::Kind::UnparseableVerdict,
                               "unknown monitor issue kind: " + kind_part);
    }
    throw AgentOutputError(AgentOutputError::Kind::UnparseableVerdict,
                           "not a monitor verdict: " + t);
}

RegulationVerdict parse_regulation_verdict(const std::string& text) {
    const std::string t = trim(text);
    const std::string lower = to_lower(t);
    if (lower == "ok" || lower == "continue") {
        return RegulationVerdict{RegulationVerdict::Outcome::Continue, "", std::nullopt};
    }
    if (auto feedback = keyword_rest(t, "revise")) {
        if (feedback->empty()) {
            throw AgentOutputError(AgentOutputError::Kind::UnparseableVerdict,
                                   "REVISE without feedback");
        }
        return RegulationVerdict{RegulationVerdict::Outcome::Revise, *feedback, std::nullopt};
    }
    if (auto reason = keyword_rest(t, "terminate")) {
        auto parsed = parse_termination(*reason);
        if (parsed && (*parsed == Termination::Agreement || *parsed == Termination::Stagnation)) {
            return RegulationVerdict{RegulationVerdict::Outcome::Terminate, "", parsed};
        }
        throw AgentOutputError(AgentOutputError::Kind::UnparseableVerdict,
                               "unknown termination reason: " + *reason);
    }
    throw AgentOutputError(AgentOutputError::Kind::UnparseableVerdict,
                           "not a regulation verdict: " + t);
}

std::map<SpeakerId, double> parse_round_scores(const std::string& text,
                                               const std::vector<SpeakerId>& expected) {
    std::map<SpeakerId, double> scores;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t nl = text.find('\n', start);
        const std::string line =
            trim(text.substr(start, nl == std::string::npos ? std::string::npos : nl - start));
        start = nl == std::string::npos ? text.size() + 1 : nl + 1;
        if (line.empty()) continue;

        const auto colon = line.find(':');
        if (colon == std::string::npos) {
            throw AgentOutputError(AgentOutputError::Kind::UnparseableScore,
                                   "not a score line: " + line);
        }
        const auto speaker = parse_speaker_label(line.substr(0, colon));
        if (!speaker) {
            throw AgentOutputError(AgentOutputError::Kind::UnparseableScore,
                                   "unknown speaker label: " + line.substr(0, colon));
        }
        if (scores.contains(*speaker)) {
            throw AgentOutputError(AgentOutputError::Kind::UnparseableScore,
                                   "duplicate score for " + speaker_label(*speaker));
        }
        scores[*speaker] = parse_score(line);
    }
    for (const SpeakerId& s : expected) {
        if (!scores.contains(s)) {
            throw AgentOutputError(AgentOutputError::Kind::UnparseableScore,
                                   "missing score for " + speaker_label(s));
        }
    }
    if (scores.size() != expected.size()) {
        throw AgentOutputError(AgentOutputError::Kind::UnparseableScore,
                               "scores for unexpected speakers present");
    }
    return scores;
}

void AgentMemory::init(std::string system_prompt) {
    history.clear();
    history.push_back(ChatMessage{MessageRole::System, std::move(system_prompt)});
}

void AgentMemory::append(MessageRole msg_role, std::string content) {
    history.push_back(ChatMessage{msg_role, std::move(content)});
}

Agent::Agent(AgentRole role, std::string label, AgentModel model, Provider& provider)
    : label_(std::move(label)), model_(std::move(model)), provider_(&provider) {
    memory_.role = role;
}

void Agent::init(std::string system_prompt) { memory_.init(std::move(system_prompt)); }

void Agent::note(std::string content) { memory_.append(MessageRole::User, std::move(content)); }

void Agent::seed_example(std::string user, std::string assistant) {
    memory_.append(MessageRole::User, std::move(user));
    memory_.append(MessageRole::Assistant, std::move(assistant));
}

std::string Agent::complete_with(std::vector<ChatMessage> messages) {
    ChatRequest request{model_.model_id, model_.temperature, std::move(messages)};
    ChatResponse response = provider_->complete(request);
    if (response.finish_reason == FinishReason::Refusal) {
        throw ProviderError(ProviderError::Kind::Refusal,
                            "provider refused to answer: " + response.content, label_);
    }
    if (response.finish_reason == FinishReason::Error) {
        throw ProviderError(ProviderError::Kind::Malformed,
                            "provider signaled an error finish", label_);
    }
    return response.content;
}

std::string Agent::ask(const std::string& user_message) {
    std::vector<ChatMessage> messages = memory_.history;
    messages.push_back(ChatMessage{MessageRole::User, user_message});
    std::string reply = complete_with(messages);
    memory_.append(MessageRole::User, user_message);
    memory_.append(MessageRole::Assistant, reply);
    return reply;
}

std::string Agent::ask_transient(const std::string& user_message) {
    std::vector<ChatMessage> messages = memory_.history;
    messages.push_back(ChatMessage{MessageRole::User, user_message});
    return complete_with(std::move(messages));
}

std::string Agent::ask_transient_followup(const std::vector<ChatMessage>& extra) {
    std::vector<ChatMessage> messages = memory_.history;
    messages.insert(messages.end(), extra.begin(), extra.end());
    return complete_with(std::move(messages));
}

GeneratorAgent::GeneratorAgent(SpeakerId speaker, const PersuasionTask& task,
                               const RunConfig& cfg, const PromptLibrary& prompts,
                               Provider& provider)
    : speaker_(speaker),
      agent_(AgentRole::Generator, speaker_label(speaker), cfg.model_for(AgentRole::Generator),
             provider),
      prompts_(&prompts) {
    agent_.init(render_system_prompt(prompts, AgentRole::Generator, task, cfg, speaker));
}

std::string GeneratorAgent::open() { return agent_.ask("Start the conversation."); }

std::string GeneratorAgent::respond(const std::string& relay) { return agent_.ask(relay); }

std::string GeneratorAgent::revise_for_monitor(const std::string& diagnoses) {
    return agent_.ask(render_template(prompts_->get("monitor_revision_request"),
                                      {{"FEEDBACK", diagnoses}}));
}

std::string GeneratorAgent::revise_for_regulator(const std::string& feedback) {
    return agent_.ask(render_template(prompts_->get("regulator_revision_request"),
                                      {{"FEEDBACK", feedback}}));
}

MonitorAgent::MonitorAgent(const PersuasionTask& task, const RunConfig& cfg,
                           const PromptLibrary& prompts, Provider& provider,
                           unsigned format_retries)
    : agent_(AgentRole::Monitor, "monitor", cfg.model_for(AgentRole::Monitor), provider),
      prompts_(&prompts),
      format_retries_(format_retries) {
    agent_.init(render_system_prompt(prompts, AgentRole::Monitor, task, cfg));
}

MonitorVerdict MonitorAgent::check(const SpeakerId& speaker, const std::string& utterance) {
    const std::string check_msg =
        render_template(prompts_->get("monitor_check"),
                        {{"SPEAKER", speaker_label(speaker)}, {"UTTERANCE", utterance}});
    std::string reply = agent_.ask_transient(check_msg);
    unsigned retries = format_retries_;
    for (;;) {
        try {
            MonitorVerdict verdict = parse_monitor_verdict(reply);
            if (!verdict.flagged()) store(speaker, utterance);
            return verdict;
        } catch (const AgentOutputError&) {
            if (retries == 0) throw;
            --retries;
            reply = agent_.ask_transient_followup(
                {ChatMessage{MessageRole::User, check_msg},
                 ChatMessage{MessageRole::Assistant, reply},
                 ChatMessage{MessageRole::User, kMonitorReminder}});
        }
    }
}

void MonitorAgent::store(const SpeakerId& speaker, const std::string& utterance) {
    agent_.note(render_template(prompts_->get("monitor_store"),
                                {{"SPEAKER", speaker_label(speaker)}, {"UTTERANCE", utterance}}));
}

RefinerAgent::RefinerAgent(const PersuasionTask& task, const RunConfig& cfg,
                           const PromptLibrary& prompts, Provider& provider)
    : agent_(AgentRole::Refiner, "refiner", cfg.model_for(AgentRole::Refiner), provider) {
    system_prompt_ = render_system_prompt(prompts, AgentRole::Refiner, task, cfg);
    agent_.init(system_prompt_);
    init_few_shot();
}

void RefinerAgent::init_few_shot() {
    // Two worked examples targeting the softeners the refiner exists to strip.
    agent_.seed_example(
        "I understand your concerns, but the attic stays dry all year and gives us the "
        "storage space we badly need.",
        "The attic stays dry all year and gives us the storage space we badly need.");
    agent_.seed_example(
        "You make a great point, and I agree that safety matters a lot. Still, helmets "
        "save lives in exactly these conditions.",
        "Helmets save lives in exactly these conditions.");
}

std::string RefinerAgent::refine(const std::string& raw) {
    if (raw.empty()) throw std::invalid_argument("refine: raw text is empty");
    return agent_.ask_transient(raw);
}

void RefinerAgent::reset() { agent_.reset(); }

AnnotatorAgent::AnnotatorAgent(const PersuasionTask& task, const RunConfig& cfg,
                               const PromptLibrary& prompts, Provider& provider,
                               unsigned format_retries)
    : agent_(AgentRole::Annotator, "annotator", cfg.model_for(AgentRole::Annotator), provider),
      prompts_(&prompts),
      format_retries_(format_retries) {
    agent_.init(render_system_prompt(prompts, AgentRole::Annotator, task, cfg));
}

std::map<SpeakerId, double> AnnotatorAgent::annotate_round(
    std::size_t round_number, const std::string& round_transcript,
    const std::vector<SpeakerId>& speakers) {
    const std::string msg = render_template(
        prompts_->get("annotate_round"),
        {{"ROUND", std::to_string(round_number)}, {"ROUND_TRANSCRIPT", round_transcript}});
    std::string reply = agent_.ask(msg);
    unsigned retries = format_retries_;
    for (;;) {
        try {
            return parse_round_scores(reply, speakers);
        } catch (const AgentOutputError&) {
            if (retries == 0) throw;
            --retries;
            reply = agent_.ask(kScoreReminder);
        }
    }
}

RegulatorAgent::RegulatorAgent(const PersuasionTask& task, const RunConfig& cfg,
                               const PromptLibrary& prompts, Provider& provider,
                               unsigned format_retries)
    : agent_(AgentRole::Regulator, "regulator", cfg.model_for(AgentRole::Regulator), provider),
      prompts_(&prompts),
      format_retries_(format_retries) {
    agent_.init(render_system_prompt(prompts, AgentRole::Regulator, task, cfg));
}

RegulationVerdict RegulatorAgent::review_round(std::size_t round_number,
                                               const std::string& round_transcript,
                                               const std::string& scores_text) {
    const std::string phase1_msg =
        render_template(prompts_->get("regulator_phase1"),
                        {{"ROUND", std::to_string(round_number)},
                         {"ROUND_TRANSCRIPT", round_transcript},
                         {"SCORES", scores_text}});

    auto parse_phase1 = [](const std::string& reply) {
        RegulationVerdict v = parse_regulation_verdict(reply);
        if (v.outcome == RegulationVerdict::Outcome::Terminate) {
            throw AgentOutputError(AgentOutputError::Kind::UnparseableVerdict,
                                   "phase 1 expects OK or REVISE, got TERMINATE");
        }
        return v;
    };

    std::string reply = agent_.ask_transient(phase1_msg);
    unsigned retries = format_retries_;
    for (;;) {
        try {
            return parse_phase1(reply);
        } catch (const AgentOutputError&) {
            if (retries == 0) throw;
            --retries;
            reply = agent_.ask_transient_followup(
                {ChatMessage{MessageRole::User, phase1_msg},
                 ChatMessage{MessageRole::Assistant, reply},
                 ChatMessage{MessageRole::User, kRegulatorPhase1Reminder}});
        }
    }
}

void RegulatorAgent::accept_round(std::size_t round_number,
                                  const std::string& round_transcript) {
    agent_.note(render_template(prompts_->get("regulator_accept"),
                                {{"ROUND", std::to_string(round_number)},
                                 {"ROUND_TRANSCRIPT", round_transcript}}));
}

RegulationVerdict RegulatorAgent::decide_continuation() {
    const std::string phase2_msg = render_template(prompts_->get("regulator_phase2"), {});
    std::string reply = agent_.ask_transient(phase2_msg);
    unsigned retries = format_retries_;
    for (;;) {
        try {
            RegulationVerdict v = parse_regulation_verdict(reply);
            if (v.outcome == RegulationVerdict::Outcome::Revise) {
                throw AgentOutputError(AgentOutputError::Kind::UnparseableVerdict,
                                       "phase 2 expects CONTINUE or TERMINATE, got REVISE");
            }
            return v;
        } catch (const AgentOutputError&) {
            if (retries == 0) throw;
            --retries;
            reply = agent_.ask_transient_followup(
                {ChatMessage{MessageRole::User, phase2_msg},
                 ChatMessage{MessageRole::Assistant, reply},
                 ChatMessage{MessageRole::User, kRegulatorPhase2Reminder}});
        }
    }
}

RegulationVerdict RegulatorAgent::regulate(std::size_t round_number,
                                           const std::string& round_transcript,
                                           const std::string& scores_text) {
    RegulationVerdict phase1 = review_round(round_number, round_transcript, scores_text);
    if (phase1.outcome == RegulationVerdict::Outcome::Revise) return phase1;
    accept_round(round_number, round_transcript);
    return decide_continuation();
}

}  // namespace pf
