#pragma once
// One typed client per pipeline agent role: prompt rendering, per-agent
// memory, and parsing of agent replies into structured verdicts/scores.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pf/core.hpp"
#include "pf/prompts.hpp"
#include "pf/provider.hpp"

namespace pf {

class AgentOutputError : public std::runtime_error {
  public:
    enum class Kind {
        UnparseableVerdict,
        UnparseableScore,
        ScoreOutOfRange,
        UnparseableEnvelope,
    };

    AgentOutputError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    Kind kind() const { return kind_; }

  private:
    Kind kind_;
};

// Reply parsers. Keywords are case-insensitive and surrounding whitespace is
// ignored. Total: any input either parses or raises AgentOutputError.
double parse_score(const std::string& line);
MonitorVerdict parse_monitor_verdict(const std::string& text);
// Accepts the full verdict vocabulary; the phase-1 acceptance token "OK" is
// an alias for Continue.
RegulationVerdict parse_regulation_verdict(const std::string& text);
std::map<SpeakerId, double> parse_round_scores(const std::string& text,
                                               const std::vector<SpeakerId>& expected);

struct AgentMemory {
    AgentRole role = AgentRole::Generator;
    std::vector<ChatMessage> history;  // system prompt first, then turns

    bool initialized() const { return !history.empty(); }
    void init(std::string system_prompt);
    void append(MessageRole msg_role, std::string content);
    void reset() { history.clear(); }
};

// A provider-backed conversation participant. Memory is confined to one
// dialogue worker; instances are cheap to construct per dialogue.
class Agent {
  public:
    Agent(AgentRole role, std::string label, AgentModel model, Provider& provider);

    void init(std::string system_prompt);
    void reset() { memory_.reset(); }
    const AgentMemory& memory() const { return memory_; }
    const std::string& label() const { return label_; }

    // Appends a user message without a provider call.
    void note(std::string content);
    // Appends a worked user/assistant example pair (few-shot seeding).
    void seed_example(std::string user, std::string assistant);
    // One committed exchange: the user message and the reply join the memory.
    std::string ask(const std::string& user_message);
    // One exchange on top of memory without committing anything.
    std::string ask_transient(const std::string& user_message);
    // Transient exchange continuing from extra uncommitted turns.
    std::string ask_transient_followup(const std::vector<ChatMessage>& extra);

  private:
    std::string complete_with(std::vector<ChatMessage> messages);

    AgentMemory memory_;
    std::string label_;
    AgentModel model_;
    Provider* provider_;
};

class GeneratorAgent {
  public:
    GeneratorAgent(SpeakerId speaker, const PersuasionTask& task, const RunConfig& cfg,
                   const PromptLibrary& prompts, Provider& provider);

    const SpeakerId& speaker() const { return speaker_; }
    // First utterance of the whole dialogue.
    std::string open();
    // Subsequent turns: relay carries the counterpart's latest refined text.
    std::string respond(const std::string& relay);
    std::string revise_for_monitor(const std::string& diagnoses);
    std::string revise_for_regulator(const std::string& feedback);
    void reset() { agent_.reset(); }
    const Agent& agent() const { return agent_; }

  private:
    SpeakerId speaker_;
    Agent agent_;
    const PromptLibrary* prompts_;
};

class MonitorAgent {
  public:
    MonitorAgent(const PersuasionTask& task, const RunConfig& cfg, const PromptLibrary& prompts,
                 Provider& provider, unsigned format_retries = 0);

    // Exactly one provider exchange per check (plus at most format_retries
    // reminder exchanges). On pass the reviewed utterance joins the memory.
    MonitorVerdict check(const SpeakerId& speaker, const std::string& utterance);
    // Stores an utterance accepted despite flags (revision budget exhausted).
    void store(const SpeakerId& speaker, const std::string& utterance);
    void reset() { agent_.reset(); }
    const Agent& agent() const { return agent_; }

  private:
    Agent agent_;
    const PromptLibrary* prompts_;
    unsigned format_retries_;
};

class RefinerAgent {
  public:
    RefinerAgent(const PersuasionTask& task, const RunConfig& cfg, const PromptLibrary& prompts,
                 Provider& provider);

    std::string refine(const std::string& raw);  // raw must be non-empty
    void reset();
    const Agent& agent() const { return agent_; }

  private:
    void init_few_shot();

    Agent agent_;
    std::string system_prompt_;
};

class AnnotatorAgent {
  public:
    AnnotatorAgent(const PersuasionTask& task, const RunConfig& cfg,
                   const PromptLibrary& prompts, Provider& provider,
                   unsigned format_retries = 0);

    // One committed exchange per round; cumulative context accrues in memory.
    std::map<SpeakerId, double> annotate_round(std::size_t round_number,
                                               const std::string& round_transcript,
                                               const std::vector<SpeakerId>& speakers);
    void reset() { agent_.reset(); }
    const Agent& agent() const { return agent_; }

  private:
    Agent agent_;
    const PromptLibrary* prompts_;
    unsigned format_retries_;
};

class RegulatorAgent {
  public:
    RegulatorAgent(const PersuasionTask& task, const RunConfig& cfg,
                   const PromptLibrary& prompts, Provider& provider,
                   unsigned format_retries = 0);

    // Two-phase contract: phase 1 returns Revise(feedback) or acceptance;
    // on acceptance the round joins the memory and phase 2 decides
    // Continue or Terminate(agreement|stagnation).
    RegulationVerdict regulate(std::size_t round_number, const std::string& round_transcript,
                               const std::string& scores_text);

    // Phase 1 alone: Revise(feedback), or Continue meaning "round accepted".
    RegulationVerdict review_round(std::size_t round_number,
                                   const std::string& round_transcript,
                                   const std::string& scores_text);
    // Commits an accepted round to the regulator's memory.
    void accept_round(std::size_t round_number, const std::string& round_transcript);
    // Phase 2 alone: Continue or Terminate(agreement|stagnation).
    RegulationVerdict decide_continuation();
    void reset() { agent_.reset(); }
    const Agent& agent() const { return agent_; }

  private:
    Agent agent_;
    const PromptLibrary* prompts_;
    unsigned format_retries_;
};

}  // namespace pf
