#pragma once
// Core domain types shared by every pipeline stage.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pf {

enum class NormClass { Taboo, Normal, Expected };

std::string norm_class_name(NormClass c);
std::optional<NormClass> parse_norm_class(const std::string& name);

// A norm/scenario plus per-speaker goals that seed one dialogue.
struct PersuasionTask {
    std::string task_id;
    std::string behavior;        // e.g. "pick flowers in a cemetery"
    NormClass norm_class = NormClass::Normal;
    std::string persuader_goal;
    std::string persuadee_goal;

    friend bool operator==(const PersuasionTask&, const PersuasionTask&) = default;
};

enum class Role { Persuader, Persuadee };

struct SpeakerId {
    Role role = Role::Persuader;
    std::size_t index = 0;  // 0 in two-party mode; 0..n-1 for multi-party persuaders

    friend bool operator==(const SpeakerId&, const SpeakerId&) = default;
    friend bool operator<(const SpeakerId& a, const SpeakerId& b) {
        if (a.role != b.role) return a.role < b.role;
        return a.index < b.index;
    }
};

// Canonical display labels: PERSUADER, PERSUADER_2, ..., PERSUADEE.
std::string speaker_label(const SpeakerId& id);
// Case-insensitive; accepts PERSUADER, PERSUADER_1 (alias for index 0),
// PERSUADER_k (1-based), PERSUADEE.
std::optional<SpeakerId> parse_speaker_label(const std::string& label);

// Quality-monitor issue kinds, in the fixed order the checks run.
enum class MonitorIssueKind { EndsUnexpectedly, RepeatsPrevious, OffTopic };

std::string monitor_issue_kind_name(MonitorIssueKind k);
std::optional<MonitorIssueKind> parse_monitor_issue_kind(const std::string& name);

struct MonitorIssue {
    MonitorIssueKind kind = MonitorIssueKind::EndsUnexpectedly;
    std::string diagnosis;

    friend bool operator==(const MonitorIssue&, const MonitorIssue&) = default;
};

struct MonitorVerdict {
    enum class Outcome { Pass, Flagged };
    Outcome outcome = Outcome::Pass;
    std::vector<MonitorIssue> issues;  // empty iff Pass

    bool flagged() const { return outcome == Outcome::Flagged; }
    friend bool operator==(const MonitorVerdict&, const MonitorVerdict&) = default;
};

enum class Termination { Agreement, Stagnation, MaxRoundsCap };

std::string termination_name(Termination t);
std::optional<Termination> parse_termination(const std::string& name);

struct RegulationVerdict {
    enum class Outcome { Revise, Continue, Terminate };
    Outcome outcome = Outcome::Continue;
    std::string feedback;  // non-empty iff Revise
    std::optional<Termination> termination_reason;  // present iff Terminate

    friend bool operator==(const RegulationVerdict&, const RegulationVerdict&) = default;
};

// The nine persuasion strategies in canonical order; the order fixes the
// layout of distribution vectors so they stay comparable across runs.
enum class StrategyTag {
    Popularity,
    Authority,
    Outcomes,
    ThreatPromise,
    DeonticMoral,
    Empathy,
    Scarcity,
    LogicalAppeal,
    Emotion,
};

inline constexpr std::size_t kStrategyCount = 9;

int canonical_strategy_index(StrategyTag tag);
StrategyTag strategy_tag_from_index(int index);  // throws std::out_of_range
std::string strategy_tag_name(StrategyTag tag);
std::optional<StrategyTag> parse_strategy_tag(const std::string& name);

struct Utterance {
    SpeakerId speaker;
    std::string raw_text;      // as produced by the generation agent
    std::string refined_text;  // after language refinement
    std::string final_text;    // after postprocessing (= refined_text until then)
    std::size_t revision_count = 0;
    std::vector<MonitorIssue> monitor_flags;  // flags accumulated across revisions

    friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Round {
    std::vector<Utterance> utterances;      // one per speaker slot, in turn order
    std::map<SpeakerId, double> scores;     // cumulative shift in [0,1] per speaker

    friend bool operator==(const Round&, const Round&) = default;
};

enum class StrategyDirective { Logical, Emotional };

std::string strategy_directive_name(StrategyDirective d);
std::optional<StrategyDirective> parse_strategy_directive(const std::string& name);
// The verbatim initialization sentence for a directive.
std::string strategy_directive_sentence(StrategyDirective d);

enum class AgentRole { Generator, Monitor, Refiner, Annotator, Regulator, Postprocessor };

std::string agent_role_name(AgentRole r);

struct AgentModel {
    std::string model_id;
    double temperature = 0.0;

    friend bool operator==(const AgentModel&, const AgentModel&) = default;
};

struct RunConfig {
    // Per-role backbone choice. Judges default to temperature 0 so their
    // verdicts are stable; generators keep diversity.
    AgentModel generator{"gpt-3.5-turbo", 0.9};
    AgentModel monitor{"gpt-4", 0.0};
    AgentModel refiner{"gpt-3.5-turbo", 0.0};
    AgentModel annotator{"gpt-3.5-turbo", 0.0};
    AgentModel regulator{"gpt-4", 0.0};
    AgentModel postprocessor{"gpt-3.5-turbo", 0.0};

    std::size_t max_rounds = 20;
    std::size_t revision_cap = 3;
    std::size_t n_persuaders = 1;
    std::map<SpeakerId, StrategyDirective> strategy_directive;
    long long seed = 0;

    const AgentModel& model_for(AgentRole role) const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct Dialogue {
    PersuasionTask task;
    std::vector<Round> rounds;
    Termination termination = Termination::MaxRoundsCap;
    // Verbatim directive sentence per constrained speaker; empty when unconstrained.
    std::map<SpeakerId, std::string> strategy_directive;
    RunConfig config_snapshot;
    long long seed = 0;

    friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

// Checks every typed invariant and returns one description per violation,
// naming the field and round index. Violations are data, not failures.
std::vector<std::string> validate_dialogue(const Dialogue& d);

}  // namespace pf
