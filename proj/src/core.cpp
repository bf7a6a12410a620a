#include "pf/core.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <stdexcept>

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

}  // namespace

std::string norm_class_name(NormClass c) {
    switch (c) {
        case NormClass::Taboo: return "taboo";
        case NormClass::Normal: return "normal";
        case NormClass::Expected: return "expected";
    }
    return "normal";
}

std::optional<NormClass> parse_norm_class(const std::string& name) {
    const std::string n = to_lower(trim(name));
    if (n == "taboo") return NormClass::Taboo;
    if (n == "normal") return NormClass::Normal;
    if (n == "expected") return NormClass::Expected;
    return std::nullopt;
}

std::string speaker_label(const SpeakerId& id) {
    if (id.role == Role::Persuadee) return "PERSUADEE";
    if (id.index == 0) return "PERSUADER";
    return "PERSUADER_" + std::to_string(id.index + 1);
}

std::optional<SpeakerId> parse_speaker_label(const std::string& label) {
    const std::string l = to_lower(trim(label));
    if (l == "persuadee") return SpeakerId{Role::Persuadee, 0};
    if (l == "persuader") return SpeakerId{Role::Persuader, 0};
    const std::string prefix = "persuader_";
    if (l.rfind(prefix, 0) == 0) {
        const std::string num = l.substr(prefix.size());
        if (num.empty() || !std::all_of(num.begin(), num.end(), [](unsigned char c) {
                return std::isdigit(c) != 0;
            })) {
            return std::nullopt;
        }
        const unsigned long v = std::stoul(num);
        if (v == 0) return std::nullopt;  // labels are 1-based
        return SpeakerId{Role::Persuader, static_cast<std::size_t>(v - 1)};
    }
    return std::nullopt;
}

std::string monitor_issue_kind_name(MonitorIssueKind k) {
    switch (k) {
        case MonitorIssueKind::EndsUnexpectedly: return "ends_unexpectedly";
        case MonitorIssueKind::RepeatsPrevious: return "repeats_previous";
        case MonitorIssueKind::OffTopic: return "off_topic";
    }
    return "ends_unexpectedly";
}

std::optional<MonitorIssueKind> parse_monitor_issue_kind(const std::string& name) {
    const std::string n = to_lower(trim(name));
    if (n == "ends_unexpectedly") return MonitorIssueKind::EndsUnexpectedly;
    if (n == "repeats_previous") return MonitorIssueKind::RepeatsPrevious;
    if (n == "off_topic") return MonitorIssueKind::OffTopic;
    return std::nullopt;
}

std::string termination_name(Termination t) {
    switch (t) {
        case Termination::Agreement: return "agreement";
        case Termination::Stagnation: return "stagnation";
        case Termination::MaxRoundsCap: return "max_rounds_cap";
    }
    return "max_rounds_cap";
}

std::optional<Termination> parse_termination(const std::string& name) {
    const std::string n = to_lower(trim(name));
    if (n == "agreement") return Termination::Agreement;
    if (n == "stagnation") return Termination::Stagnation;
    if (n == "max_rounds_cap") return Termination::MaxRoundsCap;
    return std::nullopt;
}

int canonical_strategy_index(StrategyTag tag) { return static_cast<int>(tag); }

StrategyTag strategy_tag_from_index(int index) {
    if (index < 0 || index >= static_cast<int>(kStrategyCount)) {
        throw std::out_of_range("strategy index out of [0,8]: " + std::to_string(index));
    }
    return static_cast<StrategyTag>(index);
}

std::string strategy_tag_name(StrategyTag tag) {
    switch (tag) {
        case StrategyTag::Popularity: return "Popularity";
        case StrategyTag::Authority: return "Authority";
        case StrategyTag::Outcomes: return "Outcomes";
        case StrategyTag::ThreatPromise: return "Threat/Promise";
        case StrategyTag::DeonticMoral: return "Deontic/Moral Appeals";
        case StrategyTag::Empathy: return "Empathy";
        case StrategyTag::Scarcity: return "Scarcity";
        case StrategyTag::LogicalAppeal: return "Logical Appeal";
        case StrategyTag::Emotion: return "Emotion";
    }
    return "Popularity";
}

std::optional<StrategyTag> parse_strategy_tag(const std::string& name) {
    std::string n = to_lower(trim(name));
    // Normalize separators so "Threat/Promise", "threat_promise", "ThreatPromise" all match.
    std::string compact;
    for (char c : n) {
        if (std::isalnum(static_cast<unsigned char>(c))) compact += c;
    }
    if (compact == "popularity") return StrategyTag::Popularity;
    if (compact == "authority") return StrategyTag::Authority;
    if (compact == "outcomes" || compact == "outcome") return StrategyTag::Outcomes;
    if (compact == "threatpromise") return StrategyTag::ThreatPromise;
    if (compact == "deonticmoral" || compact == "deonticmoralappeals" ||
        compact == "moralappeals") {
        return StrategyTag::DeonticMoral;
    }
    if (compact == "empathy") return StrategyTag::Empathy;
    if (compact == "scarcity") return StrategyTag::Scarcity;
    if (compact == "logicalappeal" || compact == "logical") return StrategyTag::LogicalAppeal;
    if (compact == "emotion") return StrategyTag::Emotion;
    return std::nullopt;
}

std::string strategy_directive_name(StrategyDirective d) {
    return d == StrategyDirective::Logical ? "logical" : "emotional";
}

std::optional<StrategyDirective> parse_strategy_directive(const std::string& name) {
    const std::string n = to_lower(trim(name));
    if (n == "logical") return StrategyDirective::Logical;
    if (n == "emotional") return StrategyDirective::Emotional;
    return std::nullopt;
}

std::string strategy_directive_sentence(StrategyDirective d) {
    return "Use only " + strategy_directive_name(d) + " strategies in the persuasion attempts.";
}

std::string agent_role_name(AgentRole r) {
    switch (r) {
        case AgentRole::Generator: return "generator";
        case AgentRole::Monitor: return "monitor";
        case AgentRole::Refiner: return "refiner";
        case AgentRole::Annotator: return "annotator";
        case AgentRole::Regulator: return "regulator";
        case AgentRole::Postprocessor: return "postprocessor";
    }
    return "generator";
}

const AgentModel& RunConfig::model_for(AgentRole role) const {
    switch (role) {
        case AgentRole::Generator: return generator;
        case AgentRole::Monitor: return monitor;
        case AgentRole::Refiner: return refiner;
        case AgentRole::Annotator: return annotator;
        case AgentRole::Regulator: return regulator;
        case AgentRole::Postprocessor: return postprocessor;
    }
    return generator;
}

std::vector<std::string> validate_dialogue(const Dialogue& d) {
    std::vector<std::string> violations;
    auto add = [&violations](const std::string& v) { violations.push_back(v); };

    if (d.task.behavior.empty()) add("task: behavior is empty");
    if (d.task.persuader_goal.empty()) add("task: persuader_goal is empty");
    if (d.task.persuadee_goal.empty()) add("task: persuadee_goal is empty");

    if (d.rounds.empty()) add("dialogue: rounds is empty");

    // The set of speakers appearing anywhere in the dialogue; every round
    // must score exactly these.
    std::set<SpeakerId> speakers;
    for (const Round& r : d.rounds) {
        for (const Utterance& u : r.utterances) speakers.insert(u.speaker);
    }

    std::size_t score_vectors = 0;
    for (std::size_t i = 0; i < d.rounds.size(); ++i) {
        const Round& r = d.rounds[i];
        const std::string where = "round " + std::to_string(i + 1);
        if (!r.scores.empty()) ++score_vectors;

        for (const auto& [speaker, score] : r.scores) {
            if (!(score >= 0.0 && score <= 1.0)) {
                add(where + ": score out of [0,1] for " + speaker_label(speaker));
            }
            if (!speakers.contains(speaker)) {
                add(where + ": score for unknown speaker " + speaker_label(speaker));
            }
        }
        if (!r.scores.empty()) {
            for (const SpeakerId& s : speakers) {
                if (!r.scores.contains(s)) {
                    add(where + ": missing score for " + speaker_label(s));
                }
            }
        }

        for (std::size_t j = 0; j < r.utterances.size(); ++j) {
            const Utterance& u = r.utterances[j];
            const std::string slot =
                where + " utterance " + std::to_string(j + 1) + " (" +
                speaker_label(u.speaker) + ")";
            if (!u.raw_text.empty() && u.refined_text.empty()) {
                add(slot + ": refined_text empty while raw_text non-empty");
            }
            if (u.revision_count > d.config_snapshot.revision_cap) {
                add(slot + ": revision_count exceeds revision cap");
            }
        }
    }
    if (!d.rounds.empty() && score_vectors != d.rounds.size()) {
        add("score/round count mismatch");
    }
    return violations;
}

}  // namespace pf
