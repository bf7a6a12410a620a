#include "pf/postprocess.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "pf/agents.hpp"

namespace pf {
namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream in(s);
    std::string part;
    while (std::getline(in, part, sep)) parts.push_back(part);
    return parts;
}

std::size_t parse_index(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty() || !std::all_of(t.begin(), t.end(),
                                  [](unsigned char c) { return std::isdigit(c) != 0; })) {
        throw MappingError("not a round index: '" + t + "'");
    }
    const unsigned long v = std::stoul(t);
    if (v == 0) throw MappingError("round indices are 1-based");
    return static_cast<std::size_t>(v);
}

constexpr const char* kEnvelopeReminder =
    "Format reminder: reply with a first line \"MAPPING: <old rounds>-><new round>; ...\" "
    "followed by one line per utterance, \"ROUND <k> <SPEAKER>: <text>\".";

}  // namespace

RoundMapping RoundMapping::identity(std::size_t round_count) {
    RoundMapping m;
    for (std::size_t i = 1; i <= round_count; ++i) {
        m.entries.push_back(Entry{{i}, i});
    }
    return m;
}

void validate_mapping(const RoundMapping& mapping, std::size_t old_count) {
    if (mapping.entries.empty()) throw MappingError("mapping has no entries");

    std::size_t expected_old = 1;
    for (std::size_t k = 0; k < mapping.entries.size(); ++k) {
        const auto& entry = mapping.entries[k];
        if (entry.new_round != k + 1) {
            throw MappingError("new round indices must be 1..n in order; entry " +
                               std::to_string(k + 1) + " maps to " +
                               std::to_string(entry.new_round));
        }
        if (entry.old_rounds.empty()) {
            throw MappingError("entry " + std::to_string(k + 1) + " merges no old rounds");
        }
        for (std::size_t old_round : entry.old_rounds) {
            if (old_round != expected_old) {
                throw MappingError("old rounds must partition 1.." + std::to_string(old_count) +
                                   " in order; expected " + std::to_string(expected_old) +
                                   ", got " + std::to_string(old_round));
            }
            ++expected_old;
        }
    }
    if (expected_old != old_count + 1) {
        throw MappingError("mapping covers " + std::to_string(expected_old - 1) +
                           " old rounds, dialogue has " + std::to_string(old_count));
    }
}

RoundMapping parse_round_mapping(const std::string& text) {
    RoundMapping mapping;
    for (const std::string& group : split(text, ';')) {
        if (trim(group).empty()) continue;
        const auto arrow = group.find("->");
        if (arrow == std::string::npos) {
            throw MappingError("mapping group lacks '->': " + trim(group));
        }
        RoundMapping::Entry entry;
        for (const std::string& idx : split(group.substr(0, arrow), ',')) {
            entry.old_rounds.push_back(parse_index(idx));
        }
        entry.new_round = parse_index(group.substr(arrow + 2));
        mapping.entries.push_back(std::move(entry));
    }
    if (mapping.entries.empty()) throw MappingError("empty mapping");
    return mapping;
}

std::string format_round_mapping(const RoundMapping& mapping) {
    std::ostringstream out;
    for (std::size_t k = 0; k < mapping.entries.size(); ++k) {
        if (k) out << "; ";
        const auto& entry = mapping.entries[k];
        for (std::size_t i = 0; i < entry.old_rounds.size(); ++i) {
            if (i) out << ',';
            out << entry.old_rounds[i];
        }
        out << "->" << entry.new_round;
    }
    return out.str();
}

std::vector<std::map<SpeakerId, double>> remap_labels(
    const std::vector<std::map<SpeakerId, double>>& scores, const RoundMapping& mapping) {
    validate_mapping(mapping, scores.size());
    std::vector<std::map<SpeakerId, double>> out;
    out.reserve(mapping.entries.size());
    for (const auto& entry : mapping.entries) {
        out.push_back(scores[entry.old_rounds.back() - 1]);
    }
    return out;
}

PostprocessEnvelope parse_postprocess_envelope(const std::string& reply) {
    PostprocessEnvelope envelope;
    std::istringstream in(reply);
    std::string line;
    bool have_mapping = false;
    std::vector<std::map<SpeakerId, std::string>>& texts = envelope.texts;

    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        std::string upper = t;
        std::transform(upper.begin(), upper.end(), upper.begin(),
                       [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
        if (!have_mapping) {
            if (upper.rfind("MAPPING:", 0) != 0) {
                throw AgentOutputError(AgentOutputError::Kind::UnparseableEnvelope,
                                       "envelope must start with a MAPPING line, got: " + t);
            }
            try {
                envelope.mapping = parse_round_mapping(t.substr(8));
            } catch (const MappingError& e) {
                throw AgentOutputError(AgentOutputError::Kind::UnparseableEnvelope,
                                       std::string("bad MAPPING line: ") + e.what());
            }
            texts.resize(envelope.mapping.new_round_count());
            have_mapping = true;
            continue;
        }
        if (upper.rfind("ROUND ", 0) != 0) {
            throw AgentOutputError(AgentOutputError::Kind::UnparseableEnvelope,
                                   "expected a ROUND line, got: " + t);
        }
        std::istringstream rest(t.substr(6));
        std::size_t round_no = 0;
        rest >> round_no;
        if (!rest || round_no == 0 || round_no > texts.size()) {
            throw AgentOutputError(AgentOutputError::Kind::UnparseableEnvelope,
                                   "ROUND line with bad round number: " + t);
        }
        std::string remainder;
        std::getline(rest, remainder);
        const auto colon = remainder.find(':');
        if (colon == std::string::npos) {
            throw AgentOutputError(AgentOutputError::Kind::UnparseableEnvelope,
                                   "ROUND line lacks ':': " + t);
        }
        const auto speaker = parse_speaker_label(remainder.substr(0, colon));
        if (!speaker) {
            throw AgentOutputError(AgentOutputError::Kind::UnparseableEnvelope,
                                   "unknown speaker label in ROUND line: " + t);
        }
        if (texts[round_no - 1].contains(*speaker)) {
            throw AgentOutputError(AgentOutputError::Kind::UnparseableEnvelope,
                                   "duplicate utterance for " + speaker_label(*speaker) +
                                       " in round " + std::to_string(round_no));
        }
        texts[round_no - 1][*speaker] = trim(remainder.substr(colon + 1));
    }
    if (!have_mapping) {
        throw AgentOutputError(AgentOutputError::Kind::UnparseableEnvelope,
                               "empty postprocessor reply");
    }
    return envelope;
}

Dialogue postprocess_dialogue(const Dialogue& d, const RunConfig& cfg, Provider& provider,
                              const PromptLibrary& prompts) {
    if (d.rounds.empty()) throw std::invalid_argument("cannot postprocess an empty dialogue");

    std::ostringstream transcript;
    for (std::size_t r = 0; r < d.rounds.size(); ++r) {
        for (const Utterance& u : d.rounds[r].utterances) {
            transcript << "ROUND " << (r + 1) << ' ' << speaker_label(u.speaker) << ": "
                       << u.refined_text << '\n';
        }
    }

    Agent agent(AgentRole::Postprocessor, "postprocessor",
                cfg.model_for(AgentRole::Postprocessor), provider);
    agent.init(render_system_prompt(prompts, AgentRole::Postprocessor, d.task, cfg));

    const std::string request = render_template(prompts.get("postprocess_request"),
                                                {{"DIALOGUE_SO_FAR", transcript.str()}});
    std::string reply = agent.ask(request);
    PostprocessEnvelope envelope;
    try {
        envelope = parse_postprocess_envelope(reply);
    } catch (const AgentOutputError&) {
        reply = agent.ask(kEnvelopeReminder);
        envelope = parse_postprocess_envelope(reply);
    }

    validate_mapping(envelope.mapping, d.rounds.size());

    // Every new round needs one rewritten utterance per speaker in the dialogue.
    std::vector<SpeakerId> speakers;
    for (const Utterance& u : d.rounds.front().utterances) speakers.push_back(u.speaker);
    for (std::size_t k = 0; k < envelope.texts.size(); ++k) {
        for (const SpeakerId& s : speakers) {
            if (!envelope.texts[k].contains(s)) {
                throw AgentOutputError(AgentOutputError::Kind::UnparseableEnvelope,
                                       "round " + std::to_string(k + 1) +
                                           " lacks an utterance for " + speaker_label(s));
            }
        }
        if (envelope.texts[k].size() != speakers.size()) {
            throw AgentOutputError(AgentOutputError::Kind::UnparseableEnvelope,
                                   "round " + std::to_string(k + 1) +
                                       " has utterances for unknown speakers");
        }
    }

    std::vector<std::map<SpeakerId, double>> old_scores;
    old_scores.reserve(d.rounds.size());
    for (const Round& r : d.rounds) old_scores.push_back(r.scores);
    const auto new_scores = remap_labels(old_scores, envelope.mapping);

    Dialogue out = d;
    out.rounds.clear();
    for (std::size_t k = 0; k < envelope.mapping.entries.size(); ++k) {
        const auto& entry = envelope.mapping.entries[k];
        // A merged round descends from the last constituent old round:
        // that round's utterances carry the cumulative state.
        const Round& source = d.rounds[entry.old_rounds.back() - 1];
        Round merged;
        merged.scores = new_scores[k];
        for (const Utterance& u : source.utterances) {
            Utterance rewritten = u;
            rewritten.final_text = envelope.texts[k].at(u.speaker);
            merged.utterances.push_back(std::move(rewritten));
        }
        out.rounds.push_back(std::move(merged));
    }
    return out;
}

}  // namespace pf
