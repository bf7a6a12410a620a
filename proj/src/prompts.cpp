#include "pf/prompts.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pf {

const std::string kSameSideClause =
    "Prevent repetition or conflict among agents on the same side";

std::string render_template(const PromptTemplate& tmpl,
                            const std::map<std::string, std::string>& bindings) {
    const std::string& body = tmpl.body;
    std::string out;
    out.reserve(body.size());
    std::size_t i = 0;
    while (i < body.size()) {
        if (body[i] != '{') {
            out += body[i++];
            continue;
        }
        // A placeholder is {A-Z_} with at least one character.
        std::size_t j = i + 1;
        while (j < body.size() &&
               (std::isupper(static_cast<unsigned char>(body[j])) || body[j] == '_')) {
            ++j;
        }
        if (j > i + 1 && j < body.size() && body[j] == '}') {
            const std::string name = body.substr(i + 1, j - i - 1);
            auto it = bindings.find(name);
            if (it == bindings.end()) {
                throw MissingPlaceholderError("template " + tmpl.template_id +
                                              ": no binding for placeholder {" + name + "}");
            }
            out += it->second;
            i = j + 1;
        } else {
            out += body[i++];  // literal brace
        }
    }
    return out;
}

namespace {

PromptLibrary make_builtin() {
    PromptLibrary lib;

    lib.set({"persuader_system",
             "You are {SPEAKER}, a speaker in a dialogue about a preset behavior.\n"
             "Behavior: {TASK}\n"
             "Your goal: {ROLE_GOAL}\n"
             "{MULTI_PARTY_NOTE}"
             "Hold your stance throughout the conversation and try to persuade the other "
             "speaker to accept your goal, varying your persuasive strategies as the "
             "conversation develops. Keep every reply to a single conversational utterance, "
             "concise and on topic.\n"
             "{STRATEGY_DIRECTIVE}"});

    lib.set({"persuadee_system",
             "You are {SPEAKER}, a speaker in a dialogue about a preset behavior.\n"
             "Behavior: {TASK}\n"
             "Your goal: {ROLE_GOAL}\n"
             "Resist the other speaker's persuasion attempts and, where possible, persuade "
             "them to abandon their position. Concede only when an argument genuinely "
             "convinces you. Keep every reply to a single conversational utterance, concise "
             "and on topic.\n"
             "{STRATEGY_DIRECTIVE}"});

    lib.set({"monitor_system",
             "You are the utterance quality monitor for a dialogue about: {TASK}\n"
             "For every utterance you are shown, run these checks in order and report the "
             "first one that fails: (1) the utterance ends unexpectedly, (2) it repeats a "
             "previous utterance, (3) it goes off the topic of the dialogue.\n"
             "Reply with exactly one line:\n"
             "PASS\n"
             "or\n"
             "FLAG: <ends_unexpectedly|repeats_previous|off_topic> | <short diagnosis>"});

    lib.set({"refiner_system",
             "You rewrite dialogue utterances by stripping out polite but superfluous "
             "phrases: tone softeners, gratuitous agreement with the other speaker, and "
             "filler that dilutes the argument. Preserve the meaning, the stance, and all "
             "substantive content. Reply with the rewritten utterance only."});

    lib.set({"annotator_system",
             "You are the persuasiveness annotation agent for a dialogue about: {TASK}\n"
             "After each round of conversation, assess the extent of perspective shift in "
             "each speaker and assign a score ranging from 0 to 1. Scores measure the "
             "cumulative shift of the speaker's viewpoint across all rounds so far, not "
             "just the latest round: 0 means the speaker still holds their initial "
             "position, 1 means the speaker is fully persuaded.\n"
             "Scoring examples:\n"
             "Example 1 - a round where both speakers restate their initial positions and "
             "nobody concedes anything:\n"
             "PERSUADER: 0.0\n"
             "PERSUADEE: 0.0\n"
             "Example 2 - a round where the persuader abandons their own goal and fully "
             "adopts the persuadee's view:\n"
             "PERSUADER: 1.0\n"
             "PERSUADEE: 0.0\n"
             "Reply with exactly one line per speaker:\n"
             "<SPEAKER>: <decimal between 0 and 1>"});

    lib.set({"regulator_system",
             "You are the global regulation agent for a dialogue about: {TASK}\n"
             "After each round you are asked two questions in turn.\n"
             "First question: verify that every change in a speaker's perspective is "
             "logically influenced by the preceding utterance and that the new utterances "
             "avoid repeating persuasive strategies already used in this conversation. "
             "Reply with exactly one line: OK if the round passes, or REVISE: <feedback "
             "for the speakers> if it does not.\n"
             "Second question: once a round passes, decide whether the dialogue should "
             "conclude. Reply CONTINUE if a productive exchange is still likely, "
             "TERMINATE: agreement if the speakers have reached a mutual agreement, or "
             "TERMINATE: stagnation if no new information is likely to be introduced "
             "next.\n"
             "{MULTI_PARTY_CLAUSE}"});

    lib.set({"postprocessor_system",
             "You are the postprocessing agent for a completed dialogue about: {TASK}\n"
             "Rewrite the dialogue as a whole: remove redundant language, improve the "
             "logical flow, and enhance language diversity, while preserving each "
             "speaker's stance and the outcome of the conversation. You may merge "
             "adjacent rounds when that improves the flow; rounds may only be merged, "
             "never split or reordered.\n"
             "Reply in exactly this envelope:\n"
             "MAPPING: <old rounds>-><new round>; ... (for example MAPPING: 1,2->1; 3->2)\n"
             "followed by one line per utterance, in order:\n"
             "ROUND <k> <SPEAKER>: <rewritten text>"});

    lib.set({"monitor_check",
             "New utterance from {SPEAKER}:\n{UTTERANCE}\n"
             "Run the three checks in order and reply with the verdict line."});

    lib.set({"monitor_store", "Reviewed utterance from {SPEAKER} accepted:\n{UTTERANCE}"});

    lib.set({"monitor_revision_request",
             "Your last utterance was flagged by the quality monitor.\n{FEEDBACK}\n"
             "Revise your utterance accordingly. Reply with the revised utterance only."});

    lib.set({"regulator_revision_request",
             "The global regulation agent reviewed this round and requests a revision: "
             "{FEEDBACK}\n"
             "Revise your last utterance accordingly. Reply with the revised utterance "
             "only."});

    lib.set({"annotate_round",
             "Round {ROUND}:\n{ROUND_TRANSCRIPT}\n"
             "Assign each speaker a cumulative persuasiveness score, one line per "
             "speaker."});

    lib.set({"regulator_phase1",
             "Round {ROUND}:\n{ROUND_TRANSCRIPT}\nScores:\n{SCORES}\n"
             "First question: does this round pass? Reply OK or REVISE: <feedback>."});

    lib.set({"regulator_accept", "Accepted round {ROUND}:\n{ROUND_TRANSCRIPT}"});

    lib.set({"regulator_phase2",
             "Second question: should the dialogue conclude? Reply CONTINUE or "
             "TERMINATE: <agreement|stagnation>."});

    lib.set({"postprocess_request",
             "Here is the full dialogue:\n{DIALOGUE_SO_FAR}\n"
             "Rewrite it and reply in the envelope format."});

    return lib;
}

}  // namespace

const PromptLibrary& PromptLibrary::builtin() {
    static const PromptLibrary lib = make_builtin();
    return lib;
}

void PromptLibrary::set(PromptTemplate tmpl) {
    templates_[tmpl.template_id] = std::move(tmpl);
}

void PromptLibrary::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open template file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string body = buf.str();
    // Files end with the editor's trailing newline; the template body does not.
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    set({std::filesystem::path(path).stem().string(), std::move(body)});
}

void PromptLibrary::load_directory(const std::string& path) {
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            load_file(entry.path().string());
        }
    }
}

const PromptTemplate& PromptLibrary::get(const std::string& template_id) const {
    auto it = templates_.find(template_id);
    if (it == templates_.end()) {
        throw std::runtime_error("unknown template_id: " + template_id);
    }
    return it->second;
}

std::string render_system_prompt(const PromptLibrary& prompts, AgentRole role,
                                 const PersuasionTask& task, const RunConfig& cfg,
                                 std::optional<SpeakerId> speaker) {
    std::map<std::string, std::string> bindings{{"TASK", task.behavior}};

    switch (role) {
        case AgentRole::Generator: {
            if (!speaker) throw std::invalid_argument("generator prompt needs a speaker");
            const bool persuader = speaker->role == Role::Persuader;
            bindings["SPEAKER"] = speaker_label(*speaker);
            bindings["ROLE_GOAL"] = persuader ? task.persuader_goal : task.persuadee_goal;
            std::string directive;
            if (auto it = cfg.strategy_directive.find(*speaker);
                it != cfg.strategy_directive.end()) {
                directive = strategy_directive_sentence(it->second) + "\n";
            }
            bindings["STRATEGY_DIRECTIVE"] = directive;
            std::string note;
            if (persuader && cfg.n_persuaders > 1) {
                note = "You are one of " + std::to_string(cfg.n_persuaders) +
                       " persuaders working toward the same goal. Build on your fellow "
                       "persuaders' arguments without repeating or contradicting them.\n";
            }
            bindings["MULTI_PARTY_NOTE"] = note;
            return render_template(
                prompts.get(persuader ? "persuader_system" : "persuadee_system"), bindings);
        }
        case AgentRole::Monitor:
            return render_template(prompts.get("monitor_system"), bindings);
        case AgentRole::Refiner:
            return render_template(prompts.get("refiner_system"), bindings);
        case AgentRole::Annotator:
            return render_template(prompts.get("annotator_system"), bindings);
        case AgentRole::Regulator: {
            std::string clause;
            if (cfg.n_persuaders > 1) {
                clause = "Multiple persuaders argue on the same side in this dialogue. " +
                         kSameSideClause +
                         ": treat a round as failing when same-side speakers repeat or "
                         "contradict one another.";
            }
            bindings["MULTI_PARTY_CLAUSE"] = clause;
            return render_template(prompts.get("regulator_system"), bindings);
        }
        case AgentRole::Postprocessor:
            return render_template(prompts.get("postprocessor_system"), bindings);
    }
    throw std::invalid_argument("unknown agent role");
}

}  // namespace pf
