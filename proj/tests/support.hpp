#pragma once
// Shared fixtures for the test suites: a canonical task, a deterministic
// two-round script, and random-value generators for property tests.

#include <random>
#include <string>
#include <vector>

#include "pf/core.hpp"
#include "pf/provider.hpp"

namespace pftest {

inline pf::PersuasionTask flowers_task() {
    pf::PersuasionTask task;
    task.task_id = "cemetery-flowers-001";
    task.behavior = "pick flowers in a cemetery";
    task.norm_class = pf::NormClass::Taboo;
    task.persuader_goal =
        "convince the persuadee that picking a few flowers in the cemetery is acceptable";
    task.persuadee_goal =
        "resist, and persuade the persuader to leave the flowers untouched";
    return task;
}

inline pf::RunConfig base_config() {
    pf::RunConfig cfg;
    cfg.seed = 42;
    return cfg;
}

// Script for a two-party, two-round dialogue that ends in agreement.
// Call order per utterance is generate, monitor, refine; per round it is
// annotate, regulator phase 1, regulator phase 2.
inline std::vector<std::string> two_round_agreement_script() {
    return {
        // round 1, persuader
        "I understand this is unusual, but a few flowers from the cemetery would make a "
        "beautiful bouquet, and nobody would miss them.",
        "PASS",
        "A few flowers from the cemetery would make a beautiful bouquet, and nobody would "
        "miss them.",
        // round 1, persuadee
        "Those flowers were placed for the departed; taking them disrespects the families "
        "who left them.",
        "PASS",
        "Those flowers were placed for the departed; taking them disrespects the families "
        "who left them.",
        // round 1 judging
        "PERSUADER: 0.0\nPERSUADEE: 0.0",
        "OK",
        "CONTINUE",
        // round 2, persuader
        "What if we only took flowers from the paths, never from the graves? The "
        "groundskeeper trims those anyway.",
        "PASS",
        "What if we only took flowers from the paths, never from the graves? The "
        "groundskeeper trims those anyway.",
        // round 2, persuadee
        "Flowers from the paths that the groundskeeper would trim anyway seem fair; I can "
        "agree to that.",
        "PASS",
        "Flowers from the paths that the groundskeeper would trim anyway seem fair; I can "
        "agree to that.",
        // round 2 judging
        "PERSUADER: 0.2\nPERSUADEE: 0.7",
        "OK",
        "TERMINATE: agreement",
    };
}

inline std::string random_text(std::mt19937_64& rng) {
    static const std::vector<std::string> words = {
        "flowers", "cemetery", "respect",  "balance", "nature", "tradition",
        "honest",  "caf\xc3\xa9", "safety", "freedom", "urgent", "evidence"};
    std::uniform_int_distribution<std::size_t> count(1, 8);
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    std::string out;
    const std::size_t n = count(rng);
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += words[pick(rng)];
    }
    return out;
}

// A structurally valid random dialogue (validate_dialogue() == empty).
inline pf::Dialogue random_dialogue(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> n_persuaders_dist(1, 3);
    std::uniform_int_distribution<std::size_t> rounds_dist(1, 4);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    std::uniform_int_distribution<int> kind_dist(0, 2);

    pf::Dialogue d;
    d.task = flowers_task();
    d.task.task_id = "task-" + std::to_string(rng() % 100000);
    d.task.behavior = random_text(rng);
    d.task.persuader_goal = random_text(rng);
    d.task.persuadee_goal = random_text(rng);
    d.task.norm_class = static_cast<pf::NormClass>(rng() % 3);

    d.config_snapshot = base_config();
    d.config_snapshot.n_persuaders = n_persuaders_dist(rng);
    d.config_snapshot.seed = static_cast<long long>(rng() % 100000);
    d.seed = d.config_snapshot.seed;
    d.termination = static_cast<pf::Termination>(rng() % 3);

    std::vector<pf::SpeakerId> speakers;
    for (std::size_t i = 0; i < d.config_snapshot.n_persuaders; ++i) {
        speakers.push_back(pf::SpeakerId{pf::Role::Persuader, i});
    }
    speakers.push_back(pf::SpeakerId{pf::Role::Persuadee, 0});

    if (coin(rng)) {
        d.config_snapshot.strategy_directive[speakers.front()] =
            coin(rng) ? pf::StrategyDirective::Logical : pf::StrategyDirective::Emotional;
        d.strategy_directive[speakers.front()] = pf::strategy_directive_sentence(
            d.config_snapshot.strategy_directive[speakers.front()]);
    }

    const std::size_t n_rounds = rounds_dist(rng);
    for (std::size_t r = 0; r < n_rounds; ++r) {
        pf::Round round;
        for (const pf::SpeakerId& s : speakers) {
            pf::Utterance u;
            u.speaker = s;
            u.raw_text = random_text(rng);
            u.refined_text = random_text(rng);
            u.final_text = u.refined_text;
            u.revision_count = rng() % (d.config_snapshot.revision_cap + 1);
            const std::size_t n_flags = rng() % 3;
            for (std::size_t f = 0; f < n_flags; ++f) {
                u.monitor_flags.push_back(pf::MonitorIssue{
                    static_cast<pf::MonitorIssueKind>(kind_dist(rng)), random_text(rng)});
            }
            round.utterances.push_back(std::move(u));
            round.scores[s] = score(rng);
        }
        d.rounds.push_back(std::move(round));
    }
    return d;
}

// True when the request was addressed to a generator agent (its system
// prompt opens with the speaker introduction).
inline bool is_generator_request(const pf::ChatRequest& r) {
    return !r.messages.empty() &&
           r.messages.front().role == pf::MessageRole::System &&
           r.messages.front().content.rfind("You are PERSUADE", 0) == 0;
}

}  // namespace pftest

#include "pf/postprocess.hpp"

namespace pftest {

// A uniformly random valid merge mapping over old_count rounds.
inline pf::RoundMapping random_mapping(std::mt19937_64& rng, std::size_t old_count) {
    pf::RoundMapping mapping;
    pf::RoundMapping::Entry entry;
    std::uniform_int_distribution<int> coin(0, 1);
    for (std::size_t i = 1; i <= old_count; ++i) {
        if (!entry.old_rounds.empty() && coin(rng)) {
            entry.new_round = mapping.entries.size() + 1;
            mapping.entries.push_back(entry);
            entry = {};
        }
        entry.old_rounds.push_back(i);
    }
    entry.new_round = mapping.entries.size() + 1;
    mapping.entries.push_back(entry);
    return mapping;
}

inline std::vector<std::map<pf::SpeakerId, double>> random_scores(std::mt19937_64& rng,
                                                                  std::size_t rounds,
                                                                  std::size_t speakers) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::map<pf::SpeakerId, double>> out(rounds);
    for (auto& round : out) {
        for (std::size_t s = 0; s + 1 < speakers; ++s) {
            round[pf::SpeakerId{pf::Role::Persuader, s}] = unit(rng);
        }
        round[pf::SpeakerId{pf::Role::Persuadee, 0}] = unit(rng);
    }
    return out;
}

// Brute-force oracle for label remapping: each merged round takes the
// max-index (last) constituent's scores.
inline std::vector<std::map<pf::SpeakerId, double>> oracle_remap(
    const std::vector<std::map<pf::SpeakerId, double>>& scores,
    const pf::RoundMapping& mapping) {
    std::vector<std::map<pf::SpeakerId, double>> out;
    for (const auto& entry : mapping.entries) {
        std::size_t last = 0;
        for (std::size_t old_round : entry.old_rounds) last = std::max(last, old_round);
        out.push_back(scores[last - 1]);
    }
    return out;
}

// A postprocessor reply that keeps the dialogue exactly as it stands.
inline std::string identity_envelope(const pf::Dialogue& d) {
    std::string reply = "MAPPING: ";
    for (std::size_t r = 1; r <= d.rounds.size(); ++r) {
        if (r > 1) reply += "; ";
        reply += std::to_string(r) + "->" + std::to_string(r);
    }
    reply += "\n";
    for (std::size_t r = 0; r < d.rounds.size(); ++r) {
        for (const pf::Utterance& u : d.rounds[r].utterances) {
            reply += "ROUND " + std::to_string(r + 1) + " " + pf::speaker_label(u.speaker) +
                     ": " + u.refined_text + "\n";
        }
    }
    return reply;
}

}  // namespace pftest
